#include "ipdl/tactics.hpp"

#include <algorithm>
#include <functional>

namespace ipdl {

namespace {

using Kind = Protocol::Kind;

std::set<std::string> free_names(const Protocol& p) {
  ChannelUse u = free_channels(p);
  std::set<std::string> out;
  for (const auto* s : {&u.reads, &u.writes})
    for (const auto& c : *s) out.insert(c.name);
  return out;
}

const Protocol& sub(const Protocol& p, const Path& path) {
  const Protocol* cur = &p;
  for (int k : path) cur = &cur->body[static_cast<size_t>(k)];
  return *cur;
}

Protocol replace_at(const Protocol& p, const Path& path, size_t k, Protocol by) {
  if (k == path.size()) return by;
  Protocol out = p;
  auto& child = out.body[static_cast<size_t>(path[k])];
  child = replace_at(child, path, k + 1, std::move(by));
  return out;
}

Path plus(Path p, int k, size_t times = 1) {
  for (size_t i = 0; i < times; ++i) p.push_back(k);
  return p;
}

/// Rewrites the right-hand side of a judgment one kernel step at a time.
class Builder {
 public:
  Builder(const Kernel& k, ExactJudgment j) : k_(k), j_(std::move(j)) {}
  const Kernel& kernel() const { return k_; }
  const Protocol& cur() const { return j_.rhs(); }
  const ExactJudgment& judgment() const { return j_; }
  void set(ExactJudgment j) { j_ = std::move(j); }
  void step(Rule r, const Path& p, const RuleArgs& a = {}) { j_ = k_.step(j_, r, p, a); }

 private:
  const Kernel& k_;
  ExactJudgment j_;
};

// ---------------------------------------------------------------- prenex layout

size_t binder_count(const Protocol& p) {
  size_t m = 0;
  for (const Protocol* q = &p; q->kind == Kind::New; q = &q->body[0]) ++m;
  return m;
}

std::vector<ChannelDecl> binders(const Protocol& p) {
  std::vector<ChannelDecl> out;
  for (const Protocol* q = &p; q->kind == Kind::New; q = &q->body[0])
    out.push_back({q->channel.name, q->type, q->bound});
  return out;
}

Path body_path(const Protocol& p) { return Path(binder_count(p), 0); }

/// Elements of the right-nested list at the body; a lone 0 gives none.
std::vector<const Protocol*> components(const Protocol& p) {
  std::vector<const Protocol*> out;
  const Protocol* q = &sub(p, body_path(p));
  for (; q->kind == Kind::Par; q = &q->body[1]) out.push_back(&q->body[0]);
  if (q->kind != Kind::Zero || !out.empty()) out.push_back(q);
  return out;
}

Path comp_path(const Protocol& p, size_t k) {
  size_t n = components(p).size();
  Path path = plus(body_path(p), 1, k);
  if (k + 1 < n) path.push_back(0);
  return path;
}

std::string comp_key(const Protocol& c) {
  if (c.kind == Kind::Family) return c.channel.name;
  if (c.kind == Kind::Assign || c.kind == Kind::AssignValue) return channel_key(c.channel);
  return "";
}

std::optional<size_t> find_comp(const Protocol& p, const std::string& name) {
  auto cs = components(p);
  for (size_t k = 0; k < cs.size(); ++k)
    if ((cs[k]->kind == Kind::Assign || cs[k]->kind == Kind::Family) && cs[k]->channel.name == name) return k;
  return std::nullopt;
}

size_t need_comp(const Protocol& p, const std::string& name) {
  auto k = find_comp(p, name);
  if (!k) fail("TACTIC.not-found", "no component assigns '" + name + "'");
  return *k;
}

std::optional<size_t> find_binder(const Protocol& p, const std::string& name) {
  auto bs = binders(p);
  for (size_t k = 0; k < bs.size(); ++k)
    if (bs[k].name == name) return k;
  return std::nullopt;
}

std::set<std::string> avoid_names(const Kernel& k, const Protocol& p) {
  auto s = all_channel_names(p);
  for (const auto& d : k.theory().delta.decls()) s.insert(d.name);
  return s;
}

// ---------------------------------------------------------------- massaging

/// Pulls every binder of the subterm at `path` to its top.
void lift(Builder& b, Path path) {
  const Protocol& s = sub(b.cur(), path);
  if (s.kind == Kind::New) return lift(b, plus(path, 0));
  if (s.kind != Kind::Par) return;
  lift(b, plus(path, 0));
  lift(b, plus(path, 1));
  while (true) {
    const Protocol& q = sub(b.cur(), path);
    if (q.body[1].kind == Kind::New) {
      const std::string name = q.body[1].channel.name;
      if (free_names(q.body[0]).count(name)) {
        RuleArgs a;
        a.channel = fresh_name(name, avoid_names(b.kernel(), b.cur()));
        b.step(Rule::Alpha, plus(path, 1), a);
      }
      b.step(Rule::CompNew, path);
      path.push_back(0);
      continue;
    }
    if (q.body[0].kind == Kind::New) {
      b.step(Rule::ParComm, path);
      continue;
    }
    break;
  }
}

void right_nest(Builder& b, Path path) {
  while (sub(b.cur(), path).kind == Kind::Par) {
    while (sub(b.cur(), path).body[0].kind == Kind::Par) b.step(Rule::ParAssoc, path);
    path.push_back(1);
  }
}

void drop_zeros(Builder& b) {
  while (true) {
    Path bp = body_path(b.cur());
    auto cs = components(b.cur());
    size_t n = cs.size();
    if (n <= 1) return;
    size_t k = 0;
    while (k < n && cs[k]->kind != Kind::Zero) ++k;
    if (k == n) return;
    if (k + 1 < n) {
      b.step(Rule::ParComm, plus(bp, 1, k));
      b.step(Rule::ParUnit, plus(bp, 1, k));
    } else {
      b.step(Rule::ParUnit, plus(bp, 1, n - 2));
    }
  }
}

/// Exchanges list elements k and k+1.
void swap_comps(Builder& b, size_t k) {
  size_t n = components(b.cur()).size();
  Path pos = plus(body_path(b.cur()), 1, k);
  if (k + 2 == n) {
    b.step(Rule::ParComm, pos);
    return;
  }
  b.step(Rule::ParAssocInv, pos);
  b.step(Rule::ParComm, plus(pos, 0));
  b.step(Rule::ParAssoc, pos);
}

void move_comp(Builder& b, size_t from, size_t to) {
  for (; from > to; --from) swap_comps(b, from - 1);
  for (; from < to; ++from) swap_comps(b, from);
}

void move_binder_innermost(Builder& b, size_t k) {
  size_t m = binder_count(b.cur());
  for (; k + 1 < m; ++k) b.step(Rule::NewExch, Path(k, 0));
}

void normalize_builder(Builder& b) {
  lift(b, {});
  Path bp = body_path(b.cur());
  right_nest(b, bp);
  drop_zeros(b);
  for (bool changed = true; changed;) {
    changed = false;
    auto cs = components(b.cur());
    for (size_t k = 0; k + 1 < cs.size(); ++k) {
      if (comp_key(*cs[k + 1]) < comp_key(*cs[k])) {
        swap_comps(b, k);
        cs = components(b.cur());
        changed = true;
      }
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    auto bs = binders(b.cur());
    for (size_t k = 0; k + 1 < bs.size(); ++k) {
      if (bs[k + 1].name < bs[k].name) {
        b.step(Rule::NewExch, Path(k, 0));
        bs = binders(b.cur());
        changed = true;
      }
    }
  }
}

/// Removes the internal channel bound at binder k together with its writer.
void remove_internal(Builder& b, size_t binder) {
  const std::string name = binders(b.cur())[binder].name;
  move_binder_innermost(b, binder);
  move_comp(b, need_comp(b.cur(), name), components(b.cur()).size() - 1);
  size_t n = components(b.cur()).size();
  Path inner = Path(binder_count(b.cur()) - 1, 0);
  for (size_t t = 0; t + 1 < n; ++t) b.step(Rule::CompNewInv, plus(inner, 1, t));
  if (n >= 2) {
    b.step(Rule::Absorb, plus(inner, 1, n - 2));
  } else {
    b.step(Rule::ParUnitInv, inner);
    b.step(Rule::ParComm, inner);
    b.step(Rule::Absorb, inner);
  }
  normalize_builder(b);
}

std::vector<std::string> readers(const Protocol& p, const std::string& name) {
  std::vector<std::string> out;
  for (const auto* c : components(p))
    if (count_reads(*c, name) > 0) out.push_back(comp_key(*c));
  return out;
}

/// Drops internal channels nobody reads.
void collect_garbage(Builder& b) {
  for (bool again = true; again;) {
    again = false;
    auto bs = binders(b.cur());
    for (size_t k = 0; k < bs.size(); ++k) {
      if (readers(b.cur(), bs[k].name).empty() && find_comp(b.cur(), bs[k].name)) {
        remove_internal(b, k);
        again = true;
        break;
      }
    }
  }
}

size_t leaf_count(const Protocol& p) {
  return p.kind == Kind::Par ? leaf_count(p.body[0]) + leaf_count(p.body[1]) : 1;
}

/// Turns the right-nested list at `path` into the ‖-tree shape of `shape`.
void reshape(Builder& b, const Path& path, const Protocol& shape) {
  if (shape.kind != Kind::Par) return;
  size_t a = leaf_count(shape.body[0]);
  for (size_t t = 0; t + 1 < a; ++t) b.step(Rule::ParAssocInv, path);
  right_nest(b, plus(path, 0));
  reshape(b, plus(path, 0), shape.body[0]);
  reshape(b, plus(path, 1), shape.body[1]);
}

/// Brings the named components to the front in order and groups them into
/// the shape of `shape`; returns the path of the group.
Path group(Builder& b, const std::vector<std::string>& names, const Protocol& shape) {
  for (size_t k = 0; k < names.size(); ++k) move_comp(b, need_comp(b.cur(), names[k]), k);
  size_t n = components(b.cur()).size(), m = names.size();
  Path bp = body_path(b.cur());
  if (m == n) {
    reshape(b, bp, shape);
    return bp;
  }
  for (size_t t = 0; t + 1 < m; ++t) b.step(Rule::ParAssocInv, bp);
  right_nest(b, plus(bp, 0));
  reshape(b, plus(bp, 0), shape);
  return plus(bp, 0);
}

Path focus_pair(Builder& b, const std::string& x, const std::string& y) {
  need_comp(b.cur(), x);
  need_comp(b.cur(), y);
  return group(b, {x, y}, Protocol::par(Protocol::zero(), Protocol::zero()));
}

// ---------------------------------------------------------------- matching

using Binding = std::map<std::string, ChannelRef>;

bool bind_ref(Binding& m, const ChannelRef& pat, const ChannelRef& tgt) {
  if (pat.index && !tgt.index) return false;
  ChannelRef to = pat.index ? ChannelRef(tgt.name) : tgt;
  auto it = m.find(pat.name);
  if (it != m.end()) return it->second == to;
  for (const auto& [from, t] : m)
    if (t == to) return false;
  m[pat.name] = to;
  return true;
}

bool match_reaction(const Reaction& p, const Reaction& t, Binding& m) {
  if (p.kind != t.kind || p.body.size() != t.body.size()) return false;
  if (p.kind == Reaction::Kind::Read) return bind_ref(m, p.channel, t.channel);
  if (p.kind == Reaction::Kind::Samp && p.name != t.name) return false;
  for (size_t k = 0; k < p.body.size(); ++k)
    if (!match_reaction(p.body[k], t.body[k], m)) return false;
  return true;
}

bool match_component(const Protocol& p, const Protocol& t, Binding& m) {
  if (p.kind == Kind::Assign && t.kind == Kind::Assign)
    return bind_ref(m, p.channel, t.channel) && match_reaction(p.reaction, t.reaction, m);
  if (p.kind == Kind::Family && t.kind == Kind::Family) {
    if (!cost_equal(*p.bound, *t.bound)) return false;
    return bind_ref(m, ChannelRef(p.channel.name, SizeExpr::index(p.index_var)),
                    ChannelRef(t.channel.name, SizeExpr::index(t.index_var))) &&
           match_reaction(p.reaction, t.reaction, m);
  }
  return false;
}

void leaves(const Protocol& p, std::vector<const Protocol*>& out) {
  if (p.kind == Kind::Par) {
    leaves(p.body[0], out);
    leaves(p.body[1], out);
  } else if (p.kind != Kind::Zero) {
    out.push_back(&p);
  }
}

/// Assigns pattern leaves to distinct targets; first success in candidate order.
std::optional<std::pair<std::vector<size_t>, Binding>> assign_leaves(
    const std::vector<const Protocol*>& pats, const std::vector<const Protocol*>& targets,
    const std::function<bool(const Binding&)>& accept) {
  std::vector<size_t> chosen;
  std::vector<bool> used(targets.size(), false);
  std::optional<std::pair<std::vector<size_t>, Binding>> found;
  std::function<void(size_t, const Binding&)> go = [&](size_t k, const Binding& m) {
    if (found) return;
    if (k == pats.size()) {
      if (accept(m)) found = std::make_pair(chosen, m);
      return;
    }
    for (size_t t = 0; t < targets.size() && !found; ++t) {
      if (used[t]) continue;
      Binding next = m;
      if (!match_component(*pats[k], *targets[t], next)) continue;
      used[t] = true;
      chosen.push_back(t);
      go(k + 1, next);
      chosen.pop_back();
      used[t] = false;
    }
  };
  go(0, {});
  return found;
}

ChannelRenaming restrict(const Binding& m, const ChannelContext& delta) {
  ChannelRenaming phi;
  for (const auto& d : delta.decls()) {
    auto it = m.find(d.name);
    if (it != m.end()) phi.set(d.name, it->second);
  }
  return phi;
}

// ---------------------------------------------------------------- tactics

std::set<std::string> index_vars(const Reaction& r) {
  std::set<std::string> out;
  for (const auto& ref : reaction_read_refs(r))
    if (ref.index)
      for (const auto& v : cost_vars(*ref.index))
        if (v.kind == CostVar::Kind::Index) out.insert(v.name);
  return out;
}

/// Reaction written for a family member, re-expressed in the family's index.
Reaction for_component(const Protocol& c, Reaction r) {
  if (c.kind != Kind::Family) return r;
  auto vs = index_vars(r);
  if (vs.size() == 1 && *vs.begin() != c.index_var)
    r = substitute_index(r, *vs.begin(), SizeExpr::index(c.index_var));
  return r;
}

Tactic as_seq(const std::vector<Tactic>& ts) {
  Tactic t;
  t.kind = Tactic::Kind::Seq;
  t.body = ts;
  return t;
}

bool atomic(const Expr& e) {
  return e.kind == Expr::Kind::Var || e.kind == Expr::Kind::Unit || e.kind == Expr::Kind::True ||
         e.kind == Expr::Kind::False;
}

/// Bind associativity and left unit on atomic values; the shape a substituted
/// read leaves behind.
Reaction flatten(const Reaction& r) {
  using RK = Reaction::Kind;
  if (r.kind == RK::If) return Reaction::cond(r.expr, flatten(r.body[0]), flatten(r.body[1]));
  if (r.kind != RK::Bind) return r;
  Reaction first = flatten(r.body[0]);
  Reaction rest = flatten(r.body[1]);
  if (first.kind == RK::Ret && atomic(first.expr)) return flatten(substitute_var(rest, r.name, first.expr));
  if (first.kind == RK::Bind) {
    std::string y = first.name;
    Reaction tail = first.body[1];
    std::set<std::string> avoid = free_vars(rest);
    if (avoid.count(y) && y != r.name) {
      for (const auto& v : free_vars(tail)) avoid.insert(v);
      std::string z = fresh_name(y, avoid);
      tail = substitute_var(tail, y, Expr::var(z, first.type));
      y = z;
    }
    return flatten(Reaction::bind(y, first.type, first.body[0], Reaction::bind(r.name, r.type, tail, rest)));
  }
  return Reaction::bind(r.name, r.type, first, rest);
}

void run_pair_rule(Builder& b, Rule rule, const Tactic& t) {
  Path at = focus_pair(b, t.source, t.target);
  RuleArgs a;
  a.channel = t.source;
  b.step(rule, at, a);
  if (rule != Rule::Subst) return;
  for (int side : {0, 1}) {
    Path cp = plus(at, side);
    const Protocol& c = sub(b.cur(), cp);
    if (c.channel.name != t.target) continue;
    Reaction flat = flatten(c.reaction);
    if (flat == c.reaction) continue;
    RuleArgs e;
    e.reaction = flat;
    b.step(Rule::ReactEq, cp, e);
  }
}

void run_fold(Builder& b, const Tactic& t) {
  auto bi = find_binder(b.cur(), t.source);
  if (!bi) fail("FOLD-BIND.shape", "'" + t.source + "' is not an internal channel");
  need_comp(b.cur(), t.source);
  need_comp(b.cur(), t.target);
  for (const auto& r : readers(b.cur(), t.source))
    if (r != comp_key(*components(b.cur())[need_comp(b.cur(), t.target)]))
      fail("FOLD-BIND.single-read", "'" + t.source + "' is also read by " + r);
  move_binder_innermost(b, *bi);
  size_t n = components(b.cur()).size();
  move_comp(b, need_comp(b.cur(), t.source), n - 1);
  move_comp(b, need_comp(b.cur(), t.target), n - 1);
  Path inner = Path(binder_count(b.cur()) - 1, 0);
  for (size_t k = 0; k + 2 < n; ++k) b.step(Rule::CompNewInv, plus(inner, 1, k));
  b.step(Rule::FoldBind, plus(inner, 1, n - 2));
}

void run_absorb(Builder& b, const Tactic& t) {
  size_t k = need_comp(b.cur(), t.source);
  if (auto bi = find_binder(b.cur(), t.source)) {
    auto rs = readers(b.cur(), t.source);
    rs.erase(std::remove(rs.begin(), rs.end(), comp_key(*components(b.cur())[k])), rs.end());
    if (!rs.empty()) fail("ABSORB.outputs", "'" + t.source + "' is still read by " + rs.front());
    remove_internal(b, *bi);
    return;
  }
  size_t n = components(b.cur()).size();
  move_comp(b, k, n - 1);
  Path bp = body_path(b.cur());
  if (n >= 2) {
    b.step(Rule::Absorb, plus(bp, 1, n - 2));
  } else {
    b.step(Rule::ParUnitInv, bp);
    b.step(Rule::ParComm, bp);
    b.step(Rule::Absorb, bp);
  }
}

void run_add_internal(Builder& b, const Tactic& t) {
  const ChannelDecl& d = t.decl;
  if (avoid_names(b.kernel(), b.cur()).count(d.name))
    fail("TACTIC.name-clash", "channel name '" + d.name + "' is already in use");
  Protocol q = d.bound ? Protocol::new_family(d.name, *d.bound, d.type,
                                              Protocol::family(d.name, t.index_var, *d.bound, t.reaction))
                       : Protocol::new_channel(ChannelRef(d.name), d.type, Protocol::assign(ChannelRef(d.name), t.reaction));
  RuleArgs a;
  a.protocol = q;
  b.step(Rule::AbsorbInv, body_path(b.cur()), a);
}

/// Like group, for a pattern `new b1 in ... new bm in body`: the goal binders
/// matched by b1..bm are moved innermost in order and lowered over the other
/// components; returns the path of the outermost lowered binder.
Path group_scoped(Builder& b, const std::vector<std::string>& names, const std::vector<ChannelDecl>& pbinders,
                  const Binding& m, const Protocol& body) {
  std::set<std::string> inside(names.begin(), names.end());
  for (const auto& d : pbinders) {
    const std::string& g = m.at(d.name).name;
    for (const auto& r : readers(b.cur(), g))
      if (!inside.count(r)) fail("AXIOM.scope", "'" + g + "' is also read by " + r);
    move_binder_innermost(b, *find_binder(b.cur(), g));
  }
  size_t n = components(b.cur()).size();
  for (const auto& nm : names) move_comp(b, need_comp(b.cur(), nm), n - 1);
  size_t u = n - names.size(), nb = binder_count(b.cur()), k = pbinders.size();
  for (size_t s = 0; s < k; ++s) {
    Path at = Path(nb - 1 - s, 0);
    for (size_t t = 0; t < u; ++t) b.step(Rule::CompNewInv, plus(at, 1, t));
  }
  Path top = plus(Path(nb - k, 0), 1, u);
  reshape(b, plus(top, 0, k), body);
  return top;
}

void run_use_assumption(Builder& b, const Tactic& t, const std::string& generic) {
  const Kernel& k = b.kernel();
  const Axiom& ax = k.theory().axiom(t.axiom);
  if (ax.approximate) fail("AXIOM.approximate", "'" + ax.name + "' is an indistinguishability assumption");
  const Protocol& pattern = t.reverse ? ax.rhs : ax.lhs;
  // Leading binders of the pattern are matched against binders of the goal.
  std::vector<ChannelDecl> pbinders;
  const Protocol* pbody = &pattern;
  while (pbody->kind == Kind::New) {
    pbinders.push_back({pbody->channel.name, pbody->type, pbody->bound});
    pbody = &pbody->body[0];
  }
  if (all_channel_names(*pbody) != free_names(*pbody))
    fail("AXIOM.shape", "internal channels of an assumption must be bound outermost");
  if (!pbinders.empty() && !generic.empty())
    fail("AXIOM.shape", "induction applies assumptions without internal channels");
  std::vector<const Protocol*> pats;
  leaves(*pbody, pats);

  std::vector<std::string> names;
  for (const auto& ref : t.at) {
    if (!generic.empty()) {
      if (!ref.index || !cost_equal(*ref.index, SizeExpr::index(generic)))
        fail("IND.out-of-range", channel_key(ref) + " is not the member at the induction index " + generic);
    }
    need_comp(b.cur(), ref.name);
    names.push_back(ref.name);
  }
  if (names.empty())
    for (const auto* c : components(b.cur())) names.push_back(c->channel.name);

  std::vector<Protocol> targets;
  for (const auto& nm : names) {
    const Protocol& c = *components(b.cur())[need_comp(b.cur(), nm)];
    if (generic.empty()) {
      targets.push_back(c);
    } else {
      if (c.kind != Kind::Family) fail("IND.shape", "'" + nm + "' is not a family");
      targets.push_back(Protocol::assign(ChannelRef(nm, SizeExpr::index(generic)),
                                         substitute_index(c.reaction, c.index_var, SizeExpr::index(generic))));
    }
  }
  std::vector<const Protocol*> tptr;
  for (const auto& x : targets) tptr.push_back(&x);
  auto internal_ok = [&](const Binding& m) {
    for (const auto& d : pbinders) {
      auto it = m.find(d.name);
      if (it == m.end() || it->second.index) return false;
      auto bi = find_binder(b.cur(), it->second.name);
      if (!bi || !(binders(b.cur())[*bi].type == d.type) || binders(b.cur())[*bi].bound.has_value() != d.bound.has_value())
        return false;
    }
    return true;
  };
  auto found = assign_leaves(pats, tptr, internal_ok);
  if (!found)
    fail(generic.empty() ? "AXIOM.mismatch" : "IND.mismatch",
         "'" + ax.name + "' does not match the selected components");
  std::vector<std::string> order;
  for (size_t i : found->first) order.push_back(names[i]);
  Path at = pbinders.empty() ? group(b, order, pattern) : group_scoped(b, order, pbinders, found->second, *pbody);
  RuleArgs a;
  a.axiom = ax.name;
  a.reverse = t.reverse;
  a.phi = restrict(found->second, ax.delta);
  if (generic.empty()) {
    b.step(Rule::Axiom, at, a);
  } else {
    a.index_var = generic;
    b.step(Rule::FamilyInd, at, a);
  }
}

void run_exact_builder(Builder& b, const Tactic& t);

void run_change(Builder& b, const Tactic& t) {
  const Kernel& k = b.kernel();
  size_t idx = need_comp(b.cur(), t.source);
  Path cp = comp_path(b.cur(), idx);
  const Protocol& comp = sub(b.cur(), cp);
  RuleArgs a;
  a.reaction = for_component(comp, t.reaction);
  if (!t.in_clause) {
    b.step(Rule::ReactEq, cp, a);
    return;
  }
  Protocol changed = comp;
  changed.reaction = a.reaction;
  Protocol p = b.cur();
  Protocol p2 = replace_at(p, cp, 0, changed);
  Tactic inner = as_seq(t.body);
  if (t.sym) {
    ExactJudgment d = run_exact(k, k.refl(p2), inner);
    ExactJudgment gap = close_gap(k, p, d.rhs());
    b.set(k.trans(b.judgment(), k.trans(gap, k.sym(d))));
  } else {
    ExactJudgment d = run_exact(k, b.judgment(), inner);
    b.set(k.trans(d, close_gap(k, d.rhs(), p2)));
  }
}

void run_exact_builder(Builder& b, const Tactic& t) {
  normalize_builder(b);
  switch (t.kind) {
    case Tactic::Kind::Seq:
      for (const auto& s : t.body) b.set(run_exact(b.kernel(), b.judgment(), s));
      return;
    case Tactic::Kind::Subst: run_pair_rule(b, Rule::Subst, t); break;
    case Tactic::Kind::Drop: run_pair_rule(b, Rule::Drop, t); break;
    case Tactic::Kind::Fold: run_fold(b, t); break;
    case Tactic::Kind::Absorb: run_absorb(b, t); break;
    case Tactic::Kind::AddInternal: run_add_internal(b, t); break;
    case Tactic::Kind::Change: run_change(b, t); break;
    case Tactic::Kind::UseAssumption: run_use_assumption(b, t, ""); break;
    case Tactic::Kind::Induction: {
      if (t.index_var.empty()) fail("IND.fresh", "induction needs a variable");
      for (const auto& s : t.body) {
        if (s.kind == Tactic::Kind::Seq && s.body.empty()) continue;
        if (s.kind != Tactic::Kind::UseAssumption)
          fail("IND.shape", "the induction step must be a use of an exact assumption");
        run_use_assumption(b, s, t.index_var);
      }
      break;
    }
    case Tactic::Kind::UseApprox:
      fail("TACTIC.approx-in-exact", "approximate assumptions cannot be used inside an exact rewrite");
  }
  normalize_builder(b);
}

// ---------------------------------------------------------------- approximate step

struct ApproxPlan {
  ExactJudgment bridge;
  ApproxCong cong;
};

ApproxPlan plan_approx(const Kernel& k, const ExactJudgment& from, const std::string& name) {
  Builder b(k, from);
  normalize_builder(b);
  const Axiom& ax = k.theory().axiom(name);
  if (!ax.approximate) fail("AXIOM.exact", "'" + name + "' is an exact assumption, not an indistinguishability one");

  std::vector<ChannelDecl> lbind = binders(ax.lhs);
  const Protocol& lbody = sub(ax.lhs, body_path(ax.lhs));
  std::vector<const Protocol*> pats;
  leaves(lbody, pats);
  for (const auto* p : pats)
    if (p->kind != Kind::Assign && p->kind != Kind::Family)
      fail("APPROX.no-match", "the left side of '" + name + "' is not in prenex form");

  const Protocol cur = b.cur();
  std::vector<ChannelDecl> cbind = binders(cur);
  auto comps = components(cur);
  auto accept = [&](const Binding& m) {
    for (const auto& d : lbind) {
      auto it = m.find(d.name);
      if (it == m.end() || it->second.index) return false;
      bool ok = false;
      for (const auto& c : cbind)
        ok |= c.name == it->second.name && c.type == d.type && c.bound.has_value() == d.bound.has_value();
      if (!ok) return false;
    }
    return true;
  };
  auto found = assign_leaves(pats, comps, accept);
  if (!found) fail("APPROX.no-match", "the left side of '" + name + "' does not occur in the current protocol");
  const Binding& m = found->second;

  // Target: remaining binders around ((φ(L) ‖ Q1) ‖ Q2) ...
  ChannelRenaming all;
  for (const auto& [from_name, to] : m) all.set(from_name, to);
  Protocol lphi = rename_channels_partial(all, lbody);
  for (size_t i = lbind.size(); i-- > 0;) {
    const ChannelDecl& d = lbind[i];
    const std::string to = m.at(d.name).name;
    lphi = d.bound ? Protocol::new_family(to, *d.bound, d.type, lphi) : Protocol::new_channel(ChannelRef(to), d.type, lphi);
  }
  std::set<size_t> taken(found->first.begin(), found->first.end());
  std::set<std::string> lifted;
  for (const auto& d : lbind) lifted.insert(m.at(d.name).name);
  std::vector<Protocol> qs;
  for (size_t i = 0; i < comps.size(); ++i)
    if (!taken.count(i)) qs.push_back(*comps[i]);
  std::vector<ChannelDecl> rest;
  for (const auto& d : cbind)
    if (!lifted.count(d.name)) rest.push_back(d);
  Protocol target = lphi;
  for (const auto& q : qs) target = Protocol::par(target, q);
  for (size_t i = rest.size(); i-- > 0;) {
    const ChannelDecl& d = rest[i];
    target = d.bound ? Protocol::new_family(d.name, *d.bound, d.type, target)
                     : Protocol::new_channel(ChannelRef(d.name), d.type, target);
  }
  Builder bt(k, k.refl(target));
  normalize_builder(bt);
  if (!alpha_eq(bt.cur(), cur))
    fail("APPROX.no-match", "the context of '" + name + "' cannot be separated from the current protocol");
  ExactJudgment bridge = k.trans(b.judgment(), k.sym(bt.judgment()));

  // Assembly: embed, compose each sibling, close the binders.
  ChannelContext ctx = k.context_at(cur, body_path(cur));
  ApproxCong j = k.embed(k.approx_axiom(name), restrict(m, ax.delta), ctx);
  auto add_input = [&](const ChannelItem& c) {
    if (!set_covers(j.type().inputs, c) && !set_covers(j.type().outputs, c)) j = k.input_unused(j, c);
  };
  for (const auto& q : qs) {
    ChannelUse u = infer_protocol(k.theory().sig, ctx, q);
    for (const auto& w : u.writes) add_input(w);
    for (const auto& r : u.reads) add_input(r);
    j = k.cong_comp(j, q);
  }
  for (size_t i = rest.size(); i-- > 0;) j = k.cong_new(j, rest[i]);
  for (const auto& c : k.theory().type.inputs) add_input(c);
  return {bridge, j};
}

}  // namespace

ExactJudgment normalize(const Kernel& k, const ExactJudgment& j) {
  Builder b(k, j);
  normalize_builder(b);
  return b.judgment();
}

ExactJudgment close_gap(const Kernel& k, const Protocol& a, const Protocol& b) {
  Builder ba(k, k.refl(a)), bb(k, k.refl(b));
  normalize_builder(ba);
  normalize_builder(bb);
  collect_garbage(ba);
  collect_garbage(bb);
  const Protocol pa = ba.cur();
  const Protocol pb = bb.cur();
  auto mismatch = [&](const std::string& why) {
    fail("CLOSE.mismatch", why + "\n  left:  " + to_string(pa) + "\n  right: " + to_string(pb));
  };
  auto ba_names = binders(pa), bb_names = binders(pb);
  if (ba_names.size() != bb_names.size()) mismatch("the two sides have different internal channels");
  for (size_t i = 0; i < ba_names.size(); ++i)
    if (ba_names[i].name != bb_names[i].name || !(ba_names[i].type == bb_names[i].type))
      mismatch("internal channel '" + ba_names[i].name + "' has no counterpart");
  auto ca = components(pa), cb = components(pb);
  if (ca.size() != cb.size()) mismatch("the two sides assign different channels");
  for (size_t i = 0; i < ca.size(); ++i)
    if (comp_key(*ca[i]) != comp_key(*cb[i]) || ca[i]->kind != cb[i]->kind)
      mismatch("'" + comp_key(*ca[i]) + "' has no counterpart");
  for (size_t i = 0; i < ca.size(); ++i) {
    const Protocol x = *components(ba.cur())[i];
    const Protocol& y = *cb[i];
    if (alpha_eq(x, y)) continue;
    if (x.kind != Kind::Assign && x.kind != Kind::Family) mismatch("'" + comp_key(x) + "' differs");
    if (x.kind == Kind::Family && !cost_equal(*x.bound, *y.bound)) mismatch("'" + comp_key(x) + "' has another bound");
    RuleArgs args;
    args.reaction = y.reaction;
    if (x.kind == Kind::Family && x.index_var != y.index_var)
      args.reaction = substitute_index(y.reaction, y.index_var, SizeExpr::index(x.index_var));
    try {
      ba.step(Rule::ReactEq, comp_path(ba.cur(), i), args);
    } catch (const Error& e) {
      mismatch("'" + comp_key(x) + "' differs: " + e.what());
    }
  }
  try {
    return k.trans(ba.judgment(), k.sym(bb.judgment()));
  } catch (const Error& e) {
    mismatch(e.what());
  }
  return ba.judgment();
}

ExactJudgment run_exact(const Kernel& k, const ExactJudgment& j, const Tactic& t) {
  try {
    Builder b(k, j);
    run_exact_builder(b, t);
    return b.judgment();
  } catch (Error& e) {
    if (t.span) e.set_span(*t.span);
    throw;
  }
}

ProofState::ProofState(const Kernel& k, const Protocol& start)
    : kernel_(&k), start_(start), tail_(normalize(k, k.refl(start))) {}

ApproxJudgment ProofState::judgment() const {
  ApproxJudgment s = kernel_->strict(tail_);
  return prefix_ ? kernel_->trans(*prefix_, s) : s;
}

ProofState run_tactic(const ProofState& s, const Tactic& t) {
  const Kernel& k = *s.kernel_;
  ProofState out = s;
  try {
    if (t.kind == Tactic::Kind::Seq) {
      for (const auto& c : t.body) out = run_tactic(out, c);
      return out;
    }
    if (t.kind == Tactic::Kind::UseApprox) {
      ApproxPlan plan = plan_approx(k, s.tail_, t.axiom);
      ApproxJudgment step = k.trans(k.strict(plan.bridge), k.approx(plan.cong));
      out.prefix_ = s.prefix_ ? k.trans(*s.prefix_, step) : step;
      out.tail_ = normalize(k, k.refl(plan.cong.rhs()));
      out.log_.push_back(describe(t) + ": context +" +
                         to_string(cost_normalize(plan.cong.context(), k.theory().sig.var_order())));
      return out;
    }
    size_t before = s.tail_.steps();
    out.tail_ = run_exact(k, s.tail_, t);
    out.log_.push_back(describe(t) + ": " + std::to_string(out.tail_.steps() - before) + " kernel steps");
    return out;
  } catch (Error& e) {
    if (t.span) e.set_span(*t.span);
    throw;
  }
}

CostExpr tactic_context_norm(const ProofState& s, const std::string& k) {
  const Kernel& kern = s.kernel();
  return cost_normalize(plan_approx(kern, kern.refl(s.current()), k).cong.context(), kern.theory().sig.var_order());
}

ApproxJudgment close_proof(const ProofState& left, const ProofState& right) {
  const Kernel& k = left.kernel();
  ExactJudgment gap = close_gap(k, left.current(), right.current());
  return k.trans(left.judgment(), k.trans(k.strict(gap), k.sym(right.judgment())));
}

std::string describe(const Tactic& t) {
  switch (t.kind) {
    case Tactic::Kind::Seq: {
      std::string s;
      for (const auto& c : t.body) s += (s.empty() ? "" : " then ") + describe(c);
      return s.empty() ? "skip" : s;
    }
    case Tactic::Kind::Subst: return "subst " + t.source + " into " + t.target;
    case Tactic::Kind::Drop: return "drop " + t.source + " from " + t.target;
    case Tactic::Kind::Fold: return "fold " + t.source + " into " + t.target;
    case Tactic::Kind::Absorb: return "absorb " + t.source;
    case Tactic::Kind::AddInternal: return "add internal " + t.decl.name;
    case Tactic::Kind::Change:
      return std::string(t.sym ? "sym from " : "") + "change " + t.source + (t.in_clause ? " in currentProtocol(" + describe(as_seq(t.body)) + ")" : "");
    case Tactic::Kind::UseAssumption: return "use assumption " + t.axiom;
    case Tactic::Kind::Induction: return "induction with variable " + t.index_var + " (" + describe(as_seq(t.body)) + ")";
    case Tactic::Kind::UseApprox: return "use approx assumption " + t.axiom;
  }
  return "";
}

}  // namespace ipdl
