#include "ipdl/ast.hpp"

#include <algorithm>
#include <functional>

#include "ipdl/error.hpp"

namespace ipdl {

// ---------------------------------------------------------------- types

DataType DataType::constant(std::string name) {
  DataType t;
  t.kind_ = Kind::Const;
  t.name_ = std::move(name);
  return t;
}

DataType DataType::boolean() {
  DataType t;
  t.kind_ = Kind::Bool;
  return t;
}

DataType DataType::product(DataType a, DataType b) {
  DataType t;
  t.kind_ = Kind::Product;
  t.parts_ = std::make_shared<const std::pair<DataType, DataType>>(std::move(a), std::move(b));
  return t;
}

bool operator==(const DataType& a, const DataType& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case DataType::Kind::Const: return a.name_ == b.name_;
    case DataType::Kind::Product: return a.first() == b.first() && a.second() == b.second();
    default: return true;
  }
}

bool operator<(const DataType& a, const DataType& b) { return to_string(a) < to_string(b); }

// ---------------------------------------------------------------- channels

static std::string index_text(const SizeExpr& e) { return to_string(e); }

bool operator==(const ChannelRef& a, const ChannelRef& b) {
  if (a.name != b.name || a.index.has_value() != b.index.has_value()) return false;
  return !a.index || cost_equal(*a.index, *b.index);
}

std::string channel_key(const ChannelRef& c) {
  if (!c.index) return c.name;
  return c.name + "[" + index_text(cost_normalize(*c.index)) + "]";
}

bool operator<(const ChannelRef& a, const ChannelRef& b) { return channel_key(a) < channel_key(b); }

ChannelItem ChannelItem::of(const ChannelRef& c) {
  if (c.index) return member(c.name, cost_normalize(*c.index));
  return scalar(c.name);
}

std::string to_string(const ChannelItem& c) {
  if (c.family) return "fam " + c.name + "[i < " + index_text(*c.family) + "]";
  if (c.index) return "chn " + c.name + "[" + index_text(*c.index) + "]";
  return "chn " + c.name;
}

static std::string item_key(const ChannelItem& c) {
  std::string k = c.name;
  if (c.index) k += "#m" + index_text(cost_normalize(*c.index));
  if (c.family) k += "#f" + index_text(cost_normalize(*c.family));
  return k;
}

bool operator==(const ChannelItem& a, const ChannelItem& b) { return item_key(a) == item_key(b); }
bool operator<(const ChannelItem& a, const ChannelItem& b) { return item_key(a) < item_key(b); }

bool item_covers(const ChannelItem& a, const ChannelItem& b) {
  if (a.name != b.name) return false;
  if (a.family) return true;
  if (b.family) return false;
  if (a.index.has_value() != b.index.has_value()) return false;
  return !a.index || cost_equal(*a.index, *b.index);
}

bool set_covers(const ChannelSet& s, const ChannelItem& b) {
  return std::any_of(s.begin(), s.end(), [&](const ChannelItem& a) { return item_covers(a, b); });
}

bool items_may_overlap(const ChannelItem& a, const ChannelItem& b) {
  if (a.name != b.name) return false;
  if (a.index && b.index) {
    auto ca = cost_constant(*a.index), cb = cost_constant(*b.index);
    if (ca && cb && *ca != *cb) return false;
  }
  return true;
}

void ChannelContext::add(ChannelDecl d) {
  if (find(d.name)) fail("TYPE.duplicate-channel", "channel '" + d.name + "' declared twice");
  decls_.push_back(std::move(d));
}

void ChannelContext::add_or_shadow(ChannelDecl d) {
  for (auto& e : decls_)
    if (e.name == d.name) {
      e = std::move(d);
      return;
    }
  decls_.push_back(std::move(d));
}

const ChannelDecl* ChannelContext::find(const std::string& name) const {
  for (const auto& d : decls_)
    if (d.name == name) return &d;
  return nullptr;
}

bool Signature::has_type(const std::string& t) const {
  return std::find(types.begin(), types.end(), t) != types.end();
}

bool Signature::has_param(const std::string& p) const {
  return std::find(params.begin(), params.end(), p) != params.end();
}

VarOrder Signature::var_order() const {
  VarOrder o;
  for (const auto& p : params) o.push_back(CostVar::param(p));
  for (const auto& t : types) o.push_back(CostVar::type_size(t));
  return o;
}

// ---------------------------------------------------------------- constructors

Expr Expr::var(std::string x, DataType t) {
  Expr e;
  e.kind = Kind::Var;
  e.name = std::move(x);
  e.type = std::move(t);
  return e;
}

Expr Expr::boolean(bool b) {
  Expr e;
  e.kind = b ? Kind::True : Kind::False;
  return e;
}

Expr Expr::app(std::string f, DataType from, DataType to, Expr arg) {
  Expr e;
  e.kind = Kind::App;
  e.name = std::move(f);
  e.type = std::move(from);
  e.type2 = std::move(to);
  e.args.push_back(std::move(arg));
  return e;
}

Expr Expr::pair(Expr a, Expr b) {
  Expr e;
  e.kind = Kind::Pair;
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  return e;
}

Expr Expr::fst(DataType l, DataType r, Expr arg) {
  Expr e;
  e.kind = Kind::Fst;
  e.type = std::move(l);
  e.type2 = std::move(r);
  e.args.push_back(std::move(arg));
  return e;
}

Expr Expr::snd(DataType l, DataType r, Expr arg) {
  Expr e = fst(std::move(l), std::move(r), std::move(arg));
  e.kind = Kind::Snd;
  return e;
}

Expr Expr::lit(Value v, DataType t) {
  Expr e;
  e.kind = Kind::Lit;
  e.value = std::move(v);
  e.type = std::move(t);
  return e;
}

Reaction Reaction::ret(Expr e) {
  Reaction r;
  r.kind = Kind::Ret;
  r.expr = std::move(e);
  return r;
}

Reaction Reaction::samp(std::string d, DataType from, DataType to, Expr e) {
  Reaction r;
  r.kind = Kind::Samp;
  r.name = std::move(d);
  r.type = std::move(from);
  r.type2 = std::move(to);
  r.expr = std::move(e);
  return r;
}

Reaction Reaction::read(ChannelRef c, DataType t) {
  Reaction r;
  r.kind = Kind::Read;
  if (c.index) c.index = cost_normalize(*c.index);
  r.channel = std::move(c);
  r.type = std::move(t);
  return r;
}

Reaction Reaction::cond(Expr e, Reaction then_r, Reaction else_r) {
  Reaction r;
  r.kind = Kind::If;
  r.expr = std::move(e);
  r.body.push_back(std::move(then_r));
  r.body.push_back(std::move(else_r));
  return r;
}

Reaction Reaction::bind(std::string x, DataType t, Reaction first, Reaction rest) {
  Reaction r;
  r.kind = Kind::Bind;
  r.name = std::move(x);
  r.type = std::move(t);
  r.body.push_back(std::move(first));
  r.body.push_back(std::move(rest));
  return r;
}

Reaction Reaction::val(Value v, DataType t) {
  Reaction r;
  r.kind = Kind::Val;
  r.value = std::move(v);
  r.type = std::move(t);
  return r;
}

Protocol Protocol::assign(ChannelRef o, Reaction r) {
  Protocol p;
  p.kind = Kind::Assign;
  if (o.index) o.index = cost_normalize(*o.index);
  p.channel = std::move(o);
  p.reaction = std::move(r);
  return p;
}

Protocol Protocol::assign_value(ChannelRef o, Value v, DataType t) {
  Protocol p;
  p.kind = Kind::AssignValue;
  p.channel = std::move(o);
  p.value = std::move(v);
  p.type = std::move(t);
  return p;
}

Protocol Protocol::par(Protocol a, Protocol b) {
  Protocol p;
  p.kind = Kind::Par;
  p.body.push_back(std::move(a));
  p.body.push_back(std::move(b));
  return p;
}

Protocol Protocol::new_channel(ChannelRef c, DataType t, Protocol body) {
  Protocol p;
  p.kind = Kind::New;
  if (c.index) c.index = cost_normalize(*c.index);
  p.channel = std::move(c);
  p.type = std::move(t);
  p.body.push_back(std::move(body));
  return p;
}

Protocol Protocol::new_family(std::string name, SizeExpr bound, DataType t, Protocol body) {
  Protocol p = new_channel(ChannelRef(std::move(name)), std::move(t), std::move(body));
  p.bound = cost_normalize(bound);
  return p;
}

Protocol Protocol::family(std::string name, std::string i, SizeExpr bound, Reaction r) {
  Protocol p;
  p.kind = Kind::Family;
  p.channel = ChannelRef(std::move(name), SizeExpr::index(i));
  p.index_var = std::move(i);
  p.bound = cost_normalize(bound);
  p.reaction = std::move(r);
  return p;
}

Protocol par_all(const std::vector<Protocol>& ps) {
  if (ps.empty()) return Protocol::zero();
  Protocol acc = ps.back();
  for (size_t i = ps.size() - 1; i-- > 0;) acc = Protocol::par(ps[i], acc);
  return acc;
}

// ---------------------------------------------------------------- channel use

static void collect_read_refs(const Reaction& r, std::vector<ChannelRef>& out) {
  if (r.kind == Reaction::Kind::Read) out.push_back(r.channel);
  for (const auto& b : r.body) collect_read_refs(b, out);
}

std::vector<ChannelRef> reaction_read_refs(const Reaction& r) {
  std::vector<ChannelRef> out;
  collect_read_refs(r, out);
  return out;
}

ChannelSet reaction_reads(const Reaction& r) {
  ChannelSet s;
  for (const auto& c : reaction_read_refs(r)) s.insert(ChannelItem::of(c));
  return s;
}

static ChannelItem lift_item(const ChannelRef& c, const std::string& ivar, const SizeExpr& bound) {
  if (!c.index) return ChannelItem::scalar(c.name);
  if (cost_vars(*c.index).count(CostVar::index(ivar))) return ChannelItem::whole(c.name, bound);
  return ChannelItem::member(c.name, cost_normalize(*c.index));
}

static bool binder_matches(const Protocol& binder, const ChannelItem& item) {
  if (binder.channel.name != item.name) return false;
  if (binder.bound || !binder.channel.index) return true;
  return item.index && cost_equal(*item.index, *binder.channel.index);
}

ChannelUse free_channels(const Protocol& p) {
  ChannelUse u;
  switch (p.kind) {
    case Protocol::Kind::Zero: break;
    case Protocol::Kind::Assign:
      u.reads = reaction_reads(p.reaction);
      u.writes.insert(ChannelItem::of(p.channel));
      break;
    case Protocol::Kind::AssignValue: u.writes.insert(ChannelItem::of(p.channel)); break;
    case Protocol::Kind::Family:
      for (const auto& c : reaction_read_refs(p.reaction)) u.reads.insert(lift_item(c, p.index_var, *p.bound));
      u.writes.insert(ChannelItem::whole(p.channel.name, *p.bound));
      break;
    case Protocol::Kind::Par: {
      auto a = free_channels(p.body[0]);
      auto b = free_channels(p.body[1]);
      u.writes = a.writes;
      u.writes.insert(b.writes.begin(), b.writes.end());
      for (const auto* s : {&a.reads, &b.reads})
        for (const auto& r : *s) u.reads.insert(r);
      break;
    }
    case Protocol::Kind::New: {
      auto inner = free_channels(p.body[0]);
      for (const auto& r : inner.reads)
        if (!binder_matches(p, r)) u.reads.insert(r);
      for (const auto& w : inner.writes)
        if (!binder_matches(p, w)) u.writes.insert(w);
      break;
    }
  }
  if (p.kind == Protocol::Kind::Assign || p.kind == Protocol::Kind::Family || p.kind == Protocol::Kind::Par) {
    ChannelSet reads;
    for (const auto& r : u.reads)
      if (!set_covers(u.writes, r)) reads.insert(r);
    u.reads = std::move(reads);
  }
  return u;
}

static void collect_names(const Reaction& r, std::set<std::string>& out) {
  if (r.kind == Reaction::Kind::Read) out.insert(r.channel.name);
  for (const auto& b : r.body) collect_names(b, out);
}

std::set<std::string> all_channel_names(const Protocol& p) {
  std::set<std::string> out;
  std::function<void(const Protocol&)> go = [&](const Protocol& q) {
    if (q.kind != Protocol::Kind::Zero && q.kind != Protocol::Kind::Par) out.insert(q.channel.name);
    if (q.kind == Protocol::Kind::Assign || q.kind == Protocol::Kind::Family) collect_names(q.reaction, out);
    for (const auto& b : q.body) go(b);
  };
  go(p);
  return out;
}

// ---------------------------------------------------------------- renaming

void ChannelRenaming::set(const std::string& from, ChannelRef to) { map_[from] = std::move(to); }

const ChannelRef* ChannelRenaming::find(const std::string& from) const {
  auto it = map_.find(from);
  return it == map_.end() ? nullptr : &it->second;
}

bool ChannelRenaming::injective() const {
  std::set<std::string> seen;
  for (const auto& [k, v] : map_)
    if (!seen.insert(channel_key(v)).second) return false;
  return true;
}

ChannelRenaming ChannelRenaming::inverse() const {
  ChannelRenaming inv;
  for (const auto& [k, v] : map_) {
    if (v.index) fail("RENAME.not-invertible", "renaming onto a family member cannot be inverted");
    inv.set(v.name, ChannelRef(k));
  }
  return inv;
}

ChannelRenaming ChannelRenaming::identity(const std::set<std::string>& names) {
  ChannelRenaming r;
  for (const auto& n : names) r.set(n, ChannelRef(n));
  return r;
}

ChannelRef rename_ref(const ChannelRenaming& phi, const ChannelRef& c) {
  const ChannelRef* t = phi.find(c.name);
  if (!t) return c;
  if (c.index) {
    if (t->index) fail("RENAME.index-clash", "cannot rename family member " + channel_key(c) + " onto member " + channel_key(*t));
    return ChannelRef(t->name, *c.index);
  }
  return *t;
}

ChannelItem rename_item(const ChannelRenaming& phi, const ChannelItem& c) {
  const ChannelRef* t = phi.find(c.name);
  if (!t) return c;
  if (c.index || c.family) {
    if (t->index) fail("RENAME.index-clash", "cannot rename family " + c.name + " onto a member");
    ChannelItem r = c;
    r.name = t->name;
    return r;
  }
  return ChannelItem::of(*t);
}

namespace {

// Renames refs named `from` (optionally only the member with index `only`) to `to`.
struct ExactRename {
  std::string from;
  std::optional<SizeExpr> only;
  std::string to;

  bool hits(const ChannelRef& c) const {
    if (c.name != from) return false;
    if (!only) return true;
    return c.index && cost_equal(*c.index, *only);
  }
};

Reaction rename_reaction(const Reaction& r, const std::function<ChannelRef(const ChannelRef&)>& f) {
  Reaction out = r;
  if (r.kind == Reaction::Kind::Read) out.channel = f(r.channel);
  for (auto& b : out.body) b = rename_reaction(b, f);
  return out;
}

bool binder_hides(const Protocol& binder, const ChannelRef& c) {
  if (binder.channel.name != c.name) return false;
  if (binder.bound || !binder.channel.index) return true;
  return c.index && cost_equal(*c.index, *binder.channel.index);
}

Protocol rename_exact(const Protocol& p, const ExactRename& rn) {
  auto fix = [&](const ChannelRef& c) {
    if (!rn.hits(c)) return c;
    ChannelRef out = c;
    out.name = rn.to;
    return out;
  };
  Protocol out = p;
  switch (p.kind) {
    case Protocol::Kind::Assign:
    case Protocol::Kind::Family:
      out.channel = fix(p.channel);
      out.reaction = rename_reaction(p.reaction, fix);
      break;
    case Protocol::Kind::AssignValue: out.channel = fix(p.channel); break;
    case Protocol::Kind::Par:
      out.body[0] = rename_exact(p.body[0], rn);
      out.body[1] = rename_exact(p.body[1], rn);
      break;
    case Protocol::Kind::New: {
      bool shadows = p.channel.name == rn.from &&
                     (p.bound || !p.channel.index || (rn.only && cost_equal(*p.channel.index, *rn.only)));
      if (!shadows) out.body[0] = rename_exact(p.body[0], rn);
      break;
    }
    case Protocol::Kind::Zero: break;
  }
  return out;
}

struct Renamer {
  const ChannelRenaming& phi;
  bool strict;
  std::set<std::string> avoid;

  ChannelRef apply(const ChannelRef& c, const std::vector<const Protocol*>& scope) const {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (binder_hides(**it, c)) return c;
    if (!phi.find(c.name)) {
      if (strict) fail("RENAME.undefined-channel", "renaming is undefined on free channel " + channel_key(c));
      return c;
    }
    return rename_ref(phi, c);
  }

  Protocol go(const Protocol& p, std::vector<const Protocol*>& scope) {
    Protocol out = p;
    auto f = [&](const ChannelRef& c) { return apply(c, scope); };
    switch (p.kind) {
      case Protocol::Kind::Zero: break;
      case Protocol::Kind::Assign:
      case Protocol::Kind::Family:
        out.channel = f(p.channel);
        out.reaction = rename_reaction(p.reaction, f);
        break;
      case Protocol::Kind::AssignValue: out.channel = f(p.channel); break;
      case Protocol::Kind::Par:
        out.body[0] = go(p.body[0], scope);
        out.body[1] = go(p.body[1], scope);
        break;
      case Protocol::Kind::New: {
        // Capture: a renamed free channel would land on this binder's name.
        bool captures = false;
        for (const auto& [from, to] : phi.entries())
          if (to.name == p.channel.name && from != p.channel.name) captures = true;
        Protocol binder = p;
        if (captures) {
          std::string fresh = fresh_name(p.channel.name, avoid);
          avoid.insert(fresh);
          ExactRename rn{p.channel.name, p.bound ? std::nullopt : p.channel.index, fresh};
          binder.body[0] = rename_exact(p.body[0], rn);
          binder.channel.name = fresh;
        }
        scope.push_back(&binder);
        Protocol inner = go(binder.body[0], scope);
        scope.pop_back();
        out = binder;
        out.body[0] = std::move(inner);
        break;
      }
    }
    return out;
  }
};

}  // namespace

Protocol rename_channels(const ChannelRenaming& phi, const Protocol& p) {
  Renamer r{phi, true, all_channel_names(p)};
  for (const auto& [k, v] : phi.entries()) r.avoid.insert(v.name);
  std::vector<const Protocol*> scope;
  return r.go(p, scope);
}

Protocol rename_channels_partial(const ChannelRenaming& phi, const Protocol& p) {
  Renamer r{phi, false, all_channel_names(p)};
  for (const auto& [k, v] : phi.entries()) r.avoid.insert(v.name);
  std::vector<const Protocol*> scope;
  return r.go(p, scope);
}

Reaction rename_channels_partial(const ChannelRenaming& phi, const Reaction& r) {
  return rename_reaction(r, [&](const ChannelRef& c) { return rename_ref(phi, c); });
}

// ---------------------------------------------------------------- indices

static ChannelRef subst_ref(const ChannelRef& c, const std::string& i, const SizeExpr& e) {
  if (!c.index) return c;
  return ChannelRef(c.name, cost_normalize(cost_substitute(*c.index, CostVar::index(i), e)));
}

Reaction substitute_index(const Reaction& r, const std::string& i, const SizeExpr& e) {
  return rename_reaction(r, [&](const ChannelRef& c) { return subst_ref(c, i, e); });
}

Protocol substitute_index(const Protocol& p, const std::string& i, const SizeExpr& e) {
  Protocol out = p;
  switch (p.kind) {
    case Protocol::Kind::Family:
      if (p.index_var == i) return out;
      out.bound = cost_normalize(cost_substitute(*p.bound, CostVar::index(i), e));
      out.reaction = substitute_index(p.reaction, i, e);
      break;
    case Protocol::Kind::Assign:
      out.channel = subst_ref(p.channel, i, e);
      out.reaction = substitute_index(p.reaction, i, e);
      break;
    case Protocol::Kind::AssignValue:
    case Protocol::Kind::New:
      out.channel = subst_ref(p.channel, i, e);
      if (p.bound) out.bound = cost_normalize(cost_substitute(*p.bound, CostVar::index(i), e));
      break;
    default: break;
  }
  for (auto& b : out.body) b = substitute_index(b, i, e);
  return out;
}

// ---------------------------------------------------------------- desugaring

namespace {

Natural eval_bound(const SizeExpr& b, const CostEnv& env) {
  try {
    return cost_eval(b, env);
  } catch (const Error& err) {
    fail("DESUGAR.unbound-parameter", std::string("cannot instantiate family bound: ") + err.what());
  }
}

ChannelRef concrete_ref(const ChannelRef& c, const CostEnv& env) {
  if (!c.index) return c;
  return ChannelRef(c.name, SizeExpr(eval_bound(*c.index, env)));
}

Reaction concrete_reaction(const Reaction& r, const CostEnv& env) {
  return rename_reaction(r, [&](const ChannelRef& c) { return concrete_ref(c, env); });
}

}  // namespace

Protocol desugar_families(const Protocol& p, const CostEnv& env) {
  switch (p.kind) {
    case Protocol::Kind::Zero: return p;
    case Protocol::Kind::Assign: {
      Protocol out = p;
      out.channel = concrete_ref(p.channel, env);
      out.reaction = concrete_reaction(p.reaction, env);
      return out;
    }
    case Protocol::Kind::AssignValue: {
      Protocol out = p;
      out.channel = concrete_ref(p.channel, env);
      return out;
    }
    case Protocol::Kind::Par:
      return Protocol::par(desugar_families(p.body[0], env), desugar_families(p.body[1], env));
    case Protocol::Kind::New: {
      Protocol body = desugar_families(p.body[0], env);
      if (!p.bound) {
        Protocol out = p;
        out.channel = concrete_ref(p.channel, env);
        out.body[0] = std::move(body);
        return out;
      }
      Natural k = eval_bound(*p.bound, env);
      for (Natural j = k; j > 0; --j)
        body = Protocol::new_channel(ChannelRef(p.channel.name, SizeExpr(Natural(j - 1))), p.type, std::move(body));
      return body;
    }
    case Protocol::Kind::Family: {
      Natural k = eval_bound(*p.bound, env);
      // Members are composed right-nested and closed by 0.
      Protocol acc = Protocol::zero();
      for (Natural j = k; j > 0; --j) {
        SizeExpr idx(Natural(j - 1));
        Reaction member = concrete_reaction(substitute_index(p.reaction, p.index_var, idx), env);
        acc = Protocol::par(Protocol::assign(ChannelRef(p.channel.name, idx), std::move(member)), std::move(acc));
      }
      return acc;
    }
  }
  return p;
}

// ---------------------------------------------------------------- variables

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  if (e.kind == Expr::Kind::Var) out.insert(e.name);
  for (const auto& a : e.args) {
    auto s = free_vars(a);
    out.insert(s.begin(), s.end());
  }
  return out;
}

std::set<std::string> free_vars(const Reaction& r) {
  std::set<std::string> out;
  switch (r.kind) {
    case Reaction::Kind::Ret:
    case Reaction::Kind::Samp: out = free_vars(r.expr); break;
    case Reaction::Kind::If: {
      out = free_vars(r.expr);
      for (const auto& b : r.body) {
        auto s = free_vars(b);
        out.insert(s.begin(), s.end());
      }
      break;
    }
    case Reaction::Kind::Bind: {
      out = free_vars(r.body[0]);
      auto s = free_vars(r.body[1]);
      s.erase(r.name);
      out.insert(s.begin(), s.end());
      break;
    }
    default: break;
  }
  return out;
}

static void bound_vars(const Reaction& r, std::set<std::string>& out) {
  if (r.kind == Reaction::Kind::Bind) out.insert(r.name);
  for (const auto& b : r.body) bound_vars(b, out);
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string cand = base + "'";
  while (avoid.count(cand)) cand += "'";
  return cand;
}

Expr substitute_var(const Expr& e, const std::string& x, const Expr& by) {
  if (e.kind == Expr::Kind::Var) return e.name == x ? by : e;
  Expr out = e;
  for (auto& a : out.args) a = substitute_var(a, x, by);
  return out;
}

Reaction substitute_var(const Reaction& r, const std::string& x, const Expr& by) {
  Reaction out = r;
  switch (r.kind) {
    case Reaction::Kind::Ret:
    case Reaction::Kind::Samp: out.expr = substitute_var(r.expr, x, by); break;
    case Reaction::Kind::If:
      out.expr = substitute_var(r.expr, x, by);
      out.body[0] = substitute_var(r.body[0], x, by);
      out.body[1] = substitute_var(r.body[1], x, by);
      break;
    case Reaction::Kind::Bind: {
      out.body[0] = substitute_var(r.body[0], x, by);
      if (r.name == x) break;
      auto fv = free_vars(by);
      if (fv.count(r.name)) {
        std::set<std::string> avoid = fv;
        auto rest = free_vars(r.body[1]);
        avoid.insert(rest.begin(), rest.end());
        bound_vars(r, avoid);
        avoid.insert(x);
        std::string y = fresh_name(r.name, avoid);
        out.name = y;
        out.body[1] = substitute_var(r.body[1], r.name, Expr::var(y, r.type));
        out.body[1] = substitute_var(out.body[1], x, by);
      } else {
        out.body[1] = substitute_var(r.body[1], x, by);
      }
      break;
    }
    default: break;
  }
  return out;
}

Reaction replace_reads(const Reaction& r, const ChannelRef& c, const Reaction& by) {
  if (r.kind == Reaction::Kind::Read) return r.channel == c ? by : r;
  Reaction out = r;
  if (r.kind == Reaction::Kind::Bind) {
    out.body[0] = replace_reads(r.body[0], c, by);
    auto fv = free_vars(by);
    if (fv.count(r.name)) {
      std::set<std::string> avoid = fv;
      bound_vars(r, avoid);
      auto rest = free_vars(r.body[1]);
      avoid.insert(rest.begin(), rest.end());
      std::string y = fresh_name(r.name, avoid);
      out.name = y;
      out.body[1] = replace_reads(substitute_var(r.body[1], r.name, Expr::var(y, r.type)), c, by);
    } else {
      out.body[1] = replace_reads(r.body[1], c, by);
    }
    return out;
  }
  for (auto& b : out.body) b = replace_reads(b, c, by);
  return out;
}

size_t count_reads(const Reaction& r, const std::string& channel_name) {
  size_t n = r.kind == Reaction::Kind::Read && r.channel.name == channel_name ? 1 : 0;
  for (const auto& b : r.body) n += count_reads(b, channel_name);
  return n;
}

size_t count_reads(const Protocol& p, const std::string& channel_name) {
  size_t n = 0;
  if (p.kind == Protocol::Kind::Assign || p.kind == Protocol::Kind::Family) n += count_reads(p.reaction, channel_name);
  if (p.kind == Protocol::Kind::New && p.channel.name == channel_name && (p.bound || !p.channel.index)) return 0;
  for (const auto& b : p.body) n += count_reads(b, channel_name);
  return n;
}

bool contains_samp(const Reaction& r) {
  if (r.kind == Reaction::Kind::Samp) return true;
  return std::any_of(r.body.begin(), r.body.end(), contains_samp);
}

// ---------------------------------------------------------------- alpha equivalence

namespace {

struct AlphaEnv {
  std::vector<std::pair<std::string, std::string>> vars;  // (left, right), innermost last
  std::vector<std::pair<const Protocol*, const Protocol*>> chans;
  int index_depth = 0;
};

bool vars_match(const std::string& a, const std::string& b, const AlphaEnv& env) {
  for (auto it = env.vars.rbegin(); it != env.vars.rend(); ++it) {
    bool ha = it->first == a, hb = it->second == b;
    if (ha || hb) return ha && hb;
  }
  return a == b;
}

bool expr_alpha(const Expr& a, const Expr& b, const AlphaEnv& env) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Var: return a.type == b.type && vars_match(a.name, b.name, env);
    case Expr::Kind::Lit: return a.value == b.value && a.type == b.type;
    case Expr::Kind::App:
      if (a.name != b.name) return false;
      [[fallthrough]];
    case Expr::Kind::Fst:
    case Expr::Kind::Snd:
      if (!(a.type == b.type && a.type2 == b.type2)) return false;
      [[fallthrough]];
    default:
      if (a.args.size() != b.args.size()) return false;
      for (size_t i = 0; i < a.args.size(); ++i)
        if (!expr_alpha(a.args[i], b.args[i], env)) return false;
      return true;
  }
}

bool refs_match(const ChannelRef& a, const ChannelRef& b, const AlphaEnv& env) {
  for (auto it = env.chans.rbegin(); it != env.chans.rend(); ++it) {
    bool ha = binder_hides(*it->first, a), hb = binder_hides(*it->second, b);
    if (ha || hb) {
      if (!(ha && hb)) return false;
      if (a.index.has_value() != b.index.has_value()) return false;
      return !a.index || cost_equal(*a.index, *b.index);
    }
  }
  return a == b;
}

bool reaction_alpha(const Reaction& a, const Reaction& b, AlphaEnv& env) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Reaction::Kind::Ret: return expr_alpha(a.expr, b.expr, env);
    case Reaction::Kind::Samp:
      return a.name == b.name && a.type == b.type && a.type2 == b.type2 && expr_alpha(a.expr, b.expr, env);
    case Reaction::Kind::Read: return a.type == b.type && refs_match(a.channel, b.channel, env);
    case Reaction::Kind::Val: return a.value == b.value && a.type == b.type;
    case Reaction::Kind::If:
      return expr_alpha(a.expr, b.expr, env) && reaction_alpha(a.body[0], b.body[0], env) &&
             reaction_alpha(a.body[1], b.body[1], env);
    case Reaction::Kind::Bind: {
      if (!(a.type == b.type) || !reaction_alpha(a.body[0], b.body[0], env)) return false;
      env.vars.emplace_back(a.name, b.name);
      bool ok = reaction_alpha(a.body[1], b.body[1], env);
      env.vars.pop_back();
      return ok;
    }
  }
  return false;
}

bool protocol_alpha(const Protocol& a, const Protocol& b, AlphaEnv& env) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Protocol::Kind::Zero: return true;
    case Protocol::Kind::Assign: return refs_match(a.channel, b.channel, env) && reaction_alpha(a.reaction, b.reaction, env);
    case Protocol::Kind::AssignValue:
      return refs_match(a.channel, b.channel, env) && a.value == b.value && a.type == b.type;
    case Protocol::Kind::Par: return protocol_alpha(a.body[0], b.body[0], env) && protocol_alpha(a.body[1], b.body[1], env);
    case Protocol::Kind::New: {
      if (!(a.type == b.type) || a.bound.has_value() != b.bound.has_value()) return false;
      if (a.bound && !cost_equal(*a.bound, *b.bound)) return false;
      if (a.channel.index.has_value() != b.channel.index.has_value()) return false;
      if (a.channel.index && !cost_equal(*a.channel.index, *b.channel.index)) return false;
      env.chans.emplace_back(&a, &b);
      bool ok = protocol_alpha(a.body[0], b.body[0], env);
      env.chans.pop_back();
      return ok;
    }
    case Protocol::Kind::Family: {
      if (!cost_equal(*a.bound, *b.bound)) return false;
      std::string canon = "%" + std::to_string(env.index_depth);
      Reaction ra = substitute_index(a.reaction, a.index_var, SizeExpr::index(canon));
      Reaction rb = substitute_index(b.reaction, b.index_var, SizeExpr::index(canon));
      ChannelRef ca(a.channel.name, SizeExpr::index(canon)), cb(b.channel.name, SizeExpr::index(canon));
      ++env.index_depth;
      bool ok = refs_match(ca, cb, env) && reaction_alpha(ra, rb, env);
      --env.index_depth;
      return ok;
    }
  }
  return false;
}

}  // namespace

bool alpha_eq(const Expr& a, const Expr& b) { return expr_alpha(a, b, AlphaEnv{}); }

bool alpha_eq(const Reaction& a, const Reaction& b) {
  AlphaEnv env;
  return reaction_alpha(a, b, env);
}

bool alpha_eq(const Protocol& a, const Protocol& b) {
  AlphaEnv env;
  return protocol_alpha(a, b, env);
}

// ---------------------------------------------------------------- printing

std::string to_string(const DataType& t) {
  switch (t.kind()) {
    case DataType::Kind::Const: return t.name();
    case DataType::Kind::Unit: return "unit";
    case DataType::Kind::Bool: return "bool";
    case DataType::Kind::Product: {
      std::string l = to_string(t.first());
      if (t.first().kind() == DataType::Kind::Product) l = "(" + l + ")";
      return l + " * " + to_string(t.second());
    }
  }
  return {};
}

static std::string ref_text(const ChannelRef& c) {
  if (!c.index) return c.name;
  return c.name + "[" + index_text(*c.index) + "]";
}

std::string to_string(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Var: return e.name;
    case Expr::Kind::Unit: return "()";
    case Expr::Kind::True: return "true";
    case Expr::Kind::False: return "false";
    case Expr::Kind::App: return e.name + "(" + to_string(e.args[0]) + ")";
    case Expr::Kind::Pair: return "(" + to_string(e.args[0]) + ", " + to_string(e.args[1]) + ")";
    case Expr::Kind::Fst: return "fst(" + to_string(e.args[0]) + ")";
    case Expr::Kind::Snd: return "snd(" + to_string(e.args[0]) + ")";
    case Expr::Kind::Lit: return "<" + e.value + ">";
  }
  return {};
}

std::string to_string(const Reaction& r) {
  switch (r.kind) {
    case Reaction::Kind::Ret: return "return " + to_string(r.expr);
    case Reaction::Kind::Samp: return "samp " + r.name + "(" + to_string(r.expr) + ")";
    case Reaction::Kind::Read: return "read " + ref_text(r.channel);
    case Reaction::Kind::Val: return "<" + r.value + ">";
    case Reaction::Kind::If: {
      std::string t = to_string(r.body[0]);
      if (r.body[0].kind == Reaction::Kind::If) t = "(" + t + ")";
      return "if " + to_string(r.expr) + " then " + t + " else " + to_string(r.body[1]);
    }
    case Reaction::Kind::Bind: {
      std::string first = to_string(r.body[0]);
      if (r.body[0].kind == Reaction::Kind::Bind || r.body[0].kind == Reaction::Kind::If) first = "(" + first + ")";
      return r.name + " : " + to_string(r.type) + " <- " + first + " ; " + to_string(r.body[1]);
    }
  }
  return {};
}

std::string to_string(const Protocol& p) {
  switch (p.kind) {
    case Protocol::Kind::Zero: return "0";
    case Protocol::Kind::Assign: return "(" + ref_text(p.channel) + " ::= " + to_string(p.reaction) + ")";
    case Protocol::Kind::AssignValue: return "(" + ref_text(p.channel) + " ::= !<" + p.value + ">)";
    case Protocol::Kind::Par: {
      // A binder scopes to the right, so one on the left needs its own parentheses.
      std::string l = to_string(p.body[0]);
      if (p.body[0].kind == Protocol::Kind::New) l = "(" + l + ")";
      return "(" + l + " || " + to_string(p.body[1]) + ")";
    }
    case Protocol::Kind::New:
      if (p.bound)
        return "newfamily " + p.channel.name + "[i < " + index_text(*p.bound) + "] : " + to_string(p.type) + " in " +
               to_string(p.body[0]);
      return "new " + ref_text(p.channel) + " : " + to_string(p.type) + " in " + to_string(p.body[0]);
    case Protocol::Kind::Family:
      return "(family " + p.channel.name + "[" + p.index_var + " < " + index_text(*p.bound) + "] ::= " +
             to_string(p.reaction) + ")";
  }
  return {};
}

}  // namespace ipdl
