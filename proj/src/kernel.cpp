#include "ipdl/kernel.hpp"

#include <functional>
#include <sstream>

#include "ipdl/error.hpp"
#include "ipdl/norm.hpp"
#include "ipdl/reaction_nf.hpp"

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

std::string path_text(const Path& path) {
  std::string s;
  for (int k : path) s += std::to_string(k);
  return s.empty() ? "." : s;
}

const Protocol& expect(const Protocol& p, Kind k, const std::string& code, const std::string& what) {
  if (p.kind != k) fail(code, what + " does not apply to " + to_string(p));
  return p;
}

const Protocol& par_of(const Protocol& p, const std::string& rule) {
  return expect(p, Kind::Par, rule + ".shape", rule);
}

const Protocol& new_of(const Protocol& p, const std::string& rule) {
  return expect(p, Kind::New, rule + ".shape", rule);
}

Protocol rebuild_at(const Protocol& p, const Path& path, size_t k, Protocol by) {
  if (k == path.size()) return by;
  Protocol out = p;
  out.body[static_cast<size_t>(path[k])] = rebuild_at(p.body[static_cast<size_t>(path[k])], path, k + 1, std::move(by));
  return out;
}

const Protocol& subterm(const Protocol& p, const Path& path) {
  const Protocol* cur = &p;
  for (int k : path) {
    size_t arity = cur->body.size();
    if (k < 0 || static_cast<size_t>(k) >= arity) fail("KERNEL.path", "path " + path_text(path) + " leaves the protocol");
    cur = &cur->body[static_cast<size_t>(k)];
  }
  return *cur;
}

/// A single assignment or family component.
struct Component {
  bool family = false;
  ChannelRef channel;
  std::string ivar;
  SizeExpr bound;
  Reaction reaction;
};

std::optional<Component> component(const Protocol& p) {
  if (p.kind == Kind::Assign) return Component{false, p.channel, "", SizeExpr(0), p.reaction};
  if (p.kind == Kind::Family) return Component{true, p.channel, p.index_var, *p.bound, p.reaction};
  return std::nullopt;
}

Protocol with_reaction(const Protocol& p, Reaction r) {
  Protocol out = p;
  out.reaction = std::move(r);
  return out;
}

/// Source reaction as seen by a read of `ref`; none when ref names another channel.
std::optional<Reaction> instance(const Component& src, const ChannelRef& ref) {
  if (ref.name != src.channel.name) return std::nullopt;
  if (src.family) {
    if (!ref.index) return std::nullopt;
    return substitute_index(src.reaction, src.ivar, *ref.index);
  }
  if (!(ref == src.channel)) return std::nullopt;
  return src.reaction;
}

std::vector<ChannelRef> source_refs(const Component& src, const Reaction& r) {
  std::vector<ChannelRef> out;
  for (const auto& ref : reaction_read_refs(r)) {
    if (!instance(src, ref)) continue;
    bool seen = false;
    for (const auto& o : out) seen |= o == ref;
    if (!seen) out.push_back(ref);
  }
  return out;
}

std::set<std::string> read_keys(const Reaction& r) {
  std::set<std::string> out;
  for (const auto& c : reaction_read_refs(r)) out.insert(channel_key(c));
  return out;
}

/// Channels read on every execution path.
std::set<std::string> must_reads(const Reaction& r) {
  switch (r.kind) {
    case Reaction::Kind::Read: return {channel_key(r.channel)};
    case Reaction::Kind::Bind: {
      auto a = must_reads(r.body[0]);
      auto b = must_reads(r.body[1]);
      a.insert(b.begin(), b.end());
      return a;
    }
    case Reaction::Kind::If: {
      auto a = must_reads(r.body[0]);
      auto b = must_reads(r.body[1]);
      std::set<std::string> out;
      for (const auto& k : a)
        if (b.count(k)) out.insert(k);
      return out;
    }
    default: return {};
  }
}

/// Removes the first `x <- read c; S` with x unused whose source is src.
std::optional<Reaction> drop_read(const Reaction& r, const Component& src) {
  if (r.kind == Reaction::Kind::Bind && r.body[0].kind == Reaction::Kind::Read && !free_vars(r.body[1]).count(r.name)) {
    if (auto inst = instance(src, r.body[0].channel)) {
      auto need = read_keys(*inst);
      auto have = must_reads(r.body[1]);
      for (const auto& k : need)
        if (!have.count(k))
          fail("DROP.vacuous", "the continuation does not itself wait for " + k + ", read by " +
                                   channel_key(src.channel));
      return r.body[1];
    }
  }
  for (size_t k = 0; k < r.body.size(); ++k) {
    if (auto sub = drop_read(r.body[k], src)) {
      Reaction out = r;
      out.body[k] = *sub;
      return out;
    }
  }
  return std::nullopt;
}

void flatten_par(const Protocol& p, std::vector<const Protocol*>& out) {
  if (p.kind == Kind::Par) {
    flatten_par(p.body[0], out);
    flatten_par(p.body[1], out);
  } else {
    out.push_back(&p);
  }
}

bool mentions_index(const SizeExpr& e, const std::string& x) { return cost_vars(e).count(CostVar::index(x)) > 0; }

/// Checks that φ maps Δᵏ into ctx preserving types and family bounds. With
/// `generic`, scalar sources may map to members at exactly index x of a
/// family with the given bound.
void check_embedding(const ChannelContext& source, const ChannelRenaming& phi, const ChannelContext& ctx,
                     const std::string& code, const std::optional<std::pair<std::string, SizeExpr>>& generic) {
  if (!phi.injective()) fail(code + ".injective", "channel embedding is not injective");
  for (const auto& d : source.decls()) {
    const ChannelRef* t = phi.find(d.name);
    if (!t) fail(code + ".domain", "channel embedding does not map '" + d.name + "'");
    const ChannelDecl* td = ctx.find(t->name);
    if (!td) fail(code + ".unknown-channel", "channel '" + t->name + "' is not declared");
    if (!(td->type == d.type))
      fail(code + ".type", "'" + d.name + "' : " + to_string(d.type) + " cannot map to '" + t->name + "' : " +
                               to_string(td->type));
    if (d.bound) {
      if (t->index || !td->bound || !cost_equal(*td->bound, *d.bound))
        fail(code + ".bound", "family '" + d.name + "' must map to a family with the same bound");
    } else if (t->index) {
      if (generic && mentions_index(*t->index, generic->first) &&
          !cost_equal(*t->index, SizeExpr::index(generic->first)))
        fail("IND.out-of-range", "'" + d.name + "' maps to " + channel_key(*t) + ", outside the hypothesis at " +
                                     generic->first);
      bool ok = generic && td->bound && cost_equal(*t->index, SizeExpr::index(generic->first)) &&
                cost_equal(*td->bound, generic->second);
      if (!ok) fail(code + ".bound", "'" + d.name + "' cannot map to member " + channel_key(*t));
    } else if (td->bound) {
      fail(code + ".bound", "scalar '" + d.name + "' cannot map to family '" + t->name + "'");
    }
  }
}

Protocol member_view(const Protocol& p, const std::string& x, std::set<std::string>& names) {
  if (p.kind == Kind::Par) return Protocol::par(member_view(p.body[0], x, names), member_view(p.body[1], x, names));
  if (p.kind != Kind::Family) fail("IND.shape", "induction applies to compositions of families, found " + to_string(p));
  names.insert(p.channel.name);
  return Protocol::assign(ChannelRef(p.channel.name, SizeExpr::index(x)),
                          substitute_index(p.reaction, p.index_var, SizeExpr::index(x)));
}

Protocol family_view(const Protocol& p, const std::string& x, const std::map<std::string, const Protocol*>& fams,
                     std::set<std::string>& written) {
  if (p.kind == Kind::Par)
    return Protocol::par(family_view(p.body[0], x, fams, written), family_view(p.body[1], x, fams, written));
  if (p.kind != Kind::Assign || !p.channel.index || !cost_equal(*p.channel.index, SizeExpr::index(x)) ||
      !fams.count(p.channel.name))
    fail("IND.shape", "rewritten member is not an assignment at the generic index: " + to_string(p));
  if (!written.insert(p.channel.name).second) fail("IND.shape", "member '" + p.channel.name + "' assigned twice");
  for (const auto& ref : reaction_read_refs(p.reaction))
    if (ref.index && mentions_index(*ref.index, x) && !cost_equal(*ref.index, SizeExpr::index(x)))
      fail("IND.out-of-range", "the generic member reads " + channel_key(ref) + ", outside the hypothesis at " + x);
  const Protocol& orig = *fams.at(p.channel.name);
  return Protocol::family(orig.channel.name, orig.index_var, *orig.bound,
                          substitute_index(p.reaction, x, SizeExpr::index(orig.index_var)));
}

bool same_set(const ChannelSet& a, const ChannelSet& b) {
  for (const auto& x : a)
    if (!set_covers(b, x)) return false;
  for (const auto& x : b)
    if (!set_covers(a, x)) return false;
  return true;
}

std::string items_text(const ChannelSet& s) {
  std::string out;
  for (const auto& c : s) out += (out.empty() ? "" : ", ") + to_string(c);
  return "{" + out + "}";
}

void audit(const ProofNode& n, std::vector<std::string>& out, const std::string& indent) {
  switch (n.kind) {
    case ProofNode::Kind::Refl: return;
    case ProofNode::Kind::Step: {
      std::string line = indent + to_string(n.rule) + " @" + path_text(n.path);
      if (!n.args.channel.empty()) line += " " + n.args.channel;
      if (!n.args.decl.name.empty()) line += " " + n.args.decl.name;
      if (!n.args.axiom.empty()) line += " " + n.args.axiom + (n.args.reverse ? " (reverse)" : "");
      if (!n.args.index_var.empty()) line += " at " + n.args.index_var;
      for (const auto& [from, to] : n.args.phi.entries()) line += " " + from + "->" + channel_key(to);
      out.push_back(line);
      return;
    }
    case ProofNode::Kind::Sym:
      out.push_back(indent + "sym {");
      audit(*n.a, out, indent + "  ");
      out.push_back(indent + "}");
      return;
    case ProofNode::Kind::Trans:
      audit(*n.a, out, indent);
      audit(*n.b, out, indent);
      return;
  }
}

size_t count_steps(const ProofNode& n) {
  switch (n.kind) {
    case ProofNode::Kind::Refl: return 0;
    case ProofNode::Kind::Step: return 1;
    case ProofNode::Kind::Sym: return count_steps(*n.a);
    case ProofNode::Kind::Trans: return count_steps(*n.a) + count_steps(*n.b);
  }
  return 0;
}

}  // namespace

const Axiom& Theory::axiom(const std::string& name) const {
  auto it = axioms.find(name);
  if (it == axioms.end()) fail("AXIOM.unknown", "no assumption named '" + name + "'");
  return it->second;
}

void check_axiom(const Signature& sig, const Axiom& a) {
  typecheck_protocol(sig, a.delta, a.lhs, a.type);
  typecheck_protocol(sig, a.delta, a.rhs, a.type);
}

std::string to_string(Rule r) {
  switch (r) {
    case Rule::ParAssoc: return "par-assoc";
    case Rule::ParAssocInv: return "par-assoc-inv";
    case Rule::ParComm: return "par-comm";
    case Rule::ParUnit: return "par-unit";
    case Rule::ParUnitInv: return "par-unit-inv";
    case Rule::CompNew: return "comp-new";
    case Rule::CompNewInv: return "comp-new-inv";
    case Rule::NewExch: return "new-exch";
    case Rule::NewUnused: return "new-unused";
    case Rule::NewUnusedInv: return "new-unused-inv";
    case Rule::Alpha: return "alpha";
    case Rule::Absorb: return "absorb";
    case Rule::AbsorbInv: return "absorb-inv";
    case Rule::FoldBind: return "fold-bind";
    case Rule::Subst: return "subst";
    case Rule::Drop: return "drop";
    case Rule::ReactEq: return "react-eq";
    case Rule::Axiom: return "axiom";
    case Rule::FamilyInd: return "family-ind";
  }
  return "?";
}

size_t ExactJudgment::steps() const { return count_steps(*node_); }

Kernel::Kernel(Theory t) : theory_(std::move(t)) {
  for (const auto& [name, a] : theory_.axioms) check_axiom(theory_.sig, a);
}

ChannelContext Kernel::context_at(const Protocol& p, const Path& path) const {
  ChannelContext ctx = theory_.delta;
  const Protocol* cur = &p;
  for (int k : path) {
    if (cur->kind == Kind::New) ctx.add_or_shadow({cur->channel.name, cur->type, cur->bound});
    cur = &subterm(*cur, {k});
  }
  return ctx;
}

Protocol Kernel::apply(const Protocol& p, Rule rule, const Path& path, const RuleArgs& args) const {
  const Protocol& s = subterm(p, path);
  const Signature& sig = theory_.sig;
  Protocol out;
  switch (rule) {
    case Rule::ParAssoc: {
      const Protocol& l = par_of(par_of(s, "PAR-ASSOC").body[0], "PAR-ASSOC");
      out = Protocol::par(l.body[0], Protocol::par(l.body[1], s.body[1]));
      break;
    }
    case Rule::ParAssocInv: {
      const Protocol& r = par_of(par_of(s, "PAR-ASSOC").body[1], "PAR-ASSOC");
      out = Protocol::par(Protocol::par(s.body[0], r.body[0]), r.body[1]);
      break;
    }
    case Rule::ParComm: par_of(s, "PAR-COMM"), out = Protocol::par(s.body[1], s.body[0]); break;
    case Rule::ParUnit:
      expect(par_of(s, "PAR-UNIT").body[1], Kind::Zero, "PAR-UNIT.shape", "PAR-UNIT");
      out = s.body[0];
      break;
    case Rule::ParUnitInv: out = Protocol::par(s, Protocol::zero()); break;
    case Rule::CompNew: {
      const Protocol& n = new_of(par_of(s, "COMP-NEW").body[1], "COMP-NEW");
      if (free_names(s.body[0]).count(n.channel.name))
        fail("COMP-NEW.captured", "'" + n.channel.name + "' is free in the protocol moved into its scope");
      out = n;
      out.body[0] = Protocol::par(s.body[0], n.body[0]);
      break;
    }
    case Rule::CompNewInv: {
      const Protocol& b = par_of(new_of(s, "COMP-NEW").body[0], "COMP-NEW");
      if (free_names(b.body[0]).count(s.channel.name))
        fail("COMP-NEW.captured", "'" + s.channel.name + "' is used by the protocol moved out of its scope");
      Protocol inner = s;
      inner.body[0] = b.body[1];
      out = Protocol::par(b.body[0], inner);
      break;
    }
    case Rule::NewExch: {
      const Protocol& inner = new_of(new_of(s, "NEW-EXCH").body[0], "NEW-EXCH");
      if (inner.channel.name == s.channel.name) fail("NEW-EXCH.same", "binders share the name '" + s.channel.name + "'");
      Protocol a = s, b = inner;
      a.body[0] = inner.body[0];
      b.body[0] = a;
      out = b;
      break;
    }
    case Rule::NewUnused:
      if (free_names(new_of(s, "NEW-UNUSED").body[0]).count(s.channel.name))
        fail("NEW-UNUSED.used", "'" + s.channel.name + "' is used under its binder");
      out = s.body[0];
      break;
    case Rule::NewUnusedInv: {
      const ChannelDecl& d = args.decl;
      if (free_names(s).count(d.name)) fail("NEW-UNUSED.used", "'" + d.name + "' is already used");
      check_datatype(sig, d.type);
      out = d.bound ? Protocol::new_family(d.name, *d.bound, d.type, s)
                    : Protocol::new_channel(ChannelRef(d.name), d.type, s);
      break;
    }
    case Rule::Alpha: {
      new_of(s, "ALPHA");
      if (s.channel.index) fail("ALPHA.shape", "member binders are not renamed");
      const std::string& to = args.channel;
      if (to.empty() || to == s.channel.name || free_names(s.body[0]).count(to))
        fail("ALPHA.captured", "'" + to + "' is not a fresh name under the binder");
      ChannelRenaming phi;
      phi.set(s.channel.name, ChannelRef(to));
      out = s;
      out.channel = ChannelRef(to);
      out.body[0] = rename_channels_partial(phi, s.body[0]);
      break;
    }
    case Rule::Absorb: {
      ChannelContext ctx = context_at(p, path);
      ChannelUse u = infer_protocol(sig, ctx, par_of(s, "ABSORB").body[1]);
      if (!u.writes.empty())
        fail("ABSORB.outputs", "absorbed protocol has outputs " + items_text(u.writes));
      out = s.body[0];
      break;
    }
    case Rule::AbsorbInv: {
      ChannelContext ctx = context_at(p, path);
      ChannelUse u = infer_protocol(sig, ctx, args.protocol);
      if (!u.writes.empty())
        fail("ABSORB.outputs", "added protocol has outputs " + items_text(u.writes));
      out = Protocol::par(s, args.protocol);
      break;
    }
    case Rule::FoldBind: {
      const Protocol& body = par_of(new_of(s, "FOLD-BIND").body[0], "FOLD-BIND");
      const std::string& c = s.channel.name;
      auto a = component(body.body[0]);
      auto b = component(body.body[1]);
      if (!a || !b) fail("FOLD-BIND.shape", "fold needs two assignments under the binder of '" + c + "'");
      bool first = a->channel.name == c;
      if (!first && b->channel.name != c) fail("FOLD-BIND.shape", "'" + c + "' is not assigned under its binder");
      const Component& w = first ? *a : *b;
      const Component& r = first ? *b : *a;
      const Protocol& reader = body.body[first ? 1 : 0];
      if (w.family != s.bound.has_value() || (!w.family && s.channel.index))
        fail("FOLD-BIND.shape", "binder and assignment of '" + c + "' disagree");
      if (count_reads(w.reaction, c) > 0) fail("FOLD-BIND.cycle", "'" + c + "' reads itself");
      if (count_reads(r.reaction, c) != 1)
        fail("FOLD-BIND.single-read", "'" + c + "' is read " + std::to_string(count_reads(r.reaction, c)) +
                                          " times by " + channel_key(r.channel));
      ChannelRef ref;
      for (const auto& x : reaction_read_refs(r.reaction))
        if (x.name == c) ref = x;
      if (w.family) {
        bool generic = r.family && ref.index && cost_equal(*ref.index, SizeExpr::index(r.ivar)) &&
                       cost_equal(r.bound, w.bound);
        if (!generic)
          fail("FOLD-BIND.single-read", "each member of '" + c + "' must be read once, by the member at the same index");
      } else if (r.family) {
        fail("FOLD-BIND.single-read", "'" + c + "' is read by every member of family '" + r.channel.name + "'");
      }
      out = with_reaction(reader, replace_reads(r.reaction, ref, *instance(w, ref)));
      break;
    }
    case Rule::Subst:
    case Rule::Drop: {
      const std::string tag = rule == Rule::Subst ? "SUBST" : "DROP";
      par_of(s, tag);
      auto a = component(s.body[0]);
      auto b = component(s.body[1]);
      if (!a || !b) fail(tag + ".shape", tag + " needs two assignments, found " + to_string(s));
      bool first = a->channel.name == args.channel;
      if (!first && b->channel.name != args.channel) fail(tag + ".not-found", "'" + args.channel + "' is not assigned here");
      const Component& src = first ? *a : *b;
      const Component& dst = first ? *b : *a;
      size_t di = first ? 1 : 0;
      if (contains_samp(src.reaction))
        fail(tag + ".duplicability", "'" + args.channel + "' samples, so its computation cannot be duplicated");
      if (count_reads(src.reaction, src.channel.name) || count_reads(src.reaction, dst.channel.name))
        fail(tag + ".cycle", "'" + args.channel + "' depends on the channel it would be substituted into");
      Reaction nr;
      if (rule == Rule::Subst) {
        auto refs = source_refs(src, dst.reaction);
        if (refs.empty()) fail("SUBST.no-read", channel_key(dst.channel) + " does not read '" + args.channel + "'");
        nr = dst.reaction;
        for (const auto& ref : refs) nr = replace_reads(nr, ref, *instance(src, ref));
      } else {
        auto dropped = drop_read(dst.reaction, src);
        if (!dropped) fail("DROP.not-found", channel_key(dst.channel) + " has no unused read of '" + args.channel + "'");
        nr = *dropped;
      }
      out = s;
      out.body[di] = with_reaction(s.body[di], nr);
      break;
    }
    case Rule::ReactEq: {
      if (s.kind != Kind::Assign && s.kind != Kind::Family)
        fail("REACT-EQ.shape", "reaction equality applies to an assignment, found " + to_string(s));
      if (!reactions_equivalent(s.reaction, args.reaction))
        fail("REACT-EQ.mismatch", "reactions are not provably equal: " + to_string(s.reaction) + " and " +
                                      to_string(args.reaction));
      out = with_reaction(s, args.reaction);
      break;
    }
    case Rule::Axiom: {
      const Axiom& ax = theory_.axiom(args.axiom);
      if (ax.approximate) fail("AXIOM.approximate", "'" + ax.name + "' is an indistinguishability assumption");
      check_embedding(ax.delta, args.phi, context_at(p, path), "AXIOM", std::nullopt);
      Protocol from = rename_channels(args.phi, args.reverse ? ax.rhs : ax.lhs);
      if (!alpha_eq(s, from))
        fail("AXIOM.mismatch", "'" + ax.name + "' does not match " + to_string(s) + "; expected " + to_string(from));
      out = rename_channels(args.phi, args.reverse ? ax.lhs : ax.rhs);
      break;
    }
    case Rule::FamilyInd: {
      const Axiom& ax = theory_.axiom(args.axiom);
      if (ax.approximate) fail("AXIOM.approximate", "'" + ax.name + "' is an indistinguishability assumption");
      const std::string& x = args.index_var;
      std::vector<const Protocol*> leaves;
      flatten_par(s, leaves);
      std::map<std::string, const Protocol*> fams;
      for (const auto* l : leaves) {
        if (l->kind != Kind::Family) fail("IND.shape", "induction applies to families, found " + to_string(*l));
        if (l->index_var == x) fail("IND.fresh", "index variable '" + x + "' is not fresh");
        if (!cost_equal(*l->bound, *leaves.front()->bound)) fail("IND.shape", "families have different bounds");
        fams[l->channel.name] = l;
      }
      if (x.empty()) fail("IND.fresh", "induction needs an index variable");
      check_embedding(ax.delta, args.phi, context_at(p, path), "AXIOM",
                      std::make_pair(x, *leaves.front()->bound));
      std::set<std::string> names;
      Protocol members = member_view(s, x, names);
      Protocol from = rename_channels(args.phi, args.reverse ? ax.rhs : ax.lhs);
      if (!alpha_eq(members, from))
        fail("IND.mismatch", "'" + ax.name + "' does not match the members " + to_string(members) + "; expected " +
                                 to_string(from));
      std::set<std::string> written;
      out = family_view(rename_channels(args.phi, args.reverse ? ax.lhs : ax.rhs), x, fams, written);
      if (written != names) fail("IND.shape", "rewritten members assign different channels");
      break;
    }
  }
  Protocol result = rebuild_at(p, path, 0, std::move(out));
  infer_protocol(sig, theory_.delta, result);
  return result;
}

ExactJudgment Kernel::refl(const Protocol& p) const {
  auto n = std::make_shared<ProofNode>();
  n->lhs = n->rhs = p;
  return ExactJudgment(n);
}

ExactJudgment Kernel::step(const ExactJudgment& j, Rule r, const Path& path, const RuleArgs& args) const {
  auto n = std::make_shared<ProofNode>();
  n->kind = ProofNode::Kind::Step;
  n->lhs = j.rhs();
  n->rhs = apply(j.rhs(), r, path, args);
  n->rule = r;
  n->path = path;
  n->args = args;
  if (j.proof()->kind == ProofNode::Kind::Refl) return ExactJudgment(n);
  return trans(j, ExactJudgment(n));
}

ExactJudgment Kernel::sym(const ExactJudgment& j) const {
  auto n = std::make_shared<ProofNode>();
  n->kind = ProofNode::Kind::Sym;
  n->lhs = j.rhs();
  n->rhs = j.lhs();
  n->a = j.proof();
  return ExactJudgment(n);
}

ExactJudgment Kernel::trans(const ExactJudgment& a, const ExactJudgment& b) const {
  if (!alpha_eq(a.rhs(), b.lhs()))
    fail("TRANS.chain-break", "derivation ends in " + to_string(a.rhs()) + " but the next starts at " +
                                  to_string(b.lhs()));
  if (a.proof()->kind == ProofNode::Kind::Refl) return b;
  if (b.proof()->kind == ProofNode::Kind::Refl) return a;
  auto n = std::make_shared<ProofNode>();
  n->kind = ProofNode::Kind::Trans;
  n->lhs = a.lhs();
  n->rhs = b.rhs();
  n->a = a.proof();
  n->b = b.proof();
  return ExactJudgment(n);
}

size_t Kernel::replay(const ExactJudgment& j) const {
  std::function<size_t(const ProofNode&)> go = [&](const ProofNode& n) -> size_t {
    switch (n.kind) {
      case ProofNode::Kind::Refl: return 0;
      case ProofNode::Kind::Step:
        if (!alpha_eq(apply(n.lhs, n.rule, n.path, n.args), n.rhs))
          fail("KERNEL.replay", to_string(n.rule) + " at " + path_text(n.path) + " does not reproduce its result");
        return 1;
      case ProofNode::Kind::Sym:
        if (!alpha_eq(n.lhs, n.a->rhs) || !alpha_eq(n.rhs, n.a->lhs)) fail("KERNEL.replay", "sym endpoints differ");
        return go(*n.a);
      case ProofNode::Kind::Trans:
        if (!alpha_eq(n.a->rhs, n.b->lhs) || !alpha_eq(n.lhs, n.a->lhs) || !alpha_eq(n.rhs, n.b->rhs))
          fail("KERNEL.replay", "trans endpoints differ");
        return go(*n.a) + go(*n.b);
    }
    return 0;
  };
  return go(*j.proof());
}

ApproxCong Kernel::approx_axiom(const std::string& k) const {
  const Axiom& ax = theory_.axiom(k);
  if (!ax.approximate) fail("AXIOM.exact", "'" + k + "' is an exact assumption, not an indistinguishability one");
  ApproxCong j;
  j.lhs_ = ax.lhs;
  j.rhs_ = ax.rhs;
  j.delta_ = ax.delta;
  j.type_ = ax.type;
  j.axiom_ = k;
  j.context_ = CostExpr(0);
  j.trace_.push_back("axiom " + k);
  return j;
}

ApproxCong Kernel::embed(const ApproxCong& j, const ChannelRenaming& phi, const ChannelContext& target) const {
  check_embedding(j.delta_, phi, target, "EMBED", std::nullopt);
  ApproxCong out = j;
  out.lhs_ = rename_channels(phi, j.lhs_);
  out.rhs_ = rename_channels(phi, j.rhs_);
  out.type_ = {};
  for (const auto& c : j.type_.inputs) out.type_.inputs.insert(rename_item(phi, c));
  for (const auto& c : j.type_.outputs) out.type_.outputs.insert(rename_item(phi, c));
  out.delta_ = target;
  std::string line = "embed";
  for (const auto& [from, to] : phi.entries()) line += " " + from + "->" + channel_key(to);
  out.trace_.push_back(line);
  return out;
}

ApproxCong Kernel::input_unused(const ApproxCong& j, const ChannelItem& c) const {
  if (!j.delta_.contains(c.name)) fail("INPUT-UNUSED.unknown", "channel '" + c.name + "' is not declared");
  for (const auto* s : {&j.type_.inputs, &j.type_.outputs})
    for (const auto& x : *s)
      if (items_may_overlap(x, c)) fail("INPUT-UNUSED.overlap", to_string(c) + " is already in the interface");
  if (free_names(j.lhs_).count(c.name) || free_names(j.rhs_).count(c.name))
    fail("INPUT-UNUSED.used", to_string(c) + " is free in the related protocols");
  ApproxCong out = j;
  out.type_.inputs.insert(c);
  out.trace_.push_back("input-unused " + to_string(c));
  return out;
}

ApproxCong Kernel::cong_comp(const ApproxCong& j, const Protocol& q) const {
  ChannelUse u = infer_protocol(theory_.sig, j.delta_, q);
  for (const auto& w : u.writes) {
    for (const auto& o : j.type_.outputs)
      if (items_may_overlap(o, w)) fail("CONG-COMP.type", "context output " + to_string(w) + " clashes with an output");
    if (!set_covers(j.type_.inputs, w))
      fail("CONG-COMP.type", "context output " + to_string(w) + " is not an input of the related protocols");
  }
  for (const auto& r : u.reads)
    if (!set_covers(j.type_.inputs, r) && !set_covers(j.type_.outputs, r))
      fail("CONG-COMP.type", "context reads " + to_string(r) + ", outside the interface");
  ApproxCong out = j;
  out.type_.inputs.clear();
  for (const auto& i : j.type_.inputs)
    if (!set_covers(u.writes, i)) out.type_.inputs.insert(i);
  out.type_.outputs.insert(u.writes.begin(), u.writes.end());
  out.lhs_ = Protocol::par(j.lhs_, q);
  out.rhs_ = Protocol::par(j.rhs_, q);
  CostExpr add = norm(q) + CostExpr(3);
  out.context_ = cost_normalize(j.context_ + add, theory_.sig.var_order());
  out.trace_.push_back("cong-comp " + items_text(u.writes) + " +" + to_string(cost_normalize(add, theory_.sig.var_order())));
  return out;
}

ApproxCong Kernel::cong_new(const ApproxCong& j, const ChannelDecl& o) const {
  ChannelItem item = declared_item(o);
  bool found = false;
  ApproxCong out = j;
  out.type_.outputs.clear();
  for (const auto& x : j.type_.outputs) {
    if (x == item)
      found = true;
    else
      out.type_.outputs.insert(x);
  }
  if (!found) fail("CONG-NEW.not-output", to_string(item) + " is not an output of the related protocols");
  auto wrap = [&](const Protocol& p) {
    return o.bound ? Protocol::new_family(o.name, *o.bound, o.type, p) : Protocol::new_channel(ChannelRef(o.name), o.type, p);
  };
  out.lhs_ = wrap(j.lhs_);
  out.rhs_ = wrap(j.rhs_);
  out.trace_.push_back("cong-new " + to_string(item));
  return out;
}

Ledger Kernel::empty_ledger() const {
  Ledger l;
  for (const auto& [name, a] : theory_.axioms)
    if (a.approximate) l[name] = {0, CostExpr(0)};
  return l;
}

ApproxJudgment Kernel::strict(const ExactJudgment& j) const {
  typecheck_protocol(theory_.sig, theory_.delta, j.lhs(), theory_.type);
  typecheck_protocol(theory_.sig, theory_.delta, j.rhs(), theory_.type);
  ApproxJudgment out;
  out.lhs_ = j.lhs();
  out.rhs_ = j.rhs();
  out.ledger_ = empty_ledger();
  out.trace_ = audit_log(j);
  out.exact_steps_ = j.steps();
  return out;
}

ApproxJudgment Kernel::approx(const ApproxCong& j) const {
  if (!same_set(j.type_.inputs, theory_.type.inputs) || !same_set(j.type_.outputs, theory_.type.outputs))
    fail("APPROX-CONG.type", "judgment is typed " + items_text(j.type_.inputs) + " -> " + items_text(j.type_.outputs) +
                                 ", the goal is " + items_text(theory_.type.inputs) + " -> " +
                                 items_text(theory_.type.outputs));
  typecheck_protocol(theory_.sig, theory_.delta, j.lhs_, theory_.type);
  typecheck_protocol(theory_.sig, theory_.delta, j.rhs_, theory_.type);
  ApproxJudgment out;
  out.lhs_ = j.lhs_;
  out.rhs_ = j.rhs_;
  out.ledger_ = empty_ledger();
  out.ledger_[j.axiom_] = {1, j.context_};
  out.trace_ = j.trace_;
  return out;
}

ApproxJudgment Kernel::sym(const ApproxJudgment& j) const {
  ApproxJudgment out = j;
  std::swap(out.lhs_, out.rhs_);
  out.trace_.insert(out.trace_.begin(), "sym");
  return out;
}

ApproxJudgment Kernel::trans(const ApproxJudgment& a, const ApproxJudgment& b) const {
  if (!alpha_eq(a.rhs_, b.lhs_))
    fail("APPROX-SEQ.chain-break", "chain breaks between " + to_string(a.rhs_) + " and " + to_string(b.lhs_));
  ApproxJudgment out;
  out.lhs_ = a.lhs_;
  out.rhs_ = b.rhs_;
  out.ledger_ = merge_ledgers(a.ledger_, b.ledger_);
  out.trace_ = a.trace_;
  out.trace_.insert(out.trace_.end(), b.trace_.begin(), b.trace_.end());
  out.exact_steps_ = a.exact_steps_ + b.exact_steps_;
  return out;
}

Ledger merge_ledgers(const Ledger& a, const Ledger& b) {
  Ledger out = a;
  for (const auto& [k, e] : b) {
    auto it = out.find(k);
    if (it == out.end() || it->second.count == 0) {
      out[k] = e;
    } else if (e.count != 0) {
      it->second.count += e.count;
      if (!cost_equal(it->second.context, e.context))
        it->second.context = cost_normalize(CostExpr::max({it->second.context, e.context}));
    }
  }
  return out;
}

std::vector<std::string> audit_log(const ExactJudgment& j) {
  std::vector<std::string> out;
  audit(*j.proof(), out, "");
  return out;
}

std::vector<AsymptoticEntry> check_asymptotic(const Ledger& ledger, const VarOrder& order) {
  std::vector<AsymptoticEntry> out;
  for (const auto& [k, e] : ledger) {
    CostExpr c = cost_normalize(e.context, order);
    out.push_back({k, e.count, c, cost_degree(c), true});
  }
  return out;
}

ConcreteBound concrete_bound(const Ledger& ledger, const BoundInputs& in) {
  ConcreteBound out;
  for (const auto& [k, e] : ledger) {
    BoundTerm t;
    t.axiom = k;
    t.count = e.count;
    t.context = cost_eval(e.context, in.sizes);
    t.budget = soundness_poly(in.c_sem, in.c_adv, t.context, in.functions, in.distributions);
    auto it = in.epsilon.find(k);
    if (it == in.epsilon.end() && e.count != 0)
      fail("BOUND.missing-epsilon", "no advantage bound given for assumption '" + k + "'");
    t.epsilon = it == in.epsilon.end() ? Rational(0) : it->second;
    t.term = Rational(e.count) * (t.epsilon + 2 * Rational(t.context) * in.eta_sem);
    out.advantage += t.term;
    out.terms.push_back(t);
  }
  return out;
}

}  // namespace ipdl
