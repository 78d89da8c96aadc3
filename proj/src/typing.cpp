#include "ipdl/typing.hpp"

#include <algorithm>

#include "ipdl/error.hpp"

namespace ipdl {

namespace {

std::string show(const DataType& t) { return "'" + to_string(t) + "'"; }

void expect_type(const DataType& got, const DataType& want, const std::string& code, const std::string& what) {
  if (!(got == want)) fail(code, what + ": expected " + show(want) + ", found " + show(got));
}

const DataType* lookup(const TypeContext& gamma, const std::string& x) {
  for (auto it = gamma.rbegin(); it != gamma.rend(); ++it)
    if (it->first == x) return &it->second;
  return nullptr;
}

const ChannelDecl& check_ref(const ChannelContext& delta, const ChannelRef& c, const IndexContext& idx) {
  const ChannelDecl* d = delta.find(c.name);
  if (!d) fail("TYPE.unknown-channel", "channel '" + channel_key(c) + "' is not declared");
  if (!d->bound) {
    if (c.index) fail("TYPE.not-a-family", "channel '" + c.name + "' is not a family but is indexed");
    return *d;
  }
  if (!c.index) fail("TYPE.missing-index", "family '" + c.name + "' used without an index");
  const SizeExpr& e = *c.index;
  if (e.kind() == CostExpr::Kind::Var && e.variable().kind == CostVar::Kind::Index) {
    auto it = idx.find(e.variable().name);
    if (it == idx.end()) fail("TYPE.unbound-index", "index variable '" + e.variable().name + "' is not in scope");
    if (!cost_equal(it->second, *d->bound))
      fail("TYPE.index-range", "index '" + e.variable().name + "' ranges below " + to_string(it->second) +
                                   " but family '" + c.name + "' has bound " + to_string(*d->bound));
    return *d;
  }
  auto k = cost_constant(e);
  auto b = cost_constant(*d->bound);
  if (k && b && *k < *b) return *d;
  fail("TYPE.index-range", "cannot show that index " + to_string(e) + " of '" + c.name + "' is below " +
                               to_string(*d->bound));
}

}  // namespace

void check_datatype(const Signature& sig, const DataType& t) {
  switch (t.kind()) {
    case DataType::Kind::Const:
      if (!sig.has_type(t.name())) fail("TYPE.unknown-type", "type '" + t.name() + "' is not declared");
      break;
    case DataType::Kind::Product:
      check_datatype(sig, t.first());
      check_datatype(sig, t.second());
      break;
    default: break;
  }
}

DataType typecheck_expr(const Signature& sig, const TypeContext& gamma, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Var: {
      const DataType* t = lookup(gamma, e.name);
      if (!t) fail("TYPE.unbound-variable", "variable '" + e.name + "' is not bound");
      expect_type(e.type, *t, "TYPE.annotation-mismatch", "annotation of '" + e.name + "'");
      return *t;
    }
    case Expr::Kind::Unit: return DataType::unit();
    case Expr::Kind::True:
    case Expr::Kind::False: return DataType::boolean();
    case Expr::Kind::Lit: return e.type;
    case Expr::Kind::App: {
      auto it = sig.functions.find(e.name);
      if (it == sig.functions.end()) fail("TYPE.unknown-function", "function '" + e.name + "' is not declared");
      if (!(it->second.arg == e.type) || !(it->second.result == e.type2))
        fail("TYPE.function-misuse", "function '" + e.name + "' has type " + show(it->second.arg) + " -> " +
                                         show(it->second.result));
      expect_type(typecheck_expr(sig, gamma, e.args[0]), e.type, "TYPE.function-misuse",
                  "argument of '" + e.name + "'");
      return e.type2;
    }
    case Expr::Kind::Pair:
      return DataType::product(typecheck_expr(sig, gamma, e.args[0]), typecheck_expr(sig, gamma, e.args[1]));
    case Expr::Kind::Fst:
    case Expr::Kind::Snd: {
      DataType t = typecheck_expr(sig, gamma, e.args[0]);
      if (t.kind() != DataType::Kind::Product)
        fail("TYPE.projection", "projection applied to non-pair of type " + show(t));
      expect_type(t, DataType::product(e.type, e.type2), "TYPE.annotation-mismatch", "projection annotation");
      return e.kind == Expr::Kind::Fst ? t.first() : t.second();
    }
  }
  return DataType::unit();
}

ReactionType typecheck_reaction(const Signature& sig, const ChannelContext& delta, const TypeContext& gamma,
                                const Reaction& r, const IndexContext& idx) {
  switch (r.kind) {
    case Reaction::Kind::Ret: return {{}, typecheck_expr(sig, gamma, r.expr)};
    case Reaction::Kind::Val: return {{}, r.type};
    case Reaction::Kind::Samp: {
      auto it = sig.distributions.find(r.name);
      if (it == sig.distributions.end())
        fail("TYPE.unknown-distribution", "distribution '" + r.name + "' is not declared");
      if (!(it->second.arg == r.type) || !(it->second.result == r.type2))
        fail("TYPE.function-misuse", "distribution '" + r.name + "' has type " + show(it->second.arg) + " -> " +
                                         show(it->second.result));
      expect_type(typecheck_expr(sig, gamma, r.expr), r.type, "TYPE.function-misuse", "argument of '" + r.name + "'");
      return {{}, r.type2};
    }
    case Reaction::Kind::Read: {
      const ChannelDecl& d = check_ref(delta, r.channel, idx);
      expect_type(r.type, d.type, "TYPE.channel-type", "read of '" + channel_key(r.channel) + "'");
      return {{ChannelItem::of(r.channel)}, d.type};
    }
    case Reaction::Kind::If: {
      expect_type(typecheck_expr(sig, gamma, r.expr), DataType::boolean(), "TYPE.condition", "if condition");
      ReactionType a = typecheck_reaction(sig, delta, gamma, r.body[0], idx);
      ReactionType b = typecheck_reaction(sig, delta, gamma, r.body[1], idx);
      expect_type(b.type, a.type, "TYPE.branch-mismatch", "else branch");
      a.reads.insert(b.reads.begin(), b.reads.end());
      return a;
    }
    case Reaction::Kind::Bind: {
      check_datatype(sig, r.type);
      ReactionType a = typecheck_reaction(sig, delta, gamma, r.body[0], idx);
      expect_type(a.type, r.type, "TYPE.bind-mismatch", "binding of '" + r.name + "'");
      TypeContext inner = gamma;
      inner.emplace_back(r.name, r.type);
      ReactionType b = typecheck_reaction(sig, delta, inner, r.body[1], idx);
      b.reads.insert(a.reads.begin(), a.reads.end());
      return b;
    }
  }
  return {};
}

ChannelItem declared_item(const ChannelDecl& d) {
  return d.bound ? ChannelItem::whole(d.name, *d.bound) : ChannelItem::scalar(d.name);
}

namespace {

ChannelItem lift(const ChannelItem& it, const std::string& ivar, const SizeExpr& bound) {
  if (it.index && cost_vars(*it.index).count(CostVar::index(ivar))) return ChannelItem::whole(it.name, bound);
  return it;
}

bool binder_owns(const Protocol& binder, const ChannelItem& item) {
  if (binder.channel.name != item.name) return false;
  if (binder.bound || !binder.channel.index) return true;
  return item.index && cost_equal(*item.index, *binder.channel.index);
}

void add_writes(ChannelSet& acc, const ChannelSet& more) {
  for (const auto& w : more) {
    for (const auto& a : acc)
      if (items_may_overlap(a, w))
        fail("TYPE.duplicate-assignment", "channel " + to_string(w) + " is assigned more than once");
    acc.insert(w);
  }
}

}  // namespace

ChannelUse infer_protocol(const Signature& sig, const ChannelContext& delta, const Protocol& p,
                          const IndexContext& idx) {
  ChannelUse u;
  switch (p.kind) {
    case Protocol::Kind::Zero: return u;
    case Protocol::Kind::Assign: {
      const ChannelDecl& d = check_ref(delta, p.channel, idx);
      ReactionType rt = typecheck_reaction(sig, delta, {}, p.reaction, idx);
      expect_type(rt.type, d.type, "TYPE.channel-type", "assignment to '" + channel_key(p.channel) + "'");
      u.reads = rt.reads;
      u.writes.insert(ChannelItem::of(p.channel));
      break;
    }
    case Protocol::Kind::AssignValue: {
      const ChannelDecl& d = check_ref(delta, p.channel, idx);
      expect_type(p.type, d.type, "TYPE.channel-type", "assignment to '" + channel_key(p.channel) + "'");
      u.writes.insert(ChannelItem::of(p.channel));
      break;
    }
    case Protocol::Kind::Family: {
      const ChannelDecl* d = delta.find(p.channel.name);
      if (!d) fail("TYPE.unknown-channel", "channel family '" + p.channel.name + "' is not declared");
      if (!d->bound || !cost_equal(*d->bound, *p.bound))
        fail("TYPE.index-range", "family '" + p.channel.name + "' is declared with a different bound");
      if (idx.count(p.index_var)) fail("TYPE.shadowed-index", "index variable '" + p.index_var + "' shadows another");
      IndexContext inner = idx;
      inner[p.index_var] = *p.bound;
      ReactionType rt = typecheck_reaction(sig, delta, {}, p.reaction, inner);
      expect_type(rt.type, d->type, "TYPE.channel-type", "family '" + p.channel.name + "'");
      for (const auto& r : rt.reads) u.reads.insert(lift(r, p.index_var, *p.bound));
      u.writes.insert(ChannelItem::whole(p.channel.name, *p.bound));
      break;
    }
    case Protocol::Kind::Par: {
      ChannelUse a = infer_protocol(sig, delta, p.body[0], idx);
      ChannelUse b = infer_protocol(sig, delta, p.body[1], idx);
      u.writes = a.writes;
      add_writes(u.writes, b.writes);
      u.reads = a.reads;
      u.reads.insert(b.reads.begin(), b.reads.end());
      break;
    }
    case Protocol::Kind::New: {
      check_datatype(sig, p.type);
      ChannelContext inner = delta;
      if (p.bound) {
        inner.add_or_shadow({p.channel.name, p.type, *p.bound});
      } else if (p.channel.index) {
        // A single member binder produced by desugaring.
        const ChannelDecl* old = delta.find(p.channel.name);
        Natural k = *cost_constant(*p.channel.index) + 1;
        if (old && old->bound) {
          auto b = cost_constant(*old->bound);
          if (b && *b > k) k = *b;
        }
        inner.add_or_shadow({p.channel.name, p.type, SizeExpr(k)});
      } else {
        inner.add_or_shadow({p.channel.name, p.type, std::nullopt});
      }
      ChannelUse body = infer_protocol(sig, inner, p.body[0], idx);
      ChannelItem own = p.bound ? ChannelItem::whole(p.channel.name, *p.bound) : ChannelItem::of(p.channel);
      if (!set_covers(body.writes, own))
        fail("TYPE.unassigned-internal", "internal channel " + to_string(own) + " is never assigned");
      for (const auto& r : body.reads)
        if (!binder_owns(p, r)) u.reads.insert(r);
      for (const auto& w : body.writes)
        if (!binder_owns(p, w)) u.writes.insert(w);
      return u;
    }
  }
  ChannelSet reads;
  for (const auto& r : u.reads)
    if (!set_covers(u.writes, r)) reads.insert(r);
  u.reads = std::move(reads);
  return u;
}

void typecheck_protocol(const Signature& sig, const ChannelContext& delta, const Protocol& p,
                        const ProtocolType& declared, const IndexContext& idx) {
  for (const auto& i : declared.inputs)
    for (const auto& o : declared.outputs)
      if (items_may_overlap(i, o)) fail("TYPE.io-overlap", "channel " + to_string(i) + " is both input and output");
  for (const auto* s : {&declared.inputs, &declared.outputs})
    for (const auto& c : *s)
      if (!delta.contains(c.name)) fail("TYPE.unknown-channel", "interface channel " + to_string(c) + " is not declared");

  ChannelUse u = infer_protocol(sig, delta, p, idx);
  for (const auto& o : declared.outputs)
    if (!set_covers(u.writes, o)) fail("TYPE.unassigned-output", "output " + to_string(o) + " is never assigned");
  for (const auto& w : u.writes)
    if (!set_covers(declared.outputs, w))
      fail("TYPE.undeclared-output", "channel " + to_string(w) + " is assigned but is not an output");
  for (const auto& r : u.reads)
    if (!set_covers(declared.inputs, r) && !set_covers(declared.outputs, r))
      fail("TYPE.undeclared-read", "channel " + to_string(r) + " is read but is neither input nor output");
}

ChannelContext instantiate_context(const ChannelContext& delta, const CostEnv& env) {
  ChannelContext out;
  for (const auto& d : delta.decls()) {
    ChannelDecl c = d;
    if (c.bound) c.bound = SizeExpr(cost_eval(*c.bound, env));
    out.add(c);
  }
  return out;
}

ChannelSet instantiate_items(const ChannelSet& items, const CostEnv& env) {
  ChannelSet out;
  for (const auto& it : items) {
    if (it.family) {
      Natural k = cost_eval(*it.family, env);
      for (Natural j = 0; j < k; ++j) out.insert(ChannelItem::member(it.name, SizeExpr(j)));
    } else if (it.index) {
      out.insert(ChannelItem::member(it.name, SizeExpr(cost_eval(*it.index, env))));
    } else {
      out.insert(it);
    }
  }
  return out;
}

}  // namespace ipdl
