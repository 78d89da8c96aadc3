#include <doctest.h>

#include <algorithm>
#include <functional>

#include "gen.hpp"
#include "ipdl/error.hpp"
#include "ipdl/typing.hpp"

using namespace ipdl;

namespace {

const DataType Bool = DataType::boolean();
const DataType Unit = DataType::unit();
const DataType Msg = gen::msg();
const SizeExpr N = SizeExpr::param("n");

ChannelContext context() {
  ChannelContext d;
  d.add({"In", Msg, std::nullopt});
  d.add({"Out", Msg, std::nullopt});
  d.add({"Ok", Bool, std::nullopt});
  d.add({"Send", Msg, N});
  d.add({"Recv", Msg, N});
  return d;
}

Reaction rd(const std::string& c, DataType t = Msg) { return Reaction::read(ChannelRef(c), std::move(t)); }
Reaction rd(const std::string& c, const SizeExpr& i, DataType t = Msg) {
  return Reaction::read(ChannelRef(c, i), std::move(t));
}

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "ok";
}

}  // namespace

TEST_CASE("expressions and reactions") {
  Signature sig = gen::signature();
  TypeContext g = {{"x", Msg}};
  CHECK(typecheck_expr(sig, g, Expr::app("flip", Msg, Msg, Expr::var("x", Msg))) == Msg);
  CHECK(code_of([&] { typecheck_expr(sig, g, Expr::var("y", Msg)); }) == "TYPE.unbound-variable");
  CHECK(code_of([&] { typecheck_expr(sig, g, Expr::var("x", Bool)); }) == "TYPE.annotation-mismatch");
  CHECK(code_of([&] { typecheck_expr(sig, g, Expr::app("nope", Msg, Msg, Expr::var("x", Msg))); }) ==
        "TYPE.unknown-function");
  CHECK(code_of([&] { typecheck_expr(sig, g, Expr::fst(Msg, Bool, Expr::var("x", Msg))); }) == "TYPE.projection");

  ChannelContext d = context();
  auto rt = typecheck_reaction(sig, d, {}, Reaction::bind("m", Msg, rd("In"), Reaction::ret(Expr::var("m", Msg))));
  CHECK(rt.type == Msg);
  CHECK(rt.reads == ChannelSet{ChannelItem::scalar("In")});
  CHECK(code_of([&] { typecheck_reaction(sig, d, {}, Reaction::cond(Expr::boolean(true), rd("In"), rd("Ok", Bool))); }) ==
        "TYPE.branch-mismatch");
  CHECK(code_of([&] { typecheck_reaction(sig, d, {}, rd("Send")); }) == "TYPE.missing-index");
  CHECK(code_of([&] { typecheck_reaction(sig, d, {}, rd("In", SizeExpr(0))); }) == "TYPE.not-a-family");
  CHECK(code_of([&] { typecheck_reaction(sig, d, {}, rd("Send", SizeExpr::index("i"))); }) == "TYPE.unbound-index");
  // A constant index cannot be shown to lie below a symbolic bound.
  CHECK(code_of([&] { typecheck_reaction(sig, d, {}, rd("Send", SizeExpr(0))); }) == "TYPE.index-range");
  CHECK(code_of([&] { typecheck_reaction(sig, d, {}, rd("Ghost")); }) == "TYPE.unknown-channel");
}

TEST_CASE("protocol interfaces") {
  Signature sig = gen::signature();
  ChannelContext d = context();
  Protocol fam = Protocol::family("Recv", "i", N, rd("Send", SizeExpr::index("i")));
  Protocol send = Protocol::family("Send", "i", N, rd("In"));
  Protocol p = Protocol::new_family("Send", N, Msg, Protocol::par(send, fam));
  auto u = infer_protocol(sig, d, p);
  CHECK(u.reads == ChannelSet{ChannelItem::scalar("In")});
  CHECK(u.writes == ChannelSet{ChannelItem::whole("Recv", N)});
  typecheck_protocol(sig, d, p, {{ChannelItem::scalar("In")}, {ChannelItem::whole("Recv", N)}});

  CHECK(code_of([&] { typecheck_protocol(sig, d, p, {{}, {ChannelItem::whole("Recv", N)}}); }) ==
        "TYPE.undeclared-read");
  CHECK(code_of([&] {
          typecheck_protocol(sig, d, p, {{ChannelItem::scalar("In")}, {ChannelItem::whole("Recv", N), ChannelItem::scalar("Out")}});
        }) == "TYPE.unassigned-output");
  CHECK(code_of([&] { typecheck_protocol(sig, d, p, {{ChannelItem::scalar("In")}, {}}); }) == "TYPE.undeclared-output");
  CHECK(code_of([&] {
          typecheck_protocol(sig, d, p, {{ChannelItem::scalar("In"), ChannelItem::whole("Recv", N)}, {ChannelItem::whole("Recv", N)}});
        }) == "TYPE.io-overlap");
  CHECK(code_of([&] { infer_protocol(sig, d, Protocol::par(send, send)); }) == "TYPE.duplicate-assignment");
  CHECK(code_of([&] { infer_protocol(sig, d, Protocol::new_channel(ChannelRef("Out"), Msg, Protocol::zero())); }) ==
        "TYPE.unassigned-internal");
  CHECK(code_of([&] { infer_protocol(sig, d, Protocol::assign(ChannelRef("Ok"), rd("In"))); }) == "TYPE.channel-type");
  CHECK(code_of([&] {
          ChannelContext d2 = d;
          d2.add({"Other", Msg, SizeExpr(3)});
          infer_protocol(sig, d2, Protocol::family("Other", "i", SizeExpr(3), rd("Send", SizeExpr::index("i"))));
        }) == "TYPE.index-range");
}

TEST_CASE("property: random concrete protocols typecheck") {
  gen::Rng rng(3);
  Signature sig = gen::signature();
  for (int trial = 0; trial < 300; ++trial) {
    auto g = gen::concrete_protocol(rng, gen::sizes(), trial % 3 == 0);
    CAPTURE(to_string(g.protocol));
    ChannelUse u = infer_protocol(sig, g.delta, g.protocol);
    for (const auto& r : u.reads) CHECK(!set_covers(u.writes, r));
  }
}

TEST_CASE("property: symbolic interface instantiates to the desugared interface") {
  gen::Rng rng(5);
  Signature sig = gen::signature();
  for (int trial = 0; trial < 150; ++trial) {
    auto g = gen::family_protocol(rng);
    CAPTURE(to_string(g.protocol));
    ChannelUse sym = infer_protocol(sig, g.delta, g.protocol);
    for (unsigned k = 0; k <= 4; ++k) {
      CostEnv env = gen::sizes(k);
      ChannelUse con = infer_protocol(sig, instantiate_context(g.delta, env), desugar_families(g.protocol, env));
      CHECK(instantiate_items(sym.writes, env) == con.writes);
      // With no members a family reads nothing, so the symbolic reads over-approximate at 0.
      ChannelSet reads = instantiate_items(sym.reads, env);
      if (k == 0)
        CHECK(std::includes(reads.begin(), reads.end(), con.reads.begin(), con.reads.end()));
      else
        CHECK(reads == con.reads);
    }
  }
}
