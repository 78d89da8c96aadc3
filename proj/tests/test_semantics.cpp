#include <doctest.h>

#include "gen.hpp"
#include "ipdl/error.hpp"
#include "ipdl/semantics.hpp"

using namespace ipdl;

namespace {

const DataType Bool = DataType::boolean();
const DataType Unit = DataType::unit();
const DataType Msg = DataType::constant("msg");

Signature toy_signature() {
  Signature sig;
  sig.types = {"msg", "key"};
  sig.functions["xor"] = {DataType::product(Msg, Msg), Msg};
  sig.functions["neg"] = {Msg, Msg};
  sig.distributions["flip"] = {Unit, Bool};
  sig.distributions["biased"] = {Unit, Bool};
  sig.distributions["keygen"] = {Unit, DataType::constant("key")};
  return sig;
}

Interpretation toy() { return Interpretation::load(IPDL_TEST_DATA_DIR "/toy_interp.json", toy_signature()); }

/// Interpretation of the generator signature with one-bit types.
Interpretation gen_interp() {
  Interpretation in;
  in.set_type("msg", {1, {"0", "1"}});
  in.set_type("key", {1, {"0", "1"}});
  in.set_function("flip", {{"0", "1"}, {"1", "0"}});
  std::map<Value, Value> check;
  for (auto k : {"0", "1"})
    for (auto m : {"0", "1"}) check[std::string(k) + m] = std::string(k) == m ? "1" : "0";
  in.set_function("check", check);
  in.set_distribution("unif", {{"", {{"0", Rational(1, 2)}, {"1", Rational(1, 2)}}}});
  in.set_distribution("keygen", {{"", {{"0", Rational(1, 3)}, {"1", Rational(2, 3)}}}});
  in.validate(gen::signature());
  return in;
}

Reaction flip() { return Reaction::samp("flip", Unit, Bool, Expr::unit_value()); }
Protocol assign(const std::string& o, Reaction r) { return Protocol::assign(ChannelRef(o), std::move(r)); }

ScriptAdversary query_then(const std::string& o, ScriptAdversary::Rule rule) {
  return ScriptAdversary({{{{AdvAction::Kind::Query, o}, "", 1}}}, rule, {o}, {});
}

ScriptAdversary::Rule equals(unsigned slot, Value v) { return {ScriptAdversary::Rule::Kind::Equals, false, slot, v, 0}; }

}  // namespace

TEST_CASE("expression evaluation") {
  Interpretation in = toy();
  CHECK(eval_expr(in, {}, Expr::boolean(true)) == "1");
  Expr pair = Expr::pair(Expr::lit("1", Msg), Expr::boolean(false));
  CHECK(eval_expr(in, {}, Expr::fst(Msg, Bool, pair)) == "1");
  CHECK(eval_expr(in, {}, Expr::snd(Msg, Bool, pair)) == "0");
  CHECK(eval_expr(in, {}, Expr::app("xor", DataType::product(Msg, Msg), Msg,
                                    Expr::pair(Expr::lit("1", Msg), Expr::lit("1", Msg)))) == "0");
  CHECK(eval_expr(in, {{"x", "1"}}, Expr::app("neg", Msg, Msg, Expr::var("x", Msg))) == "0");
}

TEST_CASE("interpretation loading rejects bad tables") {
  Signature sig = toy_signature();
  CHECK_THROWS_WITH_AS(Interpretation::from_json_text(R"({"types":{"msg":{"size":1},"key":{"size":1}}})", sig),
                       doctest::Contains("function"), Error);
  std::string bad = R"({"types":{"msg":{"size":1},"key":{"size":1}},
    "functions":{"xor":{"00":"0","01":"1","10":"1","11":"0"},"neg":{"0":"1","1":"0"}},
    "distributions":{"flip":{"":{"0":"1/2","1":"1/3"}},"biased":"uniform","keygen":"uniform"}})";
  CHECK_THROWS_WITH_AS(Interpretation::from_json_text(bad, sig), doctest::Contains("sum to 5/6"), Error);
}

TEST_CASE("small steps") {
  Interpretation in = toy();
  auto d = step_protocol(in, assign("o", Reaction::ret(Expr::boolean(true))));
  REQUIRE(d);
  CHECK(d->size() == 1);
  CHECK(d->weight(to_string(assign("o", Reaction::val("1", Bool)))) == 1);

  auto f = step_protocol(in, assign("o", flip()));
  REQUIRE(f);
  CHECK(f->weight(to_string(assign("o", Reaction::val("0", Bool)))) == Rational(1, 2));
  CHECK(f->weight(to_string(assign("o", Reaction::val("1", Bool)))) == Rational(1, 2));

  // new c in ((c ::= val v) || (o ::= read c))
  Protocol p = Protocol::new_channel(
      ChannelRef("c"), Msg,
      Protocol::par(assign("c", Reaction::val("1", Msg)), assign("o", Reaction::read(ChannelRef("c"), Msg))));
  auto h = step_protocol(in, p);
  REQUIRE(h);
  Protocol want = Protocol::new_channel(ChannelRef("c"), Msg,
                                        Protocol::par(Protocol::assign_value(ChannelRef("c"), "1", Msg),
                                                      assign("o", Reaction::val("1", Msg))));
  CHECK(h->weight(to_string(want)) == 1);

  CHECK_FALSE(step_protocol(in, assign("o", Reaction::read(ChannelRef("i"), Msg))));
}

TEST_CASE("big step") {
  Interpretation in = toy();
  Protocol q = Protocol::assign_value(ChannelRef("o"), "1", Bool);
  auto one = big_step(in, q);
  CHECK(one.size() == 1);
  CHECK(one.weight(to_string(q)) == 1);
  CHECK(big_step(in, assign("o", Reaction::ret(Expr::boolean(true)))).weight(to_string(q)) == 1);

  Protocol two = Protocol::par(assign("a", flip()), assign("b", flip()));
  auto d = big_step(in, two);
  CHECK(d.size() == 4);
  for (const auto& [k, e] : d.entries()) CHECK(e.weight == Rational(1, 4));
  CHECK(big_step_audit(in, two));

  CHECK_THROWS_WITH_AS(big_step(in, two, {Strategy::Leftmost, 2}), doctest::Contains("step budget"), Error);
}

TEST_CASE("interaction") {
  Interpretation in = toy();
  Protocol coin = assign("o", flip());
  ScriptAdversary idle({{{{AdvAction::Kind::Noop, ""}, "", 1}}}, {ScriptAdversary::Rule::Kind::Const, true, 0, "", 0},
                       {}, {});
  Decision d0 = interact(idle, coin, in);
  CHECK(d0.one == 1);
  CHECK(d0.zero == 0);

  auto adv = query_then("o", equals(0, "1"));
  Decision d = interact(adv, coin, in);
  CHECK(d.one == Rational(1, 2));
  CHECK(d.zero == Rational(1, 2));

  Protocol hidden = Protocol::new_channel(ChannelRef("c"), Bool,
                                          Protocol::par(assign("c", flip()), assign("o", Reaction::read(ChannelRef("c"), Bool))));
  Protocol renamed = Protocol::new_channel(
      ChannelRef("k"), Bool, Protocol::par(assign("k", flip()), assign("o", Reaction::read(ChannelRef("k"), Bool))));
  CHECK(interact(adv, hidden, in).one == interact(adv, renamed, in).one);
  CHECK(advantage(adv, hidden, renamed, in) == 0);
  CHECK(advantage(adv, coin, assign("o", Reaction::ret(Expr::boolean(true))), in) == Rational(1, 2));

  // A halting first step leaves half the mass undecided.
  ScriptAdversary halting({{{{AdvAction::Kind::Query, "o"}, "", Rational(1, 2)}}}, equals(0, "1"), {"o"}, {});
  Decision h = interact(halting, coin, in);
  CHECK(h.one == Rational(1, 4));
  CHECK(h.halt() == Rational(1, 2));

  CHECK_THROWS_WITH_AS(interact(query_then("x", equals(0, "1")), coin, in), doctest::Contains("not a protocol output"),
                       Error);
}

TEST_CASE("inputs are delivered before the protocol can answer") {
  Interpretation in = toy();
  // o ::= x <- read i ; return neg(x)
  Protocol p = assign("o", Reaction::bind("x", Msg, Reaction::read(ChannelRef("i"), Msg),
                                          Reaction::ret(Expr::app("neg", Msg, Msg, Expr::var("x", Msg)))));
  using C = ScriptAdversary::Choice;
  ScriptAdversary early({{C{{AdvAction::Kind::Assign, "i"}, "1", 1}}, {C{{AdvAction::Kind::Query, "o"}, "", 1}}},
                        equals(0, "0"), {"o"}, {"i"});
  CHECK(interact(early, p, in).one == 1);
  // Querying in the same round as the assignment sees nothing yet.
  ScriptAdversary late({{C{{AdvAction::Kind::Query, "o"}, "", 1}}, {C{{AdvAction::Kind::Assign, "i"}, "1", 1}}},
                       equals(0, "0"), {"o"}, {"i"});
  CHECK(interact(late, p, in).one == 0);
}

TEST_CASE("adversary enumeration") {
  Interpretation in = toy();
  auto one = enumerate_adversaries({}, {{"o", Bool}}, in, 1);
  CHECK(one.size() >= 4);
  auto none = enumerate_adversaries({}, {}, in, 1);
  for (const auto& a : none) CHECK(a->queries().empty());
  Protocol zero = Protocol::zero();
  for (const auto& a : none) {
    Decision d = interact(*a, zero, in);
    CHECK((d.one == 1 || d.zero == 1 || d.halt() > 0));
  }
  auto two = enumerate_adversaries({}, {{"a", Bool}, {"b", Bool}}, in, 2, 100000);
  bool ab = false, ba = false;
  for (const auto& a : two) {
    std::string s = a->describe();
    ab |= s.rfind("[query a; query b]", 0) == 0;
    ba |= s.rfind("[query b; query a]", 0) == 0;
  }
  CHECK(ab);
  CHECK(ba);
  CHECK(enumerate_adversaries({}, {{"a", Bool}, {"b", Bool}}, in, 2, 30).size() == 30);
}

TEST_CASE("property: strategies agree and mass is conserved") {
  Interpretation in = gen_interp();
  gen::Rng rng(17);
  int audited = 0;
  for (int trial = 0; trial < 120; ++trial) {
    auto g = gen::concrete_protocol(rng, in.sizes(), true);
    CAPTURE(to_string(g.protocol));
    auto d = big_step(in, g.protocol);
    CHECK(d.total() == 1);
    CHECK(big_step_audit(in, g.protocol));
    ++audited;
  }
  CHECK(audited == 120);
}

TEST_CASE("property: decision mass plus halting mass is one") {
  Interpretation in = gen_interp();
  gen::Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = gen::concrete_protocol(rng, in.sizes(), false);
    ChannelUse u = free_channels(g.protocol);
    std::vector<ChannelSig> ins, outs;
    for (const auto& r : u.reads) ins.push_back({r.name, g.delta.find(r.name)->type});
    for (const auto& w : u.writes) outs.push_back({w.name, g.delta.find(w.name)->type});
    for (const auto& adv : enumerate_adversaries(ins, outs, in, 2, 25)) {
      Decision d = interact(*adv, g.protocol, in);
      CHECK(d.one + d.zero + d.halt() == 1);
      CHECK(d.halt() >= 0);
    }
  }
}
