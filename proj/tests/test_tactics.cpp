#include <doctest.h>

#include <functional>

#include "ipdl/frontend.hpp"
#include "ipdl/norm.hpp"
#include "ipdl/tactics.hpp"

using namespace ipdl;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

SourceFile case_study(const std::string& name) { return parse_file(std::string(IPDL_CASE_DIR) + "/" + name); }

const Decl& decl(const SourceFile& f, const std::string& name) {
  for (const auto& d : f.decls)
    if (d.name == name) return d;
  FAIL("no declaration " << name);
  throw;
}

/// First component assigning `name`, searching under binders and ‖.
const Protocol* component(const Protocol& p, const std::string& name) {
  if ((p.kind == Protocol::Kind::Assign || p.kind == Protocol::Kind::Family) && p.channel.name == name) return &p;
  for (const auto& b : p.body)
    if (const Protocol* c = component(b, name)) return c;
  return nullptr;
}

/// Runs the first `count` steps of a side's script.
ProofState run_prefix(const Kernel& k, const Protocol& start, const Tactic& script, size_t count) {
  ProofState s(k, start);
  for (size_t i = 0; i < count && i < script.body.size(); ++i) s = run_tactic(s, script.body[i]);
  return s;
}

const DataType Msg = DataType::constant("msg");
const DataType Key = DataType::constant("key");
const DataType Ctxt = DataType::constant("ctxt");

/// The published context bound, built directly from its terms.
CostExpr published_cpa_context() {
  CostExpr n = CostExpr::param("n"), m = CostExpr::type_size("msg"), c = CostExpr::type_size("ctxt");
  return n * m * 6 + n * c * 3 + n * 96 + 12;
}

}  // namespace

TEST_CASE("secure channel: cpa used once with the published context") {
  SourceFile f = case_study("secure_channel.ipdl");
  BoundReport r = run_source(f, {});
  REQUIRE_MESSAGE(r.exit_status == 0, r.text);
  REQUIRE(r.theorems.size() == 1);
  const Ledger& l = r.theorems[0].ledger;
  REQUIRE(l.count("cpa"));
  CHECK(l.at("cpa").count == 1);
  CHECK(cost_equal(l.at("cpa").context, published_cpa_context()));
  CHECK(to_string(cost_normalize(l.at("cpa").context, f.sig.var_order())) ==
        "n * | msg | * 6 + n * | ctxt | * 3 + n * 96 + 12");
}

TEST_CASE("secure channel: individual tactic effects") {
  SourceFile f = case_study("secure_channel.ipdl");
  const Theorem& th = decl(f, "secure-channel").theorem;
  Kernel k(theory_for(f, th));

  SUBCASE("subst of the simulator's ok into Out") {
    ProofState s = run_prefix(k, th.rhs, th.right, 1);
    const Protocol* out = component(s.current(), "Out");
    REQUIRE(out);
    REQUIRE(out->kind == Protocol::Kind::Family);
    const std::string& i = out->index_var;
    Reaction want = Reaction::bind(
        "okCtxt", DataType::unit(), Reaction::read(ChannelRef("OkCtxtAdvNet", SizeExpr::index(i)), DataType::unit()),
        Reaction::bind("m", Msg, Reaction::read(ChannelRef("In", SizeExpr::index(i)), Msg),
                       Reaction::ret(Expr::var("m", Msg))));
    CHECK(alpha_eq(out->reaction, want));
  }

  SUBCASE("use approx assumption replaces the plaintext by zeros") {
    // Steps before the approximate one: up to and including the induction.
    size_t idx = 0;
    while (th.left.body[idx].kind != Tactic::Kind::UseApprox) ++idx;
    ProofState before = run_prefix(k, th.lhs, th.left, idx);
    CHECK(cost_equal(tactic_context_norm(before, "cpa"), published_cpa_context()));
    ProofState after = run_tactic(before, th.left.body[idx]);
    CHECK(after.ledger().at("cpa").count == 1);
    const Protocol* enc = component(after.current(), "Enc");
    REQUIRE(enc);
    CHECK(to_string(enc->reaction).find("samp enc((zeros(()), ") != std::string::npos);
    CHECK(before.ledger().at("cpa").count == 0);
  }

  SUBCASE("fold removes the internal declaration") {
    ProofState s = run_prefix(k, th.lhs, th.left, th.left.body.size() - 1);
    CHECK(all_channel_names(s.current()).count("Enc") == 0);
    CHECK(component(s.current(), "LeakCtxtNetAdv"));
  }

  SUBCASE("induction rewrites every Dec member") {
    size_t idx = 0;
    while (th.left.body[idx].kind != Tactic::Kind::Induction) ++idx;
    ProofState s = run_prefix(k, th.lhs, th.left, idx + 1);
    const Protocol* dec = component(s.current(), "Dec");
    REQUIRE(dec);
    CHECK(count_reads(dec->reaction, "Enc") == 0);
    CHECK(count_reads(dec->reaction, "In") == 1);
  }
}

TEST_CASE("exact derivations replay and tactics are deterministic") {
  SourceFile f = case_study("secure_channel.ipdl");
  const Theorem& th = decl(f, "secure-channel").theorem;
  Kernel k(theory_for(f, th));
  // Every exact tactic of the right-hand script elaborates to a replayable derivation.
  ExactJudgment j = normalize(k, k.refl(th.rhs));
  for (const auto& t : th.right.body) {
    j = run_exact(k, j, t);
    CHECK(k.replay(j) == j.steps());
  }
  ExactJudgment again = normalize(k, k.refl(th.rhs));
  for (const auto& t : th.right.body) again = run_exact(k, again, t);
  CHECK(again.steps() == j.steps());
  CHECK(audit_log(again) == audit_log(j));
  CHECK(run_source(f, {.stable = true}).text == run_source(f, {.stable = true}).text);
}

TEST_CASE("absorb of an absent channel fails") {
  SourceFile f = case_study("secure_channel.ipdl");
  const Theorem& th = decl(f, "secure-channel").theorem;
  Kernel k(theory_for(f, th));
  ProofState s = run_tactic(ProofState(k, th.rhs), th.right);
  Tactic again = th.right.body.back();  // absorb fam OkMsgAdvId
  CHECK(code_of([&] { run_tactic(s, again); }) == "TACTIC.not-found");
}

TEST_CASE("induction: vacuous body and index scoping") {
  SourceFile f = case_study("secure_channel.ipdl");
  const Theorem& th = decl(f, "secure-channel").theorem;
  Kernel k(theory_for(f, th));
  size_t idx = 0;
  while (th.left.body[idx].kind != Tactic::Kind::Induction) ++idx;
  ProofState s = run_prefix(k, th.lhs, th.left, idx);

  Tactic vacuous = th.left.body[idx];
  vacuous.body.clear();
  ProofState same = run_tactic(s, vacuous);
  CHECK(alpha_eq(same.current(), s.current()));

  Tactic ahead = th.left.body[idx];
  REQUIRE(ahead.body.size() == 1);
  for (auto& r : ahead.body[0].at) r.index = SizeExpr::index(ahead.index_var) + 1;
  CHECK(code_of([&] { run_tactic(s, ahead); }) == "IND.out-of-range");
}

TEST_CASE("context size of a single approximate step") {
  std::string base = R"(
type msg .
distribution unif : unit -> msg .
function zeros : unit -> msg .
channels (chn X :: msg) (chn Y :: unit) .
approx-assumption fake :
  (chn X :: msg)
  inputs: |=
  X ::= samp unif ~ X ::= return zeros .
)";
  SUBCASE("no siblings gives zero") {
    SourceFile f = parse(base + R"(
theorem alone : inputs: |= X ::= samp unif ~ X ::= return zeros
proof left: use approx assumption fake right: skip qed .
)");
    BoundReport r = run_source(f, {});
    REQUIRE_MESSAGE(r.exit_status == 0, r.text);
    CHECK(r.theorems[0].ledger.at("fake").count == 1);
    CHECK(cost_equal(r.theorems[0].ledger.at("fake").context, CostExpr(0)));
  }
  SUBCASE("one sibling of norm 11 gives 14") {
    SourceFile f = parse(base + R"(
theorem beside :
  inputs: |= (X ::= samp unif) || (Y ::= return ()) ~ (X ::= return zeros) || (Y ::= return ())
proof left: use approx assumption fake right: skip qed .
)");
    BoundReport r = run_source(f, {});
    REQUIRE_MESSAGE(r.exit_status == 0, r.text);
    CHECK(cost_equal(r.theorems[0].ledger.at("fake").context, CostExpr(14)));
  }
  SUBCASE("a round trip counts twice and keeps the larger context") {
    SourceFile f = parse(base + R"(
theorem twice :
  inputs: |= (X ::= samp unif) || (Y ::= return ()) ~ (X ::= return zeros) || (Y ::= return ())
proof left: use approx assumption fake right: skip qed .
)");
    const Theorem& th = f.decls.back().theorem;
    Kernel k(theory_for(f, th));
    ProofState l = run_tactic(ProofState(k, th.lhs), th.left);
    ProofState r(k, th.rhs);
    ApproxJudgment j = k.trans(close_proof(l, r), k.sym(close_proof(l, r)));
    CHECK(j.ledger().at("fake").count == 2);
    CHECK(cost_equal(j.ledger().at("fake").context, CostExpr(14)));
  }
}

TEST_CASE("approximate step failures") {
  std::string base = R"(
type msg .
distribution unif : unit -> msg .
function zeros : unit -> msg .
channels (chn X :: msg) (chn Y :: msg) .
approx-assumption fake :
  (chn X :: msg)
  inputs: |=
  X ::= samp unif ~ X ::= return zeros .
protocol-assumption same :
  (chn X :: msg)
  inputs: |=
  X ::= return zeros = X ::= return zeros .
)";
  SUBCASE("left side absent") {
    SourceFile f = parse(base + R"(
theorem t : inputs: |= X ::= return zeros ~ X ::= return zeros
proof left: use approx assumption fake right: skip qed .
)");
    CHECK(run_source(f, {}).text.find("error[APPROX.no-match]") != std::string::npos);
  }
  SUBCASE("exact assumption used approximately") {
    SourceFile f = parse(base + R"(
theorem t : inputs: |= X ::= return zeros ~ X ::= return zeros
proof left: use approx assumption same right: skip qed .
)");
    CHECK(run_source(f, {}).text.find("error[AXIOM.exact]") != std::string::npos);
  }
  SUBCASE("approximate assumption used exactly") {
    SourceFile f = parse(base + R"(
theorem t : inputs: |= X ::= samp unif ~ X ::= return zeros
proof left: use assumption fake right: skip qed .
)");
    CHECK(run_source(f, {}).text.find("error[AXIOM.approximate]") != std::string::npos);
  }
  SUBCASE("approximate step in an exact theorem") {
    SourceFile f = parse(base + R"(
theorem t : inputs: |= X ::= samp unif = X ::= return zeros
proof left: use approx assumption fake right: skip qed .
)");
    CHECK(run_source(f, {}).text.find("error[PROOF.approx-in-exact]") != std::string::npos);
  }
}

TEST_CASE("coin flip closes with no approximate assumptions") {
  SourceFile f = case_study("coin_flip.ipdl");
  BoundReport r = run_source(f, {.stable = true});
  REQUIRE_MESSAGE(r.exit_status == 0, r.text);
  for (const auto& [name, e] : r.theorems[0].ledger) CHECK(e.count == 0);
  CHECK(r.text.find("no approximate assumptions used") != std::string::npos);
}
