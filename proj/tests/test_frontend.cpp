#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "ipdl/frontend.hpp"

using namespace ipdl;

namespace {

std::string case_path(const std::string& name) { return std::string(IPDL_CASE_DIR) + "/" + name; }
std::string data_path(const std::string& name) { return std::string(IPDL_TEST_DATA_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  throw;
}

const Decl& decl(const SourceFile& f, const std::string& name) {
  for (const auto& d : f.decls)
    if (d.name == name) return d;
  FAIL("no declaration " << name);
  throw;
}

const Protocol* component(const Protocol& p, const std::string& name) {
  if ((p.kind == Protocol::Kind::Assign || p.kind == Protocol::Kind::Family) && p.channel.name == name) return &p;
  for (const auto& b : p.body)
    if (const Protocol* c = component(b, name)) return c;
  return nullptr;
}

size_t bind_steps(const Reaction& r) { return r.kind == Reaction::Kind::Bind ? 1 + bind_steps(r.body[1]) : 1; }

const char* kHeader = R"(
type msg .
distribution unif : unit -> msg .
function zeros : unit -> msg .
channels (chn X :: msg) (chn Y :: msg) .
)";

}  // namespace

TEST_CASE("declarations") {
  SourceFile f = parse("parameter n : nat .");
  REQUIRE(f.decls.size() == 1);
  CHECK(f.decls[0].kind == Decl::Kind::Parameter);
  CHECK(f.decls[0].name == "n");
  CHECK(f.sig.has_param("n"));

  f = parse("type msg . function f : msg * msg -> bool . distribution d : unit -> msg .");
  CHECK(f.sig.has_type("msg"));
  CHECK(f.sig.functions.at("f").arg == DataType::product(DataType::constant("msg"), DataType::constant("msg")));
  CHECK(f.sig.distributions.at("d").result == DataType::constant("msg"));
}

TEST_CASE("lexical details") {
  SourceFile f = parse(std::string(kHeader) + R"(
-- a comment with symbols ::= || |= .
protocol P' = X ::= samp unif .
protocol-assumption two-words : (chn X :: msg) inputs: |= X ::= return zeros = X ::= return zeros .
)");
  CHECK(decl(f, "P'").kind == Decl::Kind::Protocol);
  CHECK(decl(f, "two-words").kind == Decl::Kind::Assumption);
  Error e = error_of([] { parse("type msg $ ."); });
  CHECK(e.code() == "PARSE.lex");
  REQUIRE(e.span());
  CHECK(e.span()->line == 1);
  CHECK(e.span()->column == 10);
}

TEST_CASE("Alice's family has a three-step bind body") {
  SourceFile f = parse_file(case_path("secure_channel.ipdl"));
  const Protocol* send = component(decl(f, "Real").protocol, "Send");
  REQUIRE(send);
  CHECK(send->kind == Protocol::Kind::Family);
  CHECK(send->index_var == "i");
  CHECK(bind_steps(send->reaction) == 3);
  CHECK(send->reaction.body[0].kind == Reaction::Kind::Read);
  CHECK(send->reaction.body[1].body[1].kind == Reaction::Kind::Samp);
}

TEST_CASE("where bindings see the enclosing binders") {
  SourceFile f = parse(std::string(kHeader) + R"(
protocol P = new C : msg in (A || B) where A = C ::= samp unif and B = X ::= read C .
)");
  const Protocol& p = decl(f, "P").protocol;
  CHECK(p.kind == Protocol::Kind::New);
  CHECK(component(p, "X"));
  Error e = error_of([] { parse(std::string(kHeader) + "protocol P = A where A = B and B = A ."); });
  CHECK(e.code() == "RESOLVE.cycle");
}

TEST_CASE("parse errors carry position and expectation") {
  SUBCASE("missing terminator") {
    Error e = error_of([] { parse("parameter n : nat\ntype msg ."); });
    CHECK(e.code() == "PARSE.expected");
    REQUIRE(e.span());
    CHECK(e.span()->line == 2);
    CHECK(e.span()->column == 1);
    CHECK(std::string(e.what()).find("expected '.'") != std::string::npos);
  }
  SUBCASE("missing terminator at end of input") {
    Error e = error_of([] { parse("parameter n : nat"); });
    CHECK(std::string(e.what()).find("end of input") != std::string::npos);
  }
  SUBCASE("unknown names") {
    CHECK(error_of([] { parse("function f : nope -> bool ."); }).code() == "RESOLVE.unknown-type");
    CHECK(error_of([&] { parse(std::string(kHeader) + "protocol P = X ::= read Z ."); }).code() ==
          "RESOLVE.unknown-channel");
    CHECK(error_of([&] { parse(std::string(kHeader) + "protocol P = Q ."); }).code() == "RESOLVE.unknown-protocol");
    CHECK(error_of([&] { parse(std::string(kHeader) + "protocol P = X ::= return z ."); }).code() ==
          "RESOLVE.unknown-variable");
    CHECK(error_of([&] { parse(std::string(kHeader) + "protocol P = X ::= samp d ."); }).code() ==
          "RESOLVE.unknown-distribution");
  }
  SUBCASE("assumptions only see their own channels") {
    CHECK(error_of([&] {
            parse(std::string(kHeader) + "protocol-assumption a : (chn Z :: msg) inputs: |= Z ::= read X = Z ::= read X .");
          }).code() == "RESOLVE.unknown-channel");
  }
}

TEST_CASE("round trip through the printer") {
  for (const char* name : {"secure_channel.ipdl", "coin_flip.ipdl"}) {
    CAPTURE(name);
    SourceFile f = parse_file(case_path(name));
    std::string once = pretty_print(f);
    SourceFile g = parse(once);
    CHECK(pretty_print(g) == once);
    REQUIRE(f.decls.size() == g.decls.size());
    for (size_t k = 0; k < f.decls.size(); ++k) {
      const Decl& a = f.decls[k];
      const Decl& b = g.decls[k];
      CHECK(a.kind == b.kind);
      CHECK(a.name == b.name);
      CHECK(a.protocol == b.protocol);
      CHECK(a.axiom.lhs == b.axiom.lhs);
      CHECK(a.axiom.rhs == b.axiom.rhs);
      CHECK(a.theorem.lhs == b.theorem.lhs);
      CHECK(a.theorem.rhs == b.theorem.rhs);
      CHECK(pretty_print(a.theorem.left) == pretty_print(b.theorem.left));
      CHECK(pretty_print(a.theorem.right) == pretty_print(b.theorem.right));
    }
  }
}

TEST_CASE("secure channel report") {
  RunOptions opts;
  opts.stable = true;
  BoundReport r = run_file(case_path("secure_channel.ipdl"), opts);
  CHECK(r.exit_status == 0);
  CHECK(r.text == slurp(data_path("secure_channel.report")));
  CHECK(r.text.find("indistinguishability assumption cpa :\ncount: 1\n"
                    "context: n * | msg | * 6 + n * | ctxt | * 3 + n * 96 + 12\n") != std::string::npos);
  CHECK(run_file(case_path("secure_channel.ipdl"), opts).text == r.text);
}

TEST_CASE("concrete bound with a perfect semantics") {
  RunOptions opts;
  opts.stable = true;
  opts.concrete = parse_assignments("n=4,msg=128,ctxt=256,key=128,C_sem=1000,C_adv=1000,eta_sem=0,eps_cpa=2^-40");
  BoundReport r = run_file(case_path("secure_channel.ipdl"), opts);
  REQUIRE(r.exit_status == 0);
  // One use, no semantic slack: the bound is the assumption's advantage.
  Rational eps = Rational(1) / Rational(Natural(1) << 40);
  CHECK(r.text.find("advantage <= " + to_string(eps) + " ") != std::string::npos);
  // Context at the given sizes: 4*128*6 + 4*256*3 + 4*96 + 12.
  CHECK(r.text.find("context = " + std::to_string(4 * 128 * 6 + 4 * 256 * 3 + 4 * 96 + 12) + ",") !=
        std::string::npos);
}

TEST_CASE("concrete inputs") {
  SourceFile f = parse_file(case_path("secure_channel.ipdl"));
  BoundInputs in = concrete_inputs(parse_assignments("n=2,msg=3,C_sem=5,eta_sem=1/8,eps_cpa=0.5"), f.sig);
  CHECK(in.sizes.at(CostVar::param("n")) == 2);
  CHECK(in.sizes.at(CostVar::type_size("msg")) == 3);
  CHECK(in.c_sem == 5);
  CHECK(in.eta_sem == Rational(1, 8));
  CHECK(in.epsilon.at("cpa") == Rational(1, 2));
  CHECK(in.functions == 2);
  CHECK(in.distributions == 2);
  CHECK(error_of([&] { concrete_inputs({{"bogus", "1"}}, f.sig); }).code() == "CLI.concrete");
  CHECK(error_of([&] { concrete_inputs({{"n", "1/2"}}, f.sig); }).code() == "CLI.concrete");
  CHECK(error_of([] { parse_assignments("n"); }).code() == "CLI.assignment");
}

TEST_CASE("empty ledger report") {
  Signature sig;
  CHECK(emit_report({}, sig, {}) == "no approximate assumptions used\n");
}

TEST_CASE("misapplied fold fails with the side condition") {
  BoundReport r = run_file(data_path("bad_fold.ipdl"), {});
  CHECK(r.exit_status == 1);
  CHECK(r.text.rfind("error[FOLD-BIND.single-read] at 15:5:", 0) == 0);
}

TEST_CASE("exit status follows the proof") {
  SUBCASE("a gap left open") {
    SourceFile f = parse(std::string(kHeader) + R"(
theorem t : inputs: |= X ::= samp unif ~ X ::= return zeros
proof left: skip right: skip qed .
)");
    BoundReport r = run_source(f, {});
    CHECK(r.exit_status == 1);
    CHECK(r.text.find("error[CLOSE.mismatch]") != std::string::npos);
  }
  SUBCASE("step budget") {
    setenv("IPDL_STEP_BUDGET", "5", 1);
    BoundReport r = run_file(case_path("secure_channel.ipdl"), {});
    unsetenv("IPDL_STEP_BUDGET");
    CHECK(r.exit_status == 1);
    CHECK(r.text.find("error[PROOF.budget]") != std::string::npos);
  }
}

TEST_CASE("oracle check at a toy interpretation") {
  RunOptions opts;
  opts.stable = true;
  opts.oracle_interp = data_path("coin_flip_interp.json");
  BoundReport r = run_file(case_path("coin_flip.ipdl"), opts);
  CHECK(r.exit_status == 0);
  CHECK(r.text.find("oracle check: max advantage 0 over") != std::string::npos);
}
