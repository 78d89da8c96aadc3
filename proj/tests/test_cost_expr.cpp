#include <doctest.h>

#include <random>

#include "ipdl/cost_expr.hpp"
#include "ipdl/error.hpp"

using namespace ipdl;

namespace {

const CostExpr n = CostExpr::param("n");
const CostExpr msg = CostExpr::type_size("msg");
const CostExpr ctxt = CostExpr::type_size("ctxt");

CostExpr random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 4);
  switch (pick(rng)) {
    case 0: return CostExpr(static_cast<unsigned long long>(rng() % 7));
    case 1: {
      const CostExpr vars[] = {n, msg, ctxt};
      return vars[rng() % 3];
    }
    case 2: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 3: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    default: return CostExpr::max({random_expr(rng, depth - 1), random_expr(rng, depth - 1), random_expr(rng, depth - 1)});
  }
}

}  // namespace

TEST_CASE("normalization examples") {
  CHECK(to_string(cost_normalize(CostExpr::max({n, n}))) == "n");
  CHECK(to_string(cost_normalize(n * 2 + n * 3)) == "n * 5");
  CostExpr e = (n * msg * 2) * 3 + 12 + n * msg * 0;
  CHECK(to_string(cost_normalize(e)) == "n * | msg | * 6 + 12");
}

TEST_CASE("declared variable order drives term order") {
  VarOrder order{CostVar::param("n"), CostVar::type_size("key"), CostVar::type_size("msg"),
                 CostVar::type_size("ctxt")};
  CostExpr e = 12 + n * 96 + ctxt * n * 3 + msg * n * 6;
  CHECK(to_string(cost_normalize(e, order)) == "n * | msg | * 6 + n * | ctxt | * 3 + n * 96 + 12");
}

TEST_CASE("max is pushed outermost and dominated branches vanish") {
  CostExpr e = CostExpr::max({n, msg}) + 1;
  CHECK(to_string(cost_normalize(e)) == "max(n + 1, | msg | + 1)");
  CHECK(to_string(cost_normalize(CostExpr::max({n + 1, n, 0ULL}))) == "n + 1");
  CHECK(to_string(cost_normalize(CostExpr::max({5, n}))) == "max(5, n)");
}

TEST_CASE("evaluation") {
  CostEnv env{{CostVar::param("n"), 3}, {CostVar::type_size("msg"), 2}};
  CHECK(cost_eval(n * msg * 6 + 12, env) == 48);
  CHECK(cost_eval(CostExpr::max({5, n}), {{CostVar::param("n"), 2}}) == 5);
  CHECK_THROWS_AS(cost_eval(ctxt, env), Error);
}

TEST_CASE("degree") {
  CHECK(cost_degree(n * msg * 6 + 12) == 2);
  CHECK(cost_degree(CostExpr(0ULL)) == 0);
  CostExpr N = CostExpr::param("N"), K = CostExpr::param("K");
  CHECK(cost_degree(CostExpr::max({N * K * 3, N * N * K * 218})) == 3);
}

TEST_CASE("normalization preserves value under random assignments") {
  std::mt19937 rng(7);
  for (int i = 0; i < 60; ++i) {
    CostExpr e = random_expr(rng, 4);
    CostExpr c = cost_normalize(e);
    for (int k = 0; k < 1000; ++k) {
      CostEnv env{{CostVar::param("n"), rng() % 50},
                  {CostVar::type_size("msg"), rng() % 50},
                  {CostVar::type_size("ctxt"), rng() % 50}};
      REQUIRE(cost_eval(e, env) == cost_eval(c, env));
    }
    CHECK(cost_normalize(c) == c);
  }
}

TEST_CASE("evaluation is monotone in every variable") {
  std::mt19937 rng(11);
  for (int i = 0; i < 60; ++i) {
    CostExpr e = random_expr(rng, 4);
    for (int k = 0; k < 100; ++k) {
      CostEnv env{{CostVar::param("n"), rng() % 20},
                  {CostVar::type_size("msg"), rng() % 20},
                  {CostVar::type_size("ctxt"), rng() % 20}};
      Natural base = cost_eval(e, env);
      for (auto& [v, val] : env) {
        CostEnv up = env;
        up[v] = val + 1 + rng() % 5;
        REQUIRE(cost_eval(e, up) >= base);
      }
    }
  }
}
