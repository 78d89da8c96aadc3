#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ipdl/numeric.hpp"

namespace ipdl {

/// A variable of a cost expression: a numeric parameter (n), the bit length of a
/// type symbol (| msg |), or a family index bound inside a family body.
struct CostVar {
  enum class Kind { Param, TypeSize, Index };
  Kind kind = Kind::Param;
  std::string name;

  static CostVar param(std::string n) { return {Kind::Param, std::move(n)}; }
  static CostVar type_size(std::string n) { return {Kind::TypeSize, std::move(n)}; }
  static CostVar index(std::string n) { return {Kind::Index, std::move(n)}; }

  auto operator<=>(const CostVar&) const = default;
};

std::string to_string(const CostVar& v);

/// Immutable expression tree over naturals with +, *, max.
class CostExpr {
 public:
  enum class Kind { Const, Var, Sum, Prod, Max };

  CostExpr();
  CostExpr(unsigned long long c);  // NOLINT: implicit from literals is intended
  CostExpr(const Natural& c);      // NOLINT

  static CostExpr constant(const Natural& c);
  static CostExpr var(CostVar v);
  static CostExpr param(std::string name) { return var(CostVar::param(std::move(name))); }
  static CostExpr type_size(std::string name) { return var(CostVar::type_size(std::move(name))); }
  static CostExpr index(std::string name) { return var(CostVar::index(std::move(name))); }
  static CostExpr sum(std::vector<CostExpr> args);
  static CostExpr product(std::vector<CostExpr> args);
  static CostExpr max(std::vector<CostExpr> args);

  Kind kind() const;
  const Natural& value() const;
  const CostVar& variable() const;
  const std::vector<CostExpr>& args() const;

  bool is_constant() const { return kind() == Kind::Const; }

  friend bool operator==(const CostExpr& a, const CostExpr& b);

 private:
  struct Node;
  explicit CostExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

CostExpr operator+(const CostExpr& a, const CostExpr& b);
CostExpr operator*(const CostExpr& a, const CostExpr& b);

using CostEnv = std::map<CostVar, Natural>;

/// Preferred variable order for canonical printing; unlisted variables follow
/// in (kind, name) order.
using VarOrder = std::vector<CostVar>;

Natural cost_eval(const CostExpr& c, const CostEnv& env);
CostExpr cost_normalize(const CostExpr& c, const VarOrder& order = {});
bool cost_equal(const CostExpr& a, const CostExpr& b);
unsigned cost_degree(const CostExpr& c);
std::set<CostVar> cost_vars(const CostExpr& c);
CostExpr cost_substitute(const CostExpr& c, const CostVar& v, const CostExpr& by);
/// Some constant value when the expression has no variables.
std::optional<Natural> cost_constant(const CostExpr& c);

/// Report syntax: `n * | msg | * 6 + 12`, `max(a, b)`.
std::string to_string(const CostExpr& c);

}  // namespace ipdl
