#include "ipdl/cost_expr.hpp"

#include <algorithm>

#include "ipdl/error.hpp"

namespace ipdl {

struct CostExpr::Node {
  Kind kind;
  Natural value;
  CostVar var;
  std::vector<CostExpr> args;
};

std::string to_string(const CostVar& v) {
  if (v.kind == CostVar::Kind::TypeSize) return "| " + v.name + " |";
  return v.name;
}

CostExpr::CostExpr() : CostExpr(Natural(0)) {}
CostExpr::CostExpr(unsigned long long c) : CostExpr(Natural(c)) {}
CostExpr::CostExpr(const Natural& c)
    : node_(std::make_shared<const Node>(Node{Kind::Const, c, {}, {}})) {}

CostExpr CostExpr::constant(const Natural& c) { return CostExpr(c); }

CostExpr CostExpr::var(CostVar v) {
  return CostExpr(std::make_shared<const Node>(Node{Kind::Var, 0, std::move(v), {}}));
}

CostExpr CostExpr::sum(std::vector<CostExpr> args) {
  if (args.empty()) return CostExpr(0ULL);
  if (args.size() == 1) return args.front();
  return CostExpr(std::make_shared<const Node>(Node{Kind::Sum, 0, {}, std::move(args)}));
}

CostExpr CostExpr::product(std::vector<CostExpr> args) {
  if (args.empty()) return CostExpr(1ULL);
  if (args.size() == 1) return args.front();
  return CostExpr(std::make_shared<const Node>(Node{Kind::Prod, 0, {}, std::move(args)}));
}

CostExpr CostExpr::max(std::vector<CostExpr> args) {
  if (args.empty()) return CostExpr(0ULL);
  if (args.size() == 1) return args.front();
  return CostExpr(std::make_shared<const Node>(Node{Kind::Max, 0, {}, std::move(args)}));
}

CostExpr::Kind CostExpr::kind() const { return node_->kind; }
const Natural& CostExpr::value() const { return node_->value; }
const CostVar& CostExpr::variable() const { return node_->var; }
const std::vector<CostExpr>& CostExpr::args() const { return node_->args; }

bool operator==(const CostExpr& a, const CostExpr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case CostExpr::Kind::Const: return a.value() == b.value();
    case CostExpr::Kind::Var: return a.variable() == b.variable();
    default: return a.args() == b.args();
  }
}

CostExpr operator+(const CostExpr& a, const CostExpr& b) {
  if (a.is_constant() && a.value() == 0) return b;
  if (b.is_constant() && b.value() == 0) return a;
  if (a.is_constant() && b.is_constant()) return CostExpr(a.value() + b.value());
  std::vector<CostExpr> args;
  for (const CostExpr* e : {&a, &b}) {
    if (e->kind() == CostExpr::Kind::Sum)
      args.insert(args.end(), e->args().begin(), e->args().end());
    else
      args.push_back(*e);
  }
  return CostExpr::sum(std::move(args));
}

CostExpr operator*(const CostExpr& a, const CostExpr& b) {
  if (a.is_constant() && a.value() == 1) return b;
  if (b.is_constant() && b.value() == 1) return a;
  if (a.is_constant() && b.is_constant()) return CostExpr(a.value() * b.value());
  std::vector<CostExpr> args;
  for (const CostExpr* e : {&a, &b}) {
    if (e->kind() == CostExpr::Kind::Prod)
      args.insert(args.end(), e->args().begin(), e->args().end());
    else
      args.push_back(*e);
  }
  return CostExpr::product(std::move(args));
}

Natural cost_eval(const CostExpr& c, const CostEnv& env) {
  switch (c.kind()) {
    case CostExpr::Kind::Const: return c.value();
    case CostExpr::Kind::Var: {
      auto it = env.find(c.variable());
      if (it == env.end()) fail("COST.unbound-variable", "unbound cost variable " + to_string(c.variable()));
      return it->second;
    }
    case CostExpr::Kind::Sum: {
      Natural s = 0;
      for (const auto& a : c.args()) s += cost_eval(a, env);
      return s;
    }
    case CostExpr::Kind::Prod: {
      Natural p = 1;
      for (const auto& a : c.args()) p *= cost_eval(a, env);
      return p;
    }
    case CostExpr::Kind::Max: {
      Natural m = 0;
      for (const auto& a : c.args()) m = std::max(m, cost_eval(a, env));
      return m;
    }
  }
  return 0;
}

namespace {

// Canonical form: max over polynomials with natural coefficients.
using Monomial = std::map<CostVar, unsigned>;
using Poly = std::map<Monomial, Natural>;
using MaxPoly = std::vector<Poly>;

Poly poly_add(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b) r[m] += c;
  return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) {
      Monomial m = ma;
      for (const auto& [v, e] : mb) m[v] += e;
      r[m] += ca * cb;
    }
  for (auto it = r.begin(); it != r.end();)
    it = it->second == 0 ? r.erase(it) : std::next(it);
  return r;
}

bool dominated(const Poly& p, const Poly& q) {
  for (const auto& [m, c] : p) {
    auto it = q.find(m);
    if (it == q.end() || it->second < c) return false;
  }
  return true;
}

MaxPoly prune(MaxPoly branches) {
  std::sort(branches.begin(), branches.end());
  branches.erase(std::unique(branches.begin(), branches.end()), branches.end());
  MaxPoly kept;
  for (size_t i = 0; i < branches.size(); ++i) {
    bool drop = false;
    for (size_t j = 0; j < branches.size() && !drop; ++j)
      if (i != j && dominated(branches[i], branches[j])) drop = true;
    if (!drop) kept.push_back(branches[i]);
  }
  return kept;
}

MaxPoly combine(const MaxPoly& a, const MaxPoly& b, bool multiply) {
  MaxPoly r;
  for (const auto& pa : a)
    for (const auto& pb : b) r.push_back(multiply ? poly_mul(pa, pb) : poly_add(pa, pb));
  return prune(std::move(r));
}

MaxPoly to_maxpoly(const CostExpr& c) {
  switch (c.kind()) {
    case CostExpr::Kind::Const: {
      Poly p;
      if (c.value() != 0) p[{}] = c.value();
      return {p};
    }
    case CostExpr::Kind::Var: return {Poly{{Monomial{{c.variable(), 1}}, Natural(1)}}};
    case CostExpr::Kind::Sum: {
      MaxPoly acc{Poly{}};
      for (const auto& a : c.args()) acc = combine(acc, to_maxpoly(a), false);
      return acc;
    }
    case CostExpr::Kind::Prod: {
      MaxPoly acc{Poly{{Monomial{}, Natural(1)}}};
      for (const auto& a : c.args()) acc = combine(acc, to_maxpoly(a), true);
      return acc;
    }
    case CostExpr::Kind::Max: {
      MaxPoly acc;
      for (const auto& a : c.args()) {
        auto sub = to_maxpoly(a);
        acc.insert(acc.end(), sub.begin(), sub.end());
      }
      return prune(std::move(acc));
    }
  }
  return {Poly{}};
}

struct Ranker {
  std::map<CostVar, size_t> rank;
  size_t operator()(const CostVar& v) const {
    auto it = rank.find(v);
    return it == rank.end() ? rank.size() : it->second;
  }
  bool less(const CostVar& a, const CostVar& b) const {
    size_t ra = (*this)(a), rb = (*this)(b);
    if (ra != rb) return ra < rb;
    return a < b;
  }
};

std::vector<CostVar> expand(const Monomial& m, const Ranker& r) {
  std::vector<CostVar> vs;
  for (const auto& [v, e] : m)
    for (unsigned k = 0; k < e; ++k) vs.push_back(v);
  std::stable_sort(vs.begin(), vs.end(), [&](const CostVar& a, const CostVar& b) { return r.less(a, b); });
  return vs;
}

bool monomial_before(const Monomial& a, const Monomial& b, const Ranker& r) {
  auto va = expand(a, r), vb = expand(b, r);
  if (va.size() != vb.size()) return va.size() > vb.size();
  for (size_t i = 0; i < va.size(); ++i) {
    if (va[i] == vb[i]) continue;
    return r.less(va[i], vb[i]);
  }
  return false;
}

CostExpr poly_to_expr(const Poly& p, const Ranker& r) {
  std::vector<const Monomial*> ms;
  for (const auto& [m, c] : p) ms.push_back(&m);
  std::sort(ms.begin(), ms.end(), [&](const Monomial* a, const Monomial* b) { return monomial_before(*a, *b, r); });
  std::vector<CostExpr> terms;
  for (const Monomial* m : ms) {
    std::vector<CostExpr> factors;
    for (const auto& v : expand(*m, r)) factors.push_back(CostExpr::var(v));
    const Natural& coeff = p.at(*m);
    if (coeff != 1 || factors.empty()) factors.emplace_back(coeff);
    terms.push_back(CostExpr::product(std::move(factors)));
  }
  return CostExpr::sum(std::move(terms));
}

}  // namespace

CostExpr cost_normalize(const CostExpr& c, const VarOrder& order) {
  Ranker r;
  for (const auto& v : order) r.rank.emplace(v, r.rank.size());
  MaxPoly branches = to_maxpoly(c);
  std::vector<CostExpr> parts;
  for (const auto& p : branches) parts.push_back(poly_to_expr(p, r));
  std::vector<size_t> idx(parts.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return to_string(parts[a]) < to_string(parts[b]); });
  std::vector<CostExpr> sorted;
  for (size_t i : idx) sorted.push_back(parts[i]);
  return CostExpr::max(std::move(sorted));
}

bool cost_equal(const CostExpr& a, const CostExpr& b) {
  return to_maxpoly(a) == to_maxpoly(b);
}

unsigned cost_degree(const CostExpr& c) {
  unsigned d = 0;
  for (const auto& p : to_maxpoly(c))
    for (const auto& [m, coeff] : p) {
      unsigned deg = 0;
      for (const auto& [v, e] : m) deg += e;
      d = std::max(d, deg);
    }
  return d;
}

std::set<CostVar> cost_vars(const CostExpr& c) {
  std::set<CostVar> out;
  if (c.kind() == CostExpr::Kind::Var) out.insert(c.variable());
  for (const auto& a : c.args()) {
    auto sub = cost_vars(a);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

CostExpr cost_substitute(const CostExpr& c, const CostVar& v, const CostExpr& by) {
  switch (c.kind()) {
    case CostExpr::Kind::Const: return c;
    case CostExpr::Kind::Var: return c.variable() == v ? by : c;
    default: {
      std::vector<CostExpr> args;
      for (const auto& a : c.args()) args.push_back(cost_substitute(a, v, by));
      if (c.kind() == CostExpr::Kind::Sum) return CostExpr::sum(std::move(args));
      if (c.kind() == CostExpr::Kind::Prod) return CostExpr::product(std::move(args));
      return CostExpr::max(std::move(args));
    }
  }
}

std::optional<Natural> cost_constant(const CostExpr& c) {
  if (!cost_vars(c).empty()) return std::nullopt;
  return cost_eval(c, {});
}

std::string to_string(const CostExpr& c) {
  switch (c.kind()) {
    case CostExpr::Kind::Const: return c.value().str();
    case CostExpr::Kind::Var: return to_string(c.variable());
    case CostExpr::Kind::Sum: {
      std::string s;
      for (size_t i = 0; i < c.args().size(); ++i) {
        if (i) s += " + ";
        s += to_string(c.args()[i]);
      }
      return s;
    }
    case CostExpr::Kind::Prod: {
      std::string s;
      for (size_t i = 0; i < c.args().size(); ++i) {
        if (i) s += " * ";
        const auto& a = c.args()[i];
        s += a.kind() == CostExpr::Kind::Sum ? "(" + to_string(a) + ")" : to_string(a);
      }
      return s;
    }
    case CostExpr::Kind::Max: {
      std::string s = "max(";
      for (size_t i = 0; i < c.args().size(); ++i) {
        if (i) s += ", ";
        s += to_string(c.args()[i]);
      }
      return s + ")";
    }
  }
  return {};
}

}  // namespace ipdl
