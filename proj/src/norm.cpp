#include "ipdl/norm.hpp"

namespace ipdl {

CostExpr norm(const DataType& t) {
  switch (t.kind()) {
    case DataType::Kind::Const: return CostExpr::type_size(t.name());
    case DataType::Kind::Unit: return 0;
    case DataType::Kind::Bool: return 1;
    case DataType::Kind::Product: return norm(t.first()) + norm(t.second());
  }
  return 0;
}

CostExpr norm(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Var: return norm(e.type) + 5;
    case Expr::Kind::Unit:
    case Expr::Kind::True:
    case Expr::Kind::False: return 3;
    case Expr::Kind::App:
    case Expr::Kind::Fst:
    case Expr::Kind::Snd: return norm(e.type) + norm(e.type2) + norm(e.args[0]) + 5;
    case Expr::Kind::Pair: return norm(e.args[0]) + norm(e.args[1]);
    case Expr::Kind::Lit: return norm(e.type);
  }
  return 0;
}

CostExpr norm(const Reaction& r) {
  switch (r.kind) {
    case Reaction::Kind::Ret: return norm(r.expr) + 3;
    case Reaction::Kind::Samp: return norm(r.type) + norm(r.type2) + norm(r.expr) + 5;
    case Reaction::Kind::Read: return norm(r.type) + 6;
    case Reaction::Kind::If: return norm(r.expr) + norm(r.body[0]) + norm(r.body[1]) + 5;
    case Reaction::Kind::Bind: return norm(r.type) + norm(r.body[0]) + norm(r.body[1]) + 6;
    case Reaction::Kind::Val: return norm(r.type) + 2;
  }
  return 0;
}

CostExpr norm(const Protocol& p) {
  switch (p.kind) {
    case Protocol::Kind::Zero: return 1;
    case Protocol::Kind::Assign: return norm(p.reaction) + 5;
    case Protocol::Kind::AssignValue: return norm(p.type) + 4;
    case Protocol::Kind::Par: return norm(p.body[0]) + norm(p.body[1]) + 3;
    case Protocol::Kind::New:
      if (p.bound) return *p.bound * (norm(p.type) + 5) + norm(p.body[0]);
      return norm(p.type) + norm(p.body[0]) + 5;
    case Protocol::Kind::Family: return *p.bound * (norm(p.reaction) + 5 + 3) + 1;
  }
  return 0;
}

Natural soundness_poly(const Natural& x, const Natural& y, const Natural& z, const Natural& nf,
                       const Natural& nd) {
  return y * y + 8 * y * z + 15 * z * z + (nf + nd + 1) * x + 34 * y + 47 * z +
         (Natural(kPuncCount) + Natural(kKeywordCount) + nf + nd + 161);
}

}  // namespace ipdl
