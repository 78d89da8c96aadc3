#pragma once

#include <cstddef>

#include "ipdl/ast.hpp"
#include "ipdl/cost_expr.hpp"

namespace ipdl {

/// Size of the punctuation alphabet of the tape encoding.
inline constexpr std::size_t kPuncCount = 19;

/// Size of the keyword alphabet. The assignment keyword "react" is emitted by
/// the encoder but is not part of the listed keyword set; configure with
/// IPDL_COUNT_REACT_KEYWORD to count it.
#ifdef IPDL_COUNT_REACT_KEYWORD
inline constexpr std::size_t kKeywordCount = 22;
#else
inline constexpr std::size_t kKeywordCount = 21;
#endif

/// Symbol-count norms. Type constants map to | t | variables, parameters stay
/// symbolic. A family of b members costs b * (member + 3) + 1, the norm of its
/// 0-terminated unrolling.
CostExpr norm(const DataType& t);
CostExpr norm(const Expr& e);
CostExpr norm(const Reaction& r);
CostExpr norm(const Protocol& p);

/// The reduced-adversary resource polynomial for absorbing a context.
Natural soundness_poly(const Natural& x, const Natural& y, const Natural& z, const Natural& nf,
                       const Natural& nd);

}  // namespace ipdl
