#pragma once

#include "ipdl/ast.hpp"

namespace ipdl {

/// Canonical form of a reaction under the monad laws of the reaction language:
/// bind associativity, left and right unit, branch selection on constant
/// conditions, projection of pairs, contraction of repeated reads, removal of
/// unused samples, and exchange of independent binds (canonical topological
/// order). Bound variables are renamed to %0, %1, ...
Reaction normalize_reaction(const Reaction& r);

/// Sound but incomplete equivalence test: equal canonical forms.
bool reactions_equivalent(const Reaction& a, const Reaction& b);

Expr simplify_expr(const Expr& e);

}  // namespace ipdl
