#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ipdl/ast.hpp"
#include "ipdl/numeric.hpp"
#include "ipdl/typing.hpp"

namespace ipdl {

/// Declared assumption Δᵏ ⊢ Pᵏ (= | ≈) Qᵏ : Iᵏ → Oᵏ.
struct Axiom {
  std::string name;
  bool approximate = false;
  ChannelContext delta;
  ProtocolType type;
  Protocol lhs;
  Protocol rhs;
};

/// Signature, goal typing Δ ⊢ _ : I → O and the declared assumptions.
struct Theory {
  Signature sig;
  ChannelContext delta;
  ProtocolType type;
  std::map<std::string, Axiom> axioms;

  const Axiom& axiom(const std::string& name) const;
};

/// Checks both sides of an assumption at its own typing.
void check_axiom(const Signature& sig, const Axiom& a);

/// Child positions: 0/1 under ‖, 0 under new.
using Path = std::vector<int>;

enum class Rule {
  ParAssoc,      // (P‖Q)‖R → P‖(Q‖R)
  ParAssocInv,   // P‖(Q‖R) → (P‖Q)‖R
  ParComm,       // P‖Q → Q‖P
  ParUnit,       // P‖0 → P
  ParUnitInv,    // P → P‖0
  CompNew,       // P ‖ new o in Q → new o in (P‖Q), o ∉ fc(P)
  CompNewInv,    // new o in (P‖Q) → P ‖ new o in Q, o ∉ fc(P)
  NewExch,       // new a in new b in P → new b in new a in P
  NewUnused,     // new o in P → P, o ∉ fc(P)
  NewUnusedInv,  // P → new o in P, o ∉ fc(P)
  Alpha,         // new o in P → new o' in P[o := o']
  Absorb,        // P ‖ Q → P, Q has no outputs
  AbsorbInv,     // P → P ‖ Q, Q has no outputs
  FoldBind,      // new c in ((c ::= R) ‖ (o ::= S[read c])) → o ::= S[R]
  Subst,         // (o1 ::= R1) ‖ (o2 ::= S) → (o1 ::= R1) ‖ (o2 ::= S[read o1 := R1])
  Drop,          // (o1 ::= R1) ‖ (o2 ::= x <- read o1; S) → (o1 ::= R1) ‖ (o2 ::= S)
  ReactEq,       // (o ::= R) → (o ::= R'), R ≡ R' by the reaction laws
  Axiom,         // φ(Pᵏ) → φ(Qᵏ) for an exact assumption
  FamilyInd,     // exact assumption applied to the members at a generic index
};

std::string to_string(Rule r);

struct RuleArgs {
  std::string channel;              // Subst/Drop/FoldBind source; Alpha new name
  ChannelDecl decl;                 // NewUnusedInv binder
  Protocol protocol;                // AbsorbInv component
  Reaction reaction;                // ReactEq replacement
  std::string axiom;                // Axiom/FamilyInd
  bool reverse = false;             // Axiom/FamilyInd: rewrite Qᵏ to Pᵏ
  ChannelRenaming phi;              // Axiom/FamilyInd embedding
  std::string index_var;            // FamilyInd generic index
};

struct ProofNode {
  enum class Kind { Refl, Step, Sym, Trans };
  Kind kind = Kind::Refl;
  Protocol lhs;
  Protocol rhs;
  Rule rule = Rule::ParComm;
  Path path;
  RuleArgs args;
  std::shared_ptr<const ProofNode> a;
  std::shared_ptr<const ProofNode> b;
};

/// Δ ⊢ lhs = rhs; only the kernel constructs these.
class ExactJudgment {
 public:
  const Protocol& lhs() const { return node_->lhs; }
  const Protocol& rhs() const { return node_->rhs; }
  const std::shared_ptr<const ProofNode>& proof() const { return node_; }
  size_t steps() const;

 private:
  friend class Kernel;
  explicit ExactJudgment(std::shared_ptr<const ProofNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const ProofNode> node_;
};

/// Single-step approximate judgment Δ ⊢ P ≈ Q : I → O at axiom k with context cost ψ.
class ApproxCong {
 public:
  const Protocol& lhs() const { return lhs_; }
  const Protocol& rhs() const { return rhs_; }
  const ChannelContext& delta() const { return delta_; }
  const ProtocolType& type() const { return type_; }
  const std::string& axiom() const { return axiom_; }
  const CostExpr& context() const { return context_; }
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  friend class Kernel;
  ApproxCong() = default;
  Protocol lhs_, rhs_;
  ChannelContext delta_;
  ProtocolType type_;
  std::string axiom_;
  CostExpr context_;
  std::vector<std::string> trace_;
};

struct LedgerEntry {
  Natural count = 0;
  CostExpr context;
};

/// Per approximate axiom: ξ (invocations) and ψ (largest context).
using Ledger = std::map<std::string, LedgerEntry>;

/// Approximate equivalence judgment Δ ⊢ P ≈ Q : I → O : ξ : ψ.
class ApproxJudgment {
 public:
  const Protocol& lhs() const { return lhs_; }
  const Protocol& rhs() const { return rhs_; }
  const Ledger& ledger() const { return ledger_; }
  const std::vector<std::string>& trace() const { return trace_; }
  size_t exact_steps() const { return exact_steps_; }

 private:
  friend class Kernel;
  ApproxJudgment() = default;
  Protocol lhs_, rhs_;
  Ledger ledger_;
  std::vector<std::string> trace_;
  size_t exact_steps_ = 0;
};

class Kernel {
 public:
  explicit Kernel(Theory t);
  const Theory& theory() const { return theory_; }

  /// Validated single rewrite at a path of p.
  Protocol apply(const Protocol& p, Rule r, const Path& path, const RuleArgs& args) const;
  /// Channel context in scope at a path.
  ChannelContext context_at(const Protocol& p, const Path& path) const;

  ExactJudgment refl(const Protocol& p) const;
  /// Extends j by one rule application at its right-hand side.
  ExactJudgment step(const ExactJudgment& j, Rule r, const Path& path, const RuleArgs& args = {}) const;
  ExactJudgment sym(const ExactJudgment& j) const;
  ExactJudgment trans(const ExactJudgment& a, const ExactJudgment& b) const;
  /// Re-checks every step; returns the number of rule applications.
  size_t replay(const ExactJudgment& j) const;

  ApproxCong approx_axiom(const std::string& k) const;
  ApproxCong embed(const ApproxCong& j, const ChannelRenaming& phi, const ChannelContext& target) const;
  ApproxCong input_unused(const ApproxCong& j, const ChannelItem& c) const;
  ApproxCong cong_comp(const ApproxCong& j, const Protocol& q) const;
  ApproxCong cong_new(const ApproxCong& j, const ChannelDecl& o) const;

  /// STRICT, APPROX-CONG, SYM, TRANS at the goal typing.
  ApproxJudgment strict(const ExactJudgment& j) const;
  ApproxJudgment approx(const ApproxCong& j) const;
  ApproxJudgment sym(const ApproxJudgment& j) const;
  ApproxJudgment trans(const ApproxJudgment& a, const ApproxJudgment& b) const;

  Ledger empty_ledger() const;

 private:
  Theory theory_;
};

/// ξ summed, ψ maximized per axiom.
Ledger merge_ledgers(const Ledger& a, const Ledger& b);

/// Line-oriented log of the rule applications of a derivation.
std::vector<std::string> audit_log(const ExactJudgment& j);

struct AsymptoticEntry {
  std::string axiom;
  Natural count;
  CostExpr context;
  unsigned degree = 0;
  bool polynomial = true;
};

std::vector<AsymptoticEntry> check_asymptotic(const Ledger& ledger, const VarOrder& order = {});

struct BoundInputs {
  Natural c_sem = 0;
  Natural c_adv = 0;
  CostEnv sizes;
  Rational eta_sem = 0;
  std::map<std::string, Rational> epsilon;
  Natural functions = 0;      // |Σ_f|
  Natural distributions = 0;  // |Σ_d|
};

struct BoundTerm {
  std::string axiom;
  Natural count;
  Natural context;
  Natural budget;
  Rational epsilon;
  Rational term;
};

struct ConcreteBound {
  std::vector<BoundTerm> terms;
  Rational advantage = 0;
};

ConcreteBound concrete_bound(const Ledger& ledger, const BoundInputs& in);

}  // namespace ipdl
