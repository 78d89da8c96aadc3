#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ipdl/error.hpp"
#include "ipdl/kernel.hpp"

namespace ipdl {

/// One step of a proof script.
struct Tactic {
  enum class Kind { Seq, Subst, Drop, Fold, Absorb, AddInternal, Change, UseAssumption, Induction, UseApprox };

  Kind kind = Kind::Seq;
  std::string source;             // Subst/Drop/Fold source; Absorb/Change target
  std::string target;             // Subst/Drop/Fold destination
  bool source_family = false;     // written `fam` rather than `chn`
  bool target_family = false;
  ChannelDecl decl;               // AddInternal
  std::string index_var;          // AddInternal family index; Induction generic index
  std::string family_index;       // Induction: index named after "on"
  Reaction reaction;              // AddInternal/Change
  bool sym = false;               // Change: "sym from change"
  bool in_clause = false;         // Change: "in currentProtocol(...)"
  bool reverse = false;           // UseAssumption: rewrite right to left
  std::string axiom;              // UseAssumption/UseApprox
  std::vector<ChannelRef> at;     // UseAssumption "on" channels
  std::vector<bool> at_family;    // written `fam`, parallel to `at`
  std::vector<Tactic> body;       // Seq steps; Change in-clause; Induction body
  std::optional<SourceSpan> span;
};

/// Canonical prenex form of the right-hand side of j: binders outermost in
/// name order, components right-nested in written-channel order, no 0.
ExactJudgment normalize(const Kernel& k, const ExactJudgment& j);

/// a = b by canonical rearrangement, removal of unread internal channels and
/// reaction equality per component.
ExactJudgment close_gap(const Kernel& k, const Protocol& a, const Protocol& b);

/// Extends j by an exact tactic (every tactic except use_approx).
ExactJudgment run_exact(const Kernel& k, const ExactJudgment& j, const Tactic& t);

/// A proof in progress: start ≈ current with the approximate steps taken so far.
class ProofState {
 public:
  ProofState(const Kernel& k, const Protocol& start);

  const Kernel& kernel() const { return *kernel_; }
  const Protocol& start() const { return start_; }
  const Protocol& current() const { return tail_.rhs(); }
  /// start ≈ current, closed at the goal typing.
  ApproxJudgment judgment() const;
  Ledger ledger() const { return judgment().ledger(); }
  /// One line per executed tactic.
  const std::vector<std::string>& log() const { return log_; }

 private:
  friend ProofState run_tactic(const ProofState& s, const Tactic& t);
  const Kernel* kernel_;
  Protocol start_;
  std::optional<ApproxJudgment> prefix_;
  ExactJudgment tail_;
  std::vector<std::string> log_;
};

ProofState run_tactic(const ProofState& s, const Tactic& t);

/// ψ of the approximate step `use approx assumption k` would take in s.
CostExpr tactic_context_norm(const ProofState& s, const std::string& k);

/// left.start ≈ right.start by meeting the two current protocols.
ApproxJudgment close_proof(const ProofState& left, const ProofState& right);

std::string describe(const Tactic& t);

}  // namespace ipdl
