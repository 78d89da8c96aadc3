#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipdl/kernel.hpp"
#include "ipdl/semantics.hpp"
#include "ipdl/tactics.hpp"

namespace ipdl {

/// Goal `inputs: I |= lhs (~ | =) rhs` with a two-sided proof that meets in the middle.
struct Theorem {
  bool approximate = true;
  ProtocolType type;
  Protocol lhs;
  Protocol rhs;
  Tactic left;
  Tactic right;
};

struct Decl {
  enum class Kind { Parameter, Type, Function, Distribution, Channels, Assumption, Protocol, Theorem };

  Kind kind = Kind::Parameter;
  std::string name;
  SourceSpan span;
  FunSig fun;               // Function/Distribution
  ChannelContext channels;  // Channels
  Axiom axiom;              // Assumption
  Protocol protocol;        // Protocol
  Theorem theorem;          // Theorem
};

struct SourceFile {
  Signature sig;
  ChannelContext channels;  // union of the channel declarations
  std::vector<Decl> decls;
};

SourceFile parse(const std::string& text);
SourceFile parse_file(const std::string& path);

std::string pretty_print(const SourceFile& f);
std::string pretty_print(const Tactic& t);

struct RunOptions {
  bool trace = false;
  bool stable = false;
  bool strategy_audit = false;
  std::map<std::string, std::string> concrete;  // k=v pairs; empty for none
  /// Semantic cross-check of each theorem at the given parameter values under
  /// the interpretation file; skipped when oracle_interp is empty.
  std::string oracle_interp;
  std::map<std::string, std::string> oracle_params;
  unsigned oracle_rounds = 3;
  size_t oracle_cap = 100;
};

struct TheoremResult {
  std::string name;
  Ledger ledger;
  size_t exact_steps = 0;
  std::vector<std::string> trace;
  std::vector<std::string> log;
};

struct BoundReport {
  std::vector<TheoremResult> theorems;
  std::string text;
  int exit_status = 0;
};

/// Goal theory of a theorem: global channels, its typing and every declared assumption.
Theory theory_for(const SourceFile& f, const Theorem& th);

/// Typechecks every declaration, runs each proof and renders the report.
/// Failures are reported in the text with a nonzero status.
BoundReport run_source(const SourceFile& f, const RunOptions& opts);
BoundReport run_file(const std::string& path, const RunOptions& opts);

/// Counts and contexts per used approximate assumption; with concrete sizes
/// also the context sizes, adversary budgets and the final advantage bound.
std::string emit_report(const Ledger& ledger, const Signature& sig, const RunOptions& opts);

/// Builds the bound inputs from k=v pairs: parameter and type sizes, C_sem,
/// C_adv, eta_sem and eps_<assumption>.
BoundInputs concrete_inputs(const std::map<std::string, std::string>& kv, const Signature& sig);

/// Largest advantage of the enumerated adversary pool between the two sides
/// of a theorem, desugared at `params`.
struct OracleResult {
  Rational max_advantage = 0;
  size_t pool = 0;
};
OracleResult oracle_check(const SourceFile& f, const Theorem& th, const Interpretation& interp,
                          const CostEnv& params, unsigned rounds, size_t cap);

/// Parses "k=v,k=v".
std::map<std::string, std::string> parse_assignments(const std::string& text);

}  // namespace ipdl
