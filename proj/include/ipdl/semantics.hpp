#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ipdl/ast.hpp"
#include "ipdl/numeric.hpp"

namespace ipdl {

/// Finite distribution keyed by a canonical string, with exact weights. Total
/// weight may be below 1; the shortfall is halting mass.
template <class T>
class Dist {
 public:
  struct Entry {
    T value;
    Rational weight;
  };

  void add(const std::string& key, const T& value, const Rational& w) {
    if (w == 0) return;
    auto it = entries_.find(key);
    if (it == entries_.end())
      entries_.emplace(key, Entry{value, w});
    else
      it->second.weight += w;
  }
  Rational total() const {
    Rational t = 0;
    for (const auto& [k, e] : entries_) t += e.weight;
    return t;
  }
  Rational weight(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? Rational(0) : it->second.weight;
  }
  const std::map<std::string, Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const Dist& a, const Dist& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (const auto& [k, e] : a.entries_)
      if (b.weight(k) != e.weight) return false;
    return true;
  }

 private:
  std::map<std::string, Entry> entries_;
};

using ValueDist = std::map<Value, Rational>;
using ProtocolDist = Dist<Protocol>;

struct TypeInterp {
  unsigned size = 0;
  std::vector<Value> values;
};

/// Concrete meaning of a signature: finite value sets, function tables and
/// distribution tables.
class Interpretation {
 public:
  /// JSON layout:
  ///   { "types": { "msg": { "size": 2, "values": ["00", "01"] } },
  ///     "functions": { "f": { "00": "01", ... } },
  ///     "distributions": { "d": { "": { "00": "1/2", "01": "1/2" } }, "u": "uniform" } }
  /// Missing "values" means every bitstring of the given size.
  static Interpretation from_json_text(const std::string& text, const Signature& sig);
  static Interpretation load(const std::string& path, const Signature& sig);

  void set_type(const std::string& t, TypeInterp ti) { types_[t] = std::move(ti); }
  void set_function(const std::string& f, std::map<Value, Value> table) { functions_[f] = std::move(table); }
  void set_distribution(const std::string& d, std::map<Value, ValueDist> table) {
    distributions_[d] = std::move(table);
  }

  unsigned size(const DataType& t) const;
  std::vector<Value> domain(const DataType& t) const;
  Value apply(const std::string& f, const Value& v) const;
  const ValueDist& sample(const std::string& d, const Value& v) const;
  /// Type sizes as a cost environment.
  CostEnv sizes() const;
  /// Checks totality against the signature and that weights sum to 1.
  void validate(const Signature& sig) const;

 private:
  std::map<std::string, TypeInterp> types_;
  std::map<std::string, std::map<Value, Value>> functions_;
  std::map<std::string, std::map<Value, ValueDist>> distributions_;
};

using ValueEnv = std::map<std::string, Value>;

Value eval_expr(const Interpretation& interp, const ValueEnv& env, const Expr& e);
/// Type of a closed or annotated expression, read off its annotations.
DataType expr_type(const Expr& e);

enum class Strategy { Leftmost, Rightmost };

/// One reaction step; none when the reaction is a value or blocked on a read.
std::optional<std::vector<std::pair<Reaction, Rational>>> step_reaction(const Interpretation& interp,
                                                                       const Reaction& r);

/// One internal step: a reaction step or the hiding of a completed output on a
/// bound channel. None when no internal step exists.
std::optional<ProtocolDist> step_protocol(const Interpretation& interp, const Protocol& p,
                                          Strategy s = Strategy::Leftmost);

/// Completes a free output (o ::= val v) into (o ::= v), substituting the
/// value for reads of o. None when no free output is pending.
std::optional<Protocol> free_output_step(const Protocol& p, Strategy s = Strategy::Leftmost);

/// P[read c := val v]: replaces reads of channel key c outside its binders.
Protocol substitute_read(const Protocol& p, const std::string& key, const Value& v, const DataType& t);

/// Value assigned to free channel key in P, if (key ::= v) occurs.
std::optional<Value> assigned_value(const Protocol& p, const std::string& key);

struct BigStepOptions {
  Strategy strategy = Strategy::Leftmost;
  /// Default from IPDL_STEP_BUDGET, else 10^6.
  std::optional<unsigned long long> budget;
};

/// Runs internal and output steps to quiescence.
ProtocolDist big_step(const Interpretation& interp, const Protocol& p, const BigStepOptions& opts = {});

/// Compares big_step under both strategies.
bool big_step_audit(const Interpretation& interp, const Protocol& p);

struct AdvAction {
  enum class Kind { Noop, Query, Assign };
  Kind kind = Kind::Noop;
  std::string channel;
};

struct AdvTransition {
  AdvAction action;
  std::string state;
  Rational weight;
};

/// Abstract adversary over opaque string states. Transition weights may sum
/// to less than 1; the remainder halts the game without a decision.
class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual unsigned rounds() const = 0;
  virtual std::string initial() const = 0;
  virtual std::vector<AdvTransition> transition(const std::string& s) const = 0;
  virtual std::string input(const std::string& o, const Value& v, const std::string& s) const = 0;
  virtual std::optional<Value> output(const std::string& i, const std::string& s) const = 0;
  virtual bool decide(const std::string& s) const = 0;
  /// I': channels the adversary may query.
  virtual std::set<std::string> queries() const = 0;
  /// O': channels the adversary may assign.
  virtual std::set<std::string> assigns() const = 0;
  virtual std::string describe() const { return "adversary"; }

  /// Embedding applied to the protocol before the game.
  ChannelRenaming embedding;
};

struct Decision {
  Rational one = 0;
  Rational zero = 0;
  Rational halt() const { return 1 - one - zero; }
};

/// Exact sub-distribution of the decision bit, following the round loop: each
/// round the protocol runs to quiescence, then the adversary acts.
Decision interact(const Adversary& adv, const Protocol& p, const Interpretation& interp);

Rational advantage(const Adversary& adv, const Protocol& p, const Protocol& q, const Interpretation& interp);

/// Table-driven adversary: a fixed script of (possibly randomized) actions and
/// a decision rule over the values observed by queries.
class ScriptAdversary final : public Adversary {
 public:
  struct Choice {
    AdvAction action;
    Value value;  // assigned value for Assign
    Rational weight;
  };
  using Step = std::vector<Choice>;

  struct Rule {
    enum class Kind { Const, Equals, Differs };
    Kind kind = Kind::Const;
    bool constant = false;
    unsigned slot = 0;   // index of the observed value
    Value value;         // Equals
    unsigned slot2 = 0;  // Differs: compare two slots
  };

  ScriptAdversary(std::vector<Step> script, Rule rule, std::set<std::string> queries, std::set<std::string> assigns);

  unsigned rounds() const override { return static_cast<unsigned>(script_.size()); }
  std::string initial() const override { return "0|"; }
  std::vector<AdvTransition> transition(const std::string& s) const override;
  std::string input(const std::string& o, const Value& v, const std::string& s) const override;
  std::optional<Value> output(const std::string& i, const std::string& s) const override;
  bool decide(const std::string& s) const override;
  std::set<std::string> queries() const override { return queries_; }
  std::set<std::string> assigns() const override { return assigns_; }
  std::string describe() const override;

 private:
  std::vector<Step> script_;
  Rule rule_;
  std::set<std::string> queries_, assigns_;
};

struct ChannelSig {
  std::string key;
  DataType type;
};

/// Deterministic pool of script adversaries for a protocol interface: every
/// action sequence up to `budget` rounds, each with constant and observation
/// based decisions, plus randomized and halting variants; thinned to `cap`.
std::vector<std::shared_ptr<Adversary>> enumerate_adversaries(const std::vector<ChannelSig>& inputs,
                                                              const std::vector<ChannelSig>& outputs,
                                                              const Interpretation& interp, unsigned budget,
                                                              size_t cap = 200);

}  // namespace ipdl
