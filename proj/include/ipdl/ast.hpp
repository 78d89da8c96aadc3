#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ipdl/cost_expr.hpp"

namespace ipdl {

/// Index and bound arithmetic reuses the cost algebra (naturals, +, *).
using SizeExpr = CostExpr;

/// Runtime bitstring over {0, 1, *}; '*' stands for the placeholder symbol.
using Value = std::string;

class DataType {
 public:
  enum class Kind { Const, Unit, Bool, Product };

  DataType() : kind_(Kind::Unit) {}
  static DataType constant(std::string name);
  static DataType unit() { return DataType(); }
  static DataType boolean();
  static DataType product(DataType a, DataType b);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const DataType& first() const { return parts_->first; }
  const DataType& second() const { return parts_->second; }

  friend bool operator==(const DataType& a, const DataType& b);
  friend bool operator<(const DataType& a, const DataType& b);

 private:
  Kind kind_;
  std::string name_;
  std::shared_ptr<const std::pair<DataType, DataType>> parts_;
};

/// Channel reference `Name` or `Name[index]`.
struct ChannelRef {
  std::string name;
  std::optional<SizeExpr> index;

  ChannelRef() = default;
  explicit ChannelRef(std::string n) : name(std::move(n)) {}
  ChannelRef(std::string n, SizeExpr i) : name(std::move(n)), index(std::move(i)) {}

  friend bool operator==(const ChannelRef& a, const ChannelRef& b);
};

/// Stable textual key, e.g. "Out" or "Out[i]" or "Out[2]".
std::string channel_key(const ChannelRef& c);
bool operator<(const ChannelRef& a, const ChannelRef& b);

struct Expr {
  enum class Kind { Var, Unit, True, False, App, Pair, Fst, Snd, Lit };

  Kind kind = Kind::Unit;
  std::string name;       // Var: variable; App: function symbol
  DataType type;          // Var: its type; App: argument type; Fst/Snd: left component; Lit: value type
  DataType type2;         // App: result type; Fst/Snd: right component
  std::vector<Expr> args;
  Value value;            // Lit (runtime only)

  static Expr var(std::string x, DataType t);
  static Expr unit_value() { return Expr{}; }
  static Expr boolean(bool b);
  static Expr app(std::string f, DataType from, DataType to, Expr e);
  static Expr pair(Expr a, Expr b);
  static Expr fst(DataType l, DataType r, Expr e);
  static Expr snd(DataType l, DataType r, Expr e);
  static Expr lit(Value v, DataType t);

  friend bool operator==(const Expr&, const Expr&) = default;
};

/// Query annotation carried by reads in the tape encoding of absorbed code.
enum class ReadAnnotation { NotToQuery, ToQuery, Queried };

struct Reaction {
  enum class Kind { Ret, Samp, Read, If, Bind, Val };

  Kind kind = Kind::Ret;
  Expr expr;                    // Ret value; Samp argument; If condition
  std::string name;             // Samp: distribution symbol; Bind: bound variable
  ChannelRef channel;           // Read
  DataType type;                // Samp: argument; Read: channel type; Bind: variable type; Val: value type
  DataType type2;               // Samp: result
  std::vector<Reaction> body;   // If: then, else; Bind: bound reaction, continuation
  Value value;                  // Val (runtime only)

  static Reaction ret(Expr e);
  static Reaction samp(std::string d, DataType from, DataType to, Expr e);
  static Reaction read(ChannelRef c, DataType t);
  static Reaction cond(Expr e, Reaction then_r, Reaction else_r);
  static Reaction bind(std::string x, DataType t, Reaction r, Reaction s);
  static Reaction val(Value v, DataType t);

  friend bool operator==(const Reaction&, const Reaction&) = default;
};

struct Protocol {
  enum class Kind { Zero, Assign, AssignValue, Par, New, Family };

  Kind kind = Kind::Zero;
  ChannelRef channel;           // Assign/AssignValue target; New binder; Family name with index var
  Reaction reaction;            // Assign; Family member body
  Value value;                  // AssignValue (runtime only)
  DataType type;                // New: channel type; AssignValue: value type
  std::string index_var;        // Family
  std::optional<SizeExpr> bound;  // Family bound; New: bound of a channel family (newfamily)
  std::vector<Protocol> body;   // Par: two; New: one

  static Protocol zero() { return Protocol{}; }
  static Protocol assign(ChannelRef o, Reaction r);
  static Protocol assign_value(ChannelRef o, Value v, DataType t);
  static Protocol par(Protocol p, Protocol q);
  static Protocol new_channel(ChannelRef c, DataType t, Protocol p);
  static Protocol new_family(std::string name, SizeExpr bound, DataType t, Protocol p);
  static Protocol family(std::string name, std::string i, SizeExpr bound, Reaction r);

  friend bool operator==(const Protocol&, const Protocol&) = default;
};

/// Right-nested parallel composition; the empty list gives 0.
Protocol par_all(const std::vector<Protocol>& ps);

struct FunSig {
  DataType arg;
  DataType result;
};

struct Signature {
  std::vector<std::string> types;
  std::map<std::string, FunSig> functions;
  std::map<std::string, FunSig> distributions;
  std::vector<std::string> params;

  bool has_type(const std::string& t) const;
  bool has_param(const std::string& p) const;
  /// Variable order used when printing normalized cost expressions.
  VarOrder var_order() const;
};

struct ChannelDecl {
  std::string name;
  DataType type;
  std::optional<SizeExpr> bound;  // set for a channel family
};

/// Δ: ordered, no duplicates.
class ChannelContext {
 public:
  void add(ChannelDecl d);
  void add_or_shadow(ChannelDecl d);
  const ChannelDecl* find(const std::string& name) const;
  const std::vector<ChannelDecl>& decls() const { return decls_; }
  bool contains(const std::string& name) const { return find(name) != nullptr; }

 private:
  std::vector<ChannelDecl> decls_;
};

/// A set element in an interface: a scalar channel, one member of a family,
/// or a whole family.
struct ChannelItem {
  std::string name;
  std::optional<SizeExpr> index;   // member
  std::optional<SizeExpr> family;  // whole family below this bound

  static ChannelItem scalar(std::string n) { return {std::move(n), std::nullopt, std::nullopt}; }
  static ChannelItem member(std::string n, SizeExpr i) { return {std::move(n), std::move(i), std::nullopt}; }
  static ChannelItem whole(std::string n, SizeExpr b) { return {std::move(n), std::nullopt, std::move(b)}; }
  static ChannelItem of(const ChannelRef& c);

  friend bool operator==(const ChannelItem& a, const ChannelItem& b);
};

std::string to_string(const ChannelItem& c);
bool operator<(const ChannelItem& a, const ChannelItem& b);

using ChannelSet = std::set<ChannelItem>;

/// True when `a` denotes (a superset of) the channels of `b`.
bool item_covers(const ChannelItem& a, const ChannelItem& b);
bool set_covers(const ChannelSet& s, const ChannelItem& b);
/// False when the two items are syntactically guaranteed disjoint.
bool items_may_overlap(const ChannelItem& a, const ChannelItem& b);

struct ChannelUse {
  ChannelSet reads;
  ChannelSet writes;
};

ChannelUse free_channels(const Protocol& p);
ChannelSet reaction_reads(const Reaction& r);
/// Channel refs read by a reaction, as written (indices unlifted).
std::vector<ChannelRef> reaction_read_refs(const Reaction& r);
/// Every channel name occurring in p, bound or free.
std::set<std::string> all_channel_names(const Protocol& p);

/// Maps source channel names to targets. A scalar source may map to a family
/// member (Dec ↦ Dec[x]); a family source maps to a family name.
class ChannelRenaming {
 public:
  void set(const std::string& from, ChannelRef to);
  const ChannelRef* find(const std::string& from) const;
  const std::map<std::string, ChannelRef>& entries() const { return map_; }
  bool injective() const;
  ChannelRenaming inverse() const;
  static ChannelRenaming identity(const std::set<std::string>& names);

 private:
  std::map<std::string, ChannelRef> map_;
};

ChannelRef rename_ref(const ChannelRenaming& phi, const ChannelRef& c);
ChannelItem rename_item(const ChannelRenaming& phi, const ChannelItem& c);
/// Strict: every free channel of p must be in phi's domain.
Protocol rename_channels(const ChannelRenaming& phi, const Protocol& p);
/// Channels outside phi's domain are left unchanged.
Protocol rename_channels_partial(const ChannelRenaming& phi, const Protocol& p);
Reaction rename_channels_partial(const ChannelRenaming& phi, const Reaction& r);

/// Replaces the index variable `i` by `e` in every index and bound.
Reaction substitute_index(const Reaction& r, const std::string& i, const SizeExpr& e);
Protocol substitute_index(const Protocol& p, const std::string& i, const SizeExpr& e);

Protocol desugar_families(const Protocol& p, const CostEnv& env);

bool alpha_eq(const Expr& a, const Expr& b);
bool alpha_eq(const Reaction& a, const Reaction& b);
bool alpha_eq(const Protocol& a, const Protocol& b);

std::set<std::string> free_vars(const Expr& e);
std::set<std::string> free_vars(const Reaction& r);
Expr substitute_var(const Expr& e, const std::string& x, const Expr& by);
/// Capture-avoiding substitution of an expression for a variable.
Reaction substitute_var(const Reaction& r, const std::string& x, const Expr& by);
/// Replaces every `read c` (exact ref match) by `by`, avoiding capture.
Reaction replace_reads(const Reaction& r, const ChannelRef& c, const Reaction& by);
size_t count_reads(const Reaction& r, const std::string& channel_name);
size_t count_reads(const Protocol& p, const std::string& channel_name);
bool contains_samp(const Reaction& r);

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

std::string to_string(const DataType& t);
std::string to_string(const Expr& e);
std::string to_string(const Reaction& r);
std::string to_string(const Protocol& p);

}  // namespace ipdl
