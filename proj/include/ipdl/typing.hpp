#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ipdl/ast.hpp"

namespace ipdl {

/// Γ: ordered variable typing; later entries shadow earlier ones.
using TypeContext = std::vector<std::pair<std::string, DataType>>;

/// Family index variables in scope, each with its bound (i < b).
using IndexContext = std::map<std::string, SizeExpr>;

struct ProtocolType {
  ChannelSet inputs;
  ChannelSet outputs;
};

struct ReactionType {
  ChannelSet reads;
  DataType type;
};

void check_datatype(const Signature& sig, const DataType& t);

DataType typecheck_expr(const Signature& sig, const TypeContext& gamma, const Expr& e);

ReactionType typecheck_reaction(const Signature& sig, const ChannelContext& delta, const TypeContext& gamma,
                                const Reaction& r, const IndexContext& idx = {});

/// Checks internal well-formedness of P and returns its free reads and writes.
ChannelUse infer_protocol(const Signature& sig, const ChannelContext& delta, const Protocol& p,
                          const IndexContext& idx = {});

void typecheck_protocol(const Signature& sig, const ChannelContext& delta, const Protocol& p,
                        const ProtocolType& declared, const IndexContext& idx = {});

/// Interface item for a declared channel: a whole family or a scalar.
ChannelItem declared_item(const ChannelDecl& d);

/// Δ with every family bound evaluated under env.
ChannelContext instantiate_context(const ChannelContext& delta, const CostEnv& env);

/// Interface after desugaring at env: families become their members.
ChannelSet instantiate_items(const ChannelSet& items, const CostEnv& env);

}  // namespace ipdl
