#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipdl/ast.hpp"

namespace ipdl {

enum class Punc {
  LAngle, RAngle, LParen, RParen, LBrace, RBrace, LBracket, RBracket, Underscore, Colon,
  Dot, Semicolon, Arrow, TwoHeadArrow, LeftArrow, Times, Assign, Par, Diamond
};

enum class Keyword {
  Var, Check, True, False, App, Fst, Snd, Of, Ret, Samp, Read, If, Then, Else, Zero, New, In, Wen,
  InputToQuery, InputQueried, InputNotToQuery, React
};

struct TapeSymbol {
  enum class Kind { Bit, Punc, Keyword, Symbol, Index, Whitespace };
  Kind kind;
  unsigned code = 0;   // bit value, Punc, Keyword or de Bruijn index
  std::string name;    // function or distribution symbol

  friend bool operator==(const TapeSymbol&, const TapeSymbol&) = default;
};

std::string to_string(const TapeSymbol& s);

struct TapeOptions {
  /// Type sizes | t | used to expand type encodings.
  CostEnv sizes;
  /// Annotation per read channel key; reads default to input-not-to-query.
  std::map<std::string, ReadAnnotation> annotations;
  std::optional<unsigned> variable_index_bound;
  std::optional<unsigned> channel_index_bound;
};

/// Encodes a concrete protocol. Bound channels and variables become de Bruijn
/// indices; free channel number m (in key order) at binder depth d becomes m + d.
std::vector<TapeSymbol> encode_tape(const Protocol& p, const TapeOptions& opts);

}  // namespace ipdl
