#include "ipdl/tape.hpp"

#include <algorithm>
#include <set>

#include "ipdl/error.hpp"
#include "ipdl/norm.hpp"

namespace ipdl {

std::string to_string(const TapeSymbol& s) {
  static const char* punc[] = {"⟨", "⟩", "(", ")", "{", "}", "[", "]", "_", ":",
                               "·", ";", "→", "↠", "←", "×", "≔", "‖", "⋄"};
  static const char* kw[] = {"var", "✓", "true", "false", "app", "fst", "snd", "of", "ret", "samp", "read",
                             "if", "then", "else", "0", "new", "in", "wen", "input-to-query", "input-queried",
                             "input-not-to-query", "react"};
  switch (s.kind) {
    case TapeSymbol::Kind::Bit: return s.code ? "1" : "0";
    case TapeSymbol::Kind::Punc: return punc[s.code];
    case TapeSymbol::Kind::Keyword: return kw[s.code];
    case TapeSymbol::Kind::Symbol: return s.name;
    case TapeSymbol::Kind::Index: return "#" + std::to_string(s.code);
    case TapeSymbol::Kind::Whitespace: return " ";
  }
  return {};
}

namespace {

class Encoder {
 public:
  explicit Encoder(const TapeOptions& opts) : opts_(opts) {}

  std::vector<TapeSymbol> run(const Protocol& p) {
    auto fc = free_channels(p);
    std::set<std::string> keys;
    for (const auto* s : {&fc.reads, &fc.writes})
      for (const auto& it : *s) {
        if (it.family) fail("TAPE.not-concrete", "protocol must be desugared before encoding");
        keys.insert(it.index ? channel_key(ChannelRef(it.name, *it.index)) : it.name);
      }
    free_.assign(keys.begin(), keys.end());
    protocol(p);
    return std::move(out_);
  }

 private:
  void punc(Punc p) { out_.push_back({TapeSymbol::Kind::Punc, static_cast<unsigned>(p), {}}); }
  void kw(Keyword k) { out_.push_back({TapeSymbol::Kind::Keyword, static_cast<unsigned>(k), {}}); }
  void sym(const std::string& n) { out_.push_back({TapeSymbol::Kind::Symbol, 0, n}); }
  void index(unsigned i) { out_.push_back({TapeSymbol::Kind::Index, i, {}}); }

  void type(const DataType& t) {
    Natural k = cost_eval(norm(t), opts_.sizes);
    for (Natural j = 0; j < k; ++j) punc(Punc::Dot);
  }

  void value(const Value& v) {
    for (char c : v) {
      if (c == '*')
        punc(Punc::Diamond);
      else
        out_.push_back({TapeSymbol::Kind::Bit, static_cast<unsigned>(c == '1'), {}});
    }
  }

  void var(const std::string& x) {
    for (size_t i = vars_.size(); i-- > 0;)
      if (vars_[i] == x) {
        unsigned idx = static_cast<unsigned>(vars_.size() - 1 - i);
        if (opts_.variable_index_bound && idx >= *opts_.variable_index_bound)
          fail("TAPE.index-bound", "variable index " + std::to_string(idx) + " exceeds the bound");
        index(idx);
        return;
      }
    fail("TAPE.free-variable", "free variable '" + x + "' cannot be encoded");
  }

  void channel(const ChannelRef& c) {
    std::string key = channel_key(c);
    unsigned idx = 0;
    bool found = false;
    for (size_t i = chans_.size(); i-- > 0;)
      if (chans_[i] == key) {
        idx = static_cast<unsigned>(chans_.size() - 1 - i);
        found = true;
        break;
      }
    if (!found) {
      auto it = std::find(free_.begin(), free_.end(), key);
      if (it == free_.end()) fail("TAPE.unknown-channel", "channel '" + key + "' is not in scope");
      idx = static_cast<unsigned>(chans_.size() + (it - free_.begin()));
    }
    if (opts_.channel_index_bound && idx >= *opts_.channel_index_bound)
      fail("TAPE.index-bound", "channel index " + std::to_string(idx) + " exceeds the bound");
    index(idx);
  }

  void expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Lit: value(e.value); break;
      case Expr::Kind::Var:
        punc(Punc::LParen), kw(Keyword::Var), var(e.name), punc(Punc::Colon), type(e.type), punc(Punc::RParen);
        break;
      case Expr::Kind::Unit: punc(Punc::LParen), kw(Keyword::Check), punc(Punc::RParen); break;
      case Expr::Kind::True: punc(Punc::LParen), kw(Keyword::True), punc(Punc::RParen); break;
      case Expr::Kind::False: punc(Punc::LParen), kw(Keyword::False), punc(Punc::RParen); break;
      case Expr::Kind::App:
        punc(Punc::LParen), kw(Keyword::App), type(e.type), punc(Punc::Arrow), type(e.type2), sym(e.name);
        expr(e.args[0]);
        punc(Punc::RParen);
        break;
      case Expr::Kind::Pair:
        expr(e.args[0]);
        expr(e.args[1]);
        break;
      case Expr::Kind::Fst:
      case Expr::Kind::Snd:
        punc(Punc::LParen), kw(e.kind == Expr::Kind::Fst ? Keyword::Fst : Keyword::Snd);
        type(e.type), punc(Punc::Times), type(e.type2), kw(Keyword::Of);
        expr(e.args[0]);
        punc(Punc::RParen);
        break;
    }
  }

  void annotation(const ChannelRef& c) {
    auto it = opts_.annotations.find(channel_key(c));
    ReadAnnotation a = it == opts_.annotations.end() ? ReadAnnotation::NotToQuery : it->second;
    switch (a) {
      case ReadAnnotation::NotToQuery: kw(Keyword::InputNotToQuery); break;
      case ReadAnnotation::ToQuery: kw(Keyword::InputToQuery); break;
      case ReadAnnotation::Queried: kw(Keyword::InputQueried); break;
    }
  }

  void reaction(const Reaction& r) {
    switch (r.kind) {
      case Reaction::Kind::Val:
        punc(Punc::LAngle), value(r.value), punc(Punc::RAngle);
        break;
      case Reaction::Kind::Ret:
        punc(Punc::LParen), kw(Keyword::Ret), expr(r.expr), punc(Punc::RParen);
        break;
      case Reaction::Kind::Samp:
        punc(Punc::LParen), kw(Keyword::Samp), type(r.type), punc(Punc::TwoHeadArrow), type(r.type2), sym(r.name);
        expr(r.expr);
        punc(Punc::RParen);
        break;
      case Reaction::Kind::Read:
        punc(Punc::LParen), kw(Keyword::Read), annotation(r.channel), channel(r.channel);
        punc(Punc::Colon), type(r.type), punc(Punc::RParen);
        break;
      case Reaction::Kind::If:
        punc(Punc::LParen), kw(Keyword::If), expr(r.expr), kw(Keyword::Then), reaction(r.body[0]);
        kw(Keyword::Else), reaction(r.body[1]), punc(Punc::RParen);
        break;
      case Reaction::Kind::Bind:
        punc(Punc::LBrace), punc(Punc::Underscore), punc(Punc::Colon), type(r.type), punc(Punc::LeftArrow);
        reaction(r.body[0]);
        punc(Punc::Semicolon);
        vars_.push_back(r.name);
        reaction(r.body[1]);
        vars_.pop_back();
        punc(Punc::RBrace);
        break;
    }
  }

  void protocol(const Protocol& p) {
    switch (p.kind) {
      case Protocol::Kind::Zero: kw(Keyword::Zero); break;
      case Protocol::Kind::AssignValue:
        punc(Punc::LBracket), channel(p.channel), punc(Punc::Assign), value(p.value), punc(Punc::RBracket);
        break;
      case Protocol::Kind::Assign:
        punc(Punc::LParen), channel(p.channel), punc(Punc::Assign), kw(Keyword::React), reaction(p.reaction);
        punc(Punc::RParen);
        break;
      case Protocol::Kind::Par:
        punc(Punc::LParen), protocol(p.body[0]), punc(Punc::Par), protocol(p.body[1]), punc(Punc::RParen);
        break;
      case Protocol::Kind::New:
        if (p.bound) fail("TAPE.not-concrete", "protocol must be desugared before encoding");
        kw(Keyword::New), punc(Punc::Underscore), punc(Punc::Colon), type(p.type), kw(Keyword::In);
        chans_.push_back(channel_key(p.channel));
        protocol(p.body[0]);
        chans_.pop_back();
        kw(Keyword::Wen);
        break;
      case Protocol::Kind::Family: fail("TAPE.not-concrete", "protocol must be desugared before encoding");
    }
  }

  const TapeOptions& opts_;
  std::vector<TapeSymbol> out_;
  std::vector<std::string> vars_;
  std::vector<std::string> chans_;
  std::vector<std::string> free_;
};

}  // namespace

std::vector<TapeSymbol> encode_tape(const Protocol& p, const TapeOptions& opts) { return Encoder(opts).run(p); }

}  // namespace ipdl
