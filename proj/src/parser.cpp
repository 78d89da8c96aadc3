#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include "ipdl/frontend.hpp"
#include "ipdl/semantics.hpp"
#include "ipdl/typing.hpp"

namespace ipdl {

namespace {

struct Token {
  enum class Kind { Ident, Number, Symbol, End };
  Kind kind = Kind::End;
  std::string text;
  SourceSpan span;
};

const char* const kSymbols[] = {"::=", "::", "<-", "||", "|=", "->", ":", "<", "(", ")", "[",
                                "]",   ",",  ";",  ".",  "=",  "~",  "+", "*", "|"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (src.compare(i, 2, "--") == 0) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.span = {line, col};
    if (ident_start(c)) {
      size_t j = i;
      while (j < src.size() &&
             (ident_char(src[j]) || (src[j] == '-' && j + 1 < src.size() && ident_char(src[j + 1]) &&
                                     src[j + 1] != '\'')))
        ++j;
      t.kind = Token::Kind::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(t);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Token::Kind::Number;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(t);
      continue;
    }
    bool matched = false;
    for (const char* s : kSymbols) {
      std::string sym(s);
      if (src.compare(i, sym.size(), sym) == 0) {
        t.kind = Token::Kind::Symbol;
        t.text = sym;
        advance(sym.size());
        out.push_back(t);
        matched = true;
        break;
      }
    }
    if (!matched)
      throw Error("PARSE.lex", "unexpected character '" + std::string(1, c) + "'", SourceSpan{line, col});
  }
  Token end;
  end.span = {line, col};
  out.push_back(end);
  return out;
}

void collect_binders(const Protocol& p, std::vector<ChannelDecl>& out) {
  if (p.kind == Protocol::Kind::New) out.push_back({p.channel.name, p.type, p.bound});
  for (const auto& b : p.body) collect_binders(b, out);
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SourceFile file() {
    while (peek().kind != Token::Kind::End) declaration();
    return f_;
  }

 private:
  // ------------------------------------------------------------ tokens

  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool is(const std::string& s, size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind != Token::Kind::End && t.text == s;
  }
  bool accept(const std::string& s) {
    if (!is(s)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void error(const std::string& expected) const {
    const Token& t = peek();
    std::string found = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
    throw Error("PARSE.expected", "expected " + expected + ", found " + found, t.span);
  }
  [[noreturn]] void resolve_error(const std::string& code, const std::string& msg, SourceSpan at) const {
    throw Error(code, msg, at);
  }
  void expect(const std::string& s) {
    if (!accept(s)) error("'" + s + "'");
  }
  std::string ident(const std::string& what) {
    if (peek().kind != Token::Kind::Ident) error(what);
    return toks_[pos_++].text;
  }

  // ------------------------------------------------------------ declarations

  void declaration() {
    Decl d;
    d.span = peek().span;
    std::string kw = peek().text;
    if (accept("parameter")) {
      d.kind = Decl::Kind::Parameter;
      d.name = ident("a parameter name");
      expect(":");
      if (!accept("nat")) error("'nat'");
      f_.sig.params.push_back(d.name);
    } else if (accept("type")) {
      d.kind = Decl::Kind::Type;
      d.name = ident("a type name");
      f_.sig.types.push_back(d.name);
    } else if (kw == "function" || kw == "distribution") {
      ++pos_;
      d.kind = kw == "function" ? Decl::Kind::Function : Decl::Kind::Distribution;
      d.name = ident("a symbol name");
      expect(":");
      d.fun.arg = type();
      expect("->");
      d.fun.result = type();
      (kw == "function" ? f_.sig.functions : f_.sig.distributions)[d.name] = d.fun;
    } else if (accept("channels")) {
      d.kind = Decl::Kind::Channels;
      while (is("(")) {
        ChannelDecl c = channel_decl();
        d.channels.add(c);
        f_.channels.add(c);
      }
    } else if (kw == "protocol-assumption" || kw == "approx-assumption") {
      ++pos_;
      d.kind = Decl::Kind::Assumption;
      d.name = ident("an assumption name");
      expect(":");
      d.axiom.name = d.name;
      d.axiom.approximate = kw == "approx-assumption";
      while (is("(")) d.axiom.delta.add(channel_decl());
      global_ = false;
      scope_ = d.axiom.delta.decls();
      d.axiom.type = interface(d.axiom.delta);
      d.axiom.lhs = protocol();
      expect(d.axiom.approximate ? "~" : "=");
      d.axiom.rhs = protocol();
      scope_.clear();
      global_ = true;
    } else if (accept("protocol")) {
      d.kind = Decl::Kind::Protocol;
      d.name = ident("a protocol name");
      expect("=");
      d.protocol = protocol_with_where();
      protocols_[d.name] = d.protocol;
    } else if (accept("theorem")) {
      d.kind = Decl::Kind::Theorem;
      d.name = ident("a theorem name");
      expect(":");
      theorem(d.theorem);
    } else {
      error("a declaration");
    }
    expect(".");
    f_.decls.push_back(std::move(d));
  }

  ChannelDecl channel_decl() {
    expect("(");
    bool fam = accept("fam");
    if (!fam && !accept("chn")) error("'chn' or 'fam'");
    ChannelDecl c;
    c.name = ident("a channel name");
    if (fam) {
      expect("[");
      ident("an index variable");
      expect("<");
      c.bound = size();
      expect("]");
    }
    expect("::");
    c.type = type();
    expect(")");
    return c;
  }

  /// `inputs: items |=`; outputs are the remaining declared channels.
  ProtocolType interface(const ChannelContext& delta) {
    ProtocolType t = inputs();
    for (const auto& c : delta.decls()) {
      ChannelItem item = declared_item(c);
      if (!set_covers(t.inputs, item)) t.outputs.insert(item);
    }
    return t;
  }

  ProtocolType inputs() {
    if (!accept("inputs")) error("'inputs:'");
    expect(":");
    ProtocolType t;
    if (!is("|=")) {
      do {
        t.inputs.insert(item());
      } while (accept(","));
    }
    expect("|=");
    return t;
  }

  ChannelItem item() {
    bool fam = accept("fam");
    if (!fam && !accept("chn")) error("'chn' or 'fam'");
    std::string name = ident("a channel name");
    if (!accept("[")) return ChannelItem::scalar(name);
    if (fam) {
      ident("an index variable");
      expect("<");
      SizeExpr b = size();
      expect("]");
      return ChannelItem::whole(name, b);
    }
    SizeExpr i = size();
    expect("]");
    return ChannelItem::member(name, i);
  }

  void theorem(Theorem& th) {
    th.type = inputs();
    th.lhs = protocol();
    if (accept("~"))
      th.approximate = true;
    else if (accept("="))
      th.approximate = false;
    else
      error("'~' or '='");
    th.rhs = protocol();
    std::set<std::string> written;
    for (const auto* p : {&th.lhs, &th.rhs})
      for (const auto& w : free_channels(*p).writes) written.insert(w.name);
    for (const auto& c : f_.channels.decls()) {
      ChannelItem it = declared_item(c);
      if (written.count(c.name) && !set_covers(th.type.inputs, it)) th.type.outputs.insert(it);
    }
    if (!accept("proof")) error("'proof'");
    std::vector<ChannelDecl> bound;
    collect_binders(th.lhs, bound);
    collect_binders(th.rhs, bound);
    scope_ = bound;
    if (!accept("left")) error("'left:'");
    expect(":");
    th.left = tactics();
    if (!accept("right")) error("'right:'");
    expect(":");
    th.right = tactics();
    if (!accept("qed")) error("'qed'");
    scope_.clear();
  }

  // ------------------------------------------------------------ types and sizes

  DataType type() {
    DataType a;
    if (accept("(")) {
      a = type();
      expect(")");
    } else {
      SourceSpan at = peek().span;
      std::string n = ident("a type");
      if (n == "unit")
        a = DataType::unit();
      else if (n == "bool")
        a = DataType::boolean();
      else if (f_.sig.has_type(n))
        a = DataType::constant(n);
      else
        resolve_error("RESOLVE.unknown-type", "unknown type '" + n + "'", at);
    }
    if (accept("*")) return DataType::product(a, type());
    return a;
  }

  SizeExpr size() {
    std::vector<SizeExpr> terms{size_term()};
    while (accept("+")) terms.push_back(size_term());
    return terms.size() == 1 ? terms[0] : SizeExpr::sum(terms);
  }
  SizeExpr size_term() {
    std::vector<SizeExpr> fs{size_factor()};
    while (accept("*")) fs.push_back(size_factor());
    return fs.size() == 1 ? fs[0] : SizeExpr::product(fs);
  }
  SizeExpr size_factor() {
    if (accept("(")) {
      SizeExpr e = size();
      expect(")");
      return e;
    }
    if (peek().kind == Token::Kind::Number) return SizeExpr(Natural(toks_[pos_++].text));
    std::string n = ident("an index expression");
    return f_.sig.has_param(n) ? SizeExpr::param(n) : SizeExpr::index(n);
  }

  // ------------------------------------------------------------ channels

  const ChannelDecl* channel(const std::string& name) const {
    for (size_t k = scope_.size(); k-- > 0;)
      if (scope_[k].name == name) return &scope_[k];
    return global_ ? f_.channels.find(name) : nullptr;
  }

  ChannelRef ref() {
    ChannelRef r(ident("a channel"));
    if (accept("[")) {
      r.index = size();
      expect("]");
    }
    return r;
  }

  DataType channel_type(const ChannelRef& r, SourceSpan at) const {
    const ChannelDecl* d = channel(r.name);
    if (!d) resolve_error("RESOLVE.unknown-channel", "unknown channel '" + r.name + "'", at);
    return d->type;
  }

  // ------------------------------------------------------------ protocols

  Protocol protocol_with_where() {
    size_t body = pos_;
    size_t i = pos_;
    for (int depth = 0; toks_[i].kind != Token::Kind::End; ++i) {
      const std::string& s = toks_[i].text;
      if (toks_[i].kind == Token::Kind::Symbol && (s == "(" || s == "[")) ++depth;
      if (toks_[i].kind == Token::Kind::Symbol && (s == ")" || s == "]")) --depth;
      if (depth == 0 && ((toks_[i].kind == Token::Kind::Ident && s == "where") ||
                         (toks_[i].kind == Token::Kind::Symbol && s == ".")))
        break;
    }
    where_.clear();
    size_t end = i;
    if (toks_[i].text == "where") {
      pos_ = i + 1;
      while (true) {
        std::string name = ident("a binding name");
        expect("=");
        where_[name] = pos_;
        for (int depth = 0; peek().kind != Token::Kind::End; ++pos_) {
          const Token& t = peek();
          if (t.kind == Token::Kind::Symbol && (t.text == "(" || t.text == "[")) ++depth;
          if (t.kind == Token::Kind::Symbol && (t.text == ")" || t.text == "]")) --depth;
          if (depth == 0 && (is("and") || (t.kind == Token::Kind::Symbol && t.text == "."))) break;
        }
        if (!accept("and")) break;
      }
      end = pos_;
    }
    pos_ = body;
    Protocol p = protocol();
    if (pos_ != i) error("'where' or '.'");
    pos_ = end;
    where_.clear();
    return p;
  }

  Protocol protocol() {
    std::vector<Protocol> ps{prim()};
    while (accept("||")) ps.push_back(prim());
    return par_all(ps);
  }

  Protocol prim() {
    SourceSpan at = peek().span;
    if (accept("new")) {
      std::string name = ident("a channel name");
      expect(":");
      DataType t = type();
      if (!accept("in")) error("'in'");
      scope_.push_back({name, t, std::nullopt});
      Protocol body = protocol();
      scope_.pop_back();
      return Protocol::new_channel(ChannelRef(name), t, body);
    }
    if (accept("newfamily")) {
      std::string name = ident("a channel name");
      expect("[");
      ident("an index variable");
      expect("<");
      SizeExpr b = size();
      expect("]");
      expect(":");
      DataType t = type();
      if (!accept("in")) error("'in'");
      scope_.push_back({name, t, b});
      Protocol body = protocol();
      scope_.pop_back();
      return Protocol::new_family(name, b, t, body);
    }
    if (accept("family")) {
      std::string name = ident("a family name");
      expect("[");
      std::string i = ident("an index variable");
      SizeExpr b;
      if (accept("<")) {
        b = size();
        expect("]");
      } else {
        expect("]");
        if (ident("an index variable") != i) error("the same index variable");
        expect("<");
        b = size();
      }
      expect("::=");
      return Protocol::family(name, i, b, reaction());
    }
    if (peek().kind == Token::Kind::Number && peek().text == "0") {
      ++pos_;
      return Protocol::zero();
    }
    if (accept("(")) {
      Protocol p = protocol();
      expect(")");
      return p;
    }
    if (peek().kind != Token::Kind::Ident) error("a protocol");
    if (is("::=", 1) || is("[", 1)) {
      ChannelRef r = ref();
      expect("::=");
      return Protocol::assign(r, reaction());
    }
    std::string name = ident("a protocol");
    auto w = where_.find(name);
    if (w != where_.end()) {
      for (const auto& e : expanding_)
        if (e == name) resolve_error("RESOLVE.cycle", "binding '" + name + "' refers to itself", at);
      expanding_.push_back(name);
      size_t save = pos_;
      pos_ = w->second;
      Protocol p = protocol();
      if (!is("and") && !is(".")) error("'and' or '.'");
      pos_ = save;
      expanding_.pop_back();
      return p;
    }
    auto it = protocols_.find(name);
    if (it == protocols_.end()) resolve_error("RESOLVE.unknown-protocol", "unknown protocol '" + name + "'", at);
    return it->second;
  }

  // ------------------------------------------------------------ reactions

  Reaction reaction() {
    if (peek().kind == Token::Kind::Ident && is(":", 1)) {
      std::string x = ident("a variable");
      expect(":");
      DataType t = type();
      expect("<-");
      Reaction r = reaction1();
      expect(";");
      vars_.push_back({x, t});
      Reaction s = reaction();
      vars_.pop_back();
      return Reaction::bind(x, t, r, s);
    }
    return reaction1();
  }

  Reaction reaction1() {
    SourceSpan at = peek().span;
    if (accept("return")) return Reaction::ret(expr());
    if (accept("read")) {
      ChannelRef r = ref();
      return Reaction::read(r, channel_type(r, at));
    }
    if (accept("samp")) {
      std::string d = ident("a distribution");
      auto it = f_.sig.distributions.find(d);
      if (it == f_.sig.distributions.end())
        resolve_error("RESOLVE.unknown-distribution", "unknown distribution '" + d + "'", at);
      Expr arg = Expr::unit_value();
      if (is("(")) arg = call_argument();
      return Reaction::samp(d, it->second.arg, it->second.result, arg);
    }
    if (accept("if")) {
      Expr c = expr();
      if (!accept("then")) error("'then'");
      Reaction a = reaction();
      if (!accept("else")) error("'else'");
      return Reaction::cond(c, a, reaction());
    }
    if (accept("(")) {
      Reaction r = reaction();
      expect(")");
      return r;
    }
    error("a reaction");
  }

  // ------------------------------------------------------------ expressions

  const DataType* var(const std::string& x) const {
    for (size_t k = vars_.size(); k-- > 0;)
      if (vars_[k].first == x) return &vars_[k].second;
    return nullptr;
  }

  /// `( e )` or `( e1, e2 )` after a function or distribution symbol.
  Expr call_argument() {
    expect("(");
    if (accept(")")) return Expr::unit_value();
    Expr a = expr();
    if (accept(",")) {
      Expr b = expr();
      expect(")");
      return Expr::pair(a, b);
    }
    expect(")");
    return a;
  }

  Expr expr() {
    SourceSpan at = peek().span;
    if (accept("(")) {
      if (accept(")")) return Expr::unit_value();
      Expr a = expr();
      if (accept(",")) {
        Expr b = expr();
        expect(")");
        return Expr::pair(a, b);
      }
      expect(")");
      return a;
    }
    std::string n = ident("an expression");
    if (n == "true" || n == "false") return Expr::boolean(n == "true");
    if (const DataType* t = var(n)) return Expr::var(n, *t);
    auto f = f_.sig.functions.find(n);
    if (f != f_.sig.functions.end()) {
      Expr arg = is("(") ? call_argument() : Expr::unit_value();
      return Expr::app(n, f->second.arg, f->second.result, arg);
    }
    if ((n == "fst" || n == "snd") && is("(")) {
      Expr arg = call_argument();
      DataType t = expr_type(arg);
      if (t.kind() != DataType::Kind::Product)
        resolve_error("TYPE.mismatch", n + " applies to a pair, found " + to_string(t), at);
      return n == "fst" ? Expr::fst(t.first(), t.second(), arg) : Expr::snd(t.first(), t.second(), arg);
    }
    resolve_error("RESOLVE.unknown-variable", "unknown variable or function '" + n + "'", at);
  }

  // ------------------------------------------------------------ tactics

  Tactic tactics() {
    std::vector<Tactic> ts{tactic()};
    while (accept("then")) ts.push_back(tactic());
    if (ts.size() == 1) return ts[0];
    Tactic t;
    t.kind = Tactic::Kind::Seq;
    t.span = ts[0].span;
    t.body = std::move(ts);
    return t;
  }

  std::pair<ChannelRef, bool> chref() {
    bool fam = accept("fam");
    if (!fam && !accept("chn")) error("'chn' or 'fam'");
    return {ref(), fam};
  }

  Tactic tactic() {
    Tactic t;
    t.span = peek().span;
    if (accept("skip")) return t;
    if (accept("(")) {
      Tactic inner = tactics();
      expect(")");
      if (inner.kind != Tactic::Kind::Seq) {
        Tactic s = t;
        s.body.push_back(inner);
        return s;
      }
      return inner;
    }
    std::string kw = peek().text;
    if (kw == "subst" || kw == "fold" || kw == "drop") {
      ++pos_;
      t.kind = kw == "subst" ? Tactic::Kind::Subst : kw == "fold" ? Tactic::Kind::Fold : Tactic::Kind::Drop;
      auto [s, sf] = chref();
      if (!accept(kw == "drop" ? "from" : "into")) error(kw == "drop" ? "'from'" : "'into'");
      auto [d, df] = chref();
      t.source = s.name;
      t.source_family = sf;
      t.target = d.name;
      t.target_family = df;
      return t;
    }
    if (accept("absorb")) {
      t.kind = Tactic::Kind::Absorb;
      auto [s, sf] = chref();
      t.source = s.name;
      t.source_family = sf;
      return t;
    }
    if (accept("add")) {
      if (!accept("internal")) error("'internal'");
      t.kind = Tactic::Kind::AddInternal;
      if (accept("family")) {
        t.decl.name = ident("a family name");
        bool bracket = accept("[");
        t.index_var = ident("an index variable");
        expect("<");
        t.decl.bound = size();
        if (bracket) expect("]");
      } else if (accept("chn")) {
        t.decl.name = ident("a channel name");
      } else {
        error("'family' or 'chn'");
      }
      if (!accept("typed")) error("'typed:'");
      expect(":");
      t.decl.type = type();
      if (!accept("assigned")) error("'assigned:'");
      expect(":");
      scope_.push_back(t.decl);
      t.reaction = reaction();
      return t;
    }
    if (accept("sym")) {
      if (!accept("from")) error("'from'");
      if (!is("change")) error("'change'");
      t.sym = true;
    }
    if (accept("change")) {
      t.kind = Tactic::Kind::Change;
      auto [s, sf] = chref();
      t.source = s.name;
      t.source_family = sf;
      if (!accept("with")) error("'with'");
      t.reaction = reaction();
      if (accept("in")) {
        if (!accept("currentProtocol")) error("'currentProtocol'");
        t.in_clause = true;
        expect("(");
        Tactic inner = tactics();
        expect(")");
        if (inner.kind == Tactic::Kind::Seq)
          t.body = inner.body;
        else
          t.body.push_back(inner);
      }
      return t;
    }
    if (accept("use")) {
      if (accept("approx")) {
        if (!accept("assumption")) error("'assumption'");
        t.kind = Tactic::Kind::UseApprox;
        t.axiom = ident("an assumption name");
        return t;
      }
      if (!accept("assumption")) error("'assumption' or 'approx'");
      t.kind = Tactic::Kind::UseAssumption;
      t.axiom = ident("an assumption name");
      if (accept("on")) {
        do {
          auto [r, fam] = chref();
          t.at.push_back(r);
          t.at_family.push_back(fam);
        } while (accept(","));
      }
      t.reverse = accept("backwards");
      return t;
    }
    if (accept("by")) {
      if (!accept("induction")) error("'induction'");
      if (!accept("on")) error("'on'");
      t.kind = Tactic::Kind::Induction;
      t.family_index = ident("an index variable");
      if (!accept("with")) error("'with'");
      if (!accept("variable")) error("'variable'");
      t.index_var = ident("a variable");
      expect("(");
      if (!accept(")")) {
        Tactic inner = tactics();
        expect(")");
        if (inner.kind == Tactic::Kind::Seq)
          t.body = inner.body;
        else
          t.body.push_back(inner);
      }
      return t;
    }
    error("a tactic");
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  SourceFile f_;
  std::map<std::string, Protocol> protocols_;
  std::vector<ChannelDecl> scope_;
  bool global_ = true;
  std::vector<std::pair<std::string, DataType>> vars_;
  std::map<std::string, size_t> where_;
  std::vector<std::string> expanding_;
};

// ---------------------------------------------------------------- printing

std::string decl_text(const ChannelDecl& c) {
  if (c.bound) return "(fam " + c.name + "[i < " + to_string(*c.bound) + "] :: " + to_string(c.type) + ")";
  return "(chn " + c.name + " :: " + to_string(c.type) + ")";
}

std::string inputs_text(const ChannelSet& s) {
  std::string out = "inputs:";
  bool first = true;
  for (const auto& c : s) {
    out += (first ? " " : ", ") + to_string(c);
    first = false;
  }
  return out + " |=";
}

std::string chref_text(const std::string& name, bool fam) { return (fam ? "fam " : "chn ") + name; }

std::string tactic_text(const Tactic& t, bool nested) {
  switch (t.kind) {
    case Tactic::Kind::Seq: {
      if (t.body.empty()) return "skip";
      std::string s;
      for (const auto& c : t.body) s += (s.empty() ? "" : " then\n  ") + tactic_text(c, true);
      return nested ? "(" + s + ")" : s;
    }
    case Tactic::Kind::Subst:
      return "subst " + chref_text(t.source, t.source_family) + " into " + chref_text(t.target, t.target_family);
    case Tactic::Kind::Fold:
      return "fold " + chref_text(t.source, t.source_family) + " into " + chref_text(t.target, t.target_family);
    case Tactic::Kind::Drop:
      return "drop " + chref_text(t.source, t.source_family) + " from " + chref_text(t.target, t.target_family);
    case Tactic::Kind::Absorb: return "absorb " + chref_text(t.source, t.source_family);
    case Tactic::Kind::AddInternal: {
      std::string head = t.decl.bound ? "family " + t.decl.name + " " + t.index_var + " < " + to_string(*t.decl.bound)
                                      : "chn " + t.decl.name;
      return "add internal " + head + " typed: " + to_string(t.decl.type) + " assigned: " + to_string(t.reaction);
    }
    case Tactic::Kind::Change: {
      std::string s = std::string(t.sym ? "sym from " : "") + "change " + chref_text(t.source, t.source_family) +
                      " with " + to_string(t.reaction);
      if (t.in_clause) {
        Tactic inner;
        inner.body = t.body;
        s += " in currentProtocol(" + tactic_text(inner, false) + ")";
      }
      return s;
    }
    case Tactic::Kind::UseAssumption: {
      std::string s = "use assumption " + t.axiom;
      for (size_t k = 0; k < t.at.size(); ++k)
        s += (k ? ", " : " on ") + chref_text(channel_key(t.at[k]), k < t.at_family.size() && t.at_family[k]);
      return s + (t.reverse ? " backwards" : "");
    }
    case Tactic::Kind::Induction: {
      Tactic inner;
      inner.body = t.body;
      return "by induction on " + t.family_index + " with variable " + t.index_var + " (" +
             (t.body.empty() ? "" : tactic_text(inner, false)) + ")";
    }
    case Tactic::Kind::UseApprox: return "use approx assumption " + t.axiom;
  }
  return "";
}

}  // namespace

SourceFile parse(const std::string& text) { return Parser(lex(text)).file(); }

SourceFile parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("IO.open", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string pretty_print(const Tactic& t) { return tactic_text(t, false); }

std::string pretty_print(const SourceFile& f) {
  std::string out;
  for (const auto& d : f.decls) {
    switch (d.kind) {
      case Decl::Kind::Parameter: out += "parameter " + d.name + " : nat ."; break;
      case Decl::Kind::Type: out += "type " + d.name + " ."; break;
      case Decl::Kind::Function:
      case Decl::Kind::Distribution:
        out += std::string(d.kind == Decl::Kind::Function ? "function " : "distribution ") + d.name + " : " +
               to_string(d.fun.arg) + " -> " + to_string(d.fun.result) + " .";
        break;
      case Decl::Kind::Channels: {
        out += "channels";
        for (const auto& c : d.channels.decls()) out += "\n  " + decl_text(c);
        out += " .";
        break;
      }
      case Decl::Kind::Assumption: {
        const Axiom& a = d.axiom;
        out += std::string(a.approximate ? "approx-assumption " : "protocol-assumption ") + a.name + " :";
        for (const auto& c : a.delta.decls()) out += "\n  " + decl_text(c);
        out += "\n  " + inputs_text(a.type.inputs) + "\n  " + to_string(a.lhs) + "\n  " +
               (a.approximate ? "~" : "=") + "\n  " + to_string(a.rhs) + " .";
        break;
      }
      case Decl::Kind::Protocol: out += "protocol " + d.name + " =\n  " + to_string(d.protocol) + " ."; break;
      case Decl::Kind::Theorem: {
        const Theorem& t = d.theorem;
        out += "theorem " + d.name + " :\n  " + inputs_text(t.type.inputs) + "\n  " + to_string(t.lhs) + "\n  " +
               (t.approximate ? "~" : "=") + "\n  " + to_string(t.rhs) + "\nproof\n left:\n  " +
               pretty_print(t.left) + "\n right:\n  " + pretty_print(t.right) + "\nqed .";
        break;
      }
    }
    out += "\n\n";
  }
  return out;
}

}  // namespace ipdl
