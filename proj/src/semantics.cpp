#include "ipdl/semantics.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ipdl/error.hpp"

namespace ipdl {

// ---------------------------------------------------------------- interpretation

namespace {

std::vector<Value> all_bitstrings(unsigned n) {
  std::vector<Value> out{""};
  for (unsigned i = 0; i < n; ++i) {
    std::vector<Value> next;
    for (const auto& v : out) {
      next.push_back(v + "0");
      next.push_back(v + "1");
    }
    out = std::move(next);
  }
  return out;
}

Rational weight_of(const nlohmann::json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  fail("INTERP.weight", "distribution weights must be integers or rational strings");
}

const FunSig& lookup_sig(const std::map<std::string, FunSig>& m, const std::string& name, const char* what) {
  auto it = m.find(name);
  if (it == m.end()) fail("INTERP.unknown-symbol", std::string(what) + " '" + name + "' is not in the signature");
  return it->second;
}

}  // namespace

Interpretation Interpretation::from_json_text(const std::string& text, const Signature& sig) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail("INTERP.parse", e.what());
  }
  Interpretation in;
  const auto types = j.value("types", nlohmann::json::object());
  const auto functions = j.value("functions", nlohmann::json::object());
  const auto distributions = j.value("distributions", nlohmann::json::object());
  for (const auto& [name, spec] : types.items()) {
    TypeInterp ti;
    ti.size = spec.at("size").get<unsigned>();
    if (spec.contains("values"))
      ti.values = spec.at("values").get<std::vector<Value>>();
    else
      ti.values = all_bitstrings(ti.size);
    in.set_type(name, std::move(ti));
  }
  for (const auto& [name, table] : functions.items()) {
    lookup_sig(sig.functions, name, "function");
    in.set_function(name, table.get<std::map<Value, Value>>());
  }
  for (const auto& [name, spec] : distributions.items()) {
    const FunSig& fs = lookup_sig(sig.distributions, name, "distribution");
    std::map<Value, ValueDist> table;
    if (spec.is_string()) {
      if (spec.get<std::string>() != "uniform")
        fail("INTERP.distribution", "unknown distribution shorthand '" + spec.get<std::string>() + "'");
      auto out = in.domain(fs.result);
      ValueDist u;
      for (const auto& v : out) u[v] = Rational(1, static_cast<long>(out.size()));
      for (const auto& a : in.domain(fs.arg)) table[a] = u;
    } else {
      for (const auto& [arg, outcomes] : spec.items()) {
        ValueDist d;
        for (const auto& [v, w] : outcomes.items()) d[v] = weight_of(w);
        table[arg] = std::move(d);
      }
    }
    in.set_distribution(name, std::move(table));
  }
  in.validate(sig);
  return in;
}

Interpretation Interpretation::load(const std::string& path, const Signature& sig) {
  std::ifstream f(path);
  if (!f) fail("INTERP.io", "cannot open interpretation file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json_text(ss.str(), sig);
}

unsigned Interpretation::size(const DataType& t) const {
  switch (t.kind()) {
    case DataType::Kind::Unit: return 0;
    case DataType::Kind::Bool: return 1;
    case DataType::Kind::Product: return size(t.first()) + size(t.second());
    case DataType::Kind::Const: {
      auto it = types_.find(t.name());
      if (it == types_.end()) fail("INTERP.unknown-type", "type '" + t.name() + "' has no interpretation");
      return it->second.size;
    }
  }
  return 0;
}

std::vector<Value> Interpretation::domain(const DataType& t) const {
  switch (t.kind()) {
    case DataType::Kind::Unit: return {""};
    case DataType::Kind::Bool: return {"0", "1"};
    case DataType::Kind::Product: {
      std::vector<Value> out;
      for (const auto& a : domain(t.first()))
        for (const auto& b : domain(t.second())) out.push_back(a + b);
      return out;
    }
    case DataType::Kind::Const: {
      auto it = types_.find(t.name());
      if (it == types_.end()) fail("INTERP.unknown-type", "type '" + t.name() + "' has no interpretation");
      return it->second.values;
    }
  }
  return {};
}

Value Interpretation::apply(const std::string& f, const Value& v) const {
  auto it = functions_.find(f);
  if (it == functions_.end()) fail("INTERP.unknown-symbol", "function '" + f + "' has no interpretation");
  auto jt = it->second.find(v);
  if (jt == it->second.end()) fail("INTERP.partial", "function '" + f + "' is undefined on '" + v + "'");
  return jt->second;
}

const ValueDist& Interpretation::sample(const std::string& d, const Value& v) const {
  auto it = distributions_.find(d);
  if (it == distributions_.end()) fail("INTERP.unknown-symbol", "distribution '" + d + "' has no interpretation");
  auto jt = it->second.find(v);
  if (jt == it->second.end()) fail("INTERP.partial", "distribution '" + d + "' is undefined on '" + v + "'");
  return jt->second;
}

CostEnv Interpretation::sizes() const {
  CostEnv env;
  for (const auto& [name, ti] : types_) env[CostVar::type_size(name)] = ti.size;
  return env;
}

void Interpretation::validate(const Signature& sig) const {
  for (const auto& t : sig.types) {
    auto it = types_.find(t);
    if (it == types_.end()) fail("INTERP.unknown-type", "type '" + t + "' has no interpretation");
    for (const auto& v : it->second.values) {
      if (v.size() != it->second.size)
        fail("INTERP.value-size", "value '" + v + "' of type '" + t + "' does not have length " +
                                      std::to_string(it->second.size));
      if (v.find_first_not_of("01*") != std::string::npos)
        fail("INTERP.value-size", "value '" + v + "' uses symbols outside 0, 1, *");
    }
  }
  auto member = [](const std::vector<Value>& dom, const Value& v) {
    return std::find(dom.begin(), dom.end(), v) != dom.end();
  };
  for (const auto& [f, fs] : sig.functions) {
    if (!functions_.count(f)) fail("INTERP.unknown-symbol", "function '" + f + "' has no interpretation");
    auto result = domain(fs.result);
    for (const auto& a : domain(fs.arg)) {
      Value r = apply(f, a);
      if (!member(result, r)) fail("INTERP.range", "function '" + f + "' maps '" + a + "' outside its result type");
    }
  }
  for (const auto& [d, fs] : sig.distributions) {
    if (!distributions_.count(d)) fail("INTERP.unknown-symbol", "distribution '" + d + "' has no interpretation");
    auto result = domain(fs.result);
    for (const auto& a : domain(fs.arg)) {
      Rational total = 0;
      for (const auto& [v, w] : sample(d, a)) {
        if (w <= 0) fail("INTERP.weight", "distribution '" + d + "' has a non-positive weight");
        if (!member(result, v)) fail("INTERP.range", "distribution '" + d + "' yields '" + v + "' outside its type");
        total += w;
      }
      if (total != 1) fail("INTERP.weight", "weights of '" + d + "' on '" + a + "' sum to " + to_string(total));
    }
  }
}

// ---------------------------------------------------------------- expressions

DataType expr_type(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Lit: return e.type;
    case Expr::Kind::Unit: return DataType::unit();
    case Expr::Kind::True:
    case Expr::Kind::False: return DataType::boolean();
    case Expr::Kind::App: return e.type2;
    case Expr::Kind::Pair: return DataType::product(expr_type(e.args[0]), expr_type(e.args[1]));
    case Expr::Kind::Fst: return e.type;
    case Expr::Kind::Snd: return e.type2;
  }
  return DataType::unit();
}

Value eval_expr(const Interpretation& interp, const ValueEnv& env, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Var: {
      auto it = env.find(e.name);
      if (it == env.end()) fail("SEM.unbound-variable", "variable '" + e.name + "' has no value");
      return it->second;
    }
    case Expr::Kind::Lit: return e.value;
    case Expr::Kind::Unit: return "";
    case Expr::Kind::True: return "1";
    case Expr::Kind::False: return "0";
    case Expr::Kind::App: return interp.apply(e.name, eval_expr(interp, env, e.args[0]));
    case Expr::Kind::Pair: return eval_expr(interp, env, e.args[0]) + eval_expr(interp, env, e.args[1]);
    case Expr::Kind::Fst:
    case Expr::Kind::Snd: {
      Value v = eval_expr(interp, env, e.args[0]);
      size_t k = interp.size(e.type);
      return e.kind == Expr::Kind::Fst ? v.substr(0, k) : v.substr(k);
    }
  }
  return "";
}

// ---------------------------------------------------------------- reactions

std::optional<std::vector<std::pair<Reaction, Rational>>> step_reaction(const Interpretation& interp,
                                                                       const Reaction& r) {
  using Out = std::vector<std::pair<Reaction, Rational>>;
  switch (r.kind) {
    case Reaction::Kind::Val:
    case Reaction::Kind::Read: return std::nullopt;
    case Reaction::Kind::Ret:
      return Out{{Reaction::val(eval_expr(interp, {}, r.expr), expr_type(r.expr)), 1}};
    case Reaction::Kind::Samp: {
      Out out;
      for (const auto& [v, w] : interp.sample(r.name, eval_expr(interp, {}, r.expr)))
        out.emplace_back(Reaction::val(v, r.type2), w);
      return out;
    }
    case Reaction::Kind::If:
      return Out{{eval_expr(interp, {}, r.expr) == "1" ? r.body[0] : r.body[1], 1}};
    case Reaction::Kind::Bind: {
      if (r.body[0].kind == Reaction::Kind::Val)
        return Out{{substitute_var(r.body[1], r.name, Expr::lit(r.body[0].value, r.type)), 1}};
      auto inner = step_reaction(interp, r.body[0]);
      if (!inner) return std::nullopt;
      for (auto& [s, w] : *inner) {
        Reaction b = r;
        b.body[0] = std::move(s);
        s = std::move(b);
      }
      return inner;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- protocols

namespace {

Reaction substitute_read_r(const Reaction& r, const std::string& key, const Value& v, const DataType& t) {
  if (r.kind == Reaction::Kind::Read) return channel_key(r.channel) == key ? Reaction::val(v, t) : r;
  if (r.body.empty()) return r;
  Reaction out = r;
  for (auto& b : out.body) b = substitute_read_r(b, key, v, t);
  return out;
}

bool binds(const Protocol& p, const std::string& key) {
  return p.kind == Protocol::Kind::New && channel_key(p.channel) == key;
}

/// The pending value of (key ::= val v) in scope, if any.
const Reaction* pending_output(const Protocol& p, const std::string& key) {
  switch (p.kind) {
    case Protocol::Kind::Assign:
      return channel_key(p.channel) == key && p.reaction.kind == Reaction::Kind::Val ? &p.reaction : nullptr;
    case Protocol::Kind::Par:
      for (const auto& b : p.body)
        if (auto* r = pending_output(b, key)) return r;
      return nullptr;
    case Protocol::Kind::New: return binds(p, key) ? nullptr : pending_output(p.body[0], key);
    default: return nullptr;
  }
}

Protocol complete_output(const Protocol& p, const std::string& key) {
  switch (p.kind) {
    case Protocol::Kind::Assign:
      if (channel_key(p.channel) == key && p.reaction.kind == Reaction::Kind::Val)
        return Protocol::assign_value(p.channel, p.reaction.value, p.reaction.type);
      return p;
    case Protocol::Kind::Par:
      return Protocol::par(complete_output(p.body[0], key), complete_output(p.body[1], key));
    case Protocol::Kind::New: {
      if (binds(p, key)) return p;
      Protocol out = p;
      out.body[0] = complete_output(p.body[0], key);
      return out;
    }
    default: return p;
  }
}

/// Fires the output of `key` inside p (key's binder scope).
Protocol fire(const Protocol& p, const std::string& key) {
  const Reaction* r = pending_output(p, key);
  Value v = r->value;
  DataType t = r->type;
  return substitute_read(complete_output(p, key), key, v, t);
}

std::optional<ProtocolDist> step_rec(const Interpretation& interp, const Protocol& p, Strategy s) {
  switch (p.kind) {
    case Protocol::Kind::Assign: {
      auto st = step_reaction(interp, p.reaction);
      if (!st) return std::nullopt;
      ProtocolDist d;
      for (auto& [r, w] : *st) {
        Protocol q = Protocol::assign(p.channel, std::move(r));
        d.add(to_string(q), q, w);
      }
      return d;
    }
    case Protocol::Kind::Par: {
      int first = s == Strategy::Leftmost ? 0 : 1;
      for (int k : {first, 1 - first}) {
        auto d = step_rec(interp, p.body[k], s);
        if (!d) continue;
        ProtocolDist out;
        for (const auto& [key, e] : d->entries()) {
          Protocol q = p;
          q.body[k] = e.value;
          out.add(to_string(q), q, e.weight);
        }
        return out;
      }
      return std::nullopt;
    }
    case Protocol::Kind::New: {
      std::string key = channel_key(p.channel);
      auto hide = [&]() -> std::optional<ProtocolDist> {
        if (!pending_output(p.body[0], key)) return std::nullopt;
        Protocol q = p;
        q.body[0] = fire(p.body[0], key);
        ProtocolDist d;
        d.add(to_string(q), q, 1);
        return d;
      };
      if (s == Strategy::Rightmost)
        if (auto d = hide()) return d;
      if (auto d = step_rec(interp, p.body[0], s)) {
        ProtocolDist out;
        for (const auto& [k, e] : d->entries()) {
          Protocol q = p;
          q.body[0] = e.value;
          out.add(to_string(q), q, e.weight);
        }
        return out;
      }
      return hide();
    }
    case Protocol::Kind::Family:
      fail("SEM.not-concrete", "protocol must be desugared before it is run");
    default: return std::nullopt;
  }
}

void collect_free_pending(const Protocol& p, std::set<std::string>& bound, std::vector<std::string>& out) {
  switch (p.kind) {
    case Protocol::Kind::Assign: {
      std::string k = channel_key(p.channel);
      if (p.reaction.kind == Reaction::Kind::Val && !bound.count(k)) out.push_back(k);
      break;
    }
    case Protocol::Kind::Par:
      for (const auto& b : p.body) collect_free_pending(b, bound, out);
      break;
    case Protocol::Kind::New: {
      std::string k = channel_key(p.channel);
      bool fresh = bound.insert(k).second;
      collect_free_pending(p.body[0], bound, out);
      if (fresh) bound.erase(k);
      break;
    }
    default: break;
  }
}

unsigned long long default_budget() {
  if (const char* env = std::getenv("IPDL_STEP_BUDGET")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      fail("SEM.step-budget", std::string("IPDL_STEP_BUDGET is not a number: ") + env);
    }
  }
  return 1000000ULL;
}

}  // namespace

Protocol substitute_read(const Protocol& p, const std::string& key, const Value& v, const DataType& t) {
  switch (p.kind) {
    case Protocol::Kind::Assign: {
      Protocol out = p;
      out.reaction = substitute_read_r(p.reaction, key, v, t);
      return out;
    }
    case Protocol::Kind::Par:
      return Protocol::par(substitute_read(p.body[0], key, v, t), substitute_read(p.body[1], key, v, t));
    case Protocol::Kind::New: {
      if (binds(p, key)) return p;
      Protocol out = p;
      out.body[0] = substitute_read(p.body[0], key, v, t);
      return out;
    }
    case Protocol::Kind::Family:
      fail("SEM.not-concrete", "protocol must be desugared before it is run");
    default: return p;
  }
}

std::optional<Value> assigned_value(const Protocol& p, const std::string& key) {
  switch (p.kind) {
    case Protocol::Kind::AssignValue:
      if (channel_key(p.channel) == key) return p.value;
      return std::nullopt;
    case Protocol::Kind::Par:
      for (const auto& b : p.body)
        if (auto v = assigned_value(b, key)) return v;
      return std::nullopt;
    case Protocol::Kind::New: return binds(p, key) ? std::nullopt : assigned_value(p.body[0], key);
    default: return std::nullopt;
  }
}

std::optional<ProtocolDist> step_protocol(const Interpretation& interp, const Protocol& p, Strategy s) {
  return step_rec(interp, p, s);
}

std::optional<Protocol> free_output_step(const Protocol& p, Strategy s) {
  std::set<std::string> bound;
  std::vector<std::string> pending;
  collect_free_pending(p, bound, pending);
  if (pending.empty()) return std::nullopt;
  return fire(p, s == Strategy::Leftmost ? pending.front() : pending.back());
}

ProtocolDist big_step(const Interpretation& interp, const Protocol& p, const BigStepOptions& opts) {
  unsigned long long budget = opts.budget ? *opts.budget : default_budget();
  unsigned long long steps = 0;
  ProtocolDist done;
  std::vector<std::pair<Protocol, Rational>> work{{p, 1}};
  while (!work.empty()) {
    auto [q, w] = std::move(work.back());
    work.pop_back();
    if (++steps > budget)
      fail("SEM.step-budget", "evaluation exceeded the step budget of " + std::to_string(budget));
    std::optional<ProtocolDist> d;
    if (opts.strategy == Strategy::Rightmost) {
      if (auto f = free_output_step(q, opts.strategy)) {
        work.emplace_back(std::move(*f), w);
        continue;
      }
      d = step_protocol(interp, q, opts.strategy);
    } else {
      d = step_protocol(interp, q, opts.strategy);
      if (!d) {
        if (auto f = free_output_step(q, opts.strategy)) {
          work.emplace_back(std::move(*f), w);
          continue;
        }
      }
    }
    if (!d) {
      done.add(to_string(q), q, w);
      continue;
    }
    for (const auto& [k, e] : d->entries()) work.emplace_back(e.value, w * e.weight);
  }
  return done;
}

bool big_step_audit(const Interpretation& interp, const Protocol& p) {
  return big_step(interp, p, {Strategy::Leftmost, {}}) == big_step(interp, p, {Strategy::Rightmost, {}});
}

// ---------------------------------------------------------------- interaction

namespace {

void check_channel_sets(const Adversary& adv, const Protocol& p) {
  ChannelUse u = free_channels(p);
  std::set<std::string> outs, ins;
  auto key = [](const ChannelItem& c) { return c.index ? channel_key(ChannelRef(c.name, *c.index)) : c.name; };
  for (const auto& w : u.writes) outs.insert(key(w));
  for (const auto& r : u.reads) ins.insert(key(r));
  auto assigns = adv.assigns();
  for (const auto& q : adv.queries())
    if (!outs.count(q)) fail("SEM.channel-sets", "adversary queries '" + q + "', which is not a protocol output");
  for (const auto& i : ins)
    if (!assigns.count(i)) fail("SEM.channel-sets", "protocol input '" + i + "' is not assignable by the adversary");
  for (const auto& a : assigns)
    if (outs.count(a)) fail("SEM.channel-sets", "adversary assigns protocol output '" + a + "'");
}

const Reaction* find_read(const Reaction& r, const std::string& key) {
  if (r.kind == Reaction::Kind::Read && channel_key(r.channel) == key) return &r;
  for (const auto& b : r.body)
    if (auto* x = find_read(b, key)) return x;
  return nullptr;
}

/// Annotated type of some read of key in p; unit when nothing reads it.
DataType read_type(const Protocol& p, const std::string& key) {
  switch (p.kind) {
    case Protocol::Kind::Assign:
      if (auto* r = find_read(p.reaction, key)) return r->type;
      break;
    case Protocol::Kind::Par:
      for (const auto& b : p.body)
        if (auto t = read_type(b, key); !(t == DataType::unit())) return t;
      break;
    case Protocol::Kind::New:
      if (!binds(p, key)) return read_type(p.body[0], key);
      break;
    default: break;
  }
  return DataType::unit();
}

struct GameState {
  std::string adv;
  Protocol protocol;
};

}  // namespace

Decision interact(const Adversary& adv, const Protocol& p0, const Interpretation& interp) {
  Protocol p = adv.embedding.entries().empty() ? p0 : rename_channels_partial(adv.embedding, p0);
  check_channel_sets(adv, p);
  Dist<GameState> states;
  states.add(adv.initial() + "\n" + to_string(p), {adv.initial(), p}, 1);
  std::map<std::string, ProtocolDist> memo;
  for (unsigned round = 0; round < adv.rounds(); ++round) {
    Dist<GameState> next;
    for (const auto& [key, e] : states.entries()) {
      std::string pk = to_string(e.value.protocol);
      auto it = memo.find(pk);
      if (it == memo.end()) it = memo.emplace(pk, big_step(interp, e.value.protocol)).first;
      const ProtocolDist& eta = it->second;
      for (const auto& t : adv.transition(e.value.adv)) {
        for (const auto& [qk, pe] : eta.entries()) {
          Rational w = e.weight * t.weight * pe.weight;
          std::string s = t.state;
          Protocol q = pe.value;
          if (t.action.kind == AdvAction::Kind::Assign) {
            if (auto v = adv.output(t.action.channel, s))
              q = substitute_read(q, t.action.channel, *v, read_type(q, t.action.channel));
          } else if (t.action.kind == AdvAction::Kind::Query) {
            if (auto v = assigned_value(q, t.action.channel)) s = adv.input(t.action.channel, *v, s);
          }
          next.add(s + "\n" + to_string(q), {s, q}, w);
        }
      }
    }
    states = std::move(next);
  }
  Decision d;
  for (const auto& [k, e] : states.entries()) (adv.decide(e.value.adv) ? d.one : d.zero) += e.weight;
  return d;
}

Rational advantage(const Adversary& adv, const Protocol& p, const Protocol& q, const Interpretation& interp) {
  Rational a = interact(adv, p, interp).one - interact(adv, q, interp).one;
  return a < 0 ? -a : a;
}

// ---------------------------------------------------------------- script adversaries

namespace {

struct ScriptState {
  unsigned step = 0;
  std::vector<std::string> obs;
  std::optional<Value> pending;

  static ScriptState parse(const std::string& s) {
    ScriptState st;
    size_t bar = s.find('|');
    st.step = static_cast<unsigned>(std::stoul(s.substr(0, bar)));
    std::string rest = s.substr(bar + 1);
    size_t eq = rest.find('=');
    std::string obs = eq == std::string::npos ? rest : rest.substr(0, eq);
    if (eq != std::string::npos) st.pending = rest.substr(eq + 1);
    size_t start = 0;
    while (start < obs.size()) {
      size_t comma = obs.find(',', start);
      st.obs.push_back(obs.substr(start, comma - start));
      start = comma + 1;
    }
    return st;
  }
  std::string str() const {
    std::string s = std::to_string(step) + "|";
    for (const auto& o : obs) s += o + ",";
    if (pending) s += "=" + *pending;
    return s;
  }
};

// Observed values are stored as "v:" + value so that unit ("") differs from a failed query ("_").
const std::string kMissing = "_";

}  // namespace

ScriptAdversary::ScriptAdversary(std::vector<Step> script, Rule rule, std::set<std::string> queries,
                                 std::set<std::string> assigns)
    : script_(std::move(script)), rule_(std::move(rule)), queries_(std::move(queries)), assigns_(std::move(assigns)) {}

std::vector<AdvTransition> ScriptAdversary::transition(const std::string& s) const {
  ScriptState st = ScriptState::parse(s);
  std::vector<AdvTransition> out;
  if (st.step >= script_.size()) {
    out.push_back({{}, s, 1});
    return out;
  }
  for (const auto& c : script_[st.step]) {
    ScriptState n = st;
    n.step++;
    n.pending.reset();
    if (c.action.kind == AdvAction::Kind::Query) n.obs.push_back(kMissing);
    if (c.action.kind == AdvAction::Kind::Assign) n.pending = c.value;
    out.push_back({c.action, n.str(), c.weight});
  }
  return out;
}

std::string ScriptAdversary::input(const std::string&, const Value& v, const std::string& s) const {
  ScriptState st = ScriptState::parse(s);
  st.obs.back() = "v:" + v;
  return st.str();
}

std::optional<Value> ScriptAdversary::output(const std::string&, const std::string& s) const {
  return ScriptState::parse(s).pending;
}

bool ScriptAdversary::decide(const std::string& s) const {
  ScriptState st = ScriptState::parse(s);
  auto slot = [&](unsigned k) -> std::optional<std::string> {
    if (k >= st.obs.size() || st.obs[k] == kMissing) return std::nullopt;
    return st.obs[k].substr(2);
  };
  switch (rule_.kind) {
    case Rule::Kind::Const: return rule_.constant;
    case Rule::Kind::Equals: return slot(rule_.slot) == std::optional<std::string>(rule_.value);
    case Rule::Kind::Differs: {
      auto a = slot(rule_.slot), b = slot(rule_.slot2);
      return a && b && *a != *b;
    }
  }
  return false;
}

std::string ScriptAdversary::describe() const {
  std::string s = "[";
  for (size_t i = 0; i < script_.size(); ++i) {
    if (i) s += "; ";
    for (size_t j = 0; j < script_[i].size(); ++j) {
      const auto& c = script_[i][j];
      if (j) s += " | ";
      switch (c.action.kind) {
        case AdvAction::Kind::Noop: s += "noop"; break;
        case AdvAction::Kind::Query: s += "query " + c.action.channel; break;
        case AdvAction::Kind::Assign: s += c.action.channel + ":=" + c.value; break;
      }
      if (c.weight != 1) s += " @" + to_string(c.weight);
    }
  }
  s += "] -> ";
  switch (rule_.kind) {
    case Rule::Kind::Const: s += rule_.constant ? "1" : "0"; break;
    case Rule::Kind::Equals: s += "obs" + std::to_string(rule_.slot) + "=" + rule_.value; break;
    case Rule::Kind::Differs: s += "obs" + std::to_string(rule_.slot) + "!=obs" + std::to_string(rule_.slot2); break;
  }
  return s;
}

std::vector<std::shared_ptr<Adversary>> enumerate_adversaries(const std::vector<ChannelSig>& inputs,
                                                              const std::vector<ChannelSig>& outputs,
                                                              const Interpretation& interp, unsigned budget,
                                                              size_t cap) {
  std::set<std::string> queries, assigns;
  for (const auto& o : outputs) queries.insert(o.key);
  for (const auto& i : inputs) assigns.insert(i.key);

  using Choice = ScriptAdversary::Choice;
  std::vector<Choice> actions{{{AdvAction::Kind::Noop, ""}, "", 1}};
  for (const auto& o : outputs) actions.push_back({{AdvAction::Kind::Query, o.key}, "", 1});
  for (const auto& i : inputs) {
    auto dom = interp.domain(i.type);
    if (dom.size() > cap) fail("SEM.domain-cap", "domain of '" + i.key + "' exceeds the adversary cap");
    for (const auto& v : dom) actions.push_back({{AdvAction::Kind::Assign, i.key}, v, 1});
  }

  // Observed value domains per query position, for decision rules.
  std::map<std::string, std::vector<Value>> out_dom;
  for (const auto& o : outputs) out_dom[o.key] = interp.domain(o.type);

  std::vector<std::shared_ptr<Adversary>> pool;
  auto add_rules = [&](const std::vector<ScriptAdversary::Step>& script) {
    std::vector<std::string> queried;
    for (const auto& st : script)
      if (st.size() == 1 && st[0].action.kind == AdvAction::Kind::Query) queried.push_back(st[0].action.channel);
    using Rule = ScriptAdversary::Rule;
    std::vector<Rule> rules{{Rule::Kind::Const, false, 0, "", 0}, {Rule::Kind::Const, true, 0, "", 0}};
    for (unsigned k = 0; k < queried.size(); ++k) {
      for (const auto& v : out_dom[queried[k]]) rules.push_back({Rule::Kind::Equals, false, k, v, 0});
      for (unsigned l = k + 1; l < queried.size(); ++l) rules.push_back({Rule::Kind::Differs, false, k, "", l});
    }
    for (const auto& r : rules) pool.push_back(std::make_shared<ScriptAdversary>(script, r, queries, assigns));
  };

  // Every deterministic script of exactly `len` rounds, len = 1..budget.
  for (unsigned len = 1; len <= budget; ++len) {
    std::vector<size_t> idx(len, 0);
    while (true) {
      std::vector<ScriptAdversary::Step> script;
      for (size_t k : idx) script.push_back({actions[k]});
      add_rules(script);
      size_t pos = 0;
      while (pos < len && ++idx[pos] == actions.size()) idx[pos++] = 0;
      if (pos == len) break;
    }
  }
  // Randomized and halting variants over the full action list.
  for (size_t a = 1; a < actions.size(); ++a) {
    Choice half = actions[a];
    half.weight = Rational(1, 2);
    Choice noop = actions[0];
    noop.weight = Rational(1, 2);
    std::vector<ScriptAdversary::Step> coin{{half, noop}};
    for (size_t b = 1; b < actions.size() && coin.size() < budget; ++b) coin.push_back({actions[b]});
    add_rules(coin);
    std::vector<ScriptAdversary::Step> halting{{half}};
    for (size_t b = 1; b < actions.size() && halting.size() < budget; ++b) halting.push_back({actions[b]});
    add_rules(halting);
  }

  if (pool.size() <= cap) return pool;
  // Thin deterministically, keeping both ends of the enumeration.
  std::vector<std::shared_ptr<Adversary>> out;
  for (size_t k = 0; k < cap; ++k) out.push_back(pool[k * (pool.size() - 1) / (cap - 1)]);
  return out;
}

}  // namespace ipdl
