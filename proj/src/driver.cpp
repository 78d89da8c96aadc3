#include <chrono>
#include <cstdlib>
#include <sstream>

#include "ipdl/frontend.hpp"
#include "ipdl/norm.hpp"

namespace ipdl {

namespace {

std::string location(const Error& e) {
  if (!e.span()) return "";
  return " at " + std::to_string(e.span()->line) + ":" + std::to_string(e.span()->column);
}

std::string error_line(const Error& e) { return "error[" + e.code() + "]" + location(e) + ": " + e.what(); }

std::optional<size_t> step_budget() {
  const char* v = std::getenv("IPDL_STEP_BUDGET");
  if (!v || !*v) return std::nullopt;
  return static_cast<size_t>(std::strtoull(v, nullptr, 10));
}

TheoremResult run_theorem(const SourceFile& f, const Decl& d) {
  const Theorem& th = d.theorem;
  Kernel k(theory_for(f, th));
  typecheck_protocol(f.sig, f.channels, th.lhs, th.type);
  typecheck_protocol(f.sig, f.channels, th.rhs, th.type);
  ProofState left = run_tactic(ProofState(k, th.lhs), th.left);
  ProofState right = run_tactic(ProofState(k, th.rhs), th.right);
  ApproxJudgment j = close_proof(left, right);

  TheoremResult r;
  r.name = d.name;
  r.ledger = j.ledger();
  r.exact_steps = j.exact_steps();
  r.trace = j.trace();
  for (const auto& l : left.log()) r.log.push_back("left: " + l);
  for (const auto& l : right.log()) r.log.push_back("right: " + l);
  if (!th.approximate)
    for (const auto& [name, e] : r.ledger)
      if (e.count != 0)
        throw Error("PROOF.approx-in-exact", "exact theorem uses approximate assumption '" + name + "'", d.span);
  if (auto budget = step_budget(); budget && r.exact_steps > *budget)
    throw Error("PROOF.budget",
                std::to_string(r.exact_steps) + " kernel steps exceed the budget of " + std::to_string(*budget),
                d.span);
  return r;
}

std::string audit_text(const std::vector<std::string>& trace) {
  std::map<std::string, size_t> hist;
  for (const auto& line : trace) {
    std::istringstream in(line);
    std::string rule;
    in >> rule;
    if (rule.empty() || rule == "sym" || rule == "}") continue;
    ++hist[rule];
  }
  std::string out = "strategy audit:\n";
  for (const auto& [rule, n] : hist) out += "  " + rule + ": " + std::to_string(n) + "\n";
  return out;
}

std::vector<ChannelSig> channel_sigs(const ChannelSet& items, const ChannelContext& delta, const CostEnv& env) {
  std::vector<ChannelSig> out;
  for (const auto& c : instantiate_items(items, env))
    out.push_back({channel_key(c.index ? ChannelRef(c.name, *c.index) : ChannelRef(c.name)), delta.find(c.name)->type});
  return out;
}

}  // namespace

Theory theory_for(const SourceFile& f, const Theorem& th) {
  Theory t;
  t.sig = f.sig;
  t.delta = f.channels;
  t.type = th.type;
  for (const auto& d : f.decls)
    if (d.kind == Decl::Kind::Assumption) t.axioms[d.name] = d.axiom;
  return t;
}

OracleResult oracle_check(const SourceFile& f, const Theorem& th, const Interpretation& interp,
                          const CostEnv& params, unsigned rounds, size_t cap) {
  CostEnv env = interp.sizes();
  env.insert(params.begin(), params.end());
  Protocol p = desugar_families(th.lhs, env), q = desugar_families(th.rhs, env);
  auto pool = enumerate_adversaries(channel_sigs(th.type.inputs, f.channels, env),
                                    channel_sigs(th.type.outputs, f.channels, env), interp, rounds, cap);
  OracleResult r;
  r.pool = pool.size();
  for (const auto& a : pool) r.max_advantage = std::max(r.max_advantage, advantage(*a, p, q, interp));
  return r;
}

std::map<std::string, std::string> parse_assignments(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) fail("CLI.assignment", "expected k=v, found '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

BoundInputs concrete_inputs(const std::map<std::string, std::string>& kv, const Signature& sig) {
  BoundInputs in;
  in.functions = sig.functions.size();
  in.distributions = sig.distributions.size();
  auto natural = [](const std::string& k, const std::string& v) {
    Rational q = parse_rational(v);
    if (q < 0 || denominator(q) != 1) fail("CLI.concrete", "'" + k + "' must be a natural number, found '" + v + "'");
    return Natural(numerator(q));
  };
  for (const auto& [k, v] : kv) {
    if (k == "C_sem")
      in.c_sem = natural(k, v);
    else if (k == "C_adv")
      in.c_adv = natural(k, v);
    else if (k == "eta_sem")
      in.eta_sem = parse_rational(v);
    else if (k.rfind("eps_", 0) == 0)
      in.epsilon[k.substr(4)] = parse_rational(v);
    else if (sig.has_param(k))
      in.sizes[CostVar::param(k)] = natural(k, v);
    else if (sig.has_type(k))
      in.sizes[CostVar::type_size(k)] = natural(k, v);
    else
      fail("CLI.concrete", "unknown concrete input '" + k + "'");
  }
  return in;
}

std::string emit_report(const Ledger& ledger, const Signature& sig, const RunOptions& opts) {
  std::string out;
  Ledger used;
  for (const auto& [name, e] : ledger)
    if (e.count != 0) used[name] = e;
  if (used.empty()) out += "no approximate assumptions used\n";
  for (const auto& [name, e] : used) {
    out += "indistinguishability assumption " + name + " :\n";
    out += "count: " + to_string(e.count) + "\n";
    out += "context: " + to_string(cost_normalize(e.context, sig.var_order())) + "\n";
  }
  if (opts.concrete.empty()) return out;
  BoundInputs in = concrete_inputs(opts.concrete, sig);
  ConcreteBound b = concrete_bound(used, in);
  out += "concrete bound:\n";
  for (const auto& t : b.terms) {
    out += "  " + t.axiom + ": context = " + to_string(t.context) + ", budget = " + to_string(t.budget) +
           ", epsilon = " + to_string(t.epsilon) + ", term = " + to_string(t.term) + "\n";
  }
  std::ostringstream approx;
  approx.precision(6);
  approx << b.advantage.convert_to<double>();
  out += "  advantage <= " + to_string(b.advantage) + " (~ " + approx.str() + ")\n";
  return out;
}

BoundReport run_source(const SourceFile& f, const RunOptions& opts) {
  BoundReport rep;
  for (const auto& d : f.decls) {
    try {
      switch (d.kind) {
        case Decl::Kind::Assumption: check_axiom(f.sig, d.axiom); break;
        case Decl::Kind::Protocol: infer_protocol(f.sig, f.channels, d.protocol); break;
        case Decl::Kind::Function:
        case Decl::Kind::Distribution:
          check_datatype(f.sig, d.fun.arg);
          check_datatype(f.sig, d.fun.result);
          break;
        case Decl::Kind::Theorem: {
          auto t0 = std::chrono::steady_clock::now();
          TheoremResult r = run_theorem(f, d);
          auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
          rep.text += "theorem " + d.name + " : checked\n";
          rep.text += "kernel steps: " + std::to_string(r.exact_steps) + "\n";
          if (!opts.stable) rep.text += "time: " + std::to_string(ms.count()) + " ms\n";
          rep.text += emit_report(r.ledger, f.sig, opts);
          if (!opts.oracle_interp.empty()) {
            Interpretation in = Interpretation::load(opts.oracle_interp, f.sig);
            in.validate(f.sig);
            CostEnv params;
            std::string at;
            for (const auto& [k, v] : opts.oracle_params) {
              if (!f.sig.has_param(k)) fail("CLI.oracle", "unknown parameter '" + k + "'");
              params[CostVar::param(k)] = Natural(v);
              at += (at.empty() ? "" : ", ") + k + " = " + v;
            }
            OracleResult o = oracle_check(f, d.theorem, in, params, opts.oracle_rounds, opts.oracle_cap);
            rep.text += "oracle check" + (at.empty() ? "" : " (" + at + ")") + ": max advantage " + to_string(o.max_advantage) + " over " +
                        std::to_string(o.pool) + " adversaries\n";
            if (!d.theorem.approximate && o.max_advantage != 0)
              fail("ORACLE.nonzero", "exact theorem is distinguishable at the toy interpretation");
          }
          if (opts.strategy_audit) rep.text += audit_text(r.trace);
          if (opts.trace) {
            rep.text += "tactics:\n";
            for (const auto& l : r.log) rep.text += "  " + l + "\n";
            rep.text += "derivation:\n";
            for (const auto& l : r.trace) rep.text += "  " + l + "\n";
          }
          rep.theorems.push_back(std::move(r));
          break;
        }
        default: break;
      }
    } catch (Error& e) {
      e.set_span(d.span);
      rep.text += error_line(e) + "\n";
      rep.exit_status = 1;
      return rep;
    }
  }
  return rep;
}

BoundReport run_file(const std::string& path, const RunOptions& opts) {
  try {
    return run_source(parse_file(path), opts);
  } catch (const Error& e) {
    BoundReport rep;
    rep.text = error_line(e) + "\n";
    rep.exit_status = 1;
    return rep;
  }
}

}  // namespace ipdl
