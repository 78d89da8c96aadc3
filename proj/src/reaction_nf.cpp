#include "ipdl/reaction_nf.hpp"

#include <algorithm>

namespace ipdl {

namespace {

struct Link {
  std::string var;
  DataType type;
  Reaction r;
};

struct Spine {
  std::vector<Link> links;
  Reaction tail;
};

Reaction nf_core(const Reaction& r);

Reaction rebuild(const std::vector<Link>& links, size_t from, const Reaction& tail) {
  Reaction out = tail;
  for (size_t k = links.size(); k-- > from;) out = Reaction::bind(links[k].var, links[k].type, links[k].r, out);
  return out;
}

Reaction uniquify(const Reaction& r, unsigned& counter) {
  Reaction out = r;
  if (r.kind == Reaction::Kind::Bind) {
    std::string y = "%u" + std::to_string(counter++);
    out.name = y;
    out.body[0] = uniquify(r.body[0], counter);
    out.body[1] = uniquify(substitute_var(r.body[1], r.name, Expr::var(y, r.type)), counter);
    return out;
  }
  for (auto& b : out.body) b = uniquify(b, counter);
  return out;
}

Spine flatten(const Reaction& r) {
  if (r.kind != Reaction::Kind::Bind) {
    Reaction t = r;
    if (t.kind == Reaction::Kind::If)
      for (auto& b : t.body) b = nf_core(b);
    return {{}, t};
  }
  Spine a = flatten(r.body[0]);
  Spine s = flatten(r.body[1]);
  a.links.push_back({r.name, r.type, a.tail});
  for (auto& l : s.links) a.links.push_back(std::move(l));
  a.tail = std::move(s.tail);
  return a;
}

bool uses(const Reaction& r, const std::string& x) { return free_vars(r).count(x) > 0; }

bool used_after(const Spine& s, size_t k) {
  for (size_t j = k + 1; j < s.links.size(); ++j)
    if (uses(s.links[j].r, s.links[k].var)) return true;
  return uses(s.tail, s.links[k].var);
}

Reaction simplify_reaction(const Reaction& r) {
  Reaction out = r;
  out.expr = simplify_expr(r.expr);
  for (auto& b : out.body) b = simplify_reaction(b);
  return out;
}

/// Removes link k, substituting `by` for its variable in the rest.
Spine eliminate(const Spine& s, size_t k, const Expr& by) {
  Spine out;
  out.links.assign(s.links.begin(), s.links.begin() + static_cast<long>(k));
  Reaction rest = simplify_reaction(substitute_var(rebuild(s.links, k + 1, s.tail), s.links[k].var, by));
  Spine tail = flatten(rest);
  for (auto& l : tail.links) out.links.push_back(std::move(l));
  out.tail = std::move(tail.tail);
  return out;
}

std::optional<Reaction> select_branch(const Reaction& r) {
  if (r.kind != Reaction::Kind::If) return std::nullopt;
  if (r.expr.kind == Expr::Kind::True) return r.body[0];
  if (r.expr.kind == Expr::Kind::False) return r.body[1];
  return std::nullopt;
}

/// One rewrite; false when none applies.
bool rewrite_once(Spine& s) {
  for (size_t k = 0; k < s.links.size(); ++k) {
    const Link& l = s.links[k];
    if (l.r.kind == Reaction::Kind::Ret) {
      s = eliminate(s, k, l.r.expr);
      return true;
    }
    if (l.r.kind == Reaction::Kind::Val) {
      s = eliminate(s, k, Expr::lit(l.r.value, l.r.type));
      return true;
    }
    if (auto b = select_branch(l.r)) {
      Spine branch = flatten(*b);
      std::vector<Link> links(s.links.begin(), s.links.begin() + static_cast<long>(k));
      for (auto& x : branch.links) links.push_back(std::move(x));
      links.push_back({l.var, l.type, branch.tail});
      for (size_t j = k + 1; j < s.links.size(); ++j) links.push_back(s.links[j]);
      s.links = std::move(links);
      return true;
    }
    if (l.r.kind == Reaction::Kind::Read) {
      for (size_t j = 0; j < k; ++j)
        if (s.links[j].r.kind == Reaction::Kind::Read && s.links[j].r.channel == l.r.channel &&
            s.links[j].type == l.type) {
          s = eliminate(s, k, Expr::var(s.links[j].var, l.type));
          return true;
        }
    }
    if (l.r.kind == Reaction::Kind::Samp && !used_after(s, k)) {
      s.links.erase(s.links.begin() + static_cast<long>(k));
      return true;
    }
  }
  if (auto b = select_branch(s.tail)) {
    Spine branch = flatten(*b);
    for (auto& x : branch.links) s.links.push_back(std::move(x));
    s.tail = std::move(branch.tail);
    return true;
  }
  // Right unit: x <- R ; ... ; ret x with x otherwise unused.
  if (s.tail.kind == Reaction::Kind::Ret && s.tail.expr.kind == Expr::Kind::Var) {
    for (size_t k = 0; k < s.links.size(); ++k) {
      if (s.links[k].var != s.tail.expr.name) continue;
      bool other = false;
      for (size_t j = k + 1; j < s.links.size(); ++j) other |= uses(s.links[j].r, s.links[k].var);
      if (other) break;
      s.tail = s.links[k].r;
      s.links.erase(s.links.begin() + static_cast<long>(k));
      return true;
    }
  }
  return false;
}

/// Canonical topological order: among links whose dependencies are placed,
/// take the one with the smallest printed form (placed variables renamed by
/// position).
void sort_links(Spine& s) {
  std::vector<Link> placed;
  std::vector<bool> done(s.links.size(), false);
  std::map<std::string, std::string> names;
  auto key_of = [&](const Link& l) {
    Reaction r = l.r;
    for (const auto& [from, to] : names) r = substitute_var(r, from, Expr::var(to, DataType::unit()));
    return to_string(l.type) + "|" + to_string(r);
  };
  for (size_t round = 0; round < s.links.size(); ++round) {
    std::optional<size_t> best;
    std::string best_key;
    for (size_t k = 0; k < s.links.size(); ++k) {
      if (done[k]) continue;
      bool ready = true;
      for (const auto& x : free_vars(s.links[k].r))
        for (size_t j = 0; j < s.links.size(); ++j)
          if (!done[j] && s.links[j].var == x) ready = false;
      if (!ready) continue;
      std::string key = key_of(s.links[k]);
      if (!best || key < best_key) {
        best = k;
        best_key = key;
      }
    }
    done[*best] = true;
    names[s.links[*best].var] = "#" + std::to_string(placed.size());
    placed.push_back(s.links[*best]);
  }
  s.links = std::move(placed);
}

Reaction nf_core(const Reaction& r) {
  Spine s = flatten(simplify_reaction(r));
  for (size_t guard = 0; guard < 10000 && rewrite_once(s); ++guard) {
  }
  sort_links(s);
  return rebuild(s.links, 0, s.tail);
}

Reaction canonical_names(const Reaction& r, unsigned& counter) {
  Reaction out = r;
  if (r.kind == Reaction::Kind::Bind) {
    std::string y = "%" + std::to_string(counter++);
    out.name = y;
    out.body[0] = canonical_names(r.body[0], counter);
    out.body[1] = canonical_names(substitute_var(r.body[1], r.name, Expr::var(y, r.type)), counter);
    return out;
  }
  for (auto& b : out.body) b = canonical_names(b, counter);
  return out;
}

}  // namespace

Expr simplify_expr(const Expr& e) {
  Expr out = e;
  for (auto& a : out.args) a = simplify_expr(a);
  if ((out.kind == Expr::Kind::Fst || out.kind == Expr::Kind::Snd) && out.args[0].kind == Expr::Kind::Pair)
    return out.args[0].args[out.kind == Expr::Kind::Fst ? 0 : 1];
  return out;
}

Reaction normalize_reaction(const Reaction& r) {
  unsigned u = 0;
  Reaction core = nf_core(uniquify(r, u));
  unsigned c = 0;
  return canonical_names(core, c);
}

bool reactions_equivalent(const Reaction& a, const Reaction& b) {
  return alpha_eq(normalize_reaction(a), normalize_reaction(b));
}

}  // namespace ipdl
