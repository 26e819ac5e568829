#include "nsl/solver.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include "nsl/error.hpp"

namespace nsl {

CompiledRule::CompiledRule(const Rule& rule) : rule_(rule) {
  check_safety(rule);
  std::unordered_map<SymbolId, std::uint32_t> slots;
  std::vector<bool> bound;

  auto slot_of = [&](const Term& v) {
    auto [it, fresh] = slots.emplace(v.id(), num_vars_);
    if (fresh) {
      ++num_vars_;
      bound.push_back(false);
    }
    return it->second;
  };
  // Mode of an argument at the current point of the plan; marks free
  // variables bound as a side effect.
  auto compile_arg = [&](const Term& t) {
    Arg a;
    if (!t.is_variable()) {
      a.constant = t;
      return a;
    }
    a.slot = slot_of(t);
    a.mode = bound[a.slot] ? Arg::Mode::Bound : Arg::Mode::Free;
    bound[a.slot] = true;
    return a;
  };
  auto compile_literal = [&](const Atom& atom) {
    Literal lit{atom.key(), {}, true};
    for (const auto& t : atom.args) {
      lit.args.push_back(compile_arg(t));
      if (lit.args.back().mode == Arg::Mode::Free) lit.all_bound = false;
    }
    return lit;
  };
  auto bound_count = [&](const Atom& atom) {
    int n = 0;
    for (const auto& t : atom.args) {
      if (!t.is_variable()) ++n;
      else if (auto it = slots.find(t.id()); it != slots.end() && bound[it->second]) ++n;
    }
    return n - static_cast<int>(atom.args.size());  // 0 when fully bound
  };
  auto vars_bound = [&](const Atom& atom) { return bound_count(atom) == 0; };
  auto term_bound = [&](const Term& t) {
    if (!t.is_variable()) return true;
    auto it = slots.find(t.id());
    return it != slots.end() && bound[it->second];
  };

  std::vector<bool> pos_done(rule.body_pos.size()), neg_done(rule.body_neg.size()),
      cmp_done(rule.comparisons.size());
  auto flush_filters = [&] {
    for (std::size_t i = 0; i < rule.body_neg.size(); ++i) {
      if (!neg_done[i] && vars_bound(rule.body_neg[i])) {
        neg_done[i] = true;
        negative_.push_back(compile_literal(rule.body_neg[i]));
        plan_.push_back({Step::Kind::Negative, static_cast<std::uint32_t>(negative_.size() - 1)});
      }
    }
    for (std::size_t i = 0; i < rule.comparisons.size(); ++i) {
      const auto& c = rule.comparisons[i];
      if (!cmp_done[i] && term_bound(c.lhs) && term_bound(c.rhs)) {
        cmp_done[i] = true;
        CmpStep s{compile_arg(c.lhs), c.op, compile_arg(c.rhs)};
        compares_.push_back(s);
        plan_.push_back({Step::Kind::Compare, static_cast<std::uint32_t>(compares_.size() - 1)});
      }
    }
  };

  flush_filters();
  for (std::size_t n = 0; n < rule.body_pos.size(); ++n) {
    // most-bound positive literal next; ties keep source order
    std::size_t best = rule.body_pos.size();
    int best_score = 0;
    for (std::size_t i = 0; i < rule.body_pos.size(); ++i) {
      if (pos_done[i]) continue;
      int score = bound_count(rule.body_pos[i]);
      if (best == rule.body_pos.size() || score > best_score) {
        best = i;
        best_score = score;
      }
    }
    pos_done[best] = true;
    positive_.push_back(compile_literal(rule.body_pos[best]));
    plan_.push_back({Step::Kind::Positive, static_cast<std::uint32_t>(positive_.size() - 1)});
    flush_filters();
  }
  head_ = compile_literal(rule.head);
}

template <class Emit>
bool CompiledRule::join(const Interpretation& model, std::size_t step, std::vector<Term>& binding,
                        Emit& emit) const {
  if (step == plan_.size()) return emit(binding);
  const Step& s = plan_[step];
  switch (s.kind) {
    case Step::Kind::Compare: {
      const auto& c = compares_[s.index];
      if (!evaluate(c.op, value(c.lhs, binding), value(c.rhs, binding))) return false;
      return join(model, step + 1, binding, emit);
    }
    case Step::Kind::Negative: {
      const auto& lit = negative_[s.index];
      Term tuple[8];
      std::vector<Term> big;
      Term* out = lit.args.size() <= 8 ? tuple : (big.resize(lit.args.size()), big.data());
      for (std::size_t i = 0; i < lit.args.size(); ++i) out[i] = value(lit.args[i], binding);
      if (model.contains(lit.key, std::span<const Term>(out, lit.args.size()))) return false;
      return join(model, step + 1, binding, emit);
    }
    case Step::Kind::Positive: {
      const auto& lit = positive_[s.index];
      const Relation* rel = model.relation(lit.key);
      if (rel == nullptr || rel->size() == 0) return false;
      if (lit.all_bound) {
        Term tuple[8];
        std::vector<Term> big;
        Term* out = lit.args.size() <= 8 ? tuple : (big.resize(lit.args.size()), big.data());
        for (std::size_t i = 0; i < lit.args.size(); ++i) out[i] = value(lit.args[i], binding);
        if (!rel->contains(std::span<const Term>(out, lit.args.size()))) return false;
        return join(model, step + 1, binding, emit);
      }
      const std::size_t rows = rel->size();
      for (std::size_t r = 0; r < rows; ++r) {
        auto row = rel->row(r);
        bool ok = true;
        for (std::size_t i = 0; i < lit.args.size() && ok; ++i) {
          const Arg& a = lit.args[i];
          switch (a.mode) {
            case Arg::Mode::Constant: ok = row[i] == a.constant; break;
            case Arg::Mode::Bound: ok = row[i] == binding[a.slot]; break;
            case Arg::Mode::Free: binding[a.slot] = row[i]; break;
          }
        }
        if (ok && join(model, step + 1, binding, emit)) return true;
      }
      return false;
    }
  }
  return false;
}

bool CompiledRule::body_holds(const Interpretation& model) const {
  std::vector<Term> binding(num_vars_);
  auto stop = [](const std::vector<Term>&) { return true; };
  return join(model, 0, binding, stop);
}

void CompiledRule::derive(const Interpretation& model, std::vector<Term>& heads) const {
  std::vector<Term> binding(num_vars_);
  auto collect = [&](const std::vector<Term>& b) {
    for (const auto& a : head_.args) heads.push_back(value(a, b));
    return false;
  };
  join(model, 0, binding, collect);
}

// ---------------------------------------------------------------------------
// Solver

namespace {

struct Graph {
  std::map<PredicateKey, std::size_t> ids;
  std::vector<std::vector<std::pair<std::size_t, bool>>> edges;  // (target, negative)

  std::size_t node(PredicateKey k) {
    auto [it, fresh] = ids.emplace(k, ids.size());
    if (fresh) edges.emplace_back();
    return it->second;
  }
};

// Tarjan; with edges head -> body the SCCs come out in evaluation order.
std::vector<std::vector<std::size_t>> strongly_connected(const Graph& g) {
  const std::size_t n = g.edges.size();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto [w, neg] : g.edges[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> scc;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        scc.push_back(w);
      } while (w != v);
      out.push_back(std::move(scc));
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) visit(v);
  }
  return out;
}

}  // namespace

Solver::Solver(const LogicProgram& program) {
  Graph g;
  std::vector<std::size_t> rule_node;
  for (const auto& r : program.rules) {
    if (r.is_fact()) {
      check_safety(r);
      static_facts_.insert(r.head);
      continue;
    }
    rules_.emplace_back(r);
    std::size_t h = g.node(r.head.key());
    rule_node.push_back(h);
    for (const auto& a : r.body_pos) {
      std::size_t b = g.node(a.key());
      g.edges[h].push_back({b, false});
    }
    for (const auto& a : r.body_neg) {
      std::size_t b = g.node(a.key());
      g.edges[h].push_back({b, true});
    }
  }
  auto sccs = strongly_connected(g);
  std::vector<std::size_t> component(g.edges.size());
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    for (auto v : sccs[c]) component[v] = c;
  }
  std::vector<Stratum> per_component(sccs.size());
  for (std::size_t v = 0; v < g.edges.size(); ++v) {
    for (auto [w, neg] : g.edges[v]) {
      if (component[v] != component[w]) continue;
      if (neg) {
        std::string name;
        for (const auto& [k, id] : g.ids) {
          if (id == v) name = to_string(k);
        }
        throw SemanticError("program is not stratified: recursion through negation involving " + name);
      }
      per_component[component[v]].recursive = true;
    }
  }
  for (std::size_t i = 0; i < rules_.size(); ++i) per_component[component[rule_node[i]]].rules.push_back(i);
  for (auto& s : per_component) {
    if (!s.rules.empty()) strata_.push_back(std::move(s));
  }
}

Interpretation Solver::solve(const Interpretation& facts) const {
  Interpretation model = static_facts_;
  model.merge(facts);
  std::vector<Term> heads;
  for (const auto& stratum : strata_) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto idx : stratum.rules) {
        const auto& rule = rules_[idx];
        const auto key = rule.head_key();
        if (key.arity == 0) {
          if (rule.body_holds(model) && model.insert(key, {})) changed = true;
          continue;
        }
        heads.clear();
        rule.derive(model, heads);
        for (std::size_t i = 0; i < heads.size(); i += key.arity) {
          if (model.insert(key, std::span<const Term>(heads.data() + i, key.arity))) changed = true;
        }
      }
      if (!stratum.recursive) break;
    }
  }
  return model;
}

Interpretation answer_set(const LogicProgram& program, const Interpretation& facts) {
  return Solver(program).solve(facts);
}

}  // namespace nsl
