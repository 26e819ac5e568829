// Naive grounding and the reduct check. Shares no evaluation code with the
// compiled join in solver.cpp.

#include <map>
#include <optional>
#include <set>
#include <string>

#include "nsl/error.hpp"
#include "nsl/solver.hpp"

namespace nsl {

namespace {

using AtomSet = std::set<Atom, AtomLess>;
using Substitution = std::map<SymbolId, Term>;
using ByPredicate = std::map<PredicateKey, std::vector<Atom>>;

Term substitute(const Term& t, const Substitution& s) {
  if (!t.is_variable()) return t;
  auto it = s.find(t.id());
  return it == s.end() ? t : it->second;
}

Atom substitute(const Atom& a, const Substitution& s) {
  Atom out = a;
  for (auto& t : out.args) t = substitute(t, s);
  return out;
}

bool unify(const Atom& pattern, const Atom& ground, Substitution& s) {
  if (pattern.predicate != ground.predicate || pattern.args.size() != ground.args.size()) return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i) {
    Term p = substitute(pattern.args[i], s);
    if (p.is_variable()) {
      s[p.id()] = ground.args[i];
    } else if (!(p == ground.args[i])) {
      return false;
    }
  }
  return true;
}

void substitutions(const Rule& rule, std::size_t i, const ByPredicate& possible, Substitution& s,
                   std::vector<Substitution>& out) {
  if (i == rule.body_pos.size()) {
    out.push_back(s);
    return;
  }
  auto it = possible.find(rule.body_pos[i].key());
  if (it == possible.end()) return;
  for (const auto& atom : it->second) {
    Substitution extended = s;
    if (unify(rule.body_pos[i], atom, extended)) substitutions(rule, i + 1, possible, extended, out);
  }
}

// Ground instance under `s`, or nothing if a comparison is false.
std::optional<Rule> instantiate(const Rule& rule, const Substitution& s) {
  Rule g;
  g.head = substitute(rule.head, s);
  for (const auto& a : rule.body_pos) g.body_pos.push_back(substitute(a, s));
  for (const auto& a : rule.body_neg) g.body_neg.push_back(substitute(a, s));
  for (const auto& c : rule.comparisons) {
    if (!evaluate(c.op, substitute(c.lhs, s), substitute(c.rhs, s))) return std::nullopt;
  }
  return g;
}

}  // namespace

LogicProgram ground(const LogicProgram& program, const Interpretation& extra_facts, const GroundOptions& options) {
  AtomSet possible;
  ByPredicate by_predicate;
  auto add_possible = [&](const Atom& a) {
    if (!possible.insert(a).second) return false;
    by_predicate[a.key()].push_back(a);
    return true;
  };
  for (const auto& a : extra_facts.atoms()) add_possible(a);
  for (const auto& r : program.rules) check_safety(r);

  std::map<std::string, Rule> instances;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& rule : program.rules) {
      Substitution empty;
      std::vector<Substitution> subs;
      substitutions(rule, 0, by_predicate, empty, subs);
      for (const auto& s : subs) {
        auto g = instantiate(rule, s);
        if (!g) continue;
        auto key = g->to_string();
        if (instances.size() >= options.max_ground_rules && !instances.count(key)) {
          throw ResourceError("grounding exceeds cap of " + std::to_string(options.max_ground_rules) +
                              " ground rules");
        }
        if (add_possible(g->head)) changed = true;
        instances.emplace(std::move(key), std::move(*g));
      }
    }
  }

  LogicProgram out;
  for (auto& a : extra_facts.atoms()) out.rules.push_back(Rule{std::move(a), {}, {}, {}});
  for (auto& [key, rule] : instances) out.rules.push_back(std::move(rule));
  return out;
}

bool verify_answer_set(const LogicProgram& program, const Interpretation& facts, const Interpretation& candidate,
                       const GroundOptions& options) {
  const LogicProgram grounded = ground(program, facts, options);

  // reduct: drop rules blocked by the candidate, strip remaining negation
  std::vector<const Rule*> reduct;
  for (const auto& r : grounded.rules) {
    bool blocked = false;
    for (const auto& n : r.body_neg) blocked = blocked || candidate.contains(n);
    if (!blocked) reduct.push_back(&r);
  }

  AtomSet model;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Rule* r : reduct) {
      bool fires = true;
      for (const auto& b : r->body_pos) fires = fires && model.count(b) > 0;
      if (fires && model.insert(r->head).second) changed = true;
    }
  }

  auto expected = candidate.atoms();
  return expected.size() == model.size() && std::equal(expected.begin(), expected.end(), model.begin());
}

}  // namespace nsl
