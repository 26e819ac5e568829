#include "nsl/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "nsl/error.hpp"
#include "nsl/solver.hpp"

namespace nsl {

namespace {

constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kInf - b ? kInf : a + b; }
std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) { return (b != 0 && a > kInf / b) ? kInf : a * b; }

std::uint64_t scaled_penalty(Penalty p, Gamma g) { return p.is_infinite() ? kInf : sat_mul(p.value(), g.den); }

void base_status(std::span<const Wcdpi> examples, const std::vector<Interpretation>& models, FireMatrix& out) {
  out.num_examples = examples.size();
  out.inc_in_base.resize(examples.size());
  out.exc_in_base.assign(examples.size(), false);
  for (std::size_t e = 0; e < examples.size(); ++e) {
    for (const auto& a : examples[e].pi.inc) out.inc_in_base[e].push_back(models[e].contains(a));
    for (const auto& a : examples[e].pi.exc) {
      if (models[e].contains(a)) out.exc_in_base[e] = true;
    }
  }
}

void require_ground_heads(std::span<const Rule> rules) {
  for (const auto& r : rules) {
    if (!r.head.is_ground()) throw ArgumentError("hypothesis rules need ground heads: " + r.to_string());
  }
}

Bitset fire_row(const Rule& rule, const std::vector<Interpretation>& models) {
  CompiledRule compiled(rule);
  Bitset row(models.size());
  for (std::size_t e = 0; e < models.size(); ++e) {
    if (models[e].contains(rule.head) || compiled.body_holds(models[e])) row.set(e);
  }
  return row;
}

}  // namespace

std::vector<Interpretation> base_models(const LogicProgram& background, std::span<const Wcdpi> examples) {
  Solver solver(background);
  std::vector<Interpretation> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(solver.solve(facts_of(e.context)));
  return out;
}

std::vector<Interpretation> base_models_parallel(const LogicProgram& background, std::span<const Wcdpi> examples) {
  Solver solver(background);
  std::vector<Interpretation> out(examples.size());
  const auto n = static_cast<std::int64_t>(examples.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t e = 0; e < n; ++e) {
    out[static_cast<std::size_t>(e)] = solver.solve(facts_of(examples[static_cast<std::size_t>(e)].context));
  }
  return out;
}

FireMatrix fire_matrix_serial(std::span<const Rule> rules, std::span<const Wcdpi> examples,
                              const LogicProgram& background) {
  require_ground_heads(rules);
  FireMatrix out;
  auto models = base_models(background, examples);
  base_status(examples, models, out);
  out.fires.reserve(rules.size());
  for (const auto& r : rules) out.fires.push_back(fire_row(r, models));
  return out;
}

FireMatrix fire_matrix(std::span<const Rule> rules, std::span<const Wcdpi> examples, const LogicProgram& background) {
  require_ground_heads(rules);
  FireMatrix out;
  auto models = base_models_parallel(background, examples);
  base_status(examples, models, out);
  out.fires.assign(rules.size(), Bitset(examples.size()));
  const auto n = static_cast<std::int64_t>(rules.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (std::int64_t r = 0; r < n; ++r) {
    out.fires[static_cast<std::size_t>(r)] = fire_row(rules[static_cast<std::size_t>(r)], models);
  }
  return out;
}

bool coverage(std::span<const std::size_t> hypothesis, std::size_t e, const FireMatrix& fires,
              std::span<const Rule> rules, std::span<const Wcdpi> examples) {
  const auto& ex = examples[e];
  if (fires.exc_in_base[e]) return false;
  auto derived = [&](const Atom& a) {
    for (auto r : hypothesis) {
      if (fires.fires[r].test(e) && rules[r].head == a) return true;
    }
    return false;
  };
  for (std::size_t i = 0; i < ex.pi.inc.size(); ++i) {
    if (!fires.inc_in_base[e][i] && !derived(ex.pi.inc[i])) return false;
  }
  for (const auto& a : ex.pi.exc) {
    if (derived(a)) return false;
  }
  return true;
}

double ScoreParts::total() const {
  if (infinite()) return std::numeric_limits<double>::infinity();
  return static_cast<double>(penalty.value()) + gamma.value() * static_cast<double>(length);
}

std::uint64_t ScoreParts::scaled() const {
  return sat_add(scaled_penalty(penalty, gamma), sat_mul(gamma.num, length));
}

ScoreParts score(std::span<const std::size_t> hypothesis, const FireMatrix& fires, std::span<const Rule> rules,
                 std::span<const Wcdpi> examples, Gamma gamma) {
  ScoreParts s;
  s.gamma = gamma;
  for (auto r : hypothesis) s.length += rules[r].length();
  for (std::size_t e = 0; e < examples.size(); ++e) {
    if (!coverage(hypothesis, e, fires, rules, examples)) s.penalty += examples[e].penalty;
  }
  return s;
}

std::size_t interpretability(const LogicProgram& hypothesis) {
  std::size_t n = 0;
  for (const auto& r : hypothesis.rules) n += r.length();
  return n;
}

namespace {

// A candidate as seen by the search: requirements it satisfies ("good") and
// examples whose exclusions it violates ("bad").
struct SearchRule {
  std::size_t candidate = 0;
  std::uint64_t length = 0;
  Bitset good;
  Bitset bad;
  double weight = 0.0;
};

struct Problem {
  std::size_t num_examples = 0;
  std::vector<std::uint64_t> pen;  // scaled
  std::vector<bool> finite;
  std::vector<bool> base_dead;
  std::vector<std::size_t> req_begin;  // per example, size n + 1
  std::vector<std::size_t> req_atom;   // atom id per requirement
  std::size_t num_atoms = 0;
  Gamma gamma;
};

struct State {
  Bitset unsat;  // requirements not yet satisfied
  Bitset open;   // unsat requirements of live examples
  Bitset dead;   // exclusion violated by a chosen rule
  std::uint64_t length = 0;
  std::vector<std::size_t> chosen;  // search rule indices
};

class BranchAndBound {
 public:
  BranchAndBound(const Problem& p, std::vector<SearchRule> rules, std::span<const CandidateRule> candidates,
                 const LearnOptions& opt)
      : p_(p), rules_(std::move(rules)), cands_(candidates), opt_(opt), start_(std::chrono::steady_clock::now()) {
    const std::size_t nreq = p_.req_atom.size();
    coverers_.resize(nreq);
    for (std::size_t j = 0; j < rules_.size(); ++j) {
      rules_[j].good.for_each([&](std::size_t q) { coverers_[q].push_back(static_cast<std::uint32_t>(j)); });
    }
    suffix_min_.resize(nreq);
    for (std::size_t q = 0; q < nreq; ++q) {
      auto& s = suffix_min_[q];
      s.resize(coverers_[q].size());
      std::uint64_t m = kInf;
      for (std::size_t i = coverers_[q].size(); i-- > 0;) {
        m = std::min(m, rules_[coverers_[q][i]].length);
        s[i] = m;
      }
    }
    req_example_.resize(nreq);
    for (std::size_t e = 0; e < p_.num_examples; ++e) {
      for (std::size_t q = p_.req_begin[e]; q < p_.req_begin[e + 1]; ++q) req_example_[q] = e;
    }
    weight_.assign(p_.num_atoms, 0.0);
  }

  State root() const {
    State s;
    const std::size_t nreq = p_.req_atom.size();
    s.unsat = Bitset(nreq);
    s.open = Bitset(nreq);
    s.dead = Bitset(p_.num_examples);
    for (std::size_t q = 0; q < nreq; ++q) {
      s.unsat.set(q);
      if (!p_.base_dead[req_example_[q]]) s.open.set(q);
    }
    return s;
  }

  void include(State& s, std::size_t j) const {
    const auto& r = rules_[j];
    s.unsat.subtract(r.good);
    s.open.subtract(r.good);
    r.bad.for_each([&](std::size_t e) {
      if (s.dead.test(e)) return;
      s.dead.set(e);
      for (std::size_t q = p_.req_begin[e]; q < p_.req_begin[e + 1]; ++q) s.open.reset(q);
    });
    s.length += r.length;
    s.chosen.push_back(j);
  }

  bool covered(const State& s, std::size_t e) const {
    if (p_.base_dead[e] || s.dead.test(e)) return false;
    for (std::size_t q = p_.req_begin[e]; q < p_.req_begin[e + 1]; ++q) {
      if (s.unsat.test(q)) return false;
    }
    return true;
  }

  std::uint64_t value(const State& s) const {
    std::uint64_t v = sat_mul(p_.gamma.num, s.length);
    for (std::size_t e = 0; e < p_.num_examples; ++e) {
      if (!covered(s, e)) v = sat_add(v, p_.pen[e]);
    }
    return v;
  }

  std::uint64_t min_length(std::size_t q, std::size_t from) const {
    const auto& c = coverers_[q];
    auto it = std::lower_bound(c.begin(), c.end(), static_cast<std::uint32_t>(from));
    if (it == c.end()) return kInf;
    return suffix_min_[q][static_cast<std::size_t>(it - c.begin())];
  }

  // Lower bound on every hypothesis extending s with rules of index >= from.
  std::uint64_t bound(const State& s, std::size_t from) {
    std::uint64_t certain = sat_mul(p_.gamma.num, s.length);
    std::fill(weight_.begin(), weight_.end(), 0.0);
    open_.clear();
    for (std::size_t e = 0; e < p_.num_examples; ++e) {
      if (p_.base_dead[e] || s.dead.test(e)) {
        certain = sat_add(certain, p_.pen[e]);
        continue;
      }
      std::size_t designated = kNone;
      std::uint64_t need = 0;
      bool lost = false;
      for (std::size_t q = p_.req_begin[e]; q < p_.req_begin[e + 1]; ++q) {
        if (!s.unsat.test(q)) continue;
        const auto m = min_length(q, from);
        if (m == kInf) {
          lost = true;
          break;
        }
        if (designated == kNone) {
          designated = q;
          need = m;
        }
      }
      if (lost) {
        certain = sat_add(certain, p_.pen[e]);
      } else if (designated != kNone && p_.finite[e]) {
        weight_[p_.req_atom[designated]] += static_cast<double>(p_.pen[e]);
        open_.push_back({e, designated, need});
      }
    }
    if (certain == kInf) return kInf;
    double frac = 0.0;
    const double num = static_cast<double>(p_.gamma.num);
    for (const auto& o : open_) {
      const double pe = static_cast<double>(p_.pen[o.example]);
      const double w = weight_[p_.req_atom[o.requirement]];
      frac += std::min(pe, pe * num * static_cast<double>(o.need) / w);
    }
    const double lifted = std::ceil(frac * (1.0 - 1e-12) - 1e-9);
    return sat_add(certain, lifted > 0 ? static_cast<std::uint64_t>(lifted) : 0);
  }

  std::vector<std::string> texts(const std::vector<std::size_t>& chosen) const {
    std::vector<std::string> out;
    for (auto j : chosen) out.push_back(cands_[rules_[j].candidate].text);
    std::sort(out.begin(), out.end());
    return out;
  }

  void consider(const State& s) {
    const auto v = value(s);
    bool better = v < best_value_ || (v == best_value_ && s.length < best_length_);
    if (!better && v == best_value_ && s.length == best_length_) better = texts(s.chosen) < best_texts_;
    if (!better) return;
    best_value_ = v;
    best_length_ = s.length;
    best_chosen_ = s.chosen;
    best_texts_ = texts(s.chosen);
  }

  void greedy() {
    State s = root();
    consider(s);
    std::vector<bool> used(rules_.size(), false);
    while (true) {
      std::uint64_t cur = value(s);
      std::size_t pick = kNone;
      std::uint64_t pick_value = cur;
      for (std::size_t j = 0; j < rules_.size(); ++j) {
        if (used[j] || !rules_[j].good.intersects(s.open)) continue;
        State t = s;
        include(t, j);
        const auto v = value(t);
        if (v < pick_value) {
          pick_value = v;
          pick = j;
        }
      }
      if (pick == kNone) break;
      used[pick] = true;
      include(s, pick);
      consider(s);
    }
  }

  bool stop() {
    if (stopped_) return true;
    if (opt_.max_nodes && nodes_ >= opt_.max_nodes) stopped_ = true;
    if ((nodes_ & 255) == 0) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      if (elapsed > opt_.timeout_s) stopped_ = true;
    }
    return stopped_;
  }

  void dfs(const State& s, std::size_t from) {
    ++nodes_;
    if (stop()) return;
    consider(s);
    for (std::size_t j = from; j < rules_.size(); ++j) {
      if (!rules_[j].good.intersects(s.open)) continue;
      const auto lb = bound(s, j);
      if (lb > best_value_ || (lb == best_value_ && s.length >= best_length_)) break;
      State child = s;
      include(child, j);
      dfs(child, j + 1);
      if (stopped_) return;
    }
  }

  void run() {
    greedy();
    dfs(root(), 0);
  }

  bool complete() const { return !stopped_; }
  std::uint64_t nodes() const { return nodes_; }
  const std::vector<std::size_t>& best() const { return best_chosen_; }
  const SearchRule& rule(std::size_t j) const { return rules_[j]; }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  struct Open {
    std::size_t example;
    std::size_t requirement;
    std::uint64_t need;
  };

  const Problem& p_;
  std::vector<SearchRule> rules_;
  std::span<const CandidateRule> cands_;
  const LearnOptions& opt_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::vector<std::uint32_t>> coverers_;
  std::vector<std::vector<std::uint64_t>> suffix_min_;
  std::vector<std::size_t> req_example_;
  std::vector<double> weight_;
  std::vector<Open> open_;

  std::uint64_t best_value_ = kInf;
  std::uint64_t best_length_ = kInf;
  std::vector<std::size_t> best_chosen_;
  std::vector<std::string> best_texts_;
  std::uint64_t nodes_ = 0;
  bool stopped_ = false;
};

bool key_less(const SearchRule& a, const SearchRule& b, std::span<const CandidateRule> c) {
  if (a.length != b.length) return a.length < b.length;
  return c[a.candidate].text < c[b.candidate].text;
}

// Drops rules whose good set is covered and bad set contained by a rule
// that is shorter or equally long with a smaller text.
std::vector<SearchRule> prune_dominated(std::vector<SearchRule> rules, std::span<const CandidateRule> c,
                                        std::size_t num_requirements) {
  std::sort(rules.begin(), rules.end(), [&](const auto& a, const auto& b) { return key_less(a, b, c); });
  std::vector<SearchRule> kept;
  std::vector<std::vector<std::size_t>> by_req(num_requirements);
  for (auto& r : rules) {
    bool dominated = false;
    for (auto k : by_req[r.good.find_first()]) {
      if (r.good.subset_of(kept[k].good) && kept[k].bad.subset_of(r.bad)) {
        dominated = true;
        break;
      }
    }
    if (dominated) continue;
    const auto idx = kept.size();
    r.good.for_each([&](std::size_t q) { by_req[q].push_back(idx); });
    kept.push_back(std::move(r));
  }
  return kept;
}

}  // namespace

Hypothesis search_optimal(std::span<const CandidateRule> candidates, const FireMatrix& fires,
                          std::span<const Wcdpi> examples, Gamma gamma, const LearnOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (fires.fires.size() != candidates.size() || fires.num_examples != examples.size()) {
    throw ArgumentError("fire matrix does not match candidates and examples");
  }
  Problem p;
  p.num_examples = examples.size();
  p.gamma = gamma;
  std::map<std::string, std::size_t> atom_ids;
  p.req_begin.push_back(0);
  for (std::size_t e = 0; e < examples.size(); ++e) {
    p.pen.push_back(scaled_penalty(examples[e].penalty, gamma));
    p.finite.push_back(!examples[e].penalty.is_infinite());
    p.base_dead.push_back(fires.exc_in_base[e]);
    for (std::size_t i = 0; i < examples[e].pi.inc.size(); ++i) {
      if (fires.inc_in_base[e][i]) continue;
      auto [it, fresh] = atom_ids.emplace(examples[e].pi.inc[i].to_string(), atom_ids.size());
      p.req_atom.push_back(it->second);
    }
    p.req_begin.push_back(p.req_atom.size());
  }
  p.num_atoms = atom_ids.size();
  const std::size_t nreq = p.req_atom.size();

  // good / bad sets per candidate
  std::vector<SearchRule> rules;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto& head = candidates[c].rule.head;
    SearchRule r{c, static_cast<std::uint64_t>(candidates[c].length), Bitset(nreq), Bitset(examples.size()), 0.0};
    fires.fires[c].for_each([&](std::size_t e) {
      if (p.base_dead[e]) return;
      std::size_t q = p.req_begin[e];
      for (std::size_t i = 0; i < examples[e].pi.inc.size(); ++i) {
        if (fires.inc_in_base[e][i]) continue;
        if (examples[e].pi.inc[i] == head) r.good.set(q);
        ++q;
      }
      for (const auto& a : examples[e].pi.exc) {
        if (a == head) r.bad.set(e);
      }
    });
    if (r.good.none()) continue;
    r.good.for_each([&](std::size_t q) {
      std::size_t e = static_cast<std::size_t>(std::upper_bound(p.req_begin.begin(), p.req_begin.end(), q) -
                                               p.req_begin.begin()) - 1;
      r.weight += p.finite[e] ? static_cast<double>(p.pen[e]) : 1e18;
    });
    r.weight /= static_cast<double>(std::max<std::uint64_t>(1, r.length));
    rules.push_back(std::move(r));
  }
  LearnStats stats;
  stats.candidates = candidates.size();
  stats.useful = rules.size();

  // identical signatures: keep the shortest, then smallest text
  {
    std::sort(rules.begin(), rules.end(), [&](const auto& a, const auto& b) { return key_less(a, b, candidates); });
    std::unordered_map<std::size_t, std::vector<std::size_t>> seen;
    std::vector<SearchRule> unique;
    for (auto& r : rules) {
      const auto h = r.good.hash() * 31 + r.bad.hash();
      auto& bucket = seen[h];
      bool dup = false;
      for (auto k : bucket) {
        if (unique[k].good == r.good && unique[k].bad == r.bad) {
          dup = true;
          break;
        }
      }
      if (dup) continue;
      bucket.push_back(unique.size());
      unique.push_back(std::move(r));
    }
    rules = std::move(unique);
  }
  if (options.prune_dominated) rules = prune_dominated(std::move(rules), candidates, nreq);
  std::stable_sort(rules.begin(), rules.end(), [&](const auto& a, const auto& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return key_less(a, b, candidates);
  });
  stats.searched = rules.size();

  BranchAndBound bb(p, std::move(rules), candidates, options);
  bb.run();

  Hypothesis h;
  h.gamma = gamma;
  h.optimal = bb.complete();
  std::vector<std::size_t> chosen;
  for (auto j : bb.best()) chosen.push_back(bb.rule(j).candidate);
  std::sort(chosen.begin(), chosen.end(), [&](auto a, auto b) { return candidates[a].text < candidates[b].text; });
  for (auto c : chosen) {
    h.rules.push_back(candidates[c].rule);
    h.texts.push_back(candidates[c].text);
    h.length_part += static_cast<std::uint64_t>(candidates[c].length);
  }
  h.covered = Bitset(examples.size());
  // rescoring uses the public coverage definition
  std::vector<Rule> rule_view;
  rule_view.reserve(candidates.size());
  for (const auto& c : candidates) rule_view.push_back(c.rule);
  for (std::size_t e = 0; e < examples.size(); ++e) {
    if (coverage(chosen, e, fires, rule_view, examples)) {
      h.covered.set(e);
    } else {
      h.penalty_part += examples[e].penalty;
    }
  }
  stats.nodes = bb.nodes();
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  h.stats = stats;
  return h;
}

Hypothesis learn_optimal(const LearningTask& task, const LearnOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  auto candidates = enumerate_candidates(task.bias, task.background, {options.max_candidates});
  std::vector<Rule> rules;
  rules.reserve(candidates.size());
  for (const auto& c : candidates) rules.push_back(c.rule);
  auto fm = options.parallel ? fire_matrix(rules, task.examples, task.background)
                             : fire_matrix_serial(rules, task.examples, task.background);
  auto h = search_optimal(candidates, fm, task.examples, task.gamma, options);
  h.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return h;
}

}  // namespace nsl
