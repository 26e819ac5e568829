#pragma once

// Small random learning tasks and a brute-force optimum over all subsets of
// the enumerated candidates.

#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nsl/learner.hpp"
#include "nsl/parser.hpp"
#include "nsl/solver.hpp"

namespace nsl::testing {

/// Two labels lab(a) / lab(b), 2-3 ground features over {0,1}, multiclass or
/// binary(lab(a)), sometimes a background rule and a label already derived
/// by the background. Penalties mix ordinary values, a weight-1 outlier and
/// the occasional infinite penalty. Retries until 1..max_candidates rules.
inline LearningTask random_task(std::mt19937_64& rng, std::size_t max_candidates = 15, int max_examples = 20) {
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  while (true) {
    LearningTask t;
    const int features = 2 + pick(2);
    std::string bias = "modeh(lab(const(l))). pool(l, a, b). pool(v, 0, 1).";
    for (int f = 0; f < features; ++f) bias += " modeb(f" + std::to_string(f) + "(const(v))).";
    bias += " maxbody(" + std::to_string(1 + pick(2)) + ").";
    if (pick(3) == 0) bias += " allow_negation.";
    t.bias = parse_bias(bias);
    std::string bg;
    if (pick(3) == 0) bg += "f0(1) :- f1(1). ";
    if (pick(5) == 0) bg += "lab(b) :- f1(0), f0(0). ";
    t.background = parse_program(bg);
    std::vector<CandidateRule> cands;
    try {
      cands = enumerate_candidates(t.bias, t.background);
    } catch (const std::exception&) {
      continue;
    }
    if (cands.empty() || cands.size() > max_candidates) continue;

    const bool binary = pick(2) == 0;
    t.mode = binary ? LabelMode::binary(Atom("lab", {Term::symbol("a")})) : LabelMode::multiclass();
    const std::vector<Gamma> gammas = {{1, 1}, {2, 1}, {1, 2}, {0, 1}, {3, 4}};
    t.gamma = gammas[static_cast<std::size_t>(pick(static_cast<int>(gammas.size())))];
    const int hidden_feature = pick(features);
    const int n = pick(max_examples + 1);
    std::vector<Atom> labels = {Atom("lab", {Term::symbol("a")}), Atom("lab", {Term::symbol("b")})};
    for (int i = 0; i < n; ++i) {
      std::vector<FeaturePrediction> preds;
      int hidden = 0;
      for (int f = 0; f < features; ++f) {
        const int v = pick(2);
        if (f == hidden_feature) hidden = v;
        preds.push_back({Term::integer(v), "f" + std::to_string(f), {}, 1.0});
      }
      const bool noisy = pick(6) == 0;
      const Atom& label = labels[static_cast<std::size_t>(noisy ? pick(2) : hidden)];
      Wcdpi e = generate_example("e" + std::to_string(i), preds, label, labels, {}, t.mode);
      const int kind = pick(10);
      if (kind == 0) {
        e.penalty = Penalty(1);
      } else if (kind == 1 && pick(3) == 0) {
        e.penalty = Penalty::infinite();
      } else {
        e.penalty = Penalty(static_cast<std::uint64_t>(1 + pick(100)));
      }
      t.examples.push_back(std::move(e));
    }
    return t;
  }
}

/// Label atoms of an interpretation restricted to the task's head predicates.
inline std::set<std::string> label_atoms(const Interpretation& model, const LearningTask& task) {
  std::set<std::string> out;
  for (const auto& a : head_atoms(task.bias)) {
    if (model.contains(a)) out.insert(a.to_string());
  }
  return out;
}

struct BruteForce {
  std::uint64_t best_scaled = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t best_length = std::numeric_limits<std::uint64_t>::max();
  std::uint32_t best_mask = 0;
  std::size_t subsets = 0;
};

/// Labels per (rule, example) from answer_set(B ∪ {r}, ctx) and base labels
/// from answer_set(B, ctx); every subset is scored from their unions.
/// Subsets are limited to at most max_size rules (0 = all).
inline BruteForce brute_force(const LearningTask& task, const std::vector<CandidateRule>& cands,
                              std::size_t max_size = 0) {
  const std::size_t n = task.examples.size();
  std::vector<std::set<std::string>> base(n);
  std::vector<std::vector<std::set<std::string>>> fired(cands.size(), std::vector<std::set<std::string>>(n));
  for (std::size_t e = 0; e < n; ++e) {
    const auto ctx = facts_of(task.examples[e].context);
    base[e] = label_atoms(answer_set(task.background, ctx), task);
    for (std::size_t r = 0; r < cands.size(); ++r) {
      LogicProgram p = task.background;
      p.rules.push_back(cands[r].rule);
      fired[r][e] = label_atoms(answer_set(p, ctx), task);
    }
  }
  constexpr auto inf = std::numeric_limits<std::uint64_t>::max();
  auto add = [&](std::uint64_t a, std::uint64_t b) { return a > inf - b ? inf : a + b; };
  BruteForce out;
  const std::uint32_t limit = std::uint32_t{1} << cands.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    if (max_size && static_cast<std::size_t>(__builtin_popcount(mask)) > max_size) continue;
    ++out.subsets;
    std::uint64_t length = 0;
    for (std::size_t r = 0; r < cands.size(); ++r) {
      if (mask >> r & 1U) length += static_cast<std::uint64_t>(cands[r].length);
    }
    std::uint64_t total = task.gamma.num * length;
    for (std::size_t e = 0; e < n && total != inf; ++e) {
      std::set<std::string> labels = base[e];
      for (std::size_t r = 0; r < cands.size(); ++r) {
        if (mask >> r & 1U) labels.insert(fired[r][e].begin(), fired[r][e].end());
      }
      bool ok = true;
      for (const auto& a : task.examples[e].pi.inc) ok = ok && labels.count(a.to_string());
      for (const auto& a : task.examples[e].pi.exc) ok = ok && !labels.count(a.to_string());
      if (ok) continue;
      const Penalty p = task.examples[e].penalty;
      total = p.is_infinite() ? inf : add(total, p.value() * task.gamma.den);
    }
    if (total < out.best_scaled || (total == out.best_scaled && length < out.best_length)) {
      out.best_scaled = total;
      out.best_length = length;
      out.best_mask = mask;
    }
  }
  return out;
}

inline std::uint64_t scaled(const Hypothesis& h) {
  return ScoreParts{h.penalty_part, h.length_part, h.gamma}.scaled();
}

}  // namespace nsl::testing
