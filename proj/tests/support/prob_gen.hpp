#pragma once

// Random annotated-disjunction fixtures and a naive joint-enumeration oracle.

#include <algorithm>
#include <functional>
#include <random>

#include "nsl/bias.hpp"
#include "nsl/datasets.hpp"
#include "nsl/parser.hpp"
#include "nsl/prob_infer.hpp"
#include "nsl/solver.hpp"

namespace nsl::testing {

inline const char* kRow = "invalid :- digit(C1,V), digit(C2,V), same_row(C1,C2).";
inline const char* kCol = "invalid :- digit(C1,V), digit(C2,V), same_col(C1,C2).";
inline const char* kBlock = "invalid :- digit(C1,V), digit(C2,V), same_block(C1,C2).";

inline std::vector<Atom> binary_labels() { return {Atom("invalid"), Atom("valid")}; }
inline LabelMode binary() { return LabelMode::binary(Atom("invalid")); }

inline AnnotatedSlot digit(int cell, std::vector<std::pair<int, double>> support) {
  AnnotatedSlot s{"digit", {Term::symbol(cell_name(cell))}, {}, 0.0};
  for (auto [v, p] : support) s.support.emplace_back(Term::integer(v), p);
  return s;
}

inline ProbOptions no_prune() {
  ProbOptions o;
  o.epsilon = 0.0;
  return o;
}

// Every assignment solved jointly as background ∪ H ∪ ctx.
struct Naive {
  std::vector<double> label;
  double abstain = 0.0;
};

inline Naive naive(const LogicProgram& h, const LogicProgram& bg, const std::vector<AnnotatedSlot>& slots,
            const std::vector<Atom>& labels, bool is_binary) {
  Naive out{std::vector<double>(labels.size(), 0.0), 0.0};
  LogicProgram program = concat(bg, h);
  std::vector<std::size_t> pick(slots.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t s) {
    if (s == slots.size()) {
      double w = 1.0;
      Interpretation ctx;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        w *= slots[i].support[pick[i]].second;
        ctx.insert(slots[i].atom(slots[i].support[pick[i]].first));
      }
      auto model = answer_set(program, ctx);
      std::vector<std::size_t> derived;
      for (std::size_t l = 0; l < labels.size(); ++l) {
        if (model.contains(labels[l])) derived.push_back(l);
      }
      if (is_binary) {
        if (model.contains(labels[0])) out.label[0] += w;
      } else if (derived.size() == 1) {
        out.label[derived[0]] += w;
      } else {
        out.abstain += w;
      }
      return;
    }
    for (pick[s] = 0; pick[s] < slots[s].support.size(); ++pick[s]) rec(s + 1);
  };
  rec(0);
  if (is_binary) out.label[1] = 1.0 - out.label[0];
  return out;
}

inline std::vector<std::pair<int, double>> random_support(std::mt19937_64& rng, std::vector<int> values, std::size_t n) {
  std::shuffle(values.begin(), values.end(), rng);
  values.resize(n);
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) total += (x = 0.05 + std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  std::vector<std::pair<int, double>> out;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = i + 1 == n ? 1.0 - acc : w[i] / total;
    acc += p;
    out.emplace_back(values[i], p);
  }
  return out;
}

struct Fixture {
  LogicProgram h;
  LogicProgram bg;
  std::vector<AnnotatedSlot> slots;
  std::vector<Atom> labels;
  LabelMode mode;
};

inline Fixture random_sudoku_fixture(std::mt19937_64& rng) {
  Fixture f;
  f.bg = sudoku_background();
  for (const char* r : {kRow, kCol, kBlock}) {
    if (rng() % 2) f.h.rules.push_back(parse_program(r).rules[0]);
  }
  std::vector<int> cells = {0, 1, 2, 4, 5, 8, 10, 15};
  std::shuffle(cells.begin(), cells.end(), rng);
  const std::size_t n = 1 + rng() % 6;
  for (std::size_t i = 0; i < n; ++i) f.slots.push_back(digit(cells[i], random_support(rng, {1, 2, 3, 4}, 1 + rng() % 4)));
  f.labels = binary_labels();
  f.mode = binary();
  return f;
}

inline Fixture random_multiclass_fixture(std::mt19937_64& rng) {
  Fixture f;
  auto bias = parse_bias(
      "modeh(class(const(l))). modeb(f0(const(v))). modeb(f1(const(v))). modeb(f2(const(v))). "
      "pool(l, a, b, c). pool(v, 0, 1, 2, 3). maxbody(2). allow_negation.");
  auto cands = enumerate_candidates(bias, {});
  const std::size_t rules = rng() % 5;
  for (std::size_t i = 0; i < rules; ++i) f.h.rules.push_back(cands[rng() % cands.size()].rule);
  if (rng() % 3 == 0) f.bg = parse_program("f2(3) :- f0(0). class(c) :- f1(2), f0(1).");
  const std::size_t n = 1 + rng() % 6;
  for (std::size_t i = 0; i < n && i < 3; ++i) {
    AnnotatedSlot s{"f" + std::to_string(i), {}, {}, 0.0};
    for (auto [v, p] : random_support(rng, {0, 1, 2, 3}, 1 + rng() % 4)) s.support.emplace_back(Term::integer(v), p);
    f.slots.push_back(s);
  }
  // extra slots with metadata and unused predicates
  for (std::size_t i = 3; i < n; ++i) {
    AnnotatedSlot s{"g", {Term::integer(static_cast<std::int64_t>(i))}, {}, 0.0};
    for (auto [v, p] : random_support(rng, {0, 1, 2, 3}, 1 + rng() % 4)) s.support.emplace_back(Term::integer(v), p);
    f.slots.push_back(s);
  }
  for (const char* l : {"a", "b", "c"}) f.labels.emplace_back("class", std::vector<Term>{Term::symbol(l)});
  f.mode = LabelMode::multiclass();
  return f;
}

}  // namespace nsl::testing
