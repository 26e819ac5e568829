#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "nsl/bias.hpp"
#include "nsl/datasets.hpp"
#include "nsl/error.hpp"
#include "nsl/parser.hpp"
#include "nsl/prob_infer.hpp"
#include "nsl/solver.hpp"
#include "support/prob_gen.hpp"

using namespace nsl;

using namespace nsl::testing;


TEST_CASE("one-hot row duplicate is certainly invalid") {
  std::vector<AnnotatedSlot> slots = {digit(0, {{2, 1.0}}), digit(1, {{2, 1.0}})};
  auto d = classify_prob(parse_program(kRow), sudoku_background(), slots, binary(), binary_labels());
  CHECK(d.probability("invalid") == 1.0);
  CHECK(d.probability("valid") == 0.0);
  CHECK(d.predicted == "invalid");
  CHECK(d.exact);
  CHECK(d.assignments == 1);
}

TEST_CASE("uncertain cell next to a fixed duplicate") {
  std::vector<AnnotatedSlot> slots = {digit(0, {{2, 0.6}, {3, 0.4}}), digit(1, {{2, 1.0}})};
  auto d = classify_prob(parse_program(kRow), sudoku_background(), slots, binary(), binary_labels());
  CHECK(d.probability("invalid") == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(d.probability("valid") == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(d.predicted == "invalid");
  CHECK(d.confidence == doctest::Approx(0.6));
}

TEST_CASE("exact inference matches naive enumeration") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    auto f = trial % 2 ? random_multiclass_fixture(rng) : random_sudoku_fixture(rng);
    ProbClassifier c(f.h, f.bg, f.mode, f.labels);
    auto d = c.classify(f.slots, no_prune());
    auto serial = c.classify_serial(f.slots, no_prune());
    auto oracle = naive(f.h, f.bg, f.slots, f.labels, f.mode.kind == LabelMode::Kind::Binary);
    INFO("trial " << trial);
    double total = d.abstain_mass;
    for (std::size_t l = 0; l < f.labels.size(); ++l) {
      CHECK(std::abs(d.probs[l] - oracle.label[l]) <= 1e-12);
      CHECK(std::abs(serial.probs[l] - d.probs[l]) <= 1e-12);
      CHECK(d.probs[l] >= -1e-15);
      CHECK(d.probs[l] <= 1.0 + 1e-12);
      if (f.mode.kind == LabelMode::Kind::Multiclass) total += d.probs[l];
    }
    CHECK(std::abs(d.abstain_mass - oracle.abstain) <= 1e-12);
    if (f.mode.kind == LabelMode::Kind::Multiclass) {
      CHECK(std::abs(total - 1.0) <= 1e-9);
    } else {
      CHECK(d.probs[0] + d.probs[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("one-hot inputs reproduce deterministic derivation") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = trial % 2 ? random_multiclass_fixture(rng) : random_sudoku_fixture(rng);
    Interpretation ctx;
    for (auto& s : f.slots) {
      s.support = {{s.support[rng() % s.support.size()].first, 1.0}};
      ctx.insert(s.atom(s.support[0].first));
    }
    auto d = classify_prob(f.h, f.bg, f.slots, f.mode, f.labels);
    auto model = answer_set(concat(f.bg, f.h), ctx);
    if (f.mode.kind == LabelMode::Kind::Binary) {
      CHECK(d.probs[0] == (model.contains(f.labels[0]) ? 1.0 : 0.0));
    } else {
      int derived = 0;
      for (const auto& l : f.labels) derived += model.contains(l);
      for (std::size_t l = 0; l < f.labels.size(); ++l) {
        CHECK(d.probs[l] == (derived == 1 && model.contains(f.labels[l]) ? 1.0 : 0.0));
      }
      CHECK(d.abstain_mass == (derived == 1 ? 0.0 : 1.0));
      CHECK(d.predicted.empty() == (derived != 1));
    }
  }
}

TEST_CASE("moving mass onto a duplicate never lowers p_invalid") {
  auto h = parse_program(std::string(kRow) + std::string(kCol));
  double last = -1.0;
  for (int step = 0; step <= 10; ++step) {
    const double p = step / 10.0;
    std::vector<AnnotatedSlot> slots = {digit(0, {{1, p}, {3, 1.0 - p}}), digit(1, {{1, 0.5}, {2, 0.5}}),
                                        digit(4, {{1, 0.3}, {4, 0.7}})};
    const double now = classify_prob(h, sudoku_background(), slots, binary(), binary_labels()).probs[0];
    CHECK(now >= last - 1e-15);
    last = now;
  }
}

TEST_CASE("support pruning") {
  AnnotatedSlot s = digit(0, {{1, 0.98}, {2, 0.01}, {3, 0.01}});
  auto pruned = prob_support_prune(s, 0.02);
  REQUIRE(pruned.support.size() == 1);
  CHECK(pruned.support[0].second == 1.0);
  CHECK(pruned.dropped == doctest::Approx(0.02));
  auto same = prob_support_prune(s, 0.0);
  CHECK(same.support == s.support);
  CHECK(same.dropped == 0.0);
  CHECK_THROWS_AS(prob_support_prune(s, 1.0), ArgumentError);
  CHECK_THROWS_AS(prob_support_prune(s, -0.1), ArgumentError);
  CHECK_THROWS_AS(prob_support_prune(digit(0, {{1, 0.5}, {2, 0.5}}), 0.6), ArgumentError);
}

TEST_CASE("pruning moves p_invalid by at most the dropped mass") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_sudoku_fixture(rng);
    f.h = parse_program(std::string(kRow) + kCol + kBlock);
    ProbClassifier c(f.h, f.bg, f.mode, f.labels);
    const double eps = 0.02 + 0.2 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    ProbOptions pruning;
    pruning.epsilon = eps;
    LabelDistribution full, cut;
    try {
      cut = c.classify(f.slots, pruning);
    } catch (const ArgumentError&) {
      continue;  // a slot lost every value
    }
    full = c.classify(f.slots, no_prune());
    CHECK(std::abs(cut.probs[0] - full.probs[0]) <= cut.dropped_mass + 1e-12);
  }
}

TEST_CASE("values no rule can match are merged") {
  // 9 slots of 10 values: 10^9 joint assignments without merging
  auto h = parse_program("class(a) :- f0(1), f1(1). class(b) :- f2(0).");
  std::vector<AnnotatedSlot> slots;
  for (int i = 0; i < 9; ++i) {
    AnnotatedSlot s{"f" + std::to_string(i), {}, {}, 0.0};
    for (int v = 0; v < 10; ++v) s.support.emplace_back(Term::integer(v), v == 1 ? 0.55 : 0.05);
    slots.push_back(s);
  }
  std::vector<Atom> labels = {Atom("class", {Term::symbol("a")}), Atom("class", {Term::symbol("b")})};
  auto d = classify_prob(h, {}, slots, LabelMode::multiclass(), labels);
  CHECK(d.exact);
  CHECK(d.assignments == 2 * 2 * 2);
  // P(a only) = 0.55^2 * 0.95, P(b only) = 0.05 * (1 - 0.55^2)
  CHECK(d.probs[0] == doctest::Approx(0.55 * 0.55 * 0.95).epsilon(1e-12));
  CHECK(d.probs[1] == doctest::Approx(0.05 * (1 - 0.55 * 0.55)).epsilon(1e-12));
  CHECK(d.probs[0] + d.probs[1] + d.abstain_mass == doctest::Approx(1.0));
}

TEST_CASE("cap and Monte Carlo fallback") {
  auto h = parse_program(std::string(kRow) + kCol + kBlock);
  std::vector<AnnotatedSlot> slots;
  for (int cell : {0, 1, 4, 5, 10, 15}) slots.push_back(digit(cell, {{1, 0.4}, {2, 0.3}, {3, 0.2}, {4, 0.1}}));
  ProbClassifier c(h, sudoku_background(), binary(), binary_labels());
  ProbOptions small;
  small.exact_cap = 1000;
  CHECK_THROWS_AS(c.classify(slots, small), ResourceError);
  auto exact = c.classify(slots);
  CHECK(exact.assignments == 4096);
  small.monte_carlo = true;
  small.samples = 20000;
  small.seed = 7;
  auto mc = c.classify(slots, small);
  CHECK_FALSE(mc.exact);
  CHECK(mc.samples == 20000);
  CHECK(std::abs(mc.probs[0] - exact.probs[0]) < 0.02);
  auto again = c.classify_serial(slots, small);
  CHECK(again.probs == mc.probs);
  small.seed = 8;
  CHECK(c.classify(slots, small).probs != mc.probs);
}

TEST_CASE("input validation") {
  auto h = parse_program(kRow);
  ProbClassifier c(h, sudoku_background(), binary(), binary_labels());
  std::vector<AnnotatedSlot> dup = {digit(0, {{1, 1.0}}), digit(0, {{2, 1.0}})};
  CHECK_THROWS_AS(c.classify(dup), ArgumentError);
  std::vector<AnnotatedSlot> bad = {digit(0, {{1, 0.5}, {2, 0.4}})};
  CHECK_THROWS_AS(c.classify(bad), ArgumentError);
  std::vector<AnnotatedSlot> empty = {digit(0, {})};
  CHECK_THROWS_AS(c.classify(empty), ArgumentError);
  CHECK_THROWS_AS(ProbClassifier(h, {}, binary(), {Atom("valid"), Atom("invalid")}), ArgumentError);
  // no slots: a single empty assignment
  auto d = c.classify({});
  CHECK(d.probs[0] == 0.0);
  CHECK(d.predicted == "valid");
}

TEST_CASE("slots from prediction records") {
  PredictionRecord r{"b1", "digit", "c3", {0.1, 0.7, 0.2}, 1, false};
  auto s = slot_from_record(r);
  CHECK(s.feature == "digit");
  REQUIRE(s.alpha.size() == 1);
  CHECK(s.alpha[0] == Term::symbol("c3"));
  REQUIRE(s.support.size() == 3);
  CHECK(s.support[1].first == Term::integer(1));
  CHECK(s.support[1].second == 0.7);
  CHECK(s.atom(Term::integer(2)).to_string() == "digit(c3,2)");
}

TEST_CASE("ProbLog export") {
  std::vector<AnnotatedSlot> slots = {digit(0, {{2, 0.6}, {3, 0.4}})};
  CHECK(export_problog({}, {}, slots) == "0.6::digit(c1,2); 0.4::digit(c1,3).\n");
  auto h = parse_program("invalid :- digit(C1,V), digit(C2,V), same_row(C1,C2), C1 != C2, not masked(C1).");
  auto bg = parse_program("same_row(c1,c2).");
  CHECK(export_problog(h, bg, slots) ==
        "invalid :- digit(C1,V), digit(C2,V), same_row(C1,C2), \\+ masked(C1), C1 \\= C2.\n"
        "same_row(c1,c2).\n"
        "0.6::digit(c1,2); 0.4::digit(c1,3).\n");
}
