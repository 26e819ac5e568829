#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "nsl/error.hpp"
#include "nsl/extractors.hpp"

using namespace nsl;

namespace {

std::vector<std::string> ids(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("e" + std::to_string(i));
  return out;
}

std::vector<PredictionRecord> sample_records(const OracleProfile& profile, int n) {
  std::vector<PredictionRecord> out;
  for (int i = 0; i < n; ++i) {
    std::optional<std::string> alpha;
    if (i % 3) alpha = "c" + std::to_string(i % 16 + 1);
    out.push_back(synth_record("b" + std::to_string(i), "digit", alpha, i % 10, 10, i % 2 == 0, profile));
  }
  return out;
}

}  // namespace

TEST_SUITE("plan_perturbation") {
  TEST_CASE("counts and reproducibility") {
    auto all = ids(100);
    PerturbationPlan plan{0.4, PerturbScope::Both, 17};
    auto a = plan_perturbation(all, plan);
    CHECK(a.size() == 40);
    CHECK(plan_perturbation(all, plan) == a);
    plan.rng_seed = 18;
    CHECK(plan_perturbation(all, plan) != a);
    CHECK(plan_perturbation(all, {0.0, PerturbScope::Both, 1}).empty());
    CHECK(plan_perturbation(all, {1.0, PerturbScope::Both, 1}).size() == 100);
    CHECK(plan_perturbation(ids(7), {0.5, PerturbScope::Both, 1}).size() == 3);
    CHECK_THROWS_AS(plan_perturbation(all, {1.5, PerturbScope::Both, 1}), ArgumentError);
  }

  TEST_CASE("selection is roughly uniform") {
    auto all = ids(20);
    std::vector<int> hits(20, 0);
    for (std::uint64_t s = 0; s < 4000; ++s) {
      for (const auto& id : plan_perturbation(all, {0.25, PerturbScope::Both, s})) hits[std::stoul(id.substr(1))]++;
    }
    // expected 1000 per id, binomial sd ~27
    for (int h : hits) CHECK(std::abs(h - 1000) < 150);
  }

  TEST_CASE("scope names") {
    for (auto s : {PerturbScope::Train, PerturbScope::Test, PerturbScope::Both}) CHECK(parse_scope(to_string(s)) == s);
    CHECK_THROWS_AS(parse_scope("all"), ArgumentError);
  }
}

TEST_SUITE("synth_predict") {
  TEST_CASE("perfect profile is one-hot") {
    auto p = synth_predict(3, 10, false, OracleProfile::perfect(), "x", "digit");
    for (int i = 0; i < 10; ++i) CHECK(p[static_cast<std::size_t>(i)] == (i == 3 ? 1.0 : 0.0));
    auto q = synth_predict(7, 10, true, OracleProfile::perfect(), "x", "digit");
    CHECK(q[7] == 1.0);
  }

  TEST_CASE("edl_sim perturbed confidence stays low") {
    auto profile = OracleProfile::edl_sim(5);
    for (int i = 0; i < 2000; ++i) {
      PredictionRecord r{"e" + std::to_string(i), "digit", {}, synth_predict(i % 10, 10, true, profile, "e" + std::to_string(i), "digit"), i % 10, true};
      CHECK(r.confidence() >= 0.1);
      CHECK(r.confidence() <= 0.4);
    }
  }

  TEST_CASE("softmax_sim perturbed: confident and mostly wrong") {
    auto profile = OracleProfile::softmax_sim(5);
    int correct = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      auto id = "e" + std::to_string(i);
      PredictionRecord r{id, "digit", {}, synth_predict(i % 10, 10, true, profile, id, "digit"), i % 10, true};
      CHECK(r.confidence() >= 0.7);
      CHECK(r.confidence() <= 0.99);
      correct += r.argmax() == i % 10;
    }
    CHECK(std::abs(static_cast<double>(correct) / n - profile.perturbed_accuracy) <= 0.02);
  }

  TEST_CASE("clean regime accuracy") {
    auto profile = OracleProfile::softmax_sim(9);
    int correct = 0;
    for (int i = 0; i < 10000; ++i) {
      auto p = synth_predict(i % 10, 10, false, profile, "e" + std::to_string(i), "digit");
      correct += std::max_element(p.begin(), p.end()) - p.begin() == i % 10;
    }
    CHECK(std::abs(correct / 10000.0 - 0.99) <= 0.01);
  }

  TEST_CASE("regime separation") {
    double edl = 0, soft = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
      auto id = "e" + std::to_string(i);
      auto a = synth_predict(i % 10, 10, true, OracleProfile::edl_sim(1), id, "s");
      auto b = synth_predict(i % 10, 10, true, OracleProfile::softmax_sim(1), id, "s");
      edl += *std::max_element(a.begin(), a.end());
      soft += *std::max_element(b.begin(), b.end());
    }
    CHECK(edl / n < soft / n);
  }

  TEST_CASE("wrong classes are uniform") {
    OracleProfile always_wrong{"w", 0.0, {0.9, 0.9}, 0.0, {0.9, 0.9}, 3};
    std::vector<int> hits(10, 0);
    for (int i = 0; i < 9000; ++i) {
      auto p = synth_predict(4, 10, false, always_wrong, "e" + std::to_string(i), "s");
      hits[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())]++;
    }
    CHECK(hits[4] == 0);
    for (int c = 0; c < 10; ++c) {
      if (c != 4) CHECK(std::abs(hits[static_cast<std::size_t>(c)] - 1000) < 150);
    }
  }

  TEST_CASE("determinism and record invariants") {
    for (const auto& profile : {OracleProfile::perfect(2), OracleProfile::softmax_sim(2), OracleProfile::edl_sim(2)}) {
      auto a = sample_records(profile, 300);
      CHECK(a == sample_records(profile, 300));
      for (const auto& r : a) CHECK_NOTHROW(validate(r));
    }
    auto x = synth_predict(1, 10, true, OracleProfile::softmax_sim(2), "e1", "digit(c1)");
    auto y = synth_predict(1, 10, true, OracleProfile::softmax_sim(2), "e1", "digit(c2)");
    CHECK(x != y);
  }

  TEST_CASE("config errors") {
    OracleProfile bad{"bad", 0.9, {0.8, 0.5}, 0.1, {0.1, 0.2}, 0};
    CHECK_THROWS_AS(synth_predict(0, 10, false, bad, "e", "s"), ArgumentError);
    CHECK_THROWS_AS(synth_predict(0, 1, false, OracleProfile::perfect(), "e", "s"), ArgumentError);
    CHECK_THROWS_AS(synth_predict(10, 10, false, OracleProfile::perfect(), "e", "s"), ArgumentError);
    CHECK_THROWS_AS(OracleProfile::by_name("lenet"), ArgumentError);
    CHECK(OracleProfile::by_name("edl_sim").perturbed_conf.hi == 0.40);
  }
}

TEST_SUITE("prediction files") {
  TEST_CASE("valid JSON line") {
    std::istringstream in(
        "# exported by a test\n"
        R"({"example_id":"b1","feature":"digit","alpha":"c3","k":10,"probs":[0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1],"true_value":2,"perturbed":false})"
        "\n");
    auto recs = load_predictions(in);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].k() == 10);
    CHECK(recs[0].alpha == std::optional<std::string>("c3"));
    auto f = to_feature_prediction(recs[0]);
    CHECK(f.alpha.size() == 1);
    CHECK(f.value == Term::integer(0));
  }

  TEST_CASE("rejected records") {
    auto load = [](const std::string& s) {
      std::istringstream in(s);
      return load_predictions(in);
    };
    CHECK_THROWS_AS(load(R"({"example_id":"b","feature":"d","k":2,"probs":[0.25,0.25],"true_value":0,"perturbed":false})"), ParseError);
    CHECK_THROWS_AS(load(R"({"example_id":"b","feature":"d","k":3,"probs":[0.5,0.5],"true_value":0,"perturbed":false})"), ParseError);
    CHECK_THROWS_AS(load(R"({"example_id":"b","feature":"d","k":2,"probs":[0.5,0.5],"perturbed":false})"), ParseError);
    CHECK_THROWS_AS(load(R"({"example_id":"b","feature":"d","k":2,"probs":[1.5,-0.5],"true_value":0,"perturbed":false})"), ParseError);
    CHECK_THROWS_AS(load(R"({"example_id":"b","feature":"d","k":2,"probs":[0.5,0.5],"true_value":2,"perturbed":false})"), ParseError);
    CHECK_THROWS_AS(load("{not json"), ParseError);
    CHECK_THROWS_AS(load("example_id,feature,alpha,k,true_value,perturbed,p0,p1\nb,d,,2,0,maybe,0.5,0.5\n"), ParseError);
    CHECK_THROWS_AS(load("example_id,feature,k\n"), ParseError);
  }

  TEST_CASE("near-normalized vectors are renormalized") {
    std::istringstream in(R"({"example_id":"b","feature":"d","k":2,"probs":[0.5000004,0.5],"true_value":0,"perturbed":true})");
    auto recs = load_predictions(in);
    REQUIRE(recs.size() == 1);
    CHECK(std::abs(recs[0].probs[0] + recs[0].probs[1] - 1.0) <= 1e-12);
  }

  TEST_CASE("bit-exact round trip in both formats") {
    for (auto format : {PredictionFormat::Jsonl, PredictionFormat::Csv}) {
      auto recs = sample_records(OracleProfile::softmax_sim(11), 200);
      std::ostringstream out;
      write_predictions(recs, out, format);
      std::istringstream in(out.str());
      auto back = load_predictions(in);
      REQUIRE(back.size() == recs.size());
      for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i] == recs[i]);
        for (std::size_t j = 0; j < recs[i].probs.size(); ++j) {
          CHECK(std::bit_cast<std::uint64_t>(back[i].probs[j]) == std::bit_cast<std::uint64_t>(recs[i].probs[j]));
        }
      }
    }
  }

  TEST_CASE("CSV requires uniform k") {
    std::vector<PredictionRecord> recs{{"a", "d", {}, {0.5, 0.5}, 0, false}, {"b", "d", {}, {0.2, 0.3, 0.5}, 0, false}};
    std::ostringstream out;
    CHECK_THROWS_AS(write_predictions(recs, out, PredictionFormat::Csv), ArgumentError);
  }
}
