#pragma once

// Feature extractor stand-ins: prediction files written by an external
// exporter, and a seeded confusion-model oracle with clean and perturbed
// regimes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsl/example_gen.hpp"

namespace nsl {

struct PredictionRecord {
  std::string example_id;
  std::string feature;
  std::optional<std::string> alpha;
  std::vector<double> probs;
  int true_value = 0;
  bool perturbed = false;

  int k() const noexcept { return static_cast<int>(probs.size()); }
  /// Index of the largest entry; ties go to the lowest index.
  int argmax() const;
  double confidence() const;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// Throws ArgumentError unless probs has k >= 2 entries in [0,1] summing to
/// 1 within 1e-9 and 0 <= true_value < k.
void validate(const PredictionRecord& record);

/// value = argmax, confidence = max probability, alpha parsed as a constant.
FeaturePrediction to_feature_prediction(const PredictionRecord& record);

struct ConfRange {
  double lo = 1.0;
  double hi = 1.0;
};

struct OracleProfile {
  std::string name;
  double clean_accuracy = 1.0;
  ConfRange clean_conf;
  double perturbed_accuracy = 1.0;
  ConfRange perturbed_conf;
  std::uint64_t rng_seed = 0;

  static OracleProfile perfect(std::uint64_t seed = 0);
  static OracleProfile softmax_sim(std::uint64_t seed = 0);
  static OracleProfile edl_sim(std::uint64_t seed = 0);
  /// "perfect", "softmax_sim" or "edl_sim"; ArgumentError otherwise.
  static OracleProfile by_name(std::string_view name, std::uint64_t seed = 0);
};

/// Throws ArgumentError for accuracies or bounds outside [0,1] or lo > hi.
void validate(const OracleProfile& profile);

enum class PerturbScope { Train, Test, Both };

struct PerturbationPlan {
  double fraction = 0.0;
  PerturbScope scope = PerturbScope::Both;
  std::uint64_t rng_seed = 0;
};

std::string to_string(PerturbScope scope);
PerturbScope parse_scope(std::string_view text);

/// floor(fraction * n) ids drawn without replacement.
std::set<std::string> plan_perturbation(std::span<const std::string> example_ids, const PerturbationPlan& plan);

/// Stable 64-bit seed for one (seed, example id, slot) triple.
std::uint64_t record_seed(std::uint64_t seed, std::string_view example_id, std::string_view slot);

/// Probability vector from the confusion model. `slot` keys the random
/// stream together with the profile seed and the example id.
std::vector<double> synth_predict(int true_value, int k, bool perturbed, const OracleProfile& profile,
                                  std::string_view example_id, std::string_view slot);

PredictionRecord synth_record(std::string example_id, std::string feature, std::optional<std::string> alpha,
                              int true_value, int k, bool perturbed, const OracleProfile& profile);

enum class PredictionFormat { Jsonl, Csv };

/// Blank lines and lines starting with '#' are skipped. The format is taken
/// from the first remaining line: '{' means JSON lines, anything else a CSV
/// header. Vectors within 1e-6 of summing to one are renormalized (only when
/// off by more than 1e-9); others are rejected with ParseError.
std::vector<PredictionRecord> load_predictions(std::istream& source);
void write_predictions(std::span<const PredictionRecord> records, std::ostream& sink,
                       PredictionFormat format = PredictionFormat::Jsonl);

}  // namespace nsl
