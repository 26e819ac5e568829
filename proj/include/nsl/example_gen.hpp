#pragma once

// Weighted context-dependent examples built from per-feature predictions:
// Gödel t-norm aggregation of confidences into a penalty, context facts from
// the predicted values, and the textual `#pos` format.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsl/logic.hpp"

namespace nsl {

class Lexer;

/// Example penalty: a positive integer or infinity. Sums saturate at infinity.
class Penalty {
 public:
  constexpr Penalty() = default;
  constexpr explicit Penalty(std::uint64_t value) : value_(value) {}
  static constexpr Penalty infinite() { return Penalty(kInfinite); }

  constexpr bool is_infinite() const noexcept { return value_ == kInfinite; }
  constexpr std::uint64_t value() const noexcept { return value_; }
  std::string to_string() const { return is_infinite() ? "inf" : std::to_string(value_); }

  constexpr Penalty& operator+=(Penalty other) noexcept {
    value_ = (is_infinite() || other.is_infinite() || value_ > kInfinite - 1 - other.value_) ? kInfinite
                                                                                             : value_ + other.value_;
    return *this;
  }
  friend constexpr Penalty operator+(Penalty a, Penalty b) noexcept { return a += b; }
  friend constexpr auto operator<=>(Penalty, Penalty) = default;

 private:
  static constexpr std::uint64_t kInfinite = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t value_ = 0;
};

struct AggregatorConfig {
  std::int64_t lambda = 100;
};

/// max(1, floor(lambda * min(confidences))). Throws ArgumentError on an empty
/// list, a value outside [0,1] or lambda < 1.
std::int64_t aggregate(std::span<const double> confidences, const AggregatorConfig& config = {});

/// One feature extractor output after argmax: predicted value, feature name,
/// optional metadata terms (e.g. a cell id) and the max probability.
struct FeaturePrediction {
  Term value;
  std::string feature;
  std::vector<Term> alpha;
  double confidence = 1.0;
};

/// One fact per prediction, `t(alpha..., value).`, in input order. Throws
/// ArgumentError when two predictions share a (feature, alpha) slot.
LogicProgram build_context(std::span<const FeaturePrediction> predictions);

struct PartialInterpretation {
  std::vector<Atom> inc;
  std::vector<Atom> exc;

  friend bool operator==(const PartialInterpretation&, const PartialInterpretation&) = default;
};

struct Wcdpi {
  std::string id;
  Penalty penalty{1};
  PartialInterpretation pi;
  LogicProgram context;

  friend bool operator==(const Wcdpi&, const Wcdpi&) = default;
};

/// How a label becomes a partial interpretation: multiclass uses
/// <{label}, labels \ {label}>, binary keeps only the designated positive
/// label (in inc for positive examples, in exc otherwise).
struct LabelMode {
  enum class Kind { Multiclass, Binary } kind = Kind::Multiclass;
  Atom positive;

  static LabelMode multiclass() { return {}; }
  static LabelMode binary(Atom positive_label) { return {Kind::Binary, std::move(positive_label)}; }
  std::string to_string() const;
};

struct GeneratorConfig {
  AggregatorConfig aggregator;
  /// When set, every example gets this penalty regardless of confidences.
  std::optional<std::int64_t> constant_penalty;
};

Wcdpi generate_example(std::string id, std::span<const FeaturePrediction> predictions, const Atom& label,
                       std::span<const Atom> all_labels, const GeneratorConfig& config, const LabelMode& mode);

/// `#pos(id@penalty, {inc}, {exc}, {ctx}).`; the `@penalty` part is omitted
/// for infinite penalties.
std::string to_string(const Wcdpi& example);
void write_examples(std::span<const Wcdpi> examples, std::ostream& sink);

/// Parses one `#pos(...)` statement starting at the `#pos` token.
Wcdpi parse_example(Lexer& lexer);
std::vector<Wcdpi> parse_examples(std::string_view text);
std::vector<Wcdpi> read_examples(std::istream& source);

}  // namespace nsl
