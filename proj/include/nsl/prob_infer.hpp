#pragma once

// Run-time classification under uncertain features: every slot is an
// annotated disjunction over its values and label probabilities are summed
// over the joint assignments.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsl/example_gen.hpp"
#include "nsl/extractors.hpp"

namespace nsl {

struct AnnotatedSlot {
  std::string feature;
  std::vector<Term> alpha;
  std::vector<std::pair<Term, double>> support;
  /// Mass removed by prob_support_prune.
  double dropped = 0.0;

  /// feature(alpha..., value)
  Atom atom(const Term& value) const;
};

/// Values 0..k-1 with the record's probabilities; alpha parsed as a constant.
AnnotatedSlot slot_from_record(const PredictionRecord& record);
/// Probability 1 on one value.
AnnotatedSlot one_hot_slot(std::string feature, std::vector<Term> alpha, Term value);

/// Drops values below epsilon and renormalizes. ArgumentError when epsilon
/// is outside [0, 1) or nothing survives.
AnnotatedSlot prob_support_prune(const AnnotatedSlot& slot, double epsilon);

struct LabelDistribution {
  std::vector<std::string> labels;
  std::vector<double> probs;
  /// Multiclass: mass of assignments deriving no label or several.
  double abstain_mass = 0.0;
  /// Empty when every label has probability zero.
  std::string predicted;
  double confidence = 0.0;
  bool exact = true;
  std::uint64_t samples = 0;
  std::uint64_t assignments = 0;
  double dropped_mass = 0.0;

  double probability(const std::string& label) const;
};

struct ProbOptions {
  double epsilon = 1e-6;
  std::uint64_t exact_cap = 1'000'000;
  /// Past the cap: seeded sampling when true, ResourceError otherwise.
  bool monte_carlo = false;
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 0;
  bool parallel = true;
};

/// Labels are the head atoms to report. Multiclass: p_c = P(derived = {c}).
/// Binary: labels[0] must be the positive label, p = P(positive derived),
/// and labels[1] gets the complement.
class ProbClassifier {
 public:
  ProbClassifier(const LogicProgram& hypothesis, const LogicProgram& background, LabelMode mode,
                 std::vector<Atom> labels);
  ~ProbClassifier();
  ProbClassifier(ProbClassifier&&) noexcept;
  ProbClassifier& operator=(ProbClassifier&&) noexcept;

  LabelDistribution classify(std::span<const AnnotatedSlot> slots, const ProbOptions& options = {}) const;
  /// Single-threaded enumeration in index order, kept as the reference for
  /// the chunked parallel version.
  LabelDistribution classify_serial(std::span<const AnnotatedSlot> slots, const ProbOptions& options = {}) const;

  /// Bit i set iff labels[i] is in the answer set for this context.
  std::uint64_t derive(const Interpretation& context) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

LabelDistribution classify_prob(const LogicProgram& hypothesis, const LogicProgram& background,
                                std::span<const AnnotatedSlot> slots, const LabelMode& mode,
                                std::span<const Atom> labels, const ProbOptions& options = {});

/// Hypothesis, background and one `p1::t(a,v1); p2::t(a,v2).` clause per
/// slot, with comparisons and negation in ProbLog spelling.
std::string export_problog(const LogicProgram& hypothesis, const LogicProgram& background,
                           std::span<const AnnotatedSlot> slots);

}  // namespace nsl
