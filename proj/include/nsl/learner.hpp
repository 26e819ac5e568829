#pragma once

// Learning tasks, rule coverage over weighted examples and the exact
// branch-and-bound search for a minimum-score hypothesis.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsl/bias.hpp"
#include "nsl/bitset.hpp"
#include "nsl/example_gen.hpp"

namespace nsl {

/// Non-negative rational weight of the length term.
struct Gamma {
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;
  /// "2", "0.25" or "1/4". Denominators above 10^6 are rejected.
  static Gamma parse(std::string_view text);
  friend bool operator==(const Gamma&, const Gamma&) = default;
};

struct LearningTask {
  LogicProgram background;
  LanguageBias bias;
  std::vector<Wcdpi> examples;
  Gamma gamma;
  LabelMode mode;
};

/// Sections: `#background { ... }`, `#bias { ... }`, `#examples "path"`
/// (relative to base_dir), `#gamma n` (or a quoted rational),
/// `#mode multiclass|binary(label)` and inline `#pos(...)` statements.
LearningTask parse_task(std::string_view text, const std::filesystem::path& base_dir = {});
LearningTask load_task(const std::filesystem::path& path);
/// Self-contained task text with inline examples.
void write_task(const LearningTask& task, std::ostream& sink);

/// fires[r] has bit e set iff the head of rule r is in the answer set of
/// background ∪ ctx(e) ∪ {r}. inc_in_base / exc_in_base record label atoms
/// already present without any hypothesis rule.
struct FireMatrix {
  std::size_t num_examples = 0;
  std::vector<Bitset> fires;
  std::vector<std::vector<bool>> inc_in_base;
  std::vector<bool> exc_in_base;
};

/// One answer set of background ∪ ctx(e) per example.
std::vector<Interpretation> base_models(const LogicProgram& background, std::span<const Wcdpi> examples);
std::vector<Interpretation> base_models_parallel(const LogicProgram& background, std::span<const Wcdpi> examples);

/// Reference implementation; rules are evaluated one after another.
FireMatrix fire_matrix_serial(std::span<const Rule> rules, std::span<const Wcdpi> examples,
                              const LogicProgram& background);
/// OpenMP variant over rules; same result as the serial one.
FireMatrix fire_matrix(std::span<const Rule> rules, std::span<const Wcdpi> examples, const LogicProgram& background);

/// B ∪ ctx(e) ∪ H accepts e, with H given as indices into the fire matrix.
bool coverage(std::span<const std::size_t> hypothesis, std::size_t example, const FireMatrix& fires,
              std::span<const Rule> rules, std::span<const Wcdpi> examples);

struct ScoreParts {
  Penalty penalty;
  std::uint64_t length = 0;
  Gamma gamma;

  bool infinite() const { return penalty.is_infinite(); }
  double total() const;
  /// penalty * gamma.den + gamma.num * length, saturating.
  std::uint64_t scaled() const;
};

ScoreParts score(std::span<const std::size_t> hypothesis, const FireMatrix& fires, std::span<const Rule> rules,
                 std::span<const Wcdpi> examples, Gamma gamma);

struct LearnOptions {
  double timeout_s = 300.0;
  /// 0 = unlimited. Reaching either limit returns the best hypothesis so far.
  std::uint64_t max_nodes = 0;
  bool prune_dominated = true;
  bool parallel = true;
  std::size_t max_candidates = 100'000;
};

struct LearnStats {
  std::size_t candidates = 0;
  std::size_t useful = 0;
  std::size_t searched = 0;
  std::uint64_t nodes = 0;
  double seconds = 0.0;
};

struct Hypothesis {
  /// Sorted by canonical text.
  std::vector<Rule> rules;
  std::vector<std::string> texts;
  Penalty penalty_part;
  std::uint64_t length_part = 0;
  Gamma gamma;
  bool optimal = false;
  Bitset covered;
  LearnStats stats;

  double score() const { return ScoreParts{penalty_part, length_part, gamma}.total(); }
  bool feasible() const { return !penalty_part.is_infinite(); }
  LogicProgram program() const { return {rules}; }
};

/// Search over subsets of `candidates` given their fire matrix.
Hypothesis search_optimal(std::span<const CandidateRule> candidates, const FireMatrix& fires,
                          std::span<const Wcdpi> examples, Gamma gamma, const LearnOptions& options = {});

/// Enumerates the hypothesis space, builds the fire matrix and searches.
Hypothesis learn_optimal(const LearningTask& task, const LearnOptions& options = {});

/// Literal occurrences (heads included) across all rules.
std::size_t interpretability(const LogicProgram& hypothesis);

}  // namespace nsl
