#pragma once

// Zoo and Sudoku learning tasks, perturbation sweeps with k-fold
// cross-validation, metrics and report files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "nsl/datasets.hpp"
#include "nsl/extractors.hpp"
#include "nsl/learner.hpp"
#include "nsl/prob_infer.hpp"

namespace nsl {

enum class TaskKind { Zoo, Sudoku };
std::string to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

/// One digit-valued feature of a data item: feature(alpha, value).
struct SlotValue {
  std::string feature;
  std::optional<std::string> alpha;
  int value = 0;

  /// "feature" or "feature(alpha)", the extractor slot key.
  std::string key() const;
};

struct DataItem {
  std::string id;
  Atom label;
  std::vector<SlotValue> slots;
};

/// Items plus everything needed to turn them into a learning task.
struct Dataset {
  TaskKind kind = TaskKind::Zoo;
  std::vector<DataItem> items;
  LogicProgram background;
  LanguageBias bias;
  LabelMode mode;
  /// Reported labels; binary mode lists the positive label first.
  std::vector<Atom> labels;
  /// Classes per prediction slot (digit images).
  int k = 10;
};

/// Bias and background text of the built-in tasks.
std::string zoo_bias_text();
std::string sudoku_bias_text();

Dataset zoo_dataset(std::span<const ZooRecord> records);
Dataset sudoku_dataset(std::span<const SudokuBoard> boards);

struct DatasetSource {
  TaskKind kind = TaskKind::Zoo;
  std::filesystem::path zoo_csv;  // required for zoo
  std::filesystem::path boards;   // optional for sudoku
  int n_valid = 200;
  int n_invalid = 200;
  std::uint64_t seed = 0;
};

/// ArgumentError when the zoo path is missing, IoError when a file cannot
/// be opened; generated boards when no board file is given.
Dataset load_dataset(const DatasetSource& source);

/// "lo:hi:step" (inclusive, values rounded to 1e-9) or "a,b,c".
std::vector<double> parse_fractions(std::string_view text);

/// Where predictions come from: a synthetic profile or records loaded from a
/// prediction file, looked up by (example id, slot key, perturbed flag).
class PredictionSource {
 public:
  explicit PredictionSource(OracleProfile profile);
  explicit PredictionSource(std::vector<PredictionRecord> records);

  PredictionRecord predict(const DataItem& item, const SlotValue& slot, bool perturbed, int k) const;
  std::string name() const;

 private:
  std::optional<OracleProfile> profile_;
  std::map<std::tuple<std::string, std::string, bool>, PredictionRecord> records_;
};

struct FoldSpec {
  std::vector<int> assignment;  // fold per item
  int fold = 0;
};

struct FoldData {
  LearningTask task;
  std::vector<std::size_t> test;  // item indices
  std::vector<std::vector<PredictionRecord>> test_records;
  std::set<std::string> perturbed;  // ids, train and test
};

/// Training WCDPIs from the source (perturbed items per the plan, drawn
/// separately within train and test ids), plus extractor outputs for the
/// test items.
FoldData build_task(const Dataset& data, const FoldSpec& folds, const PerturbationPlan& plan,
                    const PredictionSource& source, const GeneratorConfig& generator, Gamma gamma);

/// Fraction of equal entries; an empty prediction never matches.
double accuracy(std::span<const std::string> predictions, std::span<const std::string> labels);
/// Mean of the probabilities given to the true label.
double prob_accuracy(std::span<const double> p_true);

/// Label derived with the true feature values: the single derived label in
/// multiclass mode (empty otherwise), positive or negative in binary mode.
std::string deterministic_label(const ProbClassifier& classifier, const Dataset& data, const DataItem& item);

struct SweepConfig {
  TaskKind task = TaskKind::Zoo;
  std::vector<double> fractions = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int folds = 5;
  std::string profile = "perfect";
  std::uint64_t seed = 0;
  std::int64_t lambda = 100;
  Gamma gamma;
  std::optional<std::int64_t> baseline_penalty;
  PerturbScope scope = PerturbScope::Both;
  LearnOptions learn;
  ProbOptions prob;
  int jobs = 1;
  bool timings = false;

  SweepConfig();
};

struct CellResult {
  double fraction = 0.0;
  int fold = 0;
  bool ok = false;
  std::string error;
  int exit_code = 0;  // of the error, not serialized
  double acc_gt = 0.0;
  double acc_pert = 0.0;
  double prob_acc = 0.0;
  std::size_t interp = 0;
  double score = 0.0;
  bool optimal = false;
  double time_s = 0.0;
  std::vector<std::string> hypothesis;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

struct AggregateRow {
  double fraction = 0.0;
  int n = 0;
  MeanSe acc_gt, acc_pert, prob_acc, interp, score;
};

struct EvalReport {
  std::string task;
  std::string profile;
  bool baseline = false;
  int folds = 0;
  std::uint64_t seed = 0;
  bool timings = false;
  std::vector<CellResult> cells;  // fraction-major, then fold
  std::vector<AggregateRow> aggregate;
};

MeanSe mean_se(std::span<const double> values);
/// Recomputes the aggregate rows from the successful cells.
std::vector<AggregateRow> aggregate(std::span<const CellResult> cells);

/// The training task and test records of one sweep cell.
FoldData build_fold(const Dataset& data, const SweepConfig& config, double fraction, int fold,
                    const PredictionSource& source);

/// One cell: build, learn, test on true features and on extractor outputs.
CellResult run_cell(const Dataset& data, const SweepConfig& config, double fraction, int fold,
                    const PredictionSource& source);
EvalReport run_sweep(const Dataset& data, const SweepConfig& config, const PredictionSource& source);

/// One classified example: records grouped by (example id, perturbed) in
/// first-seen order.
struct ClassifiedItem {
  std::string id;
  bool perturbed = false;
  std::vector<AnnotatedSlot> slots;
  LabelDistribution distribution;
};

std::vector<ClassifiedItem> classify_records(const ProbClassifier& classifier,
                                             std::span<const PredictionRecord> records, const ProbOptions& options);
/// {"id", "perturbed", "probs", "abstain", "predicted", "confidence",
/// "exact", "samples", "assignments"}
std::string to_json_line(const ClassifiedItem& item);

enum class ReportFormat { Csv, Json, Markdown };
ReportFormat parse_report_format(std::string_view text);
std::string extension(ReportFormat format);
std::string emit_report(const EvalReport& report, ReportFormat format);
/// Reads the json form back.
EvalReport read_report_json(std::string_view text);

}  // namespace nsl
