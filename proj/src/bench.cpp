#include "nsl/bench.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "nsl/error.hpp"
#include "nsl/parser.hpp"
#include "nsl/rng.hpp"

namespace nsl {

using json = nlohmann::ordered_json;

std::string to_string(TaskKind kind) { return kind == TaskKind::Zoo ? "zoo" : "sudoku"; }

TaskKind parse_task_kind(std::string_view text) {
  if (text == "zoo") return TaskKind::Zoo;
  if (text == "sudoku") return TaskKind::Sudoku;
  throw ArgumentError("unknown task " + std::string(text) + " (expected zoo or sudoku)");
}

std::string SlotValue::key() const { return alpha ? feature + "(" + *alpha + ")" : feature; }

std::string zoo_bias_text() {
  std::string out = "modeh(class(const(label))).\n";
  for (auto f : kZooFeatures) {
    out += "modeb(" + std::string(f) + (f == "legs" ? "(const(count))).\n" : "(const(bool))).\n");
  }
  out += "pool(label";
  for (auto c : kZooClasses) out += ", " + std::string(c);
  out += ").\npool(bool, 0, 1).\npool(count, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9).\nmaxbody(3).\n";
  return out;
}

std::string sudoku_bias_text() {
  return "modeh(invalid).\n"
         "modeb(digit(var(cell), var(val))).\n"
         "modeb(same_row(var(cell), var(cell))).\n"
         "modeb(same_col(var(cell), var(cell))).\n"
         "modeb(same_block(var(cell), var(cell))).\n"
         "maxv(3).\nmaxbody(4).\nallow_inequality.\n";
}

Dataset zoo_dataset(std::span<const ZooRecord> records) {
  Dataset d;
  d.kind = TaskKind::Zoo;
  d.bias = parse_bias(zoo_bias_text());
  d.mode = LabelMode::multiclass();
  for (auto c : kZooClasses) d.labels.emplace_back("class", std::vector<Term>{Term::symbol(c)});
  for (std::size_t i = 0; i < records.size(); ++i) {
    DataItem item{"z" + std::to_string(i + 1), Atom("class", {Term::symbol(records[i].label)}), {}};
    for (std::size_t f = 0; f < kZooFeatures.size(); ++f) {
      item.slots.push_back({std::string(kZooFeatures[f]), std::nullopt, records[i].features[f]});
    }
    d.items.push_back(std::move(item));
  }
  return d;
}

Dataset sudoku_dataset(std::span<const SudokuBoard> boards) {
  Dataset d;
  d.kind = TaskKind::Sudoku;
  d.bias = parse_bias(sudoku_bias_text());
  d.background = sudoku_background();
  d.mode = LabelMode::binary(Atom("invalid"));
  d.labels = {Atom("invalid"), Atom("valid")};
  for (std::size_t i = 0; i < boards.size(); ++i) {
    DataItem item{"b" + std::to_string(i + 1), boards[i].valid ? Atom("valid") : Atom("invalid"), {}};
    for (int c = 0; c < 16; ++c) {
      const int v = boards[i].cells[static_cast<std::size_t>(c)];
      if (v) item.slots.push_back({"digit", cell_name(c), v});
    }
    d.items.push_back(std::move(item));
  }
  return d;
}

Dataset load_dataset(const DatasetSource& source) {
  if (source.kind == TaskKind::Zoo) {
    if (source.zoo_csv.empty()) throw ArgumentError("the zoo task needs a dataset path (--data)");
    std::ifstream in(source.zoo_csv);
    if (!in) throw IoError("cannot open " + source.zoo_csv.string());
    return zoo_dataset(load_zoo(in));
  }
  std::vector<SudokuBoard> boards;
  if (source.boards.empty()) {
    boards = generate_sudoku_dataset(source.n_valid, source.n_invalid, source.seed);
  } else {
    std::ifstream in(source.boards);
    if (!in) throw IoError("cannot open " + source.boards.string());
    boards = read_boards(in);
  }
  return sudoku_dataset(boards);
}

std::vector<double> parse_fractions(std::string_view text) {
  auto number = [&](std::string_view part) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || end != part.data() + part.size()) {
      throw ArgumentError("bad fraction list: " + std::string(text));
    }
    return v;
  };
  std::vector<std::string_view> parts;
  const char sep = text.find(':') != std::string_view::npos ? ':' : ',';
  for (std::size_t pos = 0;;) {
    const auto next = text.find(sep, pos);
    parts.push_back(text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  std::vector<double> out;
  if (sep == ':') {
    if (parts.size() != 3) throw ArgumentError("fraction range must be lo:hi:step");
    const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || hi < lo) throw ArgumentError("bad fraction range: " + std::string(text));
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
  } else {
    for (auto p : parts) out.push_back(number(p));
  }
  for (double f : out) {
    if (!(f >= 0.0 && f <= 1.0)) throw ArgumentError("perturbation fractions must lie in [0, 1]");
  }
  return out;
}

PredictionSource::PredictionSource(OracleProfile profile) : profile_(std::move(profile)) { validate(*profile_); }

PredictionSource::PredictionSource(std::vector<PredictionRecord> records) {
  for (auto& r : records) {
    SlotValue s{r.feature, r.alpha, 0};
    auto key = std::make_tuple(r.example_id, s.key(), r.perturbed);
    if (!records_.emplace(key, std::move(r)).second) {
      throw ArgumentError("duplicate prediction for " + std::get<0>(key) + " " + std::get<1>(key));
    }
  }
}

std::string PredictionSource::name() const { return profile_ ? profile_->name : "predictions"; }

PredictionRecord PredictionSource::predict(const DataItem& item, const SlotValue& slot, bool perturbed, int k) const {
  if (profile_) return synth_record(item.id, slot.feature, slot.alpha, slot.value, k, perturbed, *profile_);
  auto it = records_.find({item.id, slot.key(), perturbed});
  if (it == records_.end()) {
    throw ArgumentError("prediction file has no " + std::string(perturbed ? "perturbed" : "clean") + " record for " +
                        item.id + " " + slot.key());
  }
  if (it->second.true_value != slot.value) {
    throw ArgumentError("prediction file disagrees with the data on the true value of " + item.id + " " + slot.key());
  }
  return it->second;
}

FoldData build_task(const Dataset& data, const FoldSpec& folds, const PerturbationPlan& plan,
                    const PredictionSource& source, const GeneratorConfig& generator, Gamma gamma) {
  if (folds.assignment.size() != data.items.size()) throw ArgumentError("fold assignment size mismatch");
  FoldData out;
  out.task.background = data.background;
  out.task.bias = data.bias;
  out.task.gamma = gamma;
  out.task.mode = data.mode;

  std::vector<std::string> train_ids, test_ids;
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    if (folds.assignment[i] == folds.fold) {
      out.test.push_back(i);
      test_ids.push_back(data.items[i].id);
    } else {
      train.push_back(i);
      train_ids.push_back(data.items[i].id);
    }
  }
  if (plan.scope != PerturbScope::Test) out.perturbed = plan_perturbation(train_ids, plan);
  if (plan.scope != PerturbScope::Train) {
    auto t = plan_perturbation(test_ids, plan);
    out.perturbed.insert(t.begin(), t.end());
  }

  for (auto i : train) {
    const auto& item = data.items[i];
    const bool perturbed = out.perturbed.count(item.id) > 0;
    std::vector<FeaturePrediction> preds;
    for (const auto& s : item.slots) preds.push_back(to_feature_prediction(source.predict(item, s, perturbed, data.k)));
    out.task.examples.push_back(generate_example(item.id, preds, item.label, data.labels, generator, data.mode));
  }
  for (auto i : out.test) {
    const auto& item = data.items[i];
    const bool perturbed = out.perturbed.count(item.id) > 0;
    std::vector<PredictionRecord> recs;
    for (const auto& s : item.slots) recs.push_back(source.predict(item, s, perturbed, data.k));
    out.test_records.push_back(std::move(recs));
  }
  return out;
}

double accuracy(std::span<const std::string> predictions, std::span<const std::string> labels) {
  if (predictions.size() != labels.size()) throw ArgumentError("accuracy: length mismatch");
  if (predictions.empty()) throw ArgumentError("accuracy: no predictions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += !predictions[i].empty() && predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double prob_accuracy(std::span<const double> p_true) {
  if (p_true.empty()) throw ArgumentError("prob_accuracy: no values");
  double s = 0.0;
  for (double p : p_true) {
    if (!(p >= 0.0 && p <= 1.0 + 1e-12)) throw ArgumentError("prob_accuracy: value outside [0,1]");
    s += p;
  }
  return s / static_cast<double>(p_true.size());
}

std::string deterministic_label(const ProbClassifier& classifier, const Dataset& data, const DataItem& item) {
  Interpretation ctx;
  for (const auto& s : item.slots) {
    std::vector<Term> args;
    if (s.alpha) args.push_back(Term::constant(*s.alpha));
    args.push_back(Term::integer(s.value));
    ctx.insert(Atom(s.feature, std::move(args)));
  }
  const auto bits = classifier.derive(ctx);
  if (data.mode.kind == LabelMode::Kind::Binary) return data.labels[bits & 1U ? 0 : 1].to_string();
  if (std::popcount(bits) != 1) return "";
  return data.labels[static_cast<std::size_t>(std::countr_zero(bits))].to_string();
}

SweepConfig::SweepConfig() {
  learn.timeout_s = 1e9;
  learn.max_nodes = 5'000'000;
  prob.monte_carlo = true;
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

std::vector<AggregateRow> aggregate(std::span<const CellResult> cells) {
  std::vector<double> fractions;
  for (const auto& c : cells) {
    if (std::find(fractions.begin(), fractions.end(), c.fraction) == fractions.end()) fractions.push_back(c.fraction);
  }
  std::vector<AggregateRow> out;
  for (double f : fractions) {
    std::vector<double> gt, pert, prob, interp, score;
    for (const auto& c : cells) {
      if (c.fraction != f || !c.ok) continue;
      gt.push_back(c.acc_gt);
      pert.push_back(c.acc_pert);
      prob.push_back(c.prob_acc);
      interp.push_back(static_cast<double>(c.interp));
      score.push_back(c.score);
    }
    out.push_back({f, static_cast<int>(gt.size()), mean_se(gt), mean_se(pert), mean_se(prob), mean_se(interp),
                   mean_se(score)});
  }
  return out;
}

namespace {

std::vector<int> fold_assignment(const Dataset& data, const SweepConfig& config) {
  std::vector<std::string> labels;
  for (const auto& item : data.items) labels.push_back(item.label.to_string());
  return stratified_folds(labels, config.folds, config.seed);
}

FoldData build_fold_with(const Dataset& data, const SweepConfig& config, double fraction, int fold,
                         const PredictionSource& source, const std::vector<int>& assignment) {
  if (fold < 0 || fold >= config.folds) throw ArgumentError("fold must lie in [0, folds)");
  GeneratorConfig gen;
  gen.aggregator.lambda = config.lambda;
  gen.constant_penalty = config.baseline_penalty;
  const auto plan_seed = splitmix64(config.seed ^ (0xFADEULL + static_cast<std::uint64_t>(fold)));
  const PerturbationPlan plan{fraction, config.scope, plan_seed};
  return build_task(data, {assignment, fold}, plan, source, gen, config.gamma);
}

CellResult run_cell_with(const Dataset& data, const SweepConfig& config, double fraction, int fold,
                         const PredictionSource& source, const std::vector<int>& assignment) {
  const auto t0 = std::chrono::steady_clock::now();
  CellResult cell;
  cell.fraction = fraction;
  cell.fold = fold;
  try {
    auto fd = build_fold_with(data, config, fraction, fold, source, assignment);

    auto h = learn_optimal(fd.task, config.learn);
    cell.hypothesis = h.texts;
    cell.interp = interpretability(h.program());
    cell.score = h.score();
    cell.optimal = h.optimal;

    ProbClassifier classifier(h.program(), data.background, data.mode, data.labels);
    std::vector<std::string> truth, gt_pred, pert_pred;
    std::vector<double> p_true;
    for (std::size_t t = 0; t < fd.test.size(); ++t) {
      const auto& item = data.items[fd.test[t]];
      truth.push_back(item.label.to_string());
      gt_pred.push_back(deterministic_label(classifier, data, item));
      std::vector<AnnotatedSlot> slots;
      for (const auto& r : fd.test_records[t]) slots.push_back(slot_from_record(r));
      ProbOptions prob = config.prob;
      prob.seed = record_seed(config.prob.seed, item.id, "classify");
      auto dist = classifier.classify(slots, prob);
      pert_pred.push_back(dist.predicted);
      p_true.push_back(std::clamp(dist.probability(truth.back()), 0.0, 1.0));
    }
    cell.acc_gt = accuracy(gt_pred, truth);
    cell.acc_pert = accuracy(pert_pred, truth);
    cell.prob_acc = prob_accuracy(p_true);
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
    cell.exit_code = exit_code(e);
  }
  cell.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

}  // namespace

FoldData build_fold(const Dataset& data, const SweepConfig& config, double fraction, int fold,
                    const PredictionSource& source) {
  return build_fold_with(data, config, fraction, fold, source, fold_assignment(data, config));
}

CellResult run_cell(const Dataset& data, const SweepConfig& config, double fraction, int fold,
                    const PredictionSource& source) {
  return run_cell_with(data, config, fraction, fold, source, fold_assignment(data, config));
}

EvalReport run_sweep(const Dataset& data, const SweepConfig& config, const PredictionSource& source) {
  if (config.folds < 2) throw ArgumentError("need at least 2 folds");
  if (config.fractions.empty()) throw ArgumentError("no perturbation fractions");
  for (double f : config.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ArgumentError("perturbation fractions must lie in [0, 1]");
  }
  if (config.jobs < 1) throw ArgumentError("jobs must be at least 1");
  const auto assignment = fold_assignment(data, config);

  EvalReport report;
  report.task = to_string(data.kind);
  report.profile = source.name();
  report.baseline = config.baseline_penalty.has_value();
  report.folds = config.folds;
  report.seed = config.seed;
  report.timings = config.timings;
  const std::size_t nf = config.fractions.size();
  const auto folds = static_cast<std::size_t>(config.folds);
  report.cells.resize(nf * folds);
  const auto total = static_cast<std::int64_t>(report.cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(config.jobs) if (config.jobs > 1)
  for (std::int64_t c = 0; c < total; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    report.cells[cu] =
        run_cell_with(data, config, config.fractions[cu / folds], static_cast<int>(cu % folds), source, assignment);
  }
  report.aggregate = aggregate(report.cells);
  return report;
}

std::vector<ClassifiedItem> classify_records(const ProbClassifier& classifier,
                                             std::span<const PredictionRecord> records, const ProbOptions& options) {
  std::vector<ClassifiedItem> items;
  std::map<std::pair<std::string, bool>, std::size_t> index;
  for (const auto& r : records) {
    auto [it, fresh] = index.try_emplace({r.example_id, r.perturbed}, items.size());
    if (fresh) items.push_back({r.example_id, r.perturbed, {}, {}});
    items[it->second].slots.push_back(slot_from_record(r));
  }
  for (auto& item : items) {
    ProbOptions o = options;
    o.seed = record_seed(options.seed, item.id, item.perturbed ? "classify/perturbed" : "classify");
    item.distribution = classifier.classify(item.slots, o);
  }
  return items;
}

std::string to_json_line(const ClassifiedItem& item) {
  const auto& d = item.distribution;
  json probs = json::object();
  for (std::size_t i = 0; i < d.labels.size(); ++i) probs[d.labels[i]] = d.probs[i];
  json j{{"id", item.id},
         {"perturbed", item.perturbed},
         {"probs", probs},
         {"abstain", d.abstain_mass},
         {"predicted", d.predicted},
         {"confidence", d.confidence},
         {"exact", d.exact},
         {"samples", d.samples},
         {"assignments", d.assignments}};
  return j.dump();
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  throw ArgumentError("unknown report format " + std::string(text));
}

std::string extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
    case ReportFormat::Markdown: return "md";
  }
  return "";
}

namespace {

std::string fixed(double v, int places = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

std::string fraction_text(double f) { return fixed(f, 2); }

std::string csv(const EvalReport& r) {
  std::ostringstream out;
  out << "task,fraction,fold,acc_gt,acc_pert,prob_acc,interp,score,time_s\n";
  for (const auto& c : r.cells) {
    out << r.task << ',' << fraction_text(c.fraction) << ',' << c.fold << ',';
    if (c.ok) {
      out << fixed(c.acc_gt) << ',' << fixed(c.acc_pert) << ',' << fixed(c.prob_acc) << ',' << c.interp << ','
          << fixed(c.score) << ',';
    } else {
      out << "-,-,-,-,-,";
    }
    out << (r.timings ? fixed(c.time_s, 3) : "-") << '\n';
  }
  for (const auto& a : r.aggregate) {
    out << r.task << ',' << fraction_text(a.fraction) << ",mean," << fixed(a.acc_gt.mean) << ','
        << fixed(a.acc_pert.mean) << ',' << fixed(a.prob_acc.mean) << ',' << fixed(a.interp.mean) << ','
        << fixed(a.score.mean) << ",-\n";
    out << r.task << ',' << fraction_text(a.fraction) << ",se," << fixed(a.acc_gt.se) << ',' << fixed(a.acc_pert.se)
        << ',' << fixed(a.prob_acc.se) << ',' << fixed(a.interp.se) << ',' << fixed(a.score.se) << ",-\n";
  }
  return out.str();
}

json mean_se_json(const MeanSe& m) { return json{{"mean", m.mean}, {"se", m.se}}; }

std::string as_json(const EvalReport& r) {
  json j;
  j["task"] = r.task;
  j["profile"] = r.profile;
  j["baseline"] = r.baseline;
  j["folds"] = r.folds;
  j["seed"] = r.seed;
  j["timings"] = r.timings;
  j["cells"] = json::array();
  for (const auto& c : r.cells) {
    json cell;
    cell["fraction"] = c.fraction;
    cell["fold"] = c.fold;
    cell["ok"] = c.ok;
    if (!c.ok) cell["error"] = c.error;
    cell["acc_gt"] = c.acc_gt;
    cell["acc_pert"] = c.acc_pert;
    cell["prob_acc"] = c.prob_acc;
    cell["interp"] = c.interp;
    cell["score"] = c.score;
    cell["optimal"] = c.optimal;
    cell["time_s"] = r.timings ? json(c.time_s) : json(nullptr);
    cell["hypothesis"] = c.hypothesis;
    j["cells"].push_back(std::move(cell));
  }
  j["aggregate"] = json::array();
  for (const auto& a : r.aggregate) {
    j["aggregate"].push_back({{"fraction", a.fraction},
                              {"n", a.n},
                              {"acc_gt", mean_se_json(a.acc_gt)},
                              {"acc_pert", mean_se_json(a.acc_pert)},
                              {"prob_acc", mean_se_json(a.prob_acc)},
                              {"interp", mean_se_json(a.interp)},
                              {"score", mean_se_json(a.score)}});
  }
  return j.dump(2) + "\n";
}

std::string markdown(const EvalReport& r) {
  std::ostringstream out;
  out << "# " << r.task << " sweep, " << r.profile << (r.baseline ? " (constant penalty)" : "") << "\n\n";
  out << r.folds << " folds, seed " << r.seed << ".\n\n";
  out << "| fraction | n | acc_gt | acc_pert | prob_acc | interp | score |\n";
  out << "|---|---|---|---|---|---|---|\n";
  auto cell = [](const MeanSe& m) { return fixed(m.mean) + " ± " + fixed(m.se); };
  for (const auto& a : r.aggregate) {
    out << "| " << fraction_text(a.fraction) << " | " << a.n << " | " << cell(a.acc_gt) << " | " << cell(a.acc_pert)
        << " | " << cell(a.prob_acc) << " | " << cell(a.interp) << " | " << cell(a.score) << " |\n";
  }
  out << "\n## Hypotheses\n";
  for (const auto& c : r.cells) {
    out << "\n### fraction " << fraction_text(c.fraction) << ", fold " << c.fold << "\n\n";
    if (!c.ok) {
      out << "failed: " << c.error << "\n";
      continue;
    }
    out << "```\n";
    for (const auto& t : c.hypothesis) out << t << '\n';
    out << "```\n";
  }
  return out.str();
}

MeanSe read_mean_se(const json& j) { return {j.at("mean").get<double>(), j.at("se").get<double>()}; }

}  // namespace

std::string emit_report(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return csv(report);
    case ReportFormat::Json: return as_json(report);
    case ReportFormat::Markdown: return markdown(report);
  }
  return "";
}

EvalReport read_report_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 1, 1);
  }
  try {
    EvalReport r;
    r.task = j.at("task").get<std::string>();
    r.profile = j.at("profile").get<std::string>();
    r.baseline = j.at("baseline").get<bool>();
    r.folds = j.at("folds").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.timings = j.at("timings").get<bool>();
    for (const auto& c : j.at("cells")) {
      CellResult cell;
      cell.fraction = c.at("fraction").get<double>();
      cell.fold = c.at("fold").get<int>();
      cell.ok = c.at("ok").get<bool>();
      if (c.contains("error")) cell.error = c.at("error").get<std::string>();
      cell.acc_gt = c.at("acc_gt").get<double>();
      cell.acc_pert = c.at("acc_pert").get<double>();
      cell.prob_acc = c.at("prob_acc").get<double>();
      cell.interp = c.at("interp").get<std::size_t>();
      cell.score = c.at("score").get<double>();
      cell.optimal = c.at("optimal").get<bool>();
      if (!c.at("time_s").is_null()) cell.time_s = c.at("time_s").get<double>();
      cell.hypothesis = c.at("hypothesis").get<std::vector<std::string>>();
      r.cells.push_back(std::move(cell));
    }
    for (const auto& a : j.at("aggregate")) {
      r.aggregate.push_back({a.at("fraction").get<double>(), a.at("n").get<int>(), read_mean_se(a.at("acc_gt")),
                             read_mean_se(a.at("acc_pert")), read_mean_se(a.at("prob_acc")),
                             read_mean_se(a.at("interp")), read_mean_se(a.at("score"))});
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what(), 1, 1);
  }
}

}  // namespace nsl
