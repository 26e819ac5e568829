#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nsl/bench.hpp"
#include "nsl/error.hpp"
#include "nsl/parser.hpp"

namespace fs = std::filesystem;
using namespace nsl;

namespace {

struct DataFlags {
  std::string task = "zoo";
  std::string data;
  std::string boards;
  int n_valid = 200;
  int n_invalid = 200;
  std::uint64_t data_seed = 0;

  void add(CLI::App* app) {
    app->add_option("--task", task, "Built-in task")->check(CLI::IsMember({"zoo", "sudoku"}));
    app->add_option("--data", data, "Zoo CSV (required for --task zoo)");
    app->add_option("--boards", boards, "Sudoku board file; generated boards when absent");
    app->add_option("--n-valid", n_valid, "Generated valid boards")->check(CLI::NonNegativeNumber);
    app->add_option("--n-invalid", n_invalid, "Generated invalid boards")->check(CLI::NonNegativeNumber);
    app->add_option("--data-seed", data_seed, "Seed of the board generator");
  }

  Dataset load() const {
    return load_dataset({parse_task_kind(task), data, boards, n_valid, n_invalid, data_seed});
  }
};

struct SourceFlags {
  std::string profile = "perfect";
  std::string predictions;

  void add(CLI::App* app) {
    auto* p = app->add_option("--profile", profile, "Synthetic extractor profile")
                  ->check(CLI::IsMember({"perfect", "softmax_sim", "edl_sim"}));
    auto* f = app->add_option("--predictions", predictions, "Prediction file (jsonl or csv) instead of a profile");
    p->excludes(f);
  }
};

struct ProbFlags {
  ProbOptions options;

  void add(CLI::App* app, bool mc_flag) {
    app->add_option("--epsilon", options.epsilon, "Drop slot values below this probability")
        ->check(CLI::Range(0.0, 0.999999));
    app->add_option("--exact-cap", options.exact_cap, "Largest joint assignment count enumerated exactly");
    if (mc_flag) app->add_flag("--mc", options.monte_carlo, "Sample past the cap instead of failing");
    app->add_option("--samples", options.samples, "Samples per example when sampling")->check(CLI::PositiveNumber);
  }
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::string slurp(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

std::string file_safe(std::string id) {
  for (auto& c : id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') c = '_';
  }
  return id;
}

std::vector<PredictionRecord> load_records(const std::string& path) {
  auto in = open_in(path);
  return load_predictions(in);
}

int cmd_generate(const DataFlags& data, const SourceFlags& src, const SweepConfig& config, double fraction, int fold,
                 const std::string& out, const std::string& task_out, const std::string& records_out) {
  if (out.empty() && task_out.empty() && records_out.empty()) {
    throw ArgumentError("nothing to write: give --out, --task-out or --records-out");
  }
  auto dataset = data.load();
  auto source = src.predictions.empty() ? PredictionSource(OracleProfile::by_name(src.profile, config.seed))
                                        : PredictionSource(load_records(src.predictions));
  auto fd = build_fold(dataset, config, fraction, fold, source);

  if (!out.empty()) {
    std::ostringstream text;
    write_examples(fd.task.examples, text);
    write_file(out, text.str());
  }
  if (!task_out.empty()) {
    std::ostringstream text;
    write_task(fd.task, text);
    write_file(task_out, text.str());
  }
  if (!records_out.empty()) {
    std::vector<PredictionRecord> records;
    for (const auto& recs : fd.test_records) records.insert(records.end(), recs.begin(), recs.end());
    std::ostringstream text;
    write_predictions(records, text);
    write_file(records_out, text.str());
  }
  std::uint64_t lo = UINT64_MAX, hi = 0, sum = 0;
  for (const auto& e : fd.task.examples) {
    lo = std::min(lo, e.penalty.value());
    hi = std::max(hi, e.penalty.value());
    sum += e.penalty.value();
  }
  const auto n = fd.task.examples.size();
  std::fprintf(stderr, "%zu examples (fold %d of %d, %zu perturbed), penalty min %llu max %llu mean %.2f\n", n, fold,
               config.folds, fd.perturbed.size(), static_cast<unsigned long long>(n ? lo : 0),
               static_cast<unsigned long long>(hi), n ? static_cast<double>(sum) / static_cast<double>(n) : 0.0);
  return 0;
}

int cmd_learn(const std::string& task_file, const std::vector<std::string>& examples, const std::string& gamma,
              const std::optional<std::int64_t>& baseline, const LearnOptions& options, const std::string& out) {
  auto task = load_task(task_file);
  for (const auto& path : examples) {
    auto in = open_in(path);
    auto more = read_examples(in);
    task.examples.insert(task.examples.end(), more.begin(), more.end());
  }
  if (!gamma.empty()) task.gamma = Gamma::parse(gamma);
  if (baseline) {
    if (*baseline < 1) throw ArgumentError("--baseline-penalty must be positive");
    for (auto& e : task.examples) e.penalty = Penalty(static_cast<std::uint64_t>(*baseline));
  }
  auto h = learn_optimal(task, options);
  if (!h.feasible()) {
    std::cout << "% infeasible: every hypothesis leaves an example with infinite penalty uncovered\n";
    return 3;
  }
  std::ostringstream program;
  for (const auto& t : h.texts) program << t << '\n';
  if (!out.empty()) write_file(out, program.str());

  std::cout << "% hypothesis, " << h.rules.size() << " rules\n" << program.str();
  std::cout << "% score " << h.score() << " = penalty " << h.penalty_part.to_string() << " + gamma "
            << task.gamma.to_string() << " * length " << h.length_part << '\n';
  if (task.gamma.num == 0) std::cout << "% gamma 0: rule length ignored, coverage penalty only\n";
  std::cout << "% optimal " << (h.optimal ? "yes" : "no (search limit reached)") << '\n';
  std::cout << "% interpretability " << interpretability(h.program()) << '\n';
  std::cout << "% candidates " << h.stats.candidates << ", useful " << h.stats.useful << ", nodes " << h.stats.nodes
            << '\n';
  return 0;
}

int cmd_classify(const std::string& hypothesis, const std::string& task, const std::string& task_file,
                 const std::vector<std::string>& label_texts, const std::string& predictions, ProbOptions options,
                 const std::string& out, const std::string& export_dir) {
  auto program = parse_program(slurp(hypothesis));
  LogicProgram background;
  LabelMode mode;
  std::vector<Atom> labels;
  if (!task_file.empty()) {
    auto t = load_task(task_file);
    background = t.background;
    mode = t.mode;
  } else {
    // the built-in tasks need no data to know their labels
    auto d = parse_task_kind(task) == TaskKind::Zoo ? zoo_dataset({}) : sudoku_dataset({});
    background = d.background;
    mode = d.mode;
    labels = d.labels;
  }
  if (!label_texts.empty()) {
    labels.clear();
    for (const auto& l : label_texts) labels.push_back(parse_atom(l));
  }
  if (labels.empty()) throw ArgumentError("--labels is required with --task-file");

  const auto records = load_records(predictions);
  ProbClassifier classifier(program, background, mode, labels);
  const auto items = classify_records(classifier, records, options);

  std::ostringstream lines;
  for (const auto& item : items) lines << to_json_line(item) << '\n';
  write_file(out.empty() ? "-" : out, lines.str());

  if (!export_dir.empty()) {
    fs::create_directories(export_dir);
    for (const auto& item : items) {
      const auto name = file_safe(item.id) + (item.perturbed ? "_perturbed" : "") + ".pl";
      write_file(fs::path(export_dir) / name, export_problog(program, background, item.slots));
    }
  }
  std::size_t sampled = 0;
  for (const auto& item : items) sampled += !item.distribution.exact;
  std::fprintf(stderr, "%zu examples classified, %zu by sampling (%llu samples each)\n", items.size(), sampled,
               static_cast<unsigned long long>(options.samples));
  return 0;
}

int cmd_sweep(const DataFlags& data, const std::vector<std::string>& profiles, const std::string& predictions,
              SweepConfig config, const std::string& fractions, const std::string& gamma, const std::string& scope,
              const std::vector<std::string>& formats, const std::string& out_dir) {
  auto dataset = data.load();
  config.task = dataset.kind;
  config.fractions = parse_fractions(fractions);
  config.gamma = Gamma::parse(gamma);
  config.scope = parse_scope(scope);
  config.prob.seed = config.seed;
  std::vector<ReportFormat> fmts;
  for (const auto& f : formats) fmts.push_back(parse_report_format(f));
  fs::create_directories(out_dir);

  std::vector<PredictionSource> sources;
  if (!predictions.empty()) {
    sources.emplace_back(load_records(predictions));
  } else {
    for (const auto& p : profiles) sources.emplace_back(OracleProfile::by_name(p, config.seed));
  }
  int status = 0;
  for (const auto& source : sources) {
    auto report = run_sweep(dataset, config, source);
    const auto stem = to_string(dataset.kind) + "_" + source.name() + (config.baseline_penalty ? "_baseline" : "");
    for (auto f : fmts) write_file(fs::path(out_dir) / (stem + "." + extension(f)), emit_report(report, f));
    std::size_t ok = 0;
    for (const auto& c : report.cells) ok += c.ok;
    std::fprintf(stderr, "%s: %zu of %zu cells succeeded\n", stem.c_str(), ok, report.cells.size());
    if (ok == 0 && status == 0) status = report.cells.empty() ? 2 : report.cells.front().exit_code;
  }
  return status;
}

std::string guess_kind(const std::string& path) {
  const auto ext = fs::path(path).extension().string();
  if (ext == ".lp" || ext == ".pl") return "program";
  if (ext == ".bias") return "bias";
  if (ext == ".jsonl" || ext == ".csv") return "predictions";
  if (ext == ".json") return "report";
  if (ext == ".boards") return "boards";
  if (ext == ".data") return "zoo";
  if (ext == ".las") return slurp(path).find("#bias") != std::string::npos ? "task" : "examples";
  throw ArgumentError("cannot tell the kind of " + path + "; pass --kind");
}

int cmd_check(const std::vector<std::string>& files, const std::string& kind_flag) {
  for (const auto& path : files) {
    const auto kind = kind_flag == "auto" ? guess_kind(path) : kind_flag;
    std::string summary;
    if (kind == "program") {
      summary = std::to_string(parse_program(slurp(path)).rules.size()) + " rules";
    } else if (kind == "bias") {
      auto bias = parse_bias(slurp(path));
      validate(bias);
      summary = "bias ok";
    } else if (kind == "task") {
      auto t = load_task(path);
      summary = std::to_string(t.examples.size()) + " examples, " + std::to_string(t.background.rules.size()) +
                " background rules, mode " + t.mode.to_string();
    } else if (kind == "examples") {
      auto in = open_in(path);
      summary = std::to_string(read_examples(in).size()) + " examples";
    } else if (kind == "predictions") {
      auto in = open_in(path);
      summary = std::to_string(load_predictions(in).size()) + " records";
    } else if (kind == "boards") {
      auto in = open_in(path);
      summary = std::to_string(read_boards(in).size()) + " boards";
    } else if (kind == "zoo") {
      auto in = open_in(path);
      summary = std::to_string(load_zoo(in).size()) + " animals";
    } else if (kind == "report") {
      auto r = read_report_json(slurp(path));
      summary = std::to_string(r.cells.size()) + " cells";
    } else {
      throw ArgumentError("unknown kind " + kind);
    }
    std::cout << "ok " << path << ": " << kind << ", " << summary << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuro-symbolic rule learning workbench"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 2 invalid input or usage, 3 infeasible task, 4 resource cap, 5 I/O error.");

  DataFlags data;
  SourceFlags source;
  std::string gamma = "1";
  std::optional<std::int64_t> baseline;
  std::string out;

  auto* gen = app.add_subcommand("generate", "Write the weighted training examples of one fold");
  data.add(gen);
  source.add(gen);
  SweepConfig gen_config;
  double fraction = 0.0;
  std::string scope = "both";
  int fold = 0;
  std::string task_out;
  gen->add_option("--seed", gen_config.seed, "Seed for folds, perturbation and profiles");
  gen->add_option("--fraction", fraction, "Fraction of perturbed items")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--scope", scope, "Perturbed items")->check(CLI::IsMember({"train", "test", "both"}));
  gen->add_option("--fold", fold, "Held-out fold");
  gen->add_option("--folds", gen_config.folds, "Number of folds")->check(CLI::Range(2, 1000));
  gen->add_option("--lambda", gen_config.lambda, "Penalty scale")->check(CLI::PositiveNumber);
  gen->add_option("--baseline-penalty", gen_config.baseline_penalty, "Constant penalty for every example (baseline)");
  gen->add_option("--gamma", gamma, "Length weight written into --task-out");
  gen->add_option("--out", out, "Examples file ('-' for stdout)");
  gen->add_option("--task-out", task_out, "Complete task file with background, bias and examples");
  std::string records_out;
  gen->add_option("--records-out", records_out, "Extractor records of the held-out items (jsonl)");

  auto* learn = app.add_subcommand("learn", "Learn an optimal hypothesis for a task file");
  std::string task_file;
  std::vector<std::string> examples;
  std::string learn_gamma;
  LearnOptions learn_opts;
  learn->add_option("task_file", task_file, "Task file")->required()->check(CLI::ExistingFile);
  learn->add_option("--examples", examples, "Extra example files appended to the task");
  learn->add_option("--gamma", learn_gamma, "Length weight (e.g. 1, 0.5, 1/4); default from the task file");
  learn->add_option("--baseline-penalty", baseline, "Replace every example penalty with this constant");
  learn->add_option("--timeout", learn_opts.timeout_s, "Search time limit in seconds");
  learn->add_option("--max-nodes", learn_opts.max_nodes, "Search node limit (0 = none)");
  learn->add_option("--max-candidates", learn_opts.max_candidates, "Hypothesis space cap");
  learn->add_option("--out", out, "Write the hypothesis here");

  auto* classify = app.add_subcommand("classify", "Label distributions for prediction records");
  std::string hypothesis, task_name = "sudoku", predictions;
  std::vector<std::string> labels;
  std::string export_dir;
  ProbFlags prob;
  classify->add_option("--hypothesis", hypothesis, "Hypothesis program")->required();
  classify->add_option("--task", task_name, "Built-in task giving background and labels")
      ->check(CLI::IsMember({"zoo", "sudoku"}));
  classify->add_option("--task-file", task_file, "Task file giving background and label mode instead");
  classify->add_option("--labels", labels, "Label atoms (binary: positive first)")->delimiter(',');
  classify->add_option("--predictions", predictions, "Prediction file, one example per (id, perturbed)")->required();
  prob.add(classify, true);
  classify->add_option("--seed", prob.options.seed, "Sampling seed");
  classify->add_option("--out", out, "Output JSON lines (stdout when absent)");
  classify->add_option("--export-problog", export_dir, "Also write one ProbLog program per example here");

  auto* sweep = app.add_subcommand("sweep", "Perturbation sweep with k-fold cross-validation");
  SweepConfig config;
  std::vector<std::string> profiles = {"softmax_sim", "edl_sim", "perfect"};
  std::string fractions = "0:1:0.1";
  std::vector<std::string> formats = {"json"};
  std::string out_dir = "reports";
  std::uint64_t max_nodes = config.learn.max_nodes;
  data.add(sweep);
  sweep->add_option("--profiles", profiles, "Extractor profiles, one report each")
      ->delimiter(',')
      ->check(CLI::IsMember({"perfect", "softmax_sim", "edl_sim"}));
  sweep->add_option("--predictions", predictions, "Prediction file instead of profiles");
  sweep->add_option("--fractions", fractions, "lo:hi:step or a comma list");
  sweep->add_option("--folds", config.folds, "Number of folds")->check(CLI::Range(2, 1000));
  sweep->add_option("--seed", config.seed, "Seed for folds, perturbation, profiles and sampling");
  sweep->add_option("--lambda", config.lambda, "Penalty scale")->check(CLI::PositiveNumber);
  sweep->add_option("--gamma", gamma, "Length weight");
  sweep->add_option("--baseline-penalty", config.baseline_penalty, "Constant example penalty (baseline curve)");
  sweep->add_option("--scope", scope, "Perturbed items")->check(CLI::IsMember({"train", "test", "both"}));
  sweep->add_option("--max-nodes", max_nodes, "Search node limit per cell (0 = none)");
  sweep->add_option("--timeout", config.learn.timeout_s, "Search time limit per cell in seconds");
  ProbFlags sweep_prob;
  sweep_prob.options = config.prob;
  sweep_prob.add(sweep, false);
  sweep->add_option("--format", formats, "Report formats: csv, json, markdown")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json", "markdown", "md"}));
  sweep->add_option("--out", out_dir, "Report directory");
  sweep->add_option("--jobs", config.jobs, "Cells run in parallel")->check(CLI::Range(1, 1024));
  sweep->add_flag("--timings", config.timings, "Record wall-clock time per cell (breaks byte-identity)");

  auto* check = app.add_subcommand("check", "Parse and validate files");
  std::vector<std::string> files;
  std::string kind = "auto";
  check->add_option("files", files, "Files to check")->required();
  check->add_option("--kind", kind, "File kind")
      ->check(CLI::IsMember({"auto", "program", "bias", "task", "examples", "predictions", "boards", "zoo", "report"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) {
      gen_config.gamma = Gamma::parse(gamma);
      gen_config.scope = parse_scope(scope);
      return cmd_generate(data, source, gen_config, fraction, fold, out, task_out, records_out);
    }
    if (*learn) return cmd_learn(task_file, examples, learn_gamma, baseline, learn_opts, out);
    if (*classify) {
      return cmd_classify(hypothesis, task_name, task_file, labels, predictions, prob.options, out, export_dir);
    }
    if (*sweep) {
      config.learn.max_nodes = max_nodes;
      config.prob = sweep_prob.options;
      config.prob.monte_carlo = true;
      return cmd_sweep(data, profiles, predictions, config, fractions, gamma, scope, formats, out_dir);
    }
    if (*check) return cmd_check(files, kind);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    const int code = exit_code(e);
    if (code == 2) std::cerr << "Run with --help for usage.\n";
    return code;
  }
  return 0;
}
