#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "nsl/bench.hpp"
#include "nsl/parser.hpp"

using namespace nsl;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = NSL_SOURCE_DIR;

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::temp_directory_path() / ("nsl_cli_" + std::to_string(::getpid()))) { fs::create_directories(dir); }
  ~Scratch() { fs::remove_all(dir); }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

const Scratch& scratch() {
  static Scratch s;
  return s;
}

struct Run {
  int code;
  std::string out;
};

// stdout captured, stderr kept in a file next to it
Run run(const std::string& args) {
  const auto out = scratch() / "stdout.txt";
  const auto cmd = std::string(NSL_CLI) + " " + args + " > " + out.string() + " 2> " + (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream s;
  s << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string stderr_text() { return slurp(scratch() / "stderr.txt"); }

std::string zoo_csv() { return (kSource / "data/zoo.data").string(); }

}  // namespace

TEST_CASE("generate writes the library's examples for one fold") {
  const auto out = scratch() / "ex.las";
  auto r = run("generate --task sudoku --profile perfect --fraction 0 --out " + out.string());
  REQUIRE(r.code == 0);
  std::ifstream in(out);
  auto examples = read_examples(in);
  CHECK(examples.size() == 320);
  for (const auto& e : examples) CHECK(e.penalty.value() == 100);

  SweepConfig cfg;
  auto data = sudoku_dataset(generate_sudoku_dataset(200, 200, 0));
  auto fd = build_fold(data, cfg, 0.0, 0, PredictionSource(OracleProfile::perfect()));
  std::ostringstream expected;
  write_examples(fd.task.examples, expected);
  CHECK(slurp(out) == expected.str());
  CHECK(stderr_text().find("320 examples") != std::string::npos);
}

TEST_CASE("generate with a profile and a baseline penalty") {
  const auto out = scratch() / "zoo.las";
  auto r = run("generate --task zoo --data " + zoo_csv() +
               " --profile softmax_sim --fraction 0.4 --seed 3 --fold 2 --baseline-penalty 10 --out " + out.string());
  REQUIRE(r.code == 0);
  std::ifstream in(out);
  auto examples = read_examples(in);
  CHECK(examples.size() == 81);
  for (const auto& e : examples) CHECK(e.penalty.value() == 10);
}

TEST_CASE("generate argument errors exit with 2") {
  CHECK(run("generate --task zoo --out " + (scratch() / "x.las").string()).code == 2);
  CHECK(stderr_text().find("--data") != std::string::npos);
  CHECK(run("generate --task sudoku --profile perfect --predictions p.jsonl --out x").code == 2);
  CHECK(run("generate --task mnist --out x").code == 2);
  CHECK(run("generate --task sudoku --fraction 1.5 --out x").code == 2);
  CHECK(run("generate --task sudoku --fold 7 --out " + (scratch() / "x.las").string()).code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("generate --task zoo --data /nonexistent/zoo.data --out x").code == 5);
}

TEST_CASE("help documents flags with defaults") {
  auto r = run("sweep --help");
  CHECK(r.code == 0);
  for (auto flag : {"--folds INT:INT in [2 - 1000] [5]", "--fractions TEXT [0:1:0.1]", "--seed UINT [0]",
                    "--lambda INT:POSITIVE [100]", "--gamma TEXT [1]", "--jobs", "--baseline-penalty",
                    "--samples UINT:POSITIVE [100000]", "--epsilon", "--max-nodes UINT [5000000]"}) {
    CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
  }
  r = run("classify --help");
  for (auto flag : {"--mc", "--samples", "--seed UINT [0]", "--export-problog", "--exact-cap UINT [1000000]"}) {
    CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
  }
  r = run("learn --help");
  for (auto flag : {"--timeout FLOAT [300]", "--max-nodes UINT [0]", "--gamma", "--baseline-penalty"}) {
    CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
  }
  CHECK(run("--help").out.find("Exit codes") != std::string::npos);
}

TEST_CASE("learn prints the library's hypothesis and writes a parsable file") {
  const auto task = (kSource / "tasks/tiny.las").string();
  const auto out = scratch() / "h.lp";
  auto r = run("learn " + task + " --out " + out.string());
  REQUIRE(r.code == 0);
  auto h = learn_optimal(load_task(task));
  auto program = parse_program(slurp(out));
  CHECK(program == h.program());
  for (const auto& t : h.texts) CHECK(r.out.find(t + "\n") != std::string::npos);
  CHECK(r.out.find("% score 9 = penalty 3 + gamma 1 * length 6") != std::string::npos);
  CHECK(r.out.find("% optimal yes") != std::string::npos);
  CHECK(r.out.find("% interpretability 6") != std::string::npos);

  r = run("learn " + task + " --gamma 0");
  CHECK(r.code == 0);
  CHECK(r.out.find("gamma 0: rule length ignored") != std::string::npos);
  CHECK(r.out.find("% score 3 = penalty 3 + gamma 0 * length 6") != std::string::npos);

  r = run("learn " + task + " --baseline-penalty 10");
  CHECK(r.code == 0);
  auto t = load_task(task);
  for (auto& e : t.examples) e.penalty = Penalty(10);
  auto baseline = learn_optimal(t);
  for (const auto& text : baseline.texts) CHECK(r.out.find(text + "\n") != std::string::npos);
  CHECK(r.out.find("% score 15 = penalty 10") != std::string::npos);

  r = run("learn " + task + " --max-nodes 1");
  CHECK(r.code == 0);
  CHECK(r.out.find("% optimal no") != std::string::npos);
}

TEST_CASE("learn exit codes") {
  const auto bad = scratch() / "infeasible.las";
  std::ofstream(bad) << "#mode binary(p).\n#bias { modeh(p). modeb(q). }\n#pos(e1, {p}, {}, {}).\n";
  CHECK(run("learn " + bad.string()).code == 3);
  const auto broken = scratch() / "broken.las";
  std::ofstream(broken) << "#bias { modeh(p). \n";
  CHECK(run("learn " + broken.string()).code == 2);
  CHECK(run("learn /nonexistent.las").code == 2);
}

TEST_CASE("classify: one record per example, one-hot inputs match coverage") {
  SweepConfig cfg;
  auto data = sudoku_dataset(generate_sudoku_dataset(200, 200, 0));
  auto fd = build_fold(data, cfg, 0.0, 1, PredictionSource(OracleProfile::perfect()));
  std::vector<PredictionRecord> records;
  for (const auto& recs : fd.test_records) records.insert(records.end(), recs.begin(), recs.end());
  const auto preds = scratch() / "preds.jsonl";
  {
    std::ofstream out(preds);
    write_predictions(records, out);
  }
  const auto h = scratch() / "rules.lp";
  std::ofstream(h) << "invalid :- digit(C1,V), digit(C2,V), same_row(C1,C2).\n"
                      "invalid :- digit(C1,V), digit(C2,V), same_col(C1,C2).\n"
                      "invalid :- digit(C1,V), digit(C2,V), same_block(C1,C2).\n";
  const auto pl = scratch() / "problog";
  auto r = run("classify --task sudoku --hypothesis " + h.string() + " --predictions " + preds.string() +
               " --export-problog " + pl.string());
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::size_t n = 0;
  for (std::string line; std::getline(lines, line); ++n) {
    auto j = nlohmann::json::parse(line);
    const auto& item = data.items[fd.test[n]];
    CHECK(j["id"] == item.id);
    CHECK(j["predicted"] == item.label.to_string());
    CHECK(j["exact"] == true);
    CHECK(j["confidence"] == 1.0);
  }
  CHECK(n == fd.test.size());
  CHECK(static_cast<std::size_t>(std::distance(fs::directory_iterator(pl), fs::directory_iterator())) == n);
  CHECK(slurp(pl / (data.items[fd.test[0]].id + ".pl")).find("1::digit(") != std::string::npos);
}

TEST_CASE("classify: sampling past the cap, or exit 4") {
  SweepConfig cfg;
  auto data = sudoku_dataset(generate_sudoku_dataset(200, 200, 0));
  auto fd = build_fold(data, cfg, 1.0, 0, PredictionSource(OracleProfile::edl_sim()));
  std::vector<PredictionRecord> records;
  for (std::size_t t = 0; t < fd.test.size(); ++t) {
    if (fd.test_records[t].size() >= 8) {
      records = fd.test_records[t];
      break;
    }
  }
  REQUIRE(!records.empty());
  const auto preds = scratch() / "big.jsonl";
  {
    std::ofstream out(preds);
    write_predictions(records, out);
  }
  const auto h = scratch() / "row.lp";
  std::ofstream(h) << "invalid :- digit(C1,V), digit(C2,V), same_row(C1,C2).\n";
  const auto base = "classify --task sudoku --hypothesis " + h.string() + " --predictions " + preds.string();
  CHECK(run(base).code == 4);
  auto r = run(base + " --mc --samples 100000 --seed 7");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["exact"] == false);
  CHECK(j["samples"] == 100000);
  CHECK(stderr_text().find("1 by sampling (100000 samples each)") != std::string::npos);
  CHECK(run(base + " --mc --samples 100000 --seed 7").out == r.out);
  CHECK(run(base + " --mc --samples 100000 --seed 8").out != r.out);
}

TEST_CASE("sweep writes one report per profile, byte-identical on repeat") {
  const auto a = scratch() / "sweep_a";
  const auto b = scratch() / "sweep_b";
  const auto args = "sweep --task zoo --data " + zoo_csv() +
                    " --profiles softmax_sim,edl_sim,perfect --fractions 0,0.1 --folds 2 --samples 500 --format "
                    "json,csv,markdown";
  REQUIRE(run(args + " --out " + a.string()).code == 0);
  REQUIRE(run(args + " --jobs 2 --out " + b.string()).code == 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(files == 9);
  auto report = read_report_json(slurp(a / "zoo_edl_sim.json"));
  CHECK(report.cells.size() == 4);
  CHECK(report.folds == 2);

  REQUIRE(run(args + " --baseline-penalty 10 --format csv --out " + a.string()).code == 0);
  CHECK(fs::exists(a / "zoo_softmax_sim_baseline.csv"));
  CHECK(run("sweep --task zoo --data " + zoo_csv() + " --fractions 0:x --out " + a.string()).code == 2);
}

TEST_CASE("sweep where every cell fails exits nonzero") {
  const auto empty = scratch() / "empty.jsonl";
  std::ofstream(empty) << "";
  auto r = run("sweep --task zoo --data " + zoo_csv() + " --predictions " + empty.string() +
               " --fractions 0 --folds 2 --out " + (scratch() / "fail").string());
  CHECK(r.code == 2);
  CHECK(stderr_text().find("0 of 2 cells succeeded") != std::string::npos);
}

TEST_CASE("check validates files by kind") {
  auto r = run("check " + (kSource / "tasks/tiny.las").string() + " " + (kSource / "tasks/zoo.las").string() + " " +
               (kSource / "tasks/sudoku.las").string() + " " + (kSource / "data/sudoku.boards").string() + " " +
               zoo_csv());
  CHECK(r.code == 0);
  CHECK(r.out.find("tiny.las: task, 7 examples") != std::string::npos);
  CHECK(r.out.find("sudoku.las: task, 320 examples, 144 background rules, mode binary(invalid)") != std::string::npos);
  CHECK(r.out.find("sudoku.boards: boards, 400 boards") != std::string::npos);
  CHECK(r.out.find("zoo.data: zoo, 101 animals") != std::string::npos);

  const auto bad = scratch() / "bad.lp";
  std::ofstream(bad) << "p(X) :- not q(X).\n";
  CHECK(run("check " + bad.string()).code == 2);
  CHECK(run("check /nonexistent.lp").code == 5);
  CHECK(run("check --kind report " + (kSource / "tasks/tiny.las").string()).code == 2);
}
