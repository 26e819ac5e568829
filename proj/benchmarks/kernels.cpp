// Serial reference kernels against their OpenMP versions.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <fstream>

#include "nsl/bench.hpp"
#include "nsl/parser.hpp"

using namespace nsl;

namespace {

struct SudokuFixture {
  Dataset data = sudoku_dataset(generate_sudoku_dataset(200, 200, 0));
  FoldData fold = build_fold(data, SweepConfig{}, 0.0, 0, PredictionSource(OracleProfile::perfect()));
  std::vector<Rule> rules;

  SudokuFixture() {
    for (auto& c : enumerate_candidates(data.bias, data.background)) rules.push_back(c.rule);
    rules.resize(std::min<std::size_t>(rules.size(), 400));
  }
};

const SudokuFixture& sudoku() {
  static const SudokuFixture f;
  return f;
}

void BM_FireMatrixSerial(benchmark::State& state) {
  const auto& f = sudoku();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fire_matrix_serial(f.rules, f.fold.task.examples, f.data.background));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.rules.size()));
}

void BM_FireMatrixParallel(benchmark::State& state) {
  const auto& f = sudoku();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fire_matrix(f.rules, f.fold.task.examples, f.data.background));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.rules.size()));
}

struct ClassifyFixture {
  ProbClassifier classifier;
  std::vector<AnnotatedSlot> slots;

  ClassifyFixture()
      : classifier(parse_program("invalid :- digit(C1,V), digit(C2,V), same_row(C1,C2).\n"
                                 "invalid :- digit(C1,V), digit(C2,V), same_col(C1,C2).\n"),
                   sudoku_background(), LabelMode::binary(Atom("invalid")), {Atom("invalid"), Atom("valid")}) {
    // five cells, ten values each: 100,000 assignments
    for (int c : {0, 1, 4, 5, 10}) {
      slots.push_back(slot_from_record(synth_record("bench", "digit", cell_name(c), 1 + c % 4, 10, true,
                                                    OracleProfile::edl_sim())));
    }
  }
};

const ClassifyFixture& classify_fixture() {
  static const ClassifyFixture f;
  return f;
}

ProbOptions exact() {
  ProbOptions o;
  o.epsilon = 0.0;
  return o;
}

void BM_ClassifySerial(benchmark::State& state) {
  const auto& f = classify_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(f.classifier.classify_serial(f.slots, exact()));
}

void BM_ClassifyParallel(benchmark::State& state) {
  const auto& f = classify_fixture();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(f.classifier.classify(f.slots, exact()));
}

void BM_SweepCells(benchmark::State& state) {
  static const auto zoo = [] {
    std::ifstream in(std::string(NSL_SOURCE_DIR) + "/data/zoo.data");
    return zoo_dataset(load_zoo(in));
  }();
  SweepConfig cfg;
  cfg.fractions = {0.0, 0.1};
  cfg.prob.samples = 1000;
  cfg.jobs = static_cast<int>(state.range(0));
  const PredictionSource source(OracleProfile::softmax_sim());
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(zoo, cfg, source));
  state.SetItemsProcessed(state.iterations() * 10);
}

const int kMaxThreads = omp_get_num_procs();

}  // namespace

BENCHMARK(BM_FireMatrixSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FireMatrixParallel)->RangeMultiplier(2)->Range(1, kMaxThreads)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassifySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassifyParallel)->RangeMultiplier(2)->Range(1, kMaxThreads)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepCells)->RangeMultiplier(2)->Range(1, kMaxThreads)->Unit(benchmark::kSecond)->Iterations(1);

BENCHMARK_MAIN();
