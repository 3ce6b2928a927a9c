// Serial reference vs OpenMP kernels. Run with MEMDEX_THREADS to pin the
// worker count; on a single core the parallel rows only show overhead.
#include <benchmark/benchmark.h>

#include <random>

#include "memdex/binarizer.hpp"
#include "memdex/fusion.hpp"
#include "memdex/parallel.hpp"
#include "memdex/shallow.hpp"
#include "memdex/synth.hpp"

namespace {

using namespace memdex;

Execution exec_of(const benchmark::State& state) {
  return state.range(0) ? Execution::kParallel : Execution::kSerial;
}

const Dataset& corpus() {
  static const Dataset ds = [] {
    SynthConfig c;
    c.n_families = 30;
    c.members_max = 3;
    c.keypoints_per_subject = 150;
    c.seed = 11;
    return generate_synthetic(c);
  }();
  return ds;
}

void BM_ShallowDense(benchmark::State& state) {
  const Dataset& ds = corpus();
  static const auto idx = DescriptorIndex::build(ds, FeatureKind::kKeypoints, SearchMode::kApproximate);
  std::vector<std::uint32_t> classes(idx.class_names(LabelKind::kSubject).size());
  for (std::uint32_t c = 0; c < classes.size(); ++c) classes[c] = c;
  const auto owner = *idx.find_owner(ds.at(0).subject_id);
  ShallowScoreConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        shallow_scores_dense(ds.at(0).keypoints, idx, classes, LabelKind::kSubject, cfg, owner, exec_of(state)));
  }
}

void BM_AllPairs(benchmark::State& state) {
  const Dataset& ds = corpus();
  ScoringConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(all_pairs_scores(ds, cfg, Protocol::kFamily, nullptr, exec_of(state)));
  }
}

void BM_FitThresholds(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::vector<DeepVector> vs;
  std::vector<std::string> labels;
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> v(256);
    for (double& x : v) x = normal(rng);
    vs.push_back(DeepVector::real(std::move(v)));
    labels.push_back("c" + std::to_string(i % 40));
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_thresholds(vs, labels, exec_of(state)));
}

BENCHMARK(BM_ShallowDense)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AllPairs)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitThresholds)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  memdex::apply_worker_limit();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
