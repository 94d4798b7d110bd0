#include <benchmark/benchmark.h>

#include <numeric>

#include "careflow/discovery.hpp"
#include "careflow/dream.hpp"
#include "careflow/eval.hpp"
#include "careflow/explain.hpp"
#include "careflow/model.hpp"
#include "careflow/synthcohort.hpp"

using namespace careflow;

namespace {

struct Fixture {
  EventLog log;
  PetriNet net;
  DecayParams params;
  PredictionDataset data;

  Fixture() {
    CohortConfig cfg;
    cfg.n_patients = 400;
    log = generate_cohort(cfg).log;
    net = discover(log);
    params = estimate_decay_params(net, log);
    data = build_dataset(net, params, log);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_ReplayTrace(benchmark::State& state) {
  const auto& f = fixture();
  const Replayer replayer(f.net);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& trace = f.log.traces[i++ % f.log.traces.size()];
    benchmark::DoNotOptimize(replayer.replay(trace.events));
  }
}
BENCHMARK(BM_ReplayTrace);

void BM_BuildDataset(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(build_dataset(f.net, f.params, f.log));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.log.traces.size()));
}
BENCHMARK(BM_BuildDataset)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const auto& f = fixture();
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(f.data, f.data, cfg));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_DelongCi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % 3 == 0);
    scores[i] = rng.normal() + labels[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(delong_ci(scores, labels));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DelongCi)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

void BM_ShapleyGroups(benchmark::State& state) {
  const auto& f = fixture();
  const auto groups = assign_groups(f.net, place_provenance(f.net));
  const auto w = init_weights(f.data.samples.cols(), 3);
  const auto means = column_means(f.data);
  for (auto _ : state) benchmark::DoNotOptimize(shapley_groups(w, f.data, groups, means));
}
BENCHMARK(BM_ShapleyGroups)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
