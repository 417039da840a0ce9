// OpenMP kernels against their serial references.
//   ./bench_kernels --benchmark_filter=Solver
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "sim_helpers.hpp"
#include "train_helpers.hpp"
#include "wavecpd/training.hpp"
#include "wavecpd/wave_sim.hpp"

namespace {

using namespace wavecpd;

Propagator make_propagator(int d) {
  const MediumSpec m = build_medium(d, 10.0, 2200.0, 3000.0, 1800.0, {d / 2, d / 2}, kDefaultDamage);
  return Propagator(m, cfl_timestep(m, 0.5));
}

struct SolverSetup {
  Propagator prop;
  WaveField field;

  explicit SolverSetup(int d) : prop(make_propagator(d)), field(simtest::random_field(d, 1)) {}
};

void BM_SolverStep(benchmark::State& state) {
  SolverSetup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    s.prop.step(s.field);
    // keep amplitudes bounded over long runs
    if (s.field.step_index % 512 == 0) s.field = simtest::random_field(s.prop.d(), 1);
    benchmark::DoNotOptimize(s.field.vx.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_SolverStepReference(benchmark::State& state) {
  SolverSetup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    reference::step(s.prop, s.field);
    if (s.field.step_index % 512 == 0) s.field = simtest::random_field(s.prop.d(), 1);
    benchmark::DoNotOptimize(s.field.vx.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

struct TrainSetup {
  WaveDataset ds;
  ModelParams model;
  TrainConfig cfg;

  explicit TrainSetup(int d) : ds(traintest::random_dataset(d, 3, 2)) {
    model = init_model(ModelKind::regularized(DistanceKind::kl), d, cfg);
  }
  StepBatch batch() const { return {ds.d, ds.frames[0].values, ds.frames[1].values, {}}; }
};

void BM_TrainStep(benchmark::State& state) {
  TrainSetup s(static_cast<int>(state.range(0)));
  const StepBatch b = s.batch();
  for (auto _ : state) benchmark::DoNotOptimize(step_gradients(s.model, b, s.cfg).nll_sum);
}

void BM_TrainStepReference(benchmark::State& state) {
  TrainSetup s(static_cast<int>(state.range(0)));
  const StepBatch b = s.batch();
  for (auto _ : state) benchmark::DoNotOptimize(reference::step_gradients(s.model, b, s.cfg).nll_sum);
}

void BM_Evaluate(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const WaveDataset ds = traintest::random_dataset(d, 20, 3);
  const ModelParams m = init_model(ModelKind::free(), d, TrainConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(m, ds).total);
}

void BM_EvaluateReference(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const WaveDataset ds = traintest::random_dataset(d, 20, 3);
  const ModelParams m = init_model(ModelKind::free(), d, TrainConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(reference::evaluate(m, ds).total);
}

}  // namespace

BENCHMARK(BM_SolverStep)->Arg(50)->Arg(200);
BENCHMARK(BM_SolverStepReference)->Arg(50)->Arg(200);
BENCHMARK(BM_TrainStep)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainStepReference)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evaluate)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateReference)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
