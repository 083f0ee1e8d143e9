// Jet forward + reverse sweep over a batch of collocation points: the scalar
// reference against the chunked kernel, serial and with OpenMP threads.
//
//   wpinn_bench --benchmark_filter=Kernel

#include <benchmark/benchmark.h>

#include <random>
#include <thread>

#include "wpinn/kernels.hpp"
#include "wpinn/network.hpp"

using namespace wpinn;

namespace {

struct Fixture {
  NetworkParams params;
  std::vector<double> x, t;
  std::vector<Jet> cot;
  JetColumns cot_cols;

  explicit Fixture(int n) : params(init_params(make_widths(4, 20), Activation::sin, 1)), x(n), t(n), cot(n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-1.0, 1.0), ut(0.0, 0.5), uc(-1.0, 1.0);
    cot_cols.resize(n);
    for (int i = 0; i < n; ++i) {
      x[i] = ux(rng);
      t[i] = ut(rng);
      cot[i] = {uc(rng), uc(rng), uc(rng)};
      cot_cols.value[i] = cot[i].value;
      cot_cols.dx[i] = cot[i].dx;
      cot_cols.dt[i] = cot[i].dt;
    }
  }
};

void BM_ScalarReference(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.x.size(); ++i) s += forward_jet(f.params, f.x[i], f.t[i]).value;
    GradientBuffer g = backprop(f.params, f.x, f.t, f.cot);
    benchmark::DoNotOptimize(s);
    benchmark::DoNotOptimize(g.values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void run_batch(benchmark::State& state, Tangents mode, int threads) {
  Fixture f(static_cast<int>(state.range(0)));
  JetBatch batch;
  JetColumns out;
  GradientBuffer g(f.params.layout());
  for (auto _ : state) {
    batch.forward(f.params, f.x, f.t, mode, out, threads);
    batch.backward(f.params, f.cot_cols, g, threads);
    benchmark::DoNotOptimize(g.values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_KernelSerial(benchmark::State& state) { run_batch(state, Tangents::both, 1); }
void BM_KernelSerialOneTangent(benchmark::State& state) { run_batch(state, Tangents::t, 1); }
void BM_KernelOpenMP(benchmark::State& state) {
  run_batch(state, Tangents::both, static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
}

}  // namespace

BENCHMARK(BM_ScalarReference)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelSerial)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelSerialOneTangent)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelOpenMP)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
