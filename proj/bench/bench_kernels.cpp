// Serial reference vs OpenMP batch kernels.
#include <benchmark/benchmark.h>

#include "fapforge/batch.hpp"

using namespace fapforge;

namespace {

constexpr std::size_t kItems = 256;

const std::vector<ItemRecord>& bank() {
  static const auto records = generate_batch(default_profile(ProfileId::raven), kItems, 11);
  return records;
}

void BM_generate_serial(benchmark::State& state) {
  const auto profile = default_profile(ProfileId::raven);
  for (auto _ : state) benchmark::DoNotOptimize(generate_batch_serial(profile, kItems, 3));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(kItems));
}

void BM_generate_omp(benchmark::State& state) {
  const auto profile = default_profile(ProfileId::raven);
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_batch(profile, kItems, 3, static_cast<int>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(kItems));
}

void BM_solve_serial(benchmark::State& state) {
  bank();
  for (auto _ : state) benchmark::DoNotOptimize(solve_batch_serial(bank()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(kItems));
}

void BM_solve_omp(benchmark::State& state) {
  bank();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_batch(bank(), static_cast<int>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(kItems));
}

void BM_audit_serial(benchmark::State& state) {
  bank();
  for (auto _ : state) benchmark::DoNotOptimize(audit_batch_serial(bank(), Heuristic::max_degree));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(kItems));
}

void BM_audit_omp(benchmark::State& state) {
  bank();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        audit_batch(bank(), Heuristic::max_degree, static_cast<int>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(kItems));
}

}  // namespace

BENCHMARK(BM_generate_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_generate_omp)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve_omp)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_audit_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_audit_omp)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
