// Parallel kernels vs their serial reference implementations, on the same
// inputs the tests use for correctness. The references live in resil::oracle
// and share no algorithmic code with the optimized paths, so the ratio here
// is the honest cost of the simple route, not a strawman.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "resil/metrics.hpp"
#include "resil/oracle.hpp"
#include "resil/sectornet.hpp"
#include "resil/stats.hpp"
#include "resil/synth.hpp"

using namespace resil;

namespace {

const Dataset& city() {
  static const SynthCity c = generate_city(SynthConfig{});
  return c.dataset;
}

const PreferenceMatrix& pref() {
  static const PreferenceMatrix p = preference_matrix(city(), Period::pre_shock);
  return p;
}

std::vector<std::vector<bool>> preferred_bools(const PreferenceMatrix& p) {
  const std::size_t rows = p.cbg_rows.size();
  const std::size_t cols = p.sector_cols.size();
  std::vector<std::vector<bool>> b(rows, std::vector<bool>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) b[r][c] = p.preferred(r, c);
  return b;
}

std::vector<double> proximity_matrix() {
  const ProximityResult pr = proximity(pref());
  return pr.p;
}

}  // namespace

// --- per-venue outcome aggregation over the full edge list ------------------

static void bm_outcomes_parallel(benchmark::State& state) {
  const Dataset& ds = city();
  for (auto _ : state) benchmark::DoNotOptimize(compute_outcomes(ds));
}
BENCHMARK(bm_outcomes_parallel)->Unit(benchmark::kMillisecond);

static void bm_outcomes_reference(benchmark::State& state) {
  const Dataset& ds = city();
  for (auto _ : state) benchmark::DoNotOptimize(oracle::outcomes_by_maps(ds));
}
BENCHMARK(bm_outcomes_reference)->Unit(benchmark::kMillisecond);

// --- sector proximity from the preference matrix ----------------------------

static void bm_proximity_parallel(benchmark::State& state) {
  const PreferenceMatrix& p = pref();
  for (auto _ : state) benchmark::DoNotOptimize(proximity(p));
}
BENCHMARK(bm_proximity_parallel)->Unit(benchmark::kMillisecond);

static void bm_proximity_reference(benchmark::State& state) {
  const std::vector<std::vector<bool>> b = preferred_bools(pref());
  for (auto _ : state) benchmark::DoNotOptimize(oracle::proximity_exhaustive(b));
}
BENCHMARK(bm_proximity_reference)->Unit(benchmark::kMillisecond);

// --- dominant eigenvector of the sector network -----------------------------

static void bm_centrality_power_iteration(benchmark::State& state) {
  const std::vector<double> p = proximity_matrix();
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p.size()))));
  for (auto _ : state) benchmark::DoNotOptimize(eigenvector_centrality(p, n, 1e-10, 10000));
}
BENCHMARK(bm_centrality_power_iteration)->Unit(benchmark::kMicrosecond);

static void bm_centrality_jacobi_reference(benchmark::State& state) {
  std::vector<double> p = proximity_matrix();
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p.size()))));
  for (int i = 0; i < n; ++i) p[i * n + i] += 1.0;  // same shift the tests apply
  for (auto _ : state) benchmark::DoNotOptimize(oracle::dominant_eigenvector_jacobi(p, n));
}
BENCHMARK(bm_centrality_jacobi_reference)->Unit(benchmark::kMicrosecond);

// --- exact signed-rank tail, counting DP vs literal 2^n enumeration ---------

static void bm_signed_rank_dp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(9);
  std::vector<std::pair<double, double>> pairs(n);
  for (int i = 0; i < n; ++i)
    pairs[i] = {static_cast<double>(i + 1) + (rng() % 2 ? 0.25 : 0.0), 0.5 * (i % 3)};
  for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_signed_rank(pairs, /*exact_max=*/30));
}
BENCHMARK(bm_signed_rank_dp)->Arg(12)->Arg(20)->Arg(24);

static void bm_signed_rank_enumeration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> ranks(n);
  for (int i = 0; i < n; ++i) ranks[i] = i + 1.0;
  const double w = n * (n + 1) / 4.0 + 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(oracle::wilcoxon_enumerate(ranks, w));
}
BENCHMARK(bm_signed_rank_enumeration)->Arg(12)->Arg(20)->Arg(24);

BENCHMARK_MAIN();
