// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <vector>

#include "nlsp/kernels.hpp"
#include "nlsp/model.hpp"

namespace {

using cd = std::complex<double>;

struct Data {
  std::vector<double> w, v, k2;
  std::vector<cd> psi;
  explicit Data(std::size_t n) : w(n, 1.0 / n), v(n), k2(n), psi(n) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = -10.0 + 20.0 * j / n;
      v[j] = 0.1 * x * x;
      k2[j] = static_cast<double>(j * j) * 1e-4;
      psi[j] = std::exp(-0.5 * x * x) * cd(std::cos(x), std::sin(x));
    }
  }
};

const nlsp::NonlinearityModel kLog = nlsp::NonlinearityModel::logarithmic();

template <bool Parallel>
void BM_WeightedSum(benchmark::State& st) {
  Data d(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(nlsp::kernels::weighted_sum(d.w, d.psi));
    else
      benchmark::DoNotOptimize(nlsp::serial::weighted_sum(d.w, d.psi));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_NonlinearStep(benchmark::State& st) {
  Data d(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Parallel)
      nlsp::kernels::nonlinear_step(d.psi, d.v, kLog, 1e-3);
    else
      nlsp::serial::nonlinear_step(d.psi, d.v, kLog, 1e-3);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_KineticPhase(benchmark::State& st) {
  Data d(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Parallel)
      nlsp::kernels::kinetic_phase(d.psi, d.k2, 1e-3);
    else
      nlsp::serial::kinetic_phase(d.psi, d.k2, 1e-3);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_PotentialEnergy(benchmark::State& st) {
  Data d(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(nlsp::kernels::potential_energy_sum(d.w, d.psi, d.v, kLog));
    else
      benchmark::DoNotOptimize(nlsp::serial::potential_energy_sum(d.w, d.psi, d.v, kLog));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

#define NLSP_BENCH_PAIR(name) \
  BENCHMARK_TEMPLATE(name, false)->RangeMultiplier(8)->Range(256, 1 << 20)->Name(#name "/serial"); \
  BENCHMARK_TEMPLATE(name, true)->RangeMultiplier(8)->Range(256, 1 << 20)->Name(#name "/openmp")

NLSP_BENCH_PAIR(BM_WeightedSum);
NLSP_BENCH_PAIR(BM_NonlinearStep);
NLSP_BENCH_PAIR(BM_KineticPhase);
NLSP_BENCH_PAIR(BM_PotentialEnergy);

BENCHMARK_MAIN();
