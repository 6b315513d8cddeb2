#include "nlsp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nlsp/model.hpp"

namespace nlsp {
namespace {

// F evaluated on |psi|^2 during time stepping; the logarithmic model is
// clamped at vanishing amplitude, where only the phase of a zero sample is
// affected.
double evolution_nonlinearity(const NonlinearityModel& model, double s) {
  if (std::holds_alternative<Logarithmic>(model.variant()))
    return -std::log(std::max(s, kLogAmplitudeFloor));
  return model.F(s);
}

std::size_t block_count(std::size_t n) { return (n + kernels::kReductionBlock - 1) / kernels::kReductionBlock; }

template <typename T, typename Term>
T blocked_sum(std::size_t n, Term term) {
  const std::size_t blocks = block_count(n);
  std::vector<T> partial(blocks, T{});
  const auto nb = static_cast<long>(blocks);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kernels::kReductionBlock;
    const std::size_t hi = std::min(n, lo + kernels::kReductionBlock);
    T acc{};
    for (std::size_t j = lo; j < hi; ++j) acc += term(j);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  T total{};
  for (const T& p : partial) total += p;
  return total;
}

}  // namespace

namespace kernels {

double weighted_sum(std::span<const double> weights, std::span<const double> values) {
  return blocked_sum<double>(values.size(), [&](std::size_t j) { return weights[j] * values[j]; });
}

std::complex<double> weighted_sum(std::span<const double> weights,
                                  std::span<const std::complex<double>> values) {
  return blocked_sum<std::complex<double>>(values.size(),
                                           [&](std::size_t j) { return weights[j] * values[j]; });
}

void nonlinear_step(std::span<std::complex<double>> psi, std::span<const double> potential,
                    const NonlinearityModel& model, double dt) {
  const auto n = static_cast<long>(psi.size());
#pragma omp parallel for schedule(static)
  for (long j = 0; j < n; ++j) {
    const double theta = dt * (potential[j] + evolution_nonlinearity(model, std::norm(psi[j])));
    psi[j] *= std::complex<double>(std::cos(theta), -std::sin(theta));
  }
}

void kinetic_phase(std::span<std::complex<double>> psi_hat, std::span<const double> k2, double dt) {
  const auto n = static_cast<long>(psi_hat.size());
#pragma omp parallel for schedule(static)
  for (long j = 0; j < n; ++j) {
    const double theta = dt * k2[j];
    psi_hat[j] *= std::complex<double>(std::cos(theta), -std::sin(theta));
  }
}

double potential_energy_sum(std::span<const double> weights, std::span<const std::complex<double>> psi,
                          std::span<const double> potential, const NonlinearityModel& model) {
  return blocked_sum<double>(psi.size(), [&](std::size_t j) {
    const double s = std::norm(psi[j]);
    return weights[j] * (potential[j] * s + model.primitive(s));
  });
}

}  // namespace kernels

namespace serial {

double weighted_sum(std::span<const double> weights, std::span<const double> values) {
  double acc = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) acc += weights[j] * values[j];
  return acc;
}

std::complex<double> weighted_sum(std::span<const double> weights,
                                  std::span<const std::complex<double>> values) {
  std::complex<double> acc = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) acc += weights[j] * values[j];
  return acc;
}

void nonlinear_step(std::span<std::complex<double>> psi, std::span<const double> potential,
                    const NonlinearityModel& model, double dt) {
  for (std::size_t j = 0; j < psi.size(); ++j)
    psi[j] *= std::exp(std::complex<double>(0.0, -dt * (potential[j] + evolution_nonlinearity(model, std::norm(psi[j])))));
}

void kinetic_phase(std::span<std::complex<double>> psi_hat, std::span<const double> k2, double dt) {
  for (std::size_t j = 0; j < psi_hat.size(); ++j)
    psi_hat[j] *= std::exp(std::complex<double>(0.0, -dt * k2[j]));
}

double potential_energy_sum(std::span<const double> weights, std::span<const std::complex<double>> psi,
                          std::span<const double> potential, const NonlinearityModel& model) {
  double acc = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double s = std::norm(psi[j]);
    acc += weights[j] * (potential[j] * s + model.primitive(s));
  }
  return acc;
}

}  // namespace serial
}  // namespace nlsp
