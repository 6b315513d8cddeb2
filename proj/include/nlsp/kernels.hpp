#pragma once

#include <complex>
#include <span>

namespace nlsp {

class NonlinearityModel;

/// OpenMP data-parallel inner loops used by the quadrature and the
/// split-step integrator.
///
/// Reductions are blocked with a fixed block size that does not depend on
/// the thread count, and the block partials are combined serially in order.
/// Results are therefore bit-identical for any number of threads.
namespace kernels {

inline constexpr std::size_t kReductionBlock = 256;

double weighted_sum(std::span<const double> weights, std::span<const double> values);
std::complex<double> weighted_sum(std::span<const double> weights,
                                  std::span<const std::complex<double>> values);

/// psi_j <- psi_j * exp(-i dt (V_j + F(|psi_j|^2)))
void nonlinear_step(std::span<std::complex<double>> psi, std::span<const double> potential,
                    const NonlinearityModel& model, double dt);

/// psi_hat_j <- psi_hat_j * exp(-i dt k2_j)
void kinetic_phase(std::span<std::complex<double>> psi_hat, std::span<const double> k2, double dt);

/// sum_j w_j (V_j |psi_j|^2 + G(|psi_j|^2)), G the primitive of F.
double potential_energy_sum(std::span<const double> weights, std::span<const std::complex<double>> psi,
                          std::span<const double> potential, const NonlinearityModel& model);

}  // namespace kernels

/// Straightforward sequential versions of the kernels above; kept as the
/// reference the parallel kernels are tested and benchmarked against.
namespace serial {

double weighted_sum(std::span<const double> weights, std::span<const double> values);
std::complex<double> weighted_sum(std::span<const double> weights,
                                  std::span<const std::complex<double>> values);
void nonlinear_step(std::span<std::complex<double>> psi, std::span<const double> potential,
                    const NonlinearityModel& model, double dt);
void kinetic_phase(std::span<std::complex<double>> psi_hat, std::span<const double> k2, double dt);
double potential_energy_sum(std::span<const double> weights, std::span<const std::complex<double>> psi,
                          std::span<const double> potential, const NonlinearityModel& model);

}  // namespace serial
}  // namespace nlsp
