#pragma once

#include <vector>

namespace nlsp::reference {

/// Mode label n = (n_1..n_d) of the logarithmic model around A e^{-x^2/2}.
struct LogModeLabel {
  std::vector<int> n;
  int total() const;
};

/// 2 sqrt((|n|-1)|n|), |n| >= 2.
double log_gamma(const LogModeLabel& label);
/// Y/Z = sqrt(|n|/(|n|-1)).
double log_amplitude_ratio(const LogModeLabel& label);
/// Frequency of the logarithmic background A e^{-x^2/2} in d dimensions.
double log_background_omega(double amplitude, int dimension);

/// sqrt(k^2 (2 omega + k^2))
double bogoliubov_gamma(double k, double omega);

struct GPModeSpec {
  double k = 0.0;
  double omega = 1.0;
  double n_tilde = 1.0;
};

struct GPModeInvariants {
  double np = 0.0;
  double ep = 0.0;
  double pp = 0.0;
  double np_linear = 0.0;
  /// |a|^2 and |b|^2 of the plane-wave amplitudes.
  double a2 = 0.0;
  double b2 = 0.0;
};

GPModeInvariants gp_mode_invariants(const GPModeSpec& spec);

/// gamma n (omega + k^2)/(2 omega + k^2)
double gp_energy_alternative(const GPModeSpec& spec);
/// sqrt(omega/2) |P|, the lower bound of E_p.
double gp_phonon_bound(const GPModeSpec& spec);
/// sqrt(omega/2) n / |k|, small-k law of the linear-only particle number.
double gp_linear_number_small_k(const GPModeSpec& spec);

/// Uniform background in a box of the given length: N0 = omega L / g,
/// E0 = omega^2 L / (2 g).
double gp_background_number(double omega, double g, double length);
double gp_background_energy(double omega, double g, double length);

/// E0 + sum_j E_p^j   and   (g/2L) (N0 + sum_j N_p^j)^2 + sum_j gamma_j n_j.
struct GPTotalEnergy {
  double direct = 0.0;
  double ground_state_form = 0.0;
};
GPTotalEnergy gp_total_energy(const std::vector<GPModeSpec>& modes, double g, double length);

}  // namespace nlsp::reference
