#include "nlsp/reference.hpp"

#include <cmath>
#include <numeric>

#include "nlsp/errors.hpp"

namespace nlsp::reference {
namespace {

int checked_total(const LogModeLabel& label) {
  for (int v : label.n)
    if (v < 0) throw PreconditionError("log mode label entries must be nonnegative");
  const int s = label.total();
  if (s < 2) throw PreconditionError("log mode label must have n_1 + ... + n_d >= 2");
  return s;
}

}  // namespace

int LogModeLabel::total() const { return std::accumulate(n.begin(), n.end(), 0); }

double log_gamma(const LogModeLabel& label) {
  const double s = checked_total(label);
  return 2.0 * std::sqrt((s - 1.0) * s);
}

double log_amplitude_ratio(const LogModeLabel& label) {
  const double s = checked_total(label);
  return std::sqrt(s / (s - 1.0));
}

double log_background_omega(double amplitude, int dimension) {
  if (!(amplitude > 0.0) || dimension < 1) throw PreconditionError("log_background_omega: bad arguments");
  return dimension - std::log(amplitude * amplitude);
}

double bogoliubov_gamma(double k, double omega) {
  if (!(omega > 0.0)) throw PreconditionError("bogoliubov_gamma: omega must be positive");
  return std::sqrt(k * k * (2.0 * omega + k * k));
}

GPModeInvariants gp_mode_invariants(const GPModeSpec& spec) {
  if (spec.k == 0.0) throw PreconditionError("gp_mode_invariants: k = 0 is not an oscillation mode");
  if (spec.n_tilde < 0.0) throw PreconditionError("gp_mode_invariants: n_tilde must be nonnegative");
  const double k2 = spec.k * spec.k;
  const double w = spec.omega;
  const double gamma = bogoliubov_gamma(spec.k, w);
  // (k^2 + omega - gamma) a + omega b^* = 0  =>  b^* = -c a
  const double c = (k2 + w - gamma) / w;
  GPModeInvariants out;
  out.a2 = spec.n_tilde / (1.0 - c * c);
  out.b2 = c * c * out.a2;
  out.np = -out.a2 * (1.0 - c) * (1.0 - c);
  out.ep = w * out.np + gamma * spec.n_tilde;
  out.pp = spec.k * spec.n_tilde;
  out.np_linear = out.a2 + out.b2;
  return out;
}

double gp_energy_alternative(const GPModeSpec& spec) {
  const double k2 = spec.k * spec.k;
  return bogoliubov_gamma(spec.k, spec.omega) * spec.n_tilde * (spec.omega + k2) / (2.0 * spec.omega + k2);
}

double gp_phonon_bound(const GPModeSpec& spec) {
  return std::sqrt(spec.omega / 2.0) * std::abs(spec.k * spec.n_tilde);
}

double gp_linear_number_small_k(const GPModeSpec& spec) {
  if (spec.k == 0.0) throw PreconditionError("gp_linear_number_small_k: k = 0");
  return std::sqrt(spec.omega / 2.0) * spec.n_tilde / std::abs(spec.k);
}

double gp_background_number(double omega, double g, double length) { return omega * length / g; }

double gp_background_energy(double omega, double g, double length) {
  return omega * omega * length / (2.0 * g);
}

GPTotalEnergy gp_total_energy(const std::vector<GPModeSpec>& modes, double g, double length) {
  if (modes.empty()) throw PreconditionError("gp_total_energy: no modes");
  const double w = modes.front().omega;
  double np = 0.0, ep = 0.0, quanta = 0.0;
  for (const GPModeSpec& m : modes) {
    if (m.omega != w) throw PreconditionError("gp_total_energy: modes on different backgrounds");
    const GPModeInvariants inv = gp_mode_invariants(m);
    np += inv.np;
    ep += inv.ep;
    quanta += bogoliubov_gamma(m.k, w) * m.n_tilde;
  }
  const double n = gp_background_number(w, g, length) + np;
  return {gp_background_energy(w, g, length) + ep, g / (2.0 * length) * n * n + quanta};
}

}  // namespace nlsp::reference
