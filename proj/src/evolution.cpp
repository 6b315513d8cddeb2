#include "nlsp/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/kernels.hpp"

namespace nlsp {
namespace {

using cd = std::complex<double>;

std::span<cd> span_of(ComplexField& z) { return {z.data(), static_cast<std::size_t>(z.size())}; }
std::span<const cd> span_of(const ComplexField& z) { return {z.data(), static_cast<std::size_t>(z.size())}; }
std::span<const double> span_of(const RealField& r) { return {r.data(), static_cast<std::size_t>(r.size())}; }

// Kinetic propagator exp(i dt Laplacian) diagonalised by the FFT (periodic)
// or the DST-I (line, zero ghosts).
class KineticPropagator {
 public:
  explicit KineticPropagator(const Grid& grid) : grid_(grid), n_(grid.size()) {
    if (grid.periodic()) {
      fft_ = std::make_unique<detail::Fft>(n_);
      for (double k : detail::fourier_wavenumbers(grid)) k2_.push_back(k * k);
    } else {
      sine_ = std::make_unique<detail::SineTransform>(n_);
      const double len = (n_ + 1) * grid.spacing();
      for (int m = 1; m <= n_; ++m) k2_.push_back(std::pow(std::numbers::pi * m / len, 2));
    }
  }

  void step(ComplexField& psi, double dt) {
    if (fft_) {
      fft_->forward(psi.data());
      kernels::kinetic_phase(span_of(psi), k2_, dt);
      fft_->backward(psi.data());
      psi /= static_cast<double>(n_);
      return;
    }
    Eigen::VectorXd re = psi.real(), im = psi.imag();
    sine_->apply(re.data());
    sine_->apply(im.data());
    ComplexField hat(n_);
    hat.real() = re;
    hat.imag() = im;
    kernels::kinetic_phase(span_of(hat), k2_, dt);
    re = hat.real();
    im = hat.imag();
    sine_->apply(re.data());
    sine_->apply(im.data());
    const double norm = 1.0 / (2.0 * (n_ + 1));
    psi.real() = re * norm;
    psi.imag() = im * norm;
  }

  // integral |d psi|^2 in the same representation as the propagator
  double kinetic_energy(const ComplexField& psi) {
    if (fft_) {
      ComplexField hat = psi;
      fft_->forward(hat.data());
      double acc = 0.0;
      for (int j = 0; j < n_; ++j) acc += k2_[static_cast<std::size_t>(j)] * std::norm(hat[j]);
      return grid_.spacing() * acc / n_;
    }
    Eigen::VectorXd re = psi.real(), im = psi.imag();
    sine_->apply(re.data());
    sine_->apply(im.data());
    double acc = 0.0;
    for (int j = 0; j < n_; ++j) acc += k2_[static_cast<std::size_t>(j)] * (re[j] * re[j] + im[j] * im[j]);
    return grid_.spacing() * acc / (2.0 * (n_ + 1));
  }

 private:
  const Grid& grid_;
  int n_;
  std::vector<double> k2_;
  std::unique_ptr<detail::Fft> fft_;
  std::unique_ptr<detail::SineTransform> sine_;
};

FieldIntegrals integrals_with(KineticPropagator& kin, const Grid& grid, const ComplexField& psi,
                              const RealField& potential, const NonlinearityModel& model) {
  FieldIntegrals out;
  out.N = integrate(grid, RealField(psi.cwiseAbs2()));
  out.E = kin.kinetic_energy(psi) +
          kernels::potential_energy_sum(span_of(grid.weights()), span_of(psi), span_of(potential), model);
  const ComplexField dpsi = derivative(grid, psi);
  out.P = integrate(grid, ComplexField(psi.conjugate().cwiseProduct(dpsi))).imag();
  return out;
}

double max_abs_diff(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x - v.front()));
  return m;
}

void fill_drifts(TrajectoryDiagnostics& d) {
  if (d.times.empty()) return;
  d.drift_N = max_abs_diff(d.N);
  d.drift_E = max_abs_diff(d.E);
  d.drift_P = max_abs_diff(d.P);
}

}  // namespace

PerturbationAssembly PerturbationAssembly::from_basis(const Background& background, const ModeBasis& basis,
                                                      const CorrectionSet& all, const std::vector<int>& selection,
                                                      double alpha, bool include_nonlinear) {
  if (selection.empty()) throw PreconditionError("PerturbationAssembly: empty mode selection");
  if (!std::is_sorted(selection.begin(), selection.end()) ||
      std::adjacent_find(selection.begin(), selection.end()) != selection.end())
    throw PreconditionError("PerturbationAssembly: selection must be strictly increasing");
  PerturbationAssembly a;
  a.background = background;
  a.alpha = alpha;
  a.include_nonlinear = include_nonlinear;
  for (int idx : selection) {
    if (idx < 0 || idx >= basis.size()) throw PreconditionError("PerturbationAssembly: mode index out of range");
    a.modes.push_back(basis.modes[static_cast<std::size_t>(idx)]);
    if (include_nonlinear) {
      if (all.modes.size() != static_cast<std::size_t>(basis.size()))
        throw PreconditionError("PerturbationAssembly: missing single-mode corrections");
      a.corrections.push_back(all.modes[static_cast<std::size_t>(idx)]);
    }
  }
  if (!include_nonlinear) return a;
  for (std::size_t i = 0; i < selection.size(); ++i)
    for (std::size_t j = i + 1; j < selection.size(); ++j) {
      const auto it = std::find_if(all.pairs.begin(), all.pairs.end(), [&](const PairCorrections& p) {
        return p.n == selection[i] && p.k == selection[j];
      });
      if (it == all.pairs.end()) {
        std::ostringstream msg;
        msg << "PerturbationAssembly: missing pair corrections for modes " << selection[i] << ", "
            << selection[j];
        throw PreconditionError(msg.str());
      }
      PairCorrections p = *it;
      p.n = static_cast<int>(i);
      p.k = static_cast<int>(j);
      a.pairs.push_back(std::move(p));
    }
  return a;
}

double PerturbationAssembly::max_frequency() const {
  double m = 0.0;
  for (const LinearMode& mode : modes) m = std::max(m, include_nonlinear ? 2.0 * mode.gamma : mode.gamma);
  for (const PairCorrections& p : pairs)
    m = std::max(m, modes[static_cast<std::size_t>(p.n)].gamma + modes[static_cast<std::size_t>(p.k)].gamma);
  return m;
}

ComplexField assemble_phi(const PerturbationAssembly& a, double t) {
  const Eigen::Index n = a.background.f.size();
  ComplexField phi = ComplexField::Zero(n);
  const auto rotating = [&](const ComplexField& plus, const ComplexField& minus, double w) {
    const cd e = std::exp(cd(0.0, -w * t));
    phi += 0.5 * (e * (plus + minus) + std::conj(e) * (plus.conjugate() - minus.conjugate()));
  };
  for (const LinearMode& m : a.modes) rotating(m.xi, m.eta, m.gamma);
  if (!a.include_nonlinear) return phi;
  if (a.corrections.size() != a.modes.size())
    throw PreconditionError("assemble_phi: corrections missing for the nonlinear ansatz");
  const std::size_t expected = a.modes.size() * (a.modes.size() - 1) / 2;
  if (a.pairs.size() != expected) throw PreconditionError("assemble_phi: pair corrections missing");
  ComplexField second = ComplexField::Zero(n);
  std::swap(phi, second);
  for (std::size_t j = 0; j < a.modes.size(); ++j) {
    const ModeCorrections& c = a.corrections[j];
    phi += 0.5 * (c.chi_plus.cast<cd>() + c.chi_minus);
    rotating(c.psi_plus, c.psi_minus, 2.0 * a.modes[j].gamma);
  }
  for (const PairCorrections& p : a.pairs) {
    const double gn = a.modes[static_cast<std::size_t>(p.n)].gamma;
    const double gk = a.modes[static_cast<std::size_t>(p.k)].gamma;
    rotating(p.rho_plus, p.rho_minus, gn + gk);
    rotating(p.theta_plus, p.theta_minus, gn - gk);
  }
  std::swap(phi, second);
  phi += a.alpha * second;
  return phi;
}

ComplexField assemble_initial(const PerturbationAssembly& a, double t0) {
  const ComplexField phi = assemble_phi(a, t0);
  return std::exp(cd(0.0, -a.background.omega * t0)) * (a.background.f.cast<cd>() + a.alpha * phi);
}

FieldIntegrals field_integrals(const Grid& grid, const ComplexField& psi, const RealField& potential,
                               const NonlinearityModel& model) {
  require_same_size(grid, psi.size(), "field_integrals");
  KineticPropagator kin(grid);
  const RealField v = potential.size() == 0 ? RealField::Zero(grid.size()) : potential;
  return integrals_with(kin, grid, psi, v, model);
}

FieldIntegrals perturbation_integrals(const PerturbationAssembly& a, double t) {
  const Background& bg = a.background;
  const Grid& g = *bg.grid;
  const ComplexField phi = assemble_phi(a, t);
  const ComplexField f = bg.f.cast<cd>();
  const ComplexField df = derivative(g, bg.f).cast<cd>();
  const ComplexField dphi = derivative(g, phi);
  const double al = a.alpha;
  FieldIntegrals out;
  out.N = al * integrate(g, RealField(2.0 * bg.f.cwiseProduct(phi.real()))) +
          al * al * integrate(g, RealField(phi.cwiseAbs2()));
  const cd i(0.0, 1.0);
  out.P = (i * al * integrate(g, ComplexField(df.cwiseProduct(phi - phi.conjugate()))) -
           i * al * al * integrate(g, ComplexField(phi.conjugate().cwiseProduct(dphi))))
              .real();
  KineticPropagator kin(g);
  const ComplexField psi = f + al * phi;
  out.E = integrals_with(kin, g, psi, bg.potential, bg.model).E - integrals_with(kin, g, f, bg.potential, bg.model).E;
  return out;
}

TrajectoryDiagnostics evolve(const Grid& grid, const ComplexField& psi0, const RealField& potential_in,
                             const NonlinearityModel& model, const EvolveOptions& opts) {
  require_same_size(grid, psi0.size(), "evolve");
  if (!(opts.dt > 0.0) || !(opts.T > 0.0) || opts.sample_stride < 1)
    throw PreconditionError("evolve: T, dt and sample_stride must be positive");
  if (opts.max_frequency > 0.0 && !(opts.dt * opts.max_frequency < 0.1)) {
    std::ostringstream msg;
    msg << "evolve: dt = " << opts.dt << " does not resolve the frequency " << opts.max_frequency
        << " (need dt * frequency < 0.1)";
    throw PreconditionError(msg.str());
  }
  const RealField potential = potential_in.size() == 0 ? RealField::Zero(grid.size()) : potential_in;
  require_same_size(grid, potential.size(), "evolve potential");

  TrajectoryDiagnostics d;
  d.dt = opts.dt;
  d.order = 2;
  d.steps = static_cast<long>(std::ceil(opts.T / opts.dt - 1e-9));
  KineticPropagator kin(grid);
  ComplexField psi = psi0;
  const double limit = 1e6 * psi0.cwiseAbs().maxCoeff();

  const auto sample = [&](long step) {
    const FieldIntegrals q = integrals_with(kin, grid, psi, potential, model);
    d.times.push_back(step * opts.dt);
    d.N.push_back(q.N);
    d.E.push_back(q.E);
    d.P.push_back(q.P);
  };
  sample(0);
  for (long s = 1; s <= d.steps; ++s) {
    kin.step(psi, 0.5 * opts.dt);
    kernels::nonlinear_step(span_of(psi), span_of(potential), model, opts.dt);
    kin.step(psi, 0.5 * opts.dt);
    if (s % opts.sample_stride == 0 || s == d.steps) {
      const double peak = psi.cwiseAbs().maxCoeff();
      if (!std::isfinite(peak) || peak > limit) {
        std::ostringstream msg;
        msg << "evolve: blow-up at t = " << s * opts.dt << " (max |psi| = " << peak << ")";
        throw InstabilityError(msg.str());
      }
      sample(s);
    }
  }
  d.final_field = std::move(psi);
  fill_drifts(d);
  return d;
}

TrajectoryDiagnostics evolve_assembly(const PerturbationAssembly& a, const EvolveOptions& options) {
  EvolveOptions opts = options;
  opts.max_frequency = std::max(opts.max_frequency, a.max_frequency());
  const Grid& g = *a.background.grid;
  TrajectoryDiagnostics d = evolve(g, assemble_initial(a, 0.0), a.background.potential, a.background.model, opts);
  const TrajectoryDiagnostics ans = ansatz_series(a, d.times);
  d.N_ansatz = ans.N;
  d.E_ansatz = ans.E;
  return d;
}

TrajectoryDiagnostics ansatz_series(const PerturbationAssembly& a, const std::vector<double>& times) {
  const Background& bg = a.background;
  const Grid& g = *bg.grid;
  KineticPropagator kin(g);
  const ComplexField f = bg.f.cast<cd>();
  const FieldIntegrals base = integrals_with(kin, g, f, bg.potential, bg.model);
  TrajectoryDiagnostics d;
  d.times = times;
  for (double t : times) {
    const FieldIntegrals p = perturbation_integrals(a, t);
    d.N.push_back(base.N + p.N);
    d.E.push_back(base.E + p.E);
    d.P.push_back(base.P + p.P);
  }
  d.N_ansatz = d.N;
  d.E_ansatz = d.E;
  fill_drifts(d);
  return d;
}

DriftComparison drift_report(const TrajectoryDiagnostics& lin, const TrajectoryDiagnostics& nl,
                             double predicted) {
  if (lin.times != nl.times) throw PreconditionError("drift_report: runs are sampled at different times");
  const std::vector<double>& a = lin.N_ansatz.empty() ? lin.N : lin.N_ansatz;
  const std::vector<double>& b = nl.N_ansatz.empty() ? nl.N : nl.N_ansatz;
  if (a.empty() || a.size() != b.size()) throw PreconditionError("drift_report: empty or mismatched series");
  const auto half_range = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return 0.5 * (*hi - *lo);
  };
  DriftComparison c;
  c.nonlinear_drift = max_abs_diff(b);
  c.linear_amplitude = half_range(a);
  c.nonlinear_amplitude = half_range(b);
  c.predicted = predicted;
  c.ratio_to_prediction = predicted != 0.0 ? c.linear_amplitude / predicted : 0.0;
  c.suppression = c.nonlinear_amplitude > 0.0 ? c.linear_amplitude / c.nonlinear_amplitude
                                              : (c.linear_amplitude > 0.0 ? INFINITY : 1.0);
  for (std::size_t j = 0; j < a.size(); ++j) c.max_difference = std::max(c.max_difference, std::abs(a[j] - b[j]));
  return c;
}

double oscillation_amplitude(const std::vector<double>& times, const std::vector<double>& series, double w) {
  if (times.size() != series.size() || times.size() < 3)
    throw PreconditionError("oscillation_amplitude: need at least three samples");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(times.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(times.size()));
  for (std::size_t j = 0; j < times.size(); ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    a(r, 0) = 1.0;
    a(r, 1) = std::cos(w * times[j]);
    a(r, 2) = std::sin(w * times[j]);
    y[r] = series[j] - series.front();
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
  return std::hypot(c[1], c[2]);
}

double fitted_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fitted_exponent: need two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lx = std::log(std::abs(x[j]));
    const double ly = std::log(std::abs(y[j]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace nlsp
