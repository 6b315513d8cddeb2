#include "nlsp/model.hpp"

#include <cmath>
#include <sstream>

#include "nlsp/errors.hpp"
#include "nlsp/linalg.hpp"
#include "nlsp/operators.hpp"

namespace nlsp {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_positive(double s) {
  if (!(s > 0.0)) {
    std::ostringstream msg;
    msg << "logarithmic nonlinearity evaluated at s = " << s << " <= 0";
    throw DomainError(msg.str());
  }
}

void require_log_amplitude(double f) {
  if (!(std::abs(f) > kLogAmplitudeFloor)) {
    std::ostringstream msg;
    msg << "logarithmic nonlinearity evaluated at amplitude f = " << f;
    throw DomainError(msg.str());
  }
}

double poly_eval(const std::vector<double>& c, double s, int derivative) {
  double acc = 0.0;
  for (int m = static_cast<int>(c.size()) - 1; m >= derivative; --m) {
    double factor = 1.0;
    for (int q = 0; q < derivative; ++q) factor *= (m - q);
    acc = acc * s + factor * c[static_cast<std::size_t>(m)];
  }
  return acc;
}

}  // namespace

std::string NonlinearityModel::name() const {
  return std::visit(overloaded{[](const GrossPitaevskii&) { return std::string("gp"); },
                               [](const Logarithmic&) { return std::string("log"); },
                               [](const Polynomial&) { return std::string("poly"); }},
                    v_);
}

double NonlinearityModel::F(double s) const {
  return std::visit(overloaded{[&](const GrossPitaevskii& m) { return m.g * s; },
                               [&](const Logarithmic&) {
                                 require_positive(s);
                                 return -std::log(s);
                               },
                               [&](const Polynomial& p) { return poly_eval(p.coeffs, s, 0); }},
                    v_);
}

double NonlinearityModel::dF(double s) const {
  return std::visit(overloaded{[&](const GrossPitaevskii& m) { return m.g; },
                               [&](const Logarithmic&) {
                                 require_positive(s);
                                 return -1.0 / s;
                               },
                               [&](const Polynomial& p) { return poly_eval(p.coeffs, s, 1); }},
                    v_);
}

double NonlinearityModel::d2F(double s) const {
  return std::visit(overloaded{[&](const GrossPitaevskii&) { return 0.0; },
                               [&](const Logarithmic&) {
                                 require_positive(s);
                                 return 1.0 / (s * s);
                               },
                               [&](const Polynomial& p) { return poly_eval(p.coeffs, s, 2); }},
                    v_);
}

double NonlinearityModel::primitive(double s) const {
  return std::visit(overloaded{[&](const GrossPitaevskii& m) { return 0.5 * m.g * s * s; },
                               [&](const Logarithmic&) { return s > 0.0 ? s - s * std::log(s) : 0.0; },
                               [&](const Polynomial& p) {
                                 double acc = 0.0;
                                 for (int m = static_cast<int>(p.coeffs.size()) - 1; m >= 0; --m)
                                   acc = acc * s + p.coeffs[static_cast<std::size_t>(m)] / (m + 1);
                                 return acc * s;
                               }},
                    v_);
}

double NonlinearityModel::U(double f) const {
  if (std::holds_alternative<Logarithmic>(v_)) {
    require_log_amplitude(f);
    return -2.0 * std::log(std::abs(f));
  }
  return F(f * f);
}

double NonlinearityModel::W(double f) const {
  if (std::holds_alternative<Logarithmic>(v_)) {
    require_log_amplitude(f);
    return -1.0 / f;
  }
  return dF(f * f) * f;
}

double NonlinearityModel::J(double f) const {
  if (std::holds_alternative<Logarithmic>(v_)) {
    require_log_amplitude(f);
    return 0.5 / f;
  }
  return 0.5 * d2F(f * f) * f * f * f;
}

bool Background::potential_is_zero() const { return potential.size() == 0 || potential.isZero(0.0); }

DerivedPotentials eval_potentials(const Grid& grid, const RealField& f, const NonlinearityModel& model) {
  require_same_size(grid, f.size(), "eval_potentials");
  const Eigen::Index n = f.size();
  DerivedPotentials p{RealField(n), RealField(n), RealField(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    try {
      p.U[j] = model.U(f[j]);
      p.W[j] = model.W(f[j]);
      p.J[j] = model.J(f[j]);
    } catch (const DomainError& e) {
      std::ostringstream msg;
      msg << e.what() << " at grid point " << j << " (x = " << grid.nodes()[j] << ")";
      throw DomainError(msg.str());
    }
  }
  return p;
}

DerivedPotentials eval_potentials(const Background& background) {
  return eval_potentials(*background.grid, background.f, background.model);
}

namespace {

RealField stationary_operator_applied(const Grid& grid, const Eigen::MatrixXd& lap, const RealField& f,
                                      double omega, const RealField& potential,
                                      const NonlinearityModel& model) {
  RealField r = -(lap * f);
  for (Eigen::Index j = 0; j < f.size(); ++j) r[j] += (potential[j] + model.U(f[j]) - omega) * f[j];
  (void)grid;
  return r;
}

double relative_residual(const Grid& grid, const Eigen::MatrixXd& lap, const RealField& f, double omega,
                         const RealField& potential, const NonlinearityModel& model) {
  const double nf = l2_norm(grid, f);
  if (nf == 0.0) return std::numeric_limits<double>::infinity();
  return l2_norm(grid, stationary_operator_applied(grid, lap, f, omega, potential, model)) / nf;
}

RealField zero_if_empty(const Grid& grid, const RealField& potential) {
  return potential.size() == 0 ? RealField::Zero(grid.size()) : potential;
}

}  // namespace

double stationarity_residual(const Grid& grid, const RealField& f, double omega,
                             const RealField& potential, const NonlinearityModel& model) {
  require_same_size(grid, f.size(), "stationarity_residual");
  const RealField v = zero_if_empty(grid, potential);
  require_same_size(grid, v.size(), "stationarity_residual potential");
  return relative_residual(grid, laplacian_matrix(grid), f, omega, v, model);
}

Background certify_background(GridPtr grid, RealField f, double omega, RealField potential,
                              NonlinearityModel model, double tolerance) {
  if (f.isZero(0.0)) throw PreconditionError("background profile is identically zero");
  potential = zero_if_empty(*grid, potential);
  const double r = stationarity_residual(*grid, f, omega, potential, model);
  if (!(r < tolerance)) {
    std::ostringstream msg;
    msg << "profile is not stationary: residual " << r << " >= " << tolerance;
    throw ConvergenceError(msg.str(), r);
  }
  return Background{std::move(grid), std::move(f), omega, std::move(potential), std::move(model), r};
}

namespace {

// Minimal-norm Newton step. The Jacobian is L1, singular along translations
// when V = 0, so the near-kernel is projected out of the LDL^T solution
// instead of paying for a full eigendecomposition per iteration.
RealField newton_step(const Eigen::MatrixXd& jacobian, const RealField& r) {
  const SymmetricIndefiniteSolver ldl(jacobian);
  if (ldl.condition_number() < 1e10) return ldl.solve(Eigen::VectorXd(r));
  if (!std::isfinite(ldl.condition_number())) return MinNormSolver(jacobian).solve(Eigen::VectorXd(r));
  const Eigen::MatrixXd kernel = near_kernel(jacobian, ldl);
  const Eigen::VectorXd rr = r - kernel * (kernel.transpose() * r);
  Eigen::VectorXd step = ldl.solve(rr);
  step -= kernel * (kernel.transpose() * step);
  return step;
}

}  // namespace

Background solve_background(GridPtr grid, double omega, const RealField& potential_in,
                            const NonlinearityModel& model, const RealField& guess,
                            const NewtonOptions& options) {
  const Grid& g = *grid;
  require_same_size(g, guess.size(), "solve_background guess");
  if (guess.isZero(0.0)) throw PreconditionError("solve_background: initial guess is identically zero");
  const RealField potential = zero_if_empty(g, potential_in);
  require_same_size(g, potential.size(), "solve_background potential");

  const Eigen::MatrixXd lap = laplacian_matrix(g);
  const double guess_norm = l2_norm(g, guess);
  RealField f = guess;
  double res = relative_residual(g, lap, f, omega, potential, model);
  // Stop once the residual is far below tolerance or has stagnated.
  const double target = 1e-3 * options.tolerance;
  for (int it = 0; it < options.max_iterations && res > target; ++it) {
    RealField diag(f.size());
    for (Eigen::Index j = 0; j < f.size(); ++j)
      diag[j] = potential[j] + model.U(f[j]) - omega + 2.0 * f[j] * model.W(f[j]);
    const RealField r = stationary_operator_applied(g, lap, f, omega, potential, model);
    const RealField step = -newton_step(schrodinger_matrix(g, diag), r);
    double lambda = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
      const RealField trial = f + lambda * step;
      double trial_res;
      try {
        trial_res = relative_residual(g, lap, trial, omega, potential, model);
      } catch (const DomainError&) {
        continue;
      }
      if (trial_res < res) {
        f = trial;
        res = trial_res;
        improved = true;
        break;
      }
    }
    if (!improved) break;
    if (l2_norm(g, f) < 1e-8 * guess_norm)
      throw ConvergenceError("solve_background converged to the trivial solution f = 0", res);
  }
  if (l2_norm(g, f) < 1e-8 * guess_norm)
    throw ConvergenceError("solve_background converged to the trivial solution f = 0", res);
  if (!(res < options.tolerance)) {
    std::ostringstream msg;
    msg << "solve_background did not converge: residual " << res;
    throw ConvergenceError(msg.str(), res);
  }
  return Background{std::move(grid), std::move(f), omega, potential, model, res};
}

RealField dfdomega(const Background& background) {
  const Grid& g = *background.grid;
  const DerivedPotentials pots = eval_potentials(background);
  const LinearOperator l1 = assemble_operator(OperatorKind::L1, background, pots);
  const MinNormSolver solver(l1.matrix);
  if (solver.kernel_component(background.f) > 1e-8)
    throw SolvabilityError("dfdomega: f has a component along the kernel of L1");
  RealField y = solver.solve(background.f);
  const double res = l2_norm(g, RealField(l1.apply(y) - background.f)) / l2_norm(g, background.f);
  if (!(res < 1e-8)) throw ConvergenceError("dfdomega: residual of L1 y = f too large", res);
  return y;
}

double background_particle_number(const Background& background) {
  return integrate(*background.grid, RealField(background.f.array().square()));
}

double background_energy(const Background& background) {
  const Grid& g = *background.grid;
  const RealField& f = background.f;
  RealField density = -(f.array() * (laplacian_matrix(g) * f).array());
  for (Eigen::Index j = 0; j < f.size(); ++j)
    density[j] += background.potential[j] * f[j] * f[j] + background.model.primitive(f[j] * f[j]);
  return integrate(g, density);
}

}  // namespace nlsp
