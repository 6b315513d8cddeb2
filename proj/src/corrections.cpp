#include "nlsp/corrections.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "nlsp/errors.hpp"

namespace nlsp {
namespace {

using cd = std::complex<double>;

double relative_residual(double residual_norm, double rhs_norm) {
  return rhs_norm > 0.0 ? residual_norm / rhs_norm : residual_norm;
}

void require_residual(double r, const char* what) {
  if (!(r < kCorrectionResidualTolerance)) {
    std::ostringstream msg;
    msg << what << ": solve residual " << r << " above tolerance";
    throw ConvergenceError(msg.str(), r);
  }
}

ComplexField times(const RealField& w, const ComplexField& z) { return w.cast<cd>().cwiseProduct(z); }

std::string clash_message(const ModeBasis& basis, double w, const char* what) {
  double best = std::numeric_limits<double>::infinity();
  double clash = 0.0;
  for (const LinearMode& m : basis.modes)
    if (std::abs(std::abs(w) - m.gamma) < best) {
      best = std::abs(std::abs(w) - m.gamma);
      clash = m.gamma;
    }
  std::ostringstream msg;
  msg << what << " at frequency " << w << " resonates with the mode at gamma = " << clash;
  return msg.str();
}

}  // namespace

CorrectionSolver::CorrectionSolver(const Background& background, const DerivedPotentials& potentials,
                                   const OperatorPair& operators)
    : background_(background),
      pots_(potentials),
      ops_(operators),
      l1_solver_(operators.l1.matrix),
      l2_solver_(operators.l2.matrix) {
  const Grid& g = *background.grid;
  if (!(*operators.l1.grid == g) || !(*operators.l2.grid == g))
    throw PreconditionError("CorrectionSolver: operators and background live on different grids");
  require_same_size(g, potentials.W.size(), "CorrectionSolver W");
  require_same_size(g, potentials.J.size(), "CorrectionSolver J");
}

std::pair<RealField, ComplexField> CorrectionSolver::solve_chi(const LinearMode& mode) const {
  const RealField& W = pots_.W;
  const RealField& J = pots_.J;
  const RealField a2 = mode.xi.cwiseAbs2();
  const RealField b2 = mode.eta.cwiseAbs2();
  const RealField rhs_plus = -W.cwiseProduct(3.0 * a2 + b2) - 4.0 * J.cwiseProduct(a2);
  const ComplexField rhs_minus =
      -times(W, ComplexField(mode.xi.conjugate().cwiseProduct(mode.eta) -
                             mode.eta.conjugate().cwiseProduct(mode.xi)));

  // Source magnitude: chi_- vanishes identically for standing or plane-wave modes.
  const double scale = W.cwiseProduct(a2 + b2).norm();

  if (l1_solver_.kernel_component(rhs_plus, scale) > kSolvabilityTolerance)
    throw SolvabilityError("chi_+ right-hand side has a component along the kernel of L1");
  if (l2_solver_.kernel_component(rhs_minus, scale) > kSolvabilityTolerance)
    throw SolvabilityError("chi_- right-hand side has a component along the kernel of L2");

  RealField chi_plus = l1_solver_.solve(rhs_plus);
  ComplexField chi_minus = l2_solver_.solve(rhs_minus);
  require_residual(relative_residual((ops_.l1.apply(chi_plus) - rhs_plus).norm(), std::max(rhs_plus.norm(), scale)),
                   "chi_+");
  require_residual(relative_residual((ops_.l2.apply(chi_minus) - rhs_minus).norm(), std::max(rhs_minus.norm(), scale)),
                   "chi_-");
  return {std::move(chi_plus), std::move(chi_minus)};
}

std::pair<ComplexField, ComplexField> CorrectionSolver::solve_block(double w, const ComplexField& rhs_plus,
                                                                    const ComplexField& rhs_minus) const {
  const Eigen::Index n = rhs_plus.size();
  if (rhs_minus.size() != n || n != ops_.l1.matrix.rows())
    throw PreconditionError("solve_block: size mismatch");
  Eigen::MatrixXd k(2 * n, 2 * n);
  k.topLeftCorner(n, n) = ops_.l1.matrix;
  k.bottomRightCorner(n, n) = ops_.l2.matrix;
  k.topRightCorner(n, n) = -w * Eigen::MatrixXd::Identity(n, n);
  k.bottomLeftCorner(n, n) = -w * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd rhs(2 * n, 2);
  rhs.col(0) << rhs_plus.real(), rhs_minus.real();
  rhs.col(1) << rhs_plus.imag(), rhs_minus.imag();

  const SymmetricIndefiniteSolver solver(k);
  if (!(solver.condition_number() <= kResonanceCondition)) {
    std::ostringstream msg;
    msg << "driven block system at frequency " << w << " is singular (condition "
        << solver.condition_number() << ")";
    throw ResonanceError(msg.str(), w);
  }
  const Eigen::MatrixXd x = solver.solve(rhs);
  const double r = relative_residual((k * x - rhs).norm(), rhs.norm());
  require_residual(r, "driven block system");

  ComplexField a(n), b(n);
  a.real() = x.col(0).head(n);
  a.imag() = x.col(1).head(n);
  b.real() = x.col(0).tail(n);
  b.imag() = x.col(1).tail(n);
  return {std::move(a), std::move(b)};
}

std::pair<ComplexField, ComplexField> CorrectionSolver::solve_psi(const LinearMode& mode) const {
  const ComplexField xi2 = mode.xi.cwiseProduct(mode.xi);
  const ComplexField eta2 = mode.eta.cwiseProduct(mode.eta);
  const ComplexField rhs_plus = -times(pots_.W, ComplexField(1.5 * xi2 - 0.5 * eta2)) - 2.0 * times(pots_.J, xi2);
  const ComplexField rhs_minus = -times(pots_.W, ComplexField(mode.xi.cwiseProduct(mode.eta)));
  return solve_block(2.0 * mode.gamma, rhs_plus, rhs_minus);
}

ModeCorrections CorrectionSolver::solve_mode(const LinearMode& mode) const {
  ModeCorrections c;
  std::tie(c.chi_plus, c.chi_minus) = solve_chi(mode);
  std::tie(c.psi_plus, c.psi_minus) = solve_psi(mode);
  const RealField& W = pots_.W;
  const RealField& J = pots_.J;
  const RealField a2 = mode.xi.cwiseAbs2();
  const RealField b2 = mode.eta.cwiseAbs2();
  const RealField rp = -W.cwiseProduct(3.0 * a2 + b2) - 4.0 * J.cwiseProduct(a2);
  const ComplexField rm = -times(W, ComplexField(mode.xi.conjugate().cwiseProduct(mode.eta) -
                                                 mode.eta.conjugate().cwiseProduct(mode.xi)));
  const ComplexField xi2 = mode.xi.cwiseProduct(mode.xi);
  const ComplexField eta2 = mode.eta.cwiseProduct(mode.eta);
  const ComplexField pp = -times(W, ComplexField(1.5 * xi2 - 0.5 * eta2)) - 2.0 * times(J, xi2);
  const ComplexField pm = -times(W, ComplexField(mode.xi.cwiseProduct(mode.eta)));
  const double w = 2.0 * mode.gamma;
  const double scale = W.cwiseProduct(a2 + b2).norm();
  c.residual = std::max(
      {relative_residual((ops_.l1.apply(c.chi_plus) - rp).norm(), std::max(rp.norm(), scale)),
       relative_residual((ops_.l2.apply(c.chi_minus) - rm).norm(), std::max(rm.norm(), scale)),
       relative_residual((ops_.l1.apply(c.psi_plus) - w * c.psi_minus - pp).norm() +
                             (ops_.l2.apply(c.psi_minus) - w * c.psi_plus - pm).norm(),
                         pp.norm() + pm.norm())});
  return c;
}

PairCorrections CorrectionSolver::solve_pair(const ModeBasis& basis, int n, int k) const {
  if (!(0 <= n && n < k && k < basis.size()))
    throw PreconditionError("solve_pair: requires 0 <= n < k < number of modes");
  if (basis.degenerate(n, k))
    throw PreconditionError("solve_pair: modes " + std::to_string(n) + " and " + std::to_string(k) +
                            " are degenerate; lift the degeneracy first");
  const LinearMode& a = basis.modes[static_cast<std::size_t>(n)];
  const LinearMode& b = basis.modes[static_cast<std::size_t>(k)];
  const RealField& W = pots_.W;
  const RealField& J = pots_.J;

  const ComplexField xx = a.xi.cwiseProduct(b.xi);
  const ComplexField ee = a.eta.cwiseProduct(b.eta);
  const ComplexField rho_p = -times(W, ComplexField(3.0 * xx - ee)) - 4.0 * times(J, xx);
  const ComplexField rho_m = -times(W, ComplexField(a.xi.cwiseProduct(b.eta) + a.eta.cwiseProduct(b.xi)));

  const ComplexField xxc = a.xi.cwiseProduct(b.xi.conjugate());
  const ComplexField eec = a.eta.cwiseProduct(b.eta.conjugate());
  const ComplexField theta_p = -times(W, ComplexField(3.0 * xxc + eec)) - 4.0 * times(J, xxc);
  const ComplexField theta_m =
      -times(W, ComplexField(a.eta.cwiseProduct(b.xi.conjugate()) - a.xi.cwiseProduct(b.eta.conjugate())));

  PairCorrections p;
  p.n = n;
  p.k = k;
  const double wsum = a.gamma + b.gamma;
  const double wdiff = a.gamma - b.gamma;
  try {
    std::tie(p.rho_plus, p.rho_minus) = solve_block(wsum, rho_p, rho_m);
  } catch (const ResonanceError&) {
    throw ResonanceError(clash_message(basis, wsum, "rho block"), wsum);
  }
  try {
    std::tie(p.theta_plus, p.theta_minus) = solve_block(wdiff, theta_p, theta_m);
  } catch (const ResonanceError&) {
    throw ResonanceError(clash_message(basis, wdiff, "theta block"), wdiff);
  }
  const auto block_res = [&](double w, const ComplexField& x, const ComplexField& y, const ComplexField& bp,
                             const ComplexField& bm) {
    return relative_residual((ops_.l1.apply(x) - w * y - bp).norm() + (ops_.l2.apply(y) - w * x - bm).norm(),
                             bp.norm() + bm.norm());
  };
  p.residual = std::max(block_res(wsum, p.rho_plus, p.rho_minus, rho_p, rho_m),
                        block_res(wdiff, p.theta_plus, p.theta_minus, theta_p, theta_m));
  return p;
}

std::pair<RealField, ComplexField> solve_chi(const LinearMode& mode, const CorrectionSolver& solver) {
  return solver.solve_chi(mode);
}

std::pair<ComplexField, ComplexField> solve_psi(const LinearMode& mode, const CorrectionSolver& solver) {
  return solver.solve_psi(mode);
}

PairCorrections solve_pair(const ModeBasis& basis, int n, int k, const CorrectionSolver& solver) {
  return solver.solve_pair(basis, n, k);
}

CorrectionSet solve_all(const ModeBasis& basis, const CorrectionSolver& solver) {
  CorrectionSet out;
  const int m = basis.size();
  std::vector<std::pair<int, int>> pairs;
  for (int n = 0; n < m; ++n)
    for (int k = n + 1; k < m; ++k)
      if (!basis.degenerate(n, k)) pairs.emplace_back(n, k);

  out.modes.resize(static_cast<std::size_t>(m));
  out.pairs.resize(pairs.size());
  const int jobs = m + static_cast<int>(pairs.size());
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));

#pragma omp parallel for schedule(dynamic, 1)
  for (int j = 0; j < jobs; ++j) {
    try {
      if (j < m) {
        out.modes[static_cast<std::size_t>(j)] = solver.solve_mode(basis.modes[static_cast<std::size_t>(j)]);
      } else {
        const auto [n, k] = pairs[static_cast<std::size_t>(j - m)];
        out.pairs[static_cast<std::size_t>(j - m)] = solver.solve_pair(basis, n, k);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  // Report the first failure in job order so the error is independent of scheduling.
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

CorrectionSet zero_corrections(const ModeBasis& basis) {
  const Eigen::Index size = basis.grid->size();
  const ComplexField z = ComplexField::Zero(size);
  CorrectionSet out;
  for (int n = 0; n < basis.size(); ++n) out.modes.push_back({RealField::Zero(size), z, z, z, 0.0});
  for (int n = 0; n < basis.size(); ++n)
    for (int k = n + 1; k < basis.size(); ++k)
      if (!basis.degenerate(n, k)) out.pairs.push_back({n, k, z, z, z, z, 0.0});
  return out;
}

}  // namespace nlsp
