#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "nlsp/corrections.hpp"
#include "nlsp/errors.hpp"
#include "support.hpp"

using namespace nlsp;
using cd = std::complex<double>;

namespace {

// Wavenumber of a single plane wave sampled on a periodic grid.
double wavenumber(const Grid& g, const ComplexField& z) {
  Eigen::Index arg = 0;
  z.cwiseAbs().maxCoeff(&arg);
  return (derivative(g, z)[arg] / (cd(0, 1) * z[arg])).real();
}

bool is_plane_wave(const Grid& g, const ComplexField& z, double k, double tol) {
  return (derivative(g, z) - cd(0, k) * z).cwiseAbs().maxCoeff() <= tol * std::max(1.0, z.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("static correction of a GP plane wave is a constant") {
  const test::Problem p = test::gp_problem(2.0 * std::numbers::pi, 64, 2);
  const CorrectionSolver solver(p.background, p.potentials, p.operators);
  const LinearMode& m = p.basis.modes[0];
  const auto [chi_plus, chi_minus] = solver.solve_chi(m);
  // L1 acts on constants as U - omega + 2 f W = 2 omega (g = omega = 1, J = 0).
  const RealField rhs = -(3.0 * m.xi.cwiseAbs2() + m.eta.cwiseAbs2());
  CHECK((chi_plus - rhs / 2.0).cwiseAbs().maxCoeff() < 1e-11);
  CHECK(chi_plus.maxCoeff() - chi_plus.minCoeff() < 1e-11);
  CHECK(chi_minus.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("double-frequency and pair corrections of GP plane waves") {
  const test::Problem p = test::gp_problem(2.0 * std::numbers::pi, 64, 4);
  const Grid& g = *p.basis.grid;
  const CorrectionSolver solver(p.background, p.potentials, p.operators);
  for (int j = 0; j < 4; ++j) {
    const LinearMode& m = p.basis.modes[j];
    const double k = wavenumber(g, m.xi);
    const ModeCorrections c = solver.solve_mode(m);
    CHECK(c.residual < 1e-10);
    CHECK(is_plane_wave(g, c.psi_plus, 2.0 * k, 1e-9));
    CHECK(is_plane_wave(g, c.psi_minus, 2.0 * k, 1e-9));
  }
  // Modes 0 and 2 have |k| = 1 and |k| = 2.
  const double k0 = wavenumber(g, p.basis.modes[0].xi);
  const double k2 = wavenumber(g, p.basis.modes[2].xi);
  const PairCorrections pc = solver.solve_pair(p.basis, 0, 2);
  CHECK(pc.residual < 1e-10);
  CHECK(is_plane_wave(g, pc.rho_plus, k0 + k2, 1e-9));
  CHECK(is_plane_wave(g, pc.rho_minus, k0 + k2, 1e-9));
  CHECK(is_plane_wave(g, pc.theta_plus, k0 - k2, 1e-9));
  CHECK(is_plane_wave(g, pc.theta_minus, k0 - k2, 1e-9));

  CHECK_THROWS_AS(solver.solve_pair(p.basis, 2, 0), PreconditionError);
  CHECK_THROWS_AS(solver.solve_pair(p.basis, 0, 1), PreconditionError);  // degenerate
}

TEST_CASE("first vanishing-overlap identity on the logarithmic n=2 mode") {
  const test::Problem p = test::log_problem(test::log_box(), 2);
  const Grid& g = *p.basis.grid;
  const CorrectionSolver solver(p.background, p.potentials, p.operators);
  const LinearMode& m = p.basis.modes[0];
  const auto [psi_plus, psi_minus] = solver.solve_psi(m);
  const ComplexField d = m.xi.cwiseProduct(m.xi) - m.eta.cwiseProduct(m.eta);
  const cd lhs = integrate(g, ComplexField(p.background.f.cast<cd>().cwiseProduct(psi_plus) + 0.25 * d));
  CHECK(std::abs(lhs) < 1e-8);
  CHECK(std::abs(integrate(g, d)) > 1e-2);
}

TEST_CASE("static correction matches the df/domega shortcut") {
  const test::Problem p = test::log_problem(test::log_box(), 2);
  const Grid& g = *p.basis.grid;
  const CorrectionSolver solver(p.background, p.potentials, p.operators);
  const RealField y = dfdomega(p.background);
  for (const LinearMode& m : p.basis.modes) {
    const RealField chi = solver.solve_chi(m).first;
    const RealField a2 = m.xi.cwiseAbs2(), b2 = m.eta.cwiseAbs2();
    const RealField src = p.potentials.W.cwiseProduct(3.0 * a2 + b2) + 4.0 * p.potentials.J.cwiseProduct(a2);
    const double direct = integrate(g, RealField(p.background.f.cwiseProduct(chi)));
    const double shortcut = -integrate(g, RealField(y.cwiseProduct(src)));
    CHECK(std::abs(direct - shortcut) < 1e-8 * std::abs(direct));
  }
}

TEST_CASE("resonant driving is reported") {
  const test::Problem p = test::log_problem(test::log_box(), 2);
  const CorrectionSolver solver(p.background, p.potentials, p.operators);
  const LinearMode& m = p.basis.modes[0];
  const ComplexField rhs = m.xi;
  CHECK_THROWS_AS(solver.solve_block(m.gamma, rhs, rhs), ResonanceError);
  try {
    solver.solve_block(m.gamma, rhs, rhs);
  } catch (const ResonanceError& e) {
    CHECK(e.frequency() == m.gamma);
  }

  // For the logarithmic model the chi_+ source is (|xi|^2 + |eta|^2)/f. With
  // |xi|^2 = f^2 (1 + tanh(x)/2) it has a component along the kernel df/dx of L1.
  const RealField& x = p.background.grid->nodes();
  LinearMode bad = m;
  bad.xi = (p.background.f.array() * (1.0 + 0.5 * x.array().tanh()).sqrt()).matrix().cast<cd>();
  bad.eta.setZero();
  CHECK_THROWS_AS(solver.solve_chi(bad), SolvabilityError);
}

TEST_CASE("parallel solve of every correction is thread-count independent") {
  const test::Problem p = test::log_problem(test::log_box(128), 4);
  const CorrectionSolver solver(p.background, p.potentials, p.operators);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const CorrectionSet one = solve_all(p.basis, solver);
  omp_set_num_threads(4);
  const CorrectionSet four = solve_all(p.basis, solver);
  omp_set_num_threads(saved);
  REQUIRE(one.modes.size() == 4);
  REQUIRE(one.pairs.size() == 6);
  for (std::size_t j = 0; j < one.modes.size(); ++j) {
    CHECK(one.modes[j].chi_plus == four.modes[j].chi_plus);
    CHECK(one.modes[j].psi_plus == four.modes[j].psi_plus);
  }
  for (std::size_t j = 0; j < one.pairs.size(); ++j) {
    CHECK(one.pairs[j].n == four.pairs[j].n);
    CHECK(one.pairs[j].rho_plus == four.pairs[j].rho_plus);
    CHECK(one.pairs[j].theta_minus == four.pairs[j].theta_minus);
  }
  const CorrectionSet z = zero_corrections(p.basis);
  CHECK(z.modes.size() == 4);
  CHECK(z.modes[0].chi_plus.isZero(0.0));
}
