#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlsp/bdg.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/reference.hpp"
#include "support.hpp"

using namespace nlsp;

TEST_CASE("GP modes follow the Bogolyubov law") {
  const test::Problem p = test::gp_problem(2.0 * std::numbers::pi, 64, 8);
  REQUIRE(p.basis.size() == 8);
  for (int j = 0; j < 8; ++j) {
    const double k = 1.0 + j / 2;
    CHECK(test::rel(p.basis.modes[j].gamma, reference::bogoliubov_gamma(k, 1.0)) < 1e-10);
  }
  CHECK(p.basis.modes[0].gamma == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  // +-k pairs form degenerate classes of two.
  REQUIRE(p.basis.classes.size() == 4);
  for (const auto& c : p.basis.classes) CHECK(c.size() == 2);
  CHECK(p.basis.degenerate(0, 1));
  CHECK_FALSE(p.basis.degenerate(1, 2));
}

TEST_CASE("mode normalisation and phase convention") {
  const test::Problem p = test::log_problem(test::log_box(), 3);
  const Grid& g = *p.basis.grid;
  for (const LinearMode& m : p.basis.modes) {
    const double s = integrate(g, RealField(m.xi.cwiseAbs2() + m.eta.cwiseAbs2()));
    CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    Eigen::Index arg = 0;
    m.xi.cwiseAbs().maxCoeff(&arg);
    CHECK(m.xi[arg].imag() == 0.0);
    CHECK(m.xi[arg].real() > 0.0);
    CHECK(m.residual_l1 < kModeResidualTolerance);
    CHECK(m.residual_l2 < kModeResidualTolerance);
  }
}

TEST_CASE("logarithmic spectrum and amplitude ratio on a truncated line") {
  const test::Problem p = test::log_problem(test::line(10.0, 801), 2);
  const LinearMode& m = p.basis.modes[0];
  CHECK(m.gamma == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-6));
  CHECK(test::rel(p.basis.modes[1].gamma, 2.0 * std::sqrt(6.0)) < 1e-6);
  // xi = Y G, eta = Z G with one profile G, so Y/Z is the ratio of norms.
  const Grid& g = *p.basis.grid;
  const double ratio = l2_norm(g, m.xi) / l2_norm(g, m.eta);
  CHECK((m.xi - ratio * m.eta).norm() < 1e-6 * m.xi.norm());
  const double expected = reference::log_amplitude_ratio({{2}});
  CHECK(std::abs(ratio / expected - 1.0) < 1e-6);
}

TEST_CASE("orthogonality relations between modes") {
  const test::Problem p = test::log_problem(test::log_box(), 4);
  const OrthogonalityReport r = check_orthogonality(p.basis);
  CHECK(r.pairs == 6);
  CHECK(r.stringent < 1e-8);
  CHECK(r.antisymmetric < 1e-8);
  CHECK(r.conjugate < 1e-8);
}

TEST_CASE("translation-adapted GP modes are single plane waves") {
  const test::Problem p = test::gp_problem(2.0 * std::numbers::pi, 64, 4);
  const Grid& g = *p.basis.grid;
  for (const LinearMode& m : p.basis.modes) {
    // |xi| constant for a plane wave.
    const RealField a = m.xi.cwiseAbs();
    CHECK(a.maxCoeff() - a.minCoeff() < 1e-10);
    const ComplexField d = derivative(g, m.xi);
    const std::complex<double> k = d[0] / (std::complex<double>(0, 1) * m.xi[0]);
    CHECK(std::abs(std::abs(k.real()) - std::round(std::abs(k.real()))) < 1e-10);
    CHECK(std::abs(k.imag()) < 1e-10);
  }
  CHECK_THROWS_AS(adapt_to_translations(test::log_problem(test::line(8.0, 201), 1).basis), PreconditionError);
}

TEST_CASE("degeneracy lifting") {
  const test::Problem p = test::gp_problem(2.0 * std::numbers::pi, 32, 2);
  const Grid& g = *p.basis.grid;
  const RealField dw = (2.0 * g.nodes().array()).cos().matrix();
  const RealField du = RealField::Zero(g.size());
  ModeOptions opts;
  opts.count = 2;
  const ModeBasis same = lift_degeneracy(p.background, p.potentials, p.basis, dw, du, 0.0, 0, opts);
  CHECK(same.modes.size() == p.basis.modes.size());
  const ModeBasis split = lift_degeneracy(p.background, p.potentials, p.basis, dw, du, 1e-3, 0, opts);
  REQUIRE(split.size() == 2);
  CHECK(split.classes.size() == 2);
  CHECK(split.modes[1].gamma - split.modes[0].gamma > 1e-6);
  CHECK_THROWS_AS(lift_degeneracy(p.background, p.potentials, p.basis, RealField::Zero(g.size()), du, 1e-3, 0, opts),
                  PreconditionError);
  CHECK_THROWS_AS(lift_degeneracy(p.background, p.potentials, p.basis, dw, du, 1e-3, 5, opts), PreconditionError);
}

TEST_CASE("solve_modes preconditions and instability detection") {
  const test::Problem p = test::gp_problem(2.0 * std::numbers::pi, 32, 1);
  ModeOptions opts;
  opts.count = 0;
  CHECK_THROWS_AS(solve_modes(p.operators.l1, p.operators.l2, opts), PreconditionError);
  opts.count = 1;
  CHECK_THROWS_AS(solve_modes(p.operators.l2, p.operators.l1, opts), PreconditionError);

  // Attractive GP (g < 0) on a uniform state is modulationally unstable.
  const int n = 32;
  auto grid = std::make_shared<const Grid>(Grid::periodic(20.0, n));
  const Background bg = certify_background(grid, RealField::Constant(n, 1.0), -1.0, RealField::Zero(n),
                                           NonlinearityModel::gross_pitaevskii(-1.0));
  const DerivedPotentials pot = eval_potentials(bg);
  const OperatorPair ops = assemble_pair(bg, pot);
  CHECK_THROWS_AS(solve_modes(ops.l1, ops.l2, opts), InstabilityError);
}
