#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <tuple>
#include <vector>

#include "nlsp/errors.hpp"
#include "nlsp/grid.hpp"
#include "nlsp/kernels.hpp"
#include "nlsp/linalg.hpp"
#include "nlsp/model.hpp"

using namespace nlsp;
using cd = std::complex<double>;

TEST_CASE("grid construction and quadrature") {
  const Grid g = Grid::periodic(2.0 * std::numbers::pi, 64);
  CHECK(g.size() == 64);
  CHECK(g.periodic());
  CHECK(g.spacing() == doctest::Approx(2.0 * std::numbers::pi / 64));
  // cos^2 over a period integrates to pi exactly with the rectangle rule.
  const RealField c2 = g.nodes().array().cos().square().matrix();
  CHECK(integrate(g, c2) == doctest::Approx(std::numbers::pi).epsilon(1e-14));

  const Grid l = Grid::line(10.0, 401);
  CHECK_FALSE(l.periodic());
  CHECK(l.nodes()[0] == doctest::Approx(-10.0));
  CHECK(l.nodes()[400] == doctest::Approx(10.0));
  const RealField gauss = (-l.nodes().array().square()).exp().matrix();
  CHECK(integrate(l, gauss) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));

  CHECK_THROWS_AS(Grid::periodic(-1.0, 64), PreconditionError);
  CHECK_THROWS_AS(Grid::periodic(1.0, 63), PreconditionError);
  CHECK_THROWS_AS(Grid::line(1.0, 4), PreconditionError);
}

TEST_CASE("spectral derivative and laplacian on a periodic box") {
  const Grid g = Grid::periodic(2.0 * std::numbers::pi, 32);
  const RealField s3 = (3.0 * g.nodes().array()).sin().matrix();
  const RealField c3 = (3.0 * g.nodes().array()).cos().matrix();
  CHECK((derivative(g, s3) - 3.0 * c3).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd lap = laplacian_matrix(g);
  CHECK((lap * s3 + 9.0 * s3).cwiseAbs().maxCoeff() < 1e-11);
  CHECK((lap - lap.transpose()).norm() == 0.0);
  const Eigen::MatrixXd d = derivative_matrix(g);
  CHECK((d + d.transpose()).norm() < 1e-12);
}

TEST_CASE("fourth-order differences on a truncated line") {
  for (int n : {201, 401}) {
    const Grid l = Grid::line(8.0, n);
    const RealField f = (-0.5 * l.nodes().array().square()).exp().matrix();
    const RealField exact = ((l.nodes().array().square() - 1.0) * f.array()).matrix();
    const double err = (laplacian_matrix(l) * f - exact).cwiseAbs().maxCoeff();
    CHECK(err < (n == 201 ? 2e-4 : 2e-5));
  }
}

TEST_CASE("parallel kernels against the serial reference") {
  const std::size_t n = 5000;
  std::vector<double> w(n), v(n), pot(n), k2(n);
  std::vector<cd> z(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(n);
    w[j] = 0.5 + x;
    v[j] = std::sin(37.0 * x);
    pot[j] = x * x;
    k2[j] = 100.0 * x;
    z[j] = {std::cos(11.0 * x), std::sin(5.0 * x)};
  }
  const NonlinearityModel gp = NonlinearityModel::gross_pitaevskii(2.0);
  // Blocked reductions differ from the sequential sum only by rounding order,
  // and do not depend on the thread count at all.
  const auto sums = [&] {
    return std::tuple{kernels::weighted_sum(w, v), kernels::weighted_sum(w, std::span<const cd>(z)),
                      kernels::potential_energy_sum(w, z, pot, gp)};
  };
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = sums();
  omp_set_num_threads(4);
  const auto four = sums();
  omp_set_num_threads(saved);
  CHECK(one == four);
  CHECK(std::get<0>(four) == doctest::Approx(serial::weighted_sum(w, v)).epsilon(1e-13));
  CHECK(std::abs(std::get<1>(four) - serial::weighted_sum(w, std::span<const cd>(z))) < 1e-13 * std::abs(std::get<1>(four)));
  CHECK(std::get<2>(four) == doctest::Approx(serial::potential_energy_sum(w, z, pot, gp)).epsilon(1e-13));

  std::vector<cd> a = z, b = z;
  kernels::nonlinear_step(a, pot, gp, 1e-2);
  serial::nonlinear_step(b, pot, gp, 1e-2);
  CHECK(a == b);
  kernels::kinetic_phase(a, k2, 1e-2);
  serial::kinetic_phase(b, k2, 1e-2);
  CHECK(a == b);
  // The phase steps preserve |psi|.
  for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(a[j]) == doctest::Approx(std::abs(z[j])).epsilon(1e-14));
}

namespace {

Eigen::MatrixXd test_matrix(int n) {
  Eigen::MatrixXd a(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = std::cos(0.3 * i * j + 0.1 * (i + j)) + (i == j ? 0.05 * i : 0.0);
  return 0.5 * (a + a.transpose());
}

struct BackendGuard {
  explicit BackendGuard(LinalgBackend b) { override_backend(b); }
  ~BackendGuard() { override_backend(std::nullopt); }
};

}  // namespace

TEST_CASE("symmetric eigensolver and indefinite solver on both backends") {
  const int n = 300;
  const Eigen::MatrixXd a = test_matrix(n);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
  for (LinalgBackend be : {active_backend(), LinalgBackend::Eigen}) {
    CAPTURE(backend_name(be));
    const BackendGuard guard(be);
    const SymmetricEigen e = symmetric_eigen(a);
    CHECK((a * e.vectors - e.vectors * e.values.asDiagonal()).norm() < 1e-10 * a.norm());
    CHECK(std::is_sorted(e.values.data(), e.values.data() + n));
    const SymmetricEigen low = symmetric_eigen_lowest(a, 5);
    REQUIRE(low.values.size() == 5);
    CHECK((low.values - e.values.head(5)).cwiseAbs().maxCoeff() < 1e-10);

    const SymmetricIndefiniteSolver s(a);
    CHECK(std::isfinite(s.condition_number()));
    const Eigen::VectorXd x = s.solve(b);
    CHECK((a * x - b).norm() < 1e-9 * b.norm() * s.condition_number());
  }
}

TEST_CASE("minimal-norm solver projects off the kernel") {
  // diag(0, 1, 2, ...) rotated: kernel is the first rotated axis.
  const int n = 40;
  const Eigen::MatrixXd q = symmetric_eigen(test_matrix(n)).vectors;
  Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(n, 0.0, n - 1.0);
  const Eigen::MatrixXd a = q * d.asDiagonal() * q.transpose();
  const MinNormSolver s(a);
  CHECK(s.kernel_dimension() == 1);
  const Eigen::VectorXd k = q.col(0);
  CHECK(s.kernel_component(k) == doctest::Approx(1.0));
  const Eigen::VectorXd b = q.col(3) + q.col(7);
  CHECK(s.kernel_component(b) < 1e-12);
  const Eigen::VectorXd x = s.solve(b);
  CHECK((x - (q.col(3) / 3.0 + q.col(7) / 7.0)).norm() < 1e-12);
  // An analytically vanishing right-hand side is judged against the scale.
  const Eigen::VectorXd tiny = 1e-20 * k;
  CHECK(s.kernel_component(tiny) == doctest::Approx(1.0));
  CHECK(s.kernel_component(tiny, 1.0) < 1e-19);

  // The same kernel via inverse iteration on an indefinite factorisation.
  d[0] = 1e-12;
  const Eigen::MatrixXd near = q * d.asDiagonal() * q.transpose();
  const SymmetricIndefiniteSolver f(near);
  const Eigen::MatrixXd nk = near_kernel(near, f);
  REQUIRE(nk.cols() == 1);
  CHECK(std::abs(std::abs(nk.col(0).dot(k)) - 1.0) < 1e-10);
}
