#include "nlsp/grid.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "fft.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/kernels.hpp"

namespace nlsp {

Grid Grid::periodic(double length, int n_points, double origin) {
  if (!(length > 0.0)) throw PreconditionError("PeriodicBox length must be positive");
  if (n_points < 16 || n_points % 2 != 0)
    throw PreconditionError("PeriodicBox needs an even number of points >= 16, got " +
                            std::to_string(n_points));
  const double h = length / n_points;
  RealField nodes(n_points);
  for (int j = 0; j < n_points; ++j) nodes[j] = origin + j * h;
  return Grid(GridKind::PeriodicBox, length, h, std::move(nodes), RealField::Constant(n_points, h));
}

Grid Grid::line(double half_width, int n_points) {
  if (!(half_width > 0.0)) throw PreconditionError("TruncatedLine half_width must be positive");
  if (n_points < 16)
    throw PreconditionError("TruncatedLine needs at least 16 points, got " + std::to_string(n_points));
  const double h = 2.0 * half_width / (n_points - 1);
  RealField nodes(n_points);
  for (int j = 0; j < n_points; ++j) nodes[j] = -half_width + j * h;
  RealField w = RealField::Constant(n_points, h);
  w[0] = w[n_points - 1] = 0.5 * h;
  return Grid(GridKind::TruncatedLine, 2.0 * half_width, h, std::move(nodes), std::move(w));
}

bool Grid::operator==(const Grid& other) const {
  return kind_ == other.kind_ && size() == other.size() && extent_ == other.extent_ &&
         nodes_[0] == other.nodes_[0];
}

Grid build_grid(const GridConfig& config) {
  if (config.kind == GridKind::PeriodicBox)
    return Grid::periodic(config.length, config.n_points, config.origin);
  return Grid::line(config.half_width, config.n_points);
}

void require_same_size(const Grid& grid, Eigen::Index size, const char* what) {
  if (size != grid.size())
    throw PreconditionError(std::string(what) + ": field length " + std::to_string(size) +
                            " does not match grid size " + std::to_string(grid.size()));
}

double integrate(const Grid& grid, const RealField& field) {
  require_same_size(grid, field.size(), "integrate");
  return kernels::weighted_sum(std::span(grid.weights().data(), grid.weights().size()),
                               std::span(field.data(), field.size()));
}

std::complex<double> integrate(const Grid& grid, const ComplexField& field) {
  require_same_size(grid, field.size(), "integrate");
  return kernels::weighted_sum(std::span(grid.weights().data(), grid.weights().size()),
                               std::span(field.data(), field.size()));
}

double l2_norm(const Grid& grid, const RealField& field) {
  return std::sqrt(integrate(grid, RealField(field.array().square())));
}

double l2_norm(const Grid& grid, const ComplexField& field) {
  return std::sqrt(integrate(grid, RealField(field.array().abs2())));
}

Eigen::MatrixXd laplacian_matrix(const Grid& grid) {
  const int n = grid.size();
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  if (grid.periodic()) {
    // Second derivative of the trigonometric interpolant; the Nyquist mode
    // gets -(pi n / L)^2.
    const double h = 2.0 * std::numbers::pi / n;
    const double scale = std::pow(2.0 * std::numbers::pi / grid.extent(), 2);
    const double diag = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (j == k) {
          d2(j, k) = scale * diag;
        } else {
          const int m = j - k;
          const double s = std::sin(m * h / 2.0);
          const double sign = (m % 2 == 0) ? 1.0 : -1.0;
          d2(j, k) = -scale * sign / (2.0 * s * s);
        }
      }
    }
    return d2;
  }
  const double c = 1.0 / (12.0 * grid.spacing() * grid.spacing());
  const double stencil[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
  for (int j = 0; j < n; ++j)
    for (int o = -2; o <= 2; ++o)
      if (j + o >= 0 && j + o < n) d2(j, j + o) = c * stencil[o + 2];
  return d2;
}

Eigen::MatrixXd derivative_matrix(const Grid& grid) {
  const int n = grid.size();
  Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(n, n);
  if (grid.periodic()) {
    const double h = 2.0 * std::numbers::pi / n;
    const double scale = 2.0 * std::numbers::pi / grid.extent();
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (j == k) continue;
        const int m = j - k;
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        d1(j, k) = scale * 0.5 * sign / std::tan(m * h / 2.0);
      }
    return d1;
  }
  const double c = 1.0 / (12.0 * grid.spacing());
  const double stencil[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
  for (int j = 0; j < n; ++j)
    for (int o = -2; o <= 2; ++o)
      if (o != 0 && j + o >= 0 && j + o < n) d1(j, j + o) = c * stencil[o + 2];
  return d1;
}

ComplexField derivative(const Grid& grid, const ComplexField& field) {
  require_same_size(grid, field.size(), "derivative");
  const int n = grid.size();
  if (grid.periodic()) {
    ComplexField out = field;
    detail::Fft fft(n);
    fft.forward(out.data());
    const auto k = detail::fourier_wavenumbers(grid);
    for (int j = 0; j < n; ++j)
      out[j] *= (j == n / 2) ? std::complex<double>(0.0) : std::complex<double>(0.0, k[j] / n);
    fft.backward(out.data());
    return out;
  }
  const double c = 1.0 / (12.0 * grid.spacing());
  auto at = [&](int j) { return (j >= 0 && j < n) ? field[j] : std::complex<double>(0.0); };
  ComplexField out(n);
  for (int j = 0; j < n; ++j) out[j] = c * (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2));
  return out;
}

RealField derivative(const Grid& grid, const RealField& field) {
  return derivative(grid, ComplexField(field.cast<std::complex<double>>())).real();
}

}  // namespace nlsp
