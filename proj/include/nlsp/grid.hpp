#pragma once

#include <complex>
#include <memory>

#include <Eigen/Dense>

namespace nlsp {

using RealField = Eigen::VectorXd;
using ComplexField = Eigen::VectorXcd;

enum class GridKind { PeriodicBox, TruncatedLine };

struct GridConfig {
  GridKind kind = GridKind::PeriodicBox;
  double length = 0.0;      // PeriodicBox
  double half_width = 0.0;  // TruncatedLine
  int n_points = 0;
  double origin = 0.0;      // PeriodicBox: coordinate of node 0
};

/// One-dimensional computational grid with its quadrature weights.
///
/// PeriodicBox nodes are origin + j*L/n for j = 0..n-1 (rectangle rule).
/// TruncatedLine nodes span [-a, a] inclusive (trapezoid rule); fields are
/// taken to vanish one spacing beyond either end.
class Grid {
 public:
  static Grid periodic(double length, int n_points, double origin = 0.0);
  static Grid line(double half_width, int n_points);

  GridKind kind() const { return kind_; }
  bool periodic() const { return kind_ == GridKind::PeriodicBox; }
  int size() const { return static_cast<int>(nodes_.size()); }
  double spacing() const { return spacing_; }
  /// Box length for PeriodicBox, 2*half_width for TruncatedLine.
  double extent() const { return extent_; }
  const RealField& nodes() const { return nodes_; }
  const RealField& weights() const { return weights_; }

  bool operator==(const Grid& other) const;

 private:
  Grid(GridKind kind, double extent, double spacing, RealField nodes, RealField weights)
      : kind_(kind), extent_(extent), spacing_(spacing), nodes_(std::move(nodes)),
        weights_(std::move(weights)) {}

  GridKind kind_;
  double extent_;
  double spacing_;
  RealField nodes_;
  RealField weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

Grid build_grid(const GridConfig& config);

/// Quadrature of the samples: rectangle rule (periodic) or trapezoid (line).
double integrate(const Grid& grid, const RealField& field);
std::complex<double> integrate(const Grid& grid, const ComplexField& field);

/// Quadrature-weighted L2 norm.
double l2_norm(const Grid& grid, const RealField& field);
double l2_norm(const Grid& grid, const ComplexField& field);

/// Second-derivative matrix: spectral on PeriodicBox, 4th-order centred
/// differences with zero ghosts on TruncatedLine. Symmetric.
Eigen::MatrixXd laplacian_matrix(const Grid& grid);

/// First-derivative matrix, same discretisation family. Antisymmetric.
Eigen::MatrixXd derivative_matrix(const Grid& grid);

RealField derivative(const Grid& grid, const RealField& field);
ComplexField derivative(const Grid& grid, const ComplexField& field);

void require_same_size(const Grid& grid, Eigen::Index size, const char* what);

}  // namespace nlsp
