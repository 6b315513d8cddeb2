#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace nlsp {

/// Dense kernels run through LAPACK unless a one-time self-test on a 320x320
/// problem finds the linked BLAS returning wrong results (seen with OpenBLAS
/// 0.3.20 on AVX-512 parts), in which case Eigen's own solvers are used.
enum class LinalgBackend { Lapack, Eigen };

LinalgBackend active_backend();
/// Forces a backend (tests); std::nullopt restores the automatic choice.
void override_backend(std::optional<LinalgBackend> backend);
const char* backend_name(LinalgBackend backend);

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

/// Full eigendecomposition of a real symmetric matrix.
SymmetricEigen symmetric_eigen(Eigen::MatrixXd matrix);
/// The `count` algebraically smallest eigenpairs (all of them if count >= n).
SymmetricEigen symmetric_eigen_lowest(Eigen::MatrixXd matrix, Eigen::Index count);

/// Minimal-norm solver for a real symmetric, possibly singular, matrix.
///
/// Eigenvalues with |lambda| < kernel_cutoff * max|lambda| span the numerical
/// kernel. solve() projects the right-hand side off that kernel and returns
/// the unique solution orthogonal to it.
class MinNormSolver {
 public:
  explicit MinNormSolver(const Eigen::MatrixXd& matrix, double kernel_cutoff = 1e-10);

  Eigen::Index size() const { return eigen_.values.size(); }
  Eigen::Index kernel_dimension() const { return kernel_dim_; }
  /// Orthonormal basis of the numerical kernel (columns).
  Eigen::MatrixXd kernel() const;
  /// max|lambda| / min|lambda| over all eigenvalues.
  double condition_number() const;

  /// ||P_kernel b|| / max(||b||, scale); 0 when both vanish. A positive scale
  /// keeps right-hand sides that cancel analytically from reading as noise.
  double kernel_component(const Eigen::VectorXd& b, double scale = 0.0) const;
  double kernel_component(const Eigen::VectorXcd& b, double scale = 0.0) const;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;

 private:
  SymmetricEigen eigen_;
  Eigen::VectorXd inverse_values_;  // 0 on the kernel
  Eigen::Index kernel_dim_ = 0;
};

/// Factorisation of a real symmetric indefinite matrix with a 1-norm
/// condition estimate: rook-pivoted LDL^T on the LAPACK backend (plain
/// Bunch-Kaufman shows element growth on the [[L1, -w], [-w, L2]] blocks),
/// partial-pivot LU on the Eigen backend.
class SymmetricIndefiniteSolver {
 public:
  explicit SymmetricIndefiniteSolver(Eigen::MatrixXd matrix);

  Eigen::Index size() const { return size_; }
  /// Estimated 1-norm condition number; infinite for an exactly singular pivot.
  double condition_number() const { return condition_; }

  Eigen::MatrixXd solve(Eigen::MatrixXd rhs) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::MatrixXd factor_;
  std::vector<int> pivots_;
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
  Eigen::Index size_ = 0;
  double condition_ = 0.0;
};

/// Orthonormal basis of the eigenvectors of `matrix` with
/// |lambda| < cutoff * ||matrix||_inf, found by block inverse iteration on an
/// existing factorisation (at most `block` of them). Cheap when the matrix is
/// nearly singular; empty when it is not.
Eigen::MatrixXd near_kernel(const Eigen::MatrixXd& matrix, const SymmetricIndefiniteSolver& factor,
                            double cutoff = 1e-10, int block = 4);

}  // namespace nlsp
