#include "nlsp/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nlsp/errors.hpp"

// LAPACKE 3.10 has no wrapper for the rook condition estimator.
extern "C" void dsycon_rook_(const char* uplo, const lapack_int* n, const double* a, const lapack_int* lda,
                             const lapack_int* ipiv, const double* anorm, double* rcond, double* work,
                             lapack_int* iwork, lapack_int* info, std::size_t uplo_len);

namespace nlsp {
namespace {

std::optional<LinalgBackend>& forced_backend() {
  static std::optional<LinalgBackend> forced;
  return forced;
}

SymmetricEigen lapack_eigen(Eigen::MatrixXd matrix, Eigen::Index count) {
  const auto n = static_cast<lapack_int>(matrix.rows());
  const auto m = static_cast<lapack_int>(std::min<Eigen::Index>(count, n));
  SymmetricEigen out;
  if (n == 0 || m <= 0) return out;
  Eigen::VectorXd values(n);
  out.vectors.resize(n, m);
  // dsyevr rather than dsyevd: the divide-and-conquer driver is the first to
  // go wrong on a miscompiled BLAS, and dsyevr can stop at the lowest m pairs.
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(m));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', m == n ? 'A' : 'I', 'L', n, matrix.data(), n, 0.0,
                                         0.0, 1, m, 0.0, &found, values.data(), out.vectors.data(), n,
                                         support.data());
  if (info != 0 || found != m)
    throw ConvergenceError("dsyevr failed, info = " + std::to_string(info), 0.0);
  out.values = values.head(m);
  return out;
}

// Deterministic symmetric test matrix with a spread spectrum.
Eigen::MatrixXd probe_matrix(Eigen::Index n) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      a(i, j) = std::sin(0.37 * static_cast<double>(i * j + i + j) + 0.11) + (i == j ? 0.01 * static_cast<double>(i) : 0.0);
  return 0.5 * (a + a.transpose());
}

bool lapack_self_test() {
  const Eigen::Index n = 320;
  const Eigen::MatrixXd a = probe_matrix(n);
  const double scale = a.norm();
  const SymmetricEigen e = lapack_eigen(a, n);
  if ((a * e.vectors - e.vectors * e.values.asDiagonal()).norm() > 1e-10 * scale) return false;
  Eigen::MatrixXd f = a;
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  if (LAPACKE_dsytrf_rook(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n), f.data(), static_cast<lapack_int>(n),
                     ipiv.data()) != 0)
    return false;
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
  Eigen::VectorXd x = b;
  if (LAPACKE_dsytrs_rook(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n), 1, f.data(), static_cast<lapack_int>(n),
                     ipiv.data(), x.data(), static_cast<lapack_int>(n)) != 0)
    return false;
  const Eigen::VectorXd r = a * x - b;
  return r.norm() <= 1e-8 * scale * x.norm();
}

}  // namespace

LinalgBackend active_backend() {
  if (forced_backend()) return *forced_backend();
  static const LinalgBackend detected = lapack_self_test() ? LinalgBackend::Lapack : LinalgBackend::Eigen;
  return detected;
}

void override_backend(std::optional<LinalgBackend> backend) { forced_backend() = backend; }

const char* backend_name(LinalgBackend backend) {
  return backend == LinalgBackend::Lapack ? "lapack" : "eigen";
}

SymmetricEigen symmetric_eigen(Eigen::MatrixXd matrix) {
  const Eigen::Index n = matrix.rows();
  return symmetric_eigen_lowest(std::move(matrix), n);
}

SymmetricEigen symmetric_eigen_lowest(Eigen::MatrixXd matrix, Eigen::Index count) {
  if (matrix.rows() != matrix.cols()) throw PreconditionError("symmetric_eigen: matrix not square");
  if (count < 0) throw PreconditionError("symmetric_eigen_lowest: negative count");
  if (active_backend() == LinalgBackend::Lapack) return lapack_eigen(std::move(matrix), count);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix);
  if (es.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver did not converge", 0.0);
  const Eigen::Index m = std::min(count, matrix.rows());
  return {es.eigenvalues().head(m), es.eigenvectors().leftCols(m)};
}

MinNormSolver::MinNormSolver(const Eigen::MatrixXd& matrix, double kernel_cutoff)
    : eigen_(symmetric_eigen(matrix)) {
  const Eigen::Index n = eigen_.values.size();
  const double largest = n > 0 ? eigen_.values.cwiseAbs().maxCoeff() : 0.0;
  inverse_values_.resize(n);
  // Kernel columns are moved to the front so kernel() is a contiguous block.
  std::vector<Eigen::Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j)
    if (std::abs(eigen_.values[j]) < kernel_cutoff * largest) order.push_back(j);
  kernel_dim_ = static_cast<Eigen::Index>(order.size());
  for (Eigen::Index j = 0; j < n; ++j)
    if (!(std::abs(eigen_.values[j]) < kernel_cutoff * largest)) order.push_back(j);
  Eigen::VectorXd values(n);
  Eigen::MatrixXd vectors(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    values[j] = eigen_.values[order[static_cast<std::size_t>(j)]];
    vectors.col(j) = eigen_.vectors.col(order[static_cast<std::size_t>(j)]);
  }
  eigen_.values = std::move(values);
  eigen_.vectors = std::move(vectors);
  for (Eigen::Index j = 0; j < n; ++j) inverse_values_[j] = j < kernel_dim_ ? 0.0 : 1.0 / eigen_.values[j];
}

Eigen::MatrixXd MinNormSolver::kernel() const { return eigen_.vectors.leftCols(kernel_dim_); }

double MinNormSolver::condition_number() const {
  const Eigen::VectorXd a = eigen_.values.cwiseAbs();
  const double lo = a.minCoeff();
  return lo > 0.0 ? a.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

double MinNormSolver::kernel_component(const Eigen::VectorXd& b, double scale) const {
  const double nb = std::max(b.norm(), scale);
  if (nb == 0.0 || kernel_dim_ == 0) return 0.0;
  return (eigen_.vectors.leftCols(kernel_dim_).transpose() * b).norm() / nb;
}

double MinNormSolver::kernel_component(const Eigen::VectorXcd& b, double scale) const {
  const double nb = std::max(b.norm(), scale);
  if (nb == 0.0 || kernel_dim_ == 0) return 0.0;
  const Eigen::MatrixXd k = eigen_.vectors.leftCols(kernel_dim_);
  const double re = (k.transpose() * b.real()).squaredNorm();
  const double im = (k.transpose() * b.imag()).squaredNorm();
  return std::sqrt(re + im) / nb;
}

Eigen::VectorXd MinNormSolver::solve(const Eigen::VectorXd& b) const {
  if (b.size() != size()) throw PreconditionError("MinNormSolver: size mismatch");
  Eigen::VectorXd c = eigen_.vectors.transpose() * b;
  c.array() *= inverse_values_.array();
  return eigen_.vectors * c;
}

Eigen::VectorXcd MinNormSolver::solve(const Eigen::VectorXcd& b) const {
  Eigen::VectorXcd out(b.size());
  out.real() = solve(Eigen::VectorXd(b.real()));
  out.imag() = solve(Eigen::VectorXd(b.imag()));
  return out;
}

SymmetricIndefiniteSolver::SymmetricIndefiniteSolver(Eigen::MatrixXd matrix)
    : factor_(std::move(matrix)), size_(factor_.rows()) {
  const auto n = static_cast<lapack_int>(factor_.rows());
  if (factor_.rows() != factor_.cols()) throw PreconditionError("SymmetricIndefiniteSolver: matrix not square");
  if (n == 0) return;
  if (active_backend() == LinalgBackend::Eigen) {
    lu_.emplace(factor_);
    const double rcond = lu_->rcond();
    condition_ = rcond > 0.0 && lu_->matrixLU().diagonal().cwiseAbs().minCoeff() > 0.0
                     ? 1.0 / rcond
                     : std::numeric_limits<double>::infinity();
    factor_.resize(0, 0);
    return;
  }
  const double anorm = LAPACKE_dlansy(LAPACK_COL_MAJOR, '1', 'L', n, factor_.data(), n);
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsytrf_rook(LAPACK_COL_MAJOR, 'L', n, factor_.data(), n, ipiv.data());
  if (info < 0) throw PreconditionError("dsytrf_rook: invalid argument " + std::to_string(-info));
  pivots_.assign(ipiv.begin(), ipiv.end());
  if (info > 0) {
    condition_ = std::numeric_limits<double>::infinity();
    return;
  }
  double rcond = 0.0;
  std::vector<double> work(2 * static_cast<std::size_t>(n));
  std::vector<lapack_int> iwork(static_cast<std::size_t>(n));
  lapack_int cinfo = 0;
  dsycon_rook_("L", &n, factor_.data(), &n, ipiv.data(), &anorm, &rcond, work.data(), iwork.data(), &cinfo, 1);
  condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd SymmetricIndefiniteSolver::solve(Eigen::MatrixXd rhs) const {
  if (rhs.rows() != size()) throw PreconditionError("SymmetricIndefiniteSolver: size mismatch");
  if (!std::isfinite(condition_)) throw PreconditionError("SymmetricIndefiniteSolver: singular matrix");
  if (lu_) return lu_->solve(rhs);
  const auto n = static_cast<lapack_int>(factor_.rows());
  std::vector<lapack_int> ipiv(pivots_.begin(), pivots_.end());
  const lapack_int info = LAPACKE_dsytrs_rook(LAPACK_COL_MAJOR, 'L', n, static_cast<lapack_int>(rhs.cols()),
                                         factor_.data(), n, ipiv.data(), rhs.data(), n);
  if (info != 0) throw PreconditionError("dsytrs_rook failed, info = " + std::to_string(info));
  return rhs;
}

Eigen::VectorXd SymmetricIndefiniteSolver::solve(const Eigen::VectorXd& rhs) const {
  return solve(Eigen::MatrixXd(rhs)).col(0);
}

Eigen::MatrixXd near_kernel(const Eigen::MatrixXd& matrix, const SymmetricIndefiniteSolver& factor,
                            double cutoff, int block) {
  const Eigen::Index n = matrix.rows();
  const Eigen::Index m = std::min<Eigen::Index>(block, n);
  if (m == 0) return Eigen::MatrixXd(n, 0);
  const double scale = matrix.cwiseAbs().rowwise().sum().maxCoeff();
  // Fixed start block so results are reproducible.
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      x(i, j) = std::cos(1.3 * static_cast<double>((j + 1) * (i + 1)) + 0.7 * static_cast<double>(j));
  for (int it = 0; it < 4; ++it) {
    x = factor.solve(x);
    x = Eigen::HouseholderQR<Eigen::MatrixXd>(x).householderQ() * Eigen::MatrixXd::Identity(n, m);
  }
  const Eigen::MatrixXd h = x.transpose() * matrix * x;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(0.5 * (h + h.transpose()));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < m; ++j)
    if (std::abs(ritz.eigenvalues()[j]) < cutoff * scale) keep.push_back(j);
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = x * ritz.eigenvectors().col(keep[j]);
  return out;
}

}  // namespace nlsp
