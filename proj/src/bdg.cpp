#include "nlsp/bdg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "nlsp/errors.hpp"
#include "nlsp/linalg.hpp"

namespace nlsp {
namespace {

using cd = std::complex<double>;

// Relative thresholds on gamma^2 below which a frequency is numerically zero.
constexpr double kZeroRelative = 1e-10;
// Modes above this eigen-residual get inverse-iteration refinement.
constexpr double kRefineAbove = 1e-9;

struct RawMode {
  double gamma;
  Eigen::VectorXd xi;
  Eigen::VectorXd eta;
};

double pair_residual(const Grid& grid, const Eigen::MatrixXd& l1, const Eigen::MatrixXd& l2,
                     const RawMode& m) {
  const double scale = l2_norm(grid, RealField(m.xi)) + l2_norm(grid, RealField(m.eta));
  const double r1 = l2_norm(grid, RealField(l1 * m.xi - m.gamma * m.eta));
  const double r2 = l2_norm(grid, RealField(l2 * m.eta - m.gamma * m.xi));
  return (r1 + r2) / scale;
}

Eigen::MatrixXd block_matrix(const Eigen::MatrixXd& l1, const Eigen::MatrixXd& l2, double w) {
  const Eigen::Index n = l1.rows();
  Eigen::MatrixXd k(2 * n, 2 * n);
  k.topLeftCorner(n, n) = l1;
  k.bottomRightCorner(n, n) = l2;
  k.topRightCorner(n, n) = -w * Eigen::MatrixXd::Identity(n, n);
  k.bottomLeftCorner(n, n) = -w * Eigen::MatrixXd::Identity(n, n);
  return k;
}

// Inverse iteration on [[L1, -g], [-g, L2]] (xi, eta) = 0 with Rayleigh
// quotient updates of g.
void refine(const Grid& grid, const Eigen::MatrixXd& l1, const Eigen::MatrixXd& l2, RawMode& m) {
  const Eigen::Index n = l1.rows();
  for (int it = 0; it < 3 && pair_residual(grid, l1, l2, m) > kRefineAbove; ++it) {
    const SymmetricIndefiniteSolver solver(block_matrix(l1, l2, m.gamma));
    Eigen::VectorXd x(2 * n);
    x << m.xi, m.eta;
    Eigen::VectorXd y;
    try {
      y = solver.solve(x);
    } catch (const PreconditionError&) {
      return;  // exactly singular: already an eigenpair to working precision
    }
    if (!y.allFinite()) return;
    y /= y.norm();
    RawMode next{m.gamma, y.head(n), y.tail(n)};
    const double cross = next.xi.dot(next.eta);
    if (cross == 0.0) return;
    next.gamma = (next.xi.dot(l1 * next.xi) + next.eta.dot(l2 * next.eta)) / (2.0 * cross);
    if (next.gamma < 0.0) {
      next.gamma = -next.gamma;
      next.eta = -next.eta;
    }
    if (pair_residual(grid, l1, l2, next) >= pair_residual(grid, l1, l2, m)) return;
    m = std::move(next);
  }
}

std::vector<RawMode> symmetrized_modes(const SymmetricEigen& psd_eig, const Eigen::MatrixXd& other,
                                       bool psd_is_l2, const ModeOptions& opts) {
  const Eigen::VectorXd root = psd_eig.values.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd b = psd_eig.vectors * root.asDiagonal();
  Eigen::MatrixXd m = b.transpose() * other * b;
  m = 0.5 * (m + m.transpose()).eval();
  const Eigen::Index n = m.rows();
  // Infinity norm bounds the spectral radius, so the zero threshold needs no
  // full spectrum.
  const double mu_scale = m.cwiseAbs().rowwise().sum().maxCoeff();
  const double zero = kZeroRelative * mu_scale;
  const double unstable = std::max(opts.instability_threshold, std::sqrt(zero));

  Eigen::Index wanted = std::min<Eigen::Index>(n, opts.count + 8);
  for (;;) {
    const SymmetricEigen eig = symmetric_eigen_lowest(m, wanted);
    for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
      const double mu = eig.values[j];
      if (mu < 0.0 && std::sqrt(-mu) > unstable) {
        std::ostringstream msg;
        msg << "dynamical instability: imaginary mode frequency " << std::sqrt(-mu) << "i";
        throw InstabilityError(msg.str());
      }
    }
    std::vector<RawMode> out;
    for (Eigen::Index j = 0; j < eig.values.size() && static_cast<int>(out.size()) < opts.count; ++j) {
      const double mu = eig.values[j];
      if (!(mu > zero)) continue;
      const double gamma = std::sqrt(mu);
      if (gamma < opts.gamma_min) continue;
      const Eigen::VectorXd first = b * eig.vectors.col(j);
      const Eigen::VectorXd second = other * first / gamma;
      if (psd_is_l2)
        out.push_back({gamma, first, second});
      else
        out.push_back({gamma, second, first});
    }
    if (static_cast<int>(out.size()) >= opts.count || wanted == n) return out;
    wanted = std::min(n, 2 * wanted);
  }
}

std::vector<RawMode> general_modes(const Eigen::MatrixXd& l1, const Eigen::MatrixXd& l2,
                                   const ModeOptions& opts) {
  const Eigen::Index n = l1.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n) = l1;
  a.bottomLeftCorner(n, n) = l2;
  const Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw ConvergenceError("block eigenproblem did not converge", 0.0);
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const double lmax = lambda.cwiseAbs().maxCoeff();
  const double zero = std::sqrt(kZeroRelative) * lmax;
  const double unstable = std::max(opts.instability_threshold, zero);
  std::vector<Eigen::Index> picked;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    if (std::abs(lambda[j].imag()) > unstable) {
      std::ostringstream msg;
      msg << "dynamical instability: complex mode frequency " << lambda[j];
      throw InstabilityError(msg.str());
    }
    const double g = lambda[j].real();
    if (g > zero && g >= opts.gamma_min) picked.push_back(j);
  }
  std::sort(picked.begin(), picked.end(),
            [&](Eigen::Index p, Eigen::Index q) { return lambda[p].real() < lambda[q].real(); });
  std::vector<RawMode> out;
  for (Eigen::Index j : picked) {
    if (static_cast<int>(out.size()) >= opts.count) break;
    const Eigen::VectorXcd v = es.eigenvectors().col(j);
    // Rotate to a real vector.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    const Eigen::VectorXd r = (v * std::conj(v[arg]) / std::abs(v[arg])).real();
    out.push_back({lambda[j].real(), r.tail(n), r.head(n)});
  }
  return out;
}

ComplexField to_complex(const Eigen::VectorXd& v) { return v.cast<cd>(); }

std::vector<std::vector<int>> build_classes(const std::vector<LinearMode>& modes, double tol) {
  std::vector<std::vector<int>> classes;
  for (int j = 0; j < static_cast<int>(modes.size()); ++j) {
    if (!classes.empty() &&
        std::abs(modes[static_cast<std::size_t>(j)].gamma -
                 modes[static_cast<std::size_t>(classes.back().front())].gamma) < tol)
      classes.back().push_back(j);
    else
      classes.push_back({j});
  }
  return classes;
}

}  // namespace

bool ModeBasis::degenerate(int n, int k) const { return class_of(n) == class_of(k); }

int ModeBasis::class_of(int n) const {
  for (int c = 0; c < static_cast<int>(classes.size()); ++c)
    for (int m : classes[static_cast<std::size_t>(c)])
      if (m == n) return c;
  throw PreconditionError("mode index " + std::to_string(n) + " out of range");
}

void normalize_mode(const Grid& grid, LinearMode& mode) {
  const double s = integrate(grid, RealField(mode.xi.cwiseAbs2() + mode.eta.cwiseAbs2()));
  if (!(s > 0.0)) throw PreconditionError("normalize_mode: zero-amplitude mode");
  const double scale = 1.0 / std::sqrt(s);
  const ComplexField& ref = mode.xi.cwiseAbs().maxCoeff() > 0.0 ? mode.xi : mode.eta;
  Eigen::Index arg = 0;
  ref.cwiseAbs().maxCoeff(&arg);
  const cd phase = std::conj(ref[arg]) / std::abs(ref[arg]);
  mode.xi *= scale * phase;
  mode.eta *= scale * phase;
}

void certify_mode(const LinearOperator& l1, const LinearOperator& l2, LinearMode& mode) {
  const Grid& g = *l1.grid;
  const double scale = l2_norm(g, mode.xi) + l2_norm(g, mode.eta);
  mode.residual_l1 = l2_norm(g, ComplexField(l1.apply(mode.xi) - mode.gamma * mode.eta)) / scale;
  mode.residual_l2 = l2_norm(g, ComplexField(l2.apply(mode.eta) - mode.gamma * mode.xi)) / scale;
}

ModeBasis solve_modes(const LinearOperator& l1, const LinearOperator& l2, const ModeOptions& options) {
  if (!l1.grid || !l2.grid || !(*l1.grid == *l2.grid))
    throw PreconditionError("solve_modes: operators live on different grids");
  if (l1.kind != OperatorKind::L1 || l2.kind != OperatorKind::L2)
    throw PreconditionError("solve_modes: expected the pair (L1, L2)");
  if (options.count < 1) throw PreconditionError("solve_modes: count must be positive");
  const Grid& grid = *l1.grid;

  std::vector<RawMode> raw;
  const SymmetricEigen e2 = symmetric_eigen(l2.matrix);
  const double tol2 = kZeroRelative * e2.values.cwiseAbs().maxCoeff();
  if (e2.values.minCoeff() > -tol2) {
    raw = symmetrized_modes(e2, l1.matrix, true, options);
  } else {
    const SymmetricEigen e1 = symmetric_eigen(l1.matrix);
    const double tol1 = kZeroRelative * e1.values.cwiseAbs().maxCoeff();
    if (e1.values.minCoeff() > -tol1)
      raw = symmetrized_modes(e1, l2.matrix, false, options);
    else
      raw = general_modes(l1.matrix, l2.matrix, options);
  }
  if (static_cast<int>(raw.size()) < options.count) {
    std::ostringstream msg;
    msg << "solve_modes: only " << raw.size() << " oscillation modes available, " << options.count
        << " requested";
    throw PreconditionError(msg.str());
  }

  ModeBasis basis;
  basis.grid = l1.grid;
  for (RawMode& m : raw) {
    refine(grid, l1.matrix, l2.matrix, m);
    LinearMode mode{m.gamma, to_complex(m.xi), to_complex(m.eta), 0.0, 0.0};
    normalize_mode(grid, mode);
    certify_mode(l1, l2, mode);
    if (!(mode.residual_l1 + mode.residual_l2 < kModeResidualTolerance)) {
      std::ostringstream msg;
      msg << "mode at gamma = " << mode.gamma << " has eigen-residual "
          << mode.residual_l1 + mode.residual_l2;
      throw ConvergenceError(msg.str(), mode.residual_l1 + mode.residual_l2);
    }
    basis.modes.push_back(std::move(mode));
  }
  std::stable_sort(basis.modes.begin(), basis.modes.end(),
                   [](const LinearMode& a, const LinearMode& b) { return a.gamma < b.gamma; });
  basis.degeneracy_tolerance = options.degeneracy_tolerance * basis.modes.back().gamma;
  basis.classes = build_classes(basis.modes, basis.degeneracy_tolerance);
  return basis;
}

ModeBasis adapt_to_translations(const ModeBasis& basis) {
  const Grid& grid = *basis.grid;
  if (!grid.periodic()) throw PreconditionError("adapt_to_translations requires a periodic grid");
  ModeBasis out = basis;
  for (const std::vector<int>& cls : basis.classes) {
    const auto m = static_cast<Eigen::Index>(cls.size());
    if (m < 2) continue;
    std::vector<ComplexField> dxi, deta;
    for (int j : cls) {
      dxi.push_back(derivative(grid, basis.modes[static_cast<std::size_t>(j)].xi));
      deta.push_back(derivative(grid, basis.modes[static_cast<std::size_t>(j)].eta));
    }
    Eigen::MatrixXcd gram(m, m), mom(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const LinearMode& ma = basis.modes[static_cast<std::size_t>(cls[static_cast<std::size_t>(a)])];
      for (Eigen::Index b = 0; b < m; ++b) {
        const LinearMode& mb = basis.modes[static_cast<std::size_t>(cls[static_cast<std::size_t>(b)])];
        const auto sb = static_cast<std::size_t>(b);
        gram(a, b) = integrate(grid, ComplexField(ma.xi.conjugate().cwiseProduct(mb.xi) +
                                                  ma.eta.conjugate().cwiseProduct(mb.eta)));
        mom(a, b) = cd(0.0, -1.0) * integrate(grid, ComplexField(ma.xi.conjugate().cwiseProduct(dxi[sb]) +
                                                                 ma.eta.conjugate().cwiseProduct(deta[sb])));
      }
    }
    gram = 0.5 * (gram + gram.adjoint()).eval();
    mom = 0.5 * (mom + mom.adjoint()).eval();
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(mom, gram);
    if (ges.info() != Eigen::Success) throw ConvergenceError("adapt_to_translations: eigen solve failed", 0.0);
    double residual_l1 = 0.0, residual_l2 = 0.0;
    for (int j : cls) {
      residual_l1 = std::max(residual_l1, basis.modes[static_cast<std::size_t>(j)].residual_l1);
      residual_l2 = std::max(residual_l2, basis.modes[static_cast<std::size_t>(j)].residual_l2);
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      LinearMode mode = basis.modes[static_cast<std::size_t>(cls[static_cast<std::size_t>(a)])];
      mode.xi.setZero();
      mode.eta.setZero();
      for (Eigen::Index b = 0; b < m; ++b) {
        const LinearMode& mb = basis.modes[static_cast<std::size_t>(cls[static_cast<std::size_t>(b)])];
        mode.xi += ges.eigenvectors()(b, a) * mb.xi;
        mode.eta += ges.eigenvectors()(b, a) * mb.eta;
      }
      normalize_mode(grid, mode);
      // Linear combinations of near-orthonormal eigenpairs; residuals carry over.
      mode.residual_l1 = residual_l1;
      mode.residual_l2 = residual_l2;
      out.modes[static_cast<std::size_t>(cls[static_cast<std::size_t>(a)])] = std::move(mode);
    }
  }
  return out;
}

ModeBasis lift_degeneracy(const Background& background, const DerivedPotentials& potentials,
                          const ModeBasis& basis, const RealField& delta_w, const RealField& delta_u,
                          double epsilon, int target_class, const ModeOptions& options) {
  if (target_class < 0 || target_class >= static_cast<int>(basis.classes.size()))
    throw PreconditionError("lift_degeneracy: target class out of range");
  const Grid& grid = *background.grid;
  require_same_size(grid, delta_w.size(), "lift_degeneracy delta_w");
  require_same_size(grid, delta_u.size(), "lift_degeneracy delta_u");
  if (epsilon == 0.0) return basis;
  const std::vector<int>& cls = basis.classes[static_cast<std::size_t>(target_class)];
  if (delta_w.isZero(0.0))
    throw PreconditionError("lift_degeneracy: delta W is zero and cannot split the class; choose a "
                            "parity-breaking delta W");

  DerivedPotentials modified = potentials;
  modified.W += epsilon * delta_w;
  modified.U += epsilon * delta_u;
  const OperatorPair ops = assemble_pair(background, modified);
  ModeOptions opts = options;
  opts.count = basis.size();
  ModeBasis lifted = solve_modes(ops.l1, ops.l2, opts);

  const double tol = basis.degeneracy_tolerance;
  for (std::size_t a = 0; a < cls.size(); ++a)
    for (std::size_t b = a + 1; b < cls.size(); ++b)
      if (std::abs(lifted.modes[static_cast<std::size_t>(cls[a])].gamma -
                   lifted.modes[static_cast<std::size_t>(cls[b])].gamma) < tol) {
        std::ostringstream msg;
        msg << "lift_degeneracy: delta W does not split the class at gamma = "
            << basis.modes[static_cast<std::size_t>(cls[a])].gamma << "; try a different delta W";
        throw PreconditionError(msg.str());
      }
  return lifted;
}

OrthogonalityReport check_orthogonality(const ModeBasis& basis) {
  const Grid& grid = *basis.grid;
  OrthogonalityReport r;
  for (int n = 0; n < basis.size(); ++n) {
    for (int k = n + 1; k < basis.size(); ++k) {
      if (basis.degenerate(n, k)) continue;
      const LinearMode& a = basis.modes[static_cast<std::size_t>(n)];
      const LinearMode& b = basis.modes[static_cast<std::size_t>(k)];
      const cd nk = integrate(grid, ComplexField(a.eta.cwiseProduct(b.xi)));
      const cd kn = integrate(grid, ComplexField(b.eta.cwiseProduct(a.xi)));
      const cd conj = integrate(grid, ComplexField(a.eta.cwiseProduct(b.xi.conjugate()) +
                                                   b.eta.conjugate().cwiseProduct(a.xi)));
      r.stringent = std::max({r.stringent, std::abs(nk), std::abs(kn)});
      r.antisymmetric = std::max(r.antisymmetric, std::abs(nk - kn));
      r.conjugate = std::max(r.conjugate, std::abs(conj));
      ++r.pairs;
    }
  }
  return r;
}

}  // namespace nlsp
