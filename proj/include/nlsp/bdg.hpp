#pragma once

#include <vector>

#include "nlsp/operators.hpp"

namespace nlsp {

/// Oscillation mode: L1 xi = gamma eta, L2 eta = gamma xi with gamma > 0.
///
/// Normalised to  integral(|xi|^2 + |eta|^2) = 1, with the global phase fixed
/// so that the largest-magnitude entry of xi is real and positive.
struct LinearMode {
  double gamma = 0.0;
  ComplexField xi;
  ComplexField eta;
  double residual_l1 = 0.0;  // ||L1 xi - gamma eta|| / (||xi|| + ||eta||)
  double residual_l2 = 0.0;  // ||L2 eta - gamma xi|| / (||xi|| + ||eta||)
};

struct ModeBasis {
  GridPtr grid;
  std::vector<LinearMode> modes;            // ascending gamma
  std::vector<std::vector<int>> classes;    // indices with equal gamma
  double degeneracy_tolerance = 0.0;        // absolute

  int size() const { return static_cast<int>(modes.size()); }
  bool degenerate(int n, int k) const;
  int class_of(int n) const;
};

struct ModeOptions {
  int count = 4;
  double gamma_min = 1e-6;
  /// Relative to the largest returned gamma.
  double degeneracy_tolerance = 1e-8;
  double instability_threshold = 1e-8;
};

inline constexpr double kModeResidualTolerance = 1e-8;

/// The `count` lowest oscillation modes of the coupled pair L1, L2.
/// Gauge and translation zero modes are excluded.
ModeBasis solve_modes(const LinearOperator& l1, const LinearOperator& l2, const ModeOptions& options);

/// Re-expresses every degenerate class in eigenvectors of the translation
/// generator -i d/dx, so that on a uniform periodic background the modes are
/// single plane waves. Requires a PeriodicBox grid.
ModeBasis adapt_to_translations(const ModeBasis& basis);

/// Re-solves the modes with W -> W + eps dW and U -> U + eps dU.
///
/// `target_class` indexes basis.classes; that class must be split by the
/// modification. eps == 0 returns the basis unchanged.
ModeBasis lift_degeneracy(const Background& background, const DerivedPotentials& potentials,
                          const ModeBasis& basis, const RealField& delta_w,
                          const RealField& delta_u, double epsilon, int target_class,
                          const ModeOptions& options);

struct OrthogonalityReport {
  double stringent = 0.0;       // max |int eta_n xi_k| over nondegenerate n != k
  double antisymmetric = 0.0;   // max |int (eta_n xi_k - eta_k xi_n)|
  double conjugate = 0.0;       // max |int (eta_n xi_k^* + eta_k^* xi_n)|
  int pairs = 0;
};

OrthogonalityReport check_orthogonality(const ModeBasis& basis);

/// Applies the normalisation and phase convention in place.
void normalize_mode(const Grid& grid, LinearMode& mode);

/// Recomputes residual_l1 / residual_l2 against the given operators.
void certify_mode(const LinearOperator& l1, const LinearOperator& l2, LinearMode& mode);

}  // namespace nlsp
