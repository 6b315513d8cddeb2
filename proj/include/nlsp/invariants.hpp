#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlsp/corrections.hpp"

namespace nlsp {

/// Background data shared by every invariant formula.
struct InvariantContext {
  Background background;
  DerivedPotentials potentials;
  RealField dfdomega;
  RealField dfdx;
  /// Solution of L2 g = df/dx; absent for a constant background.
  std::optional<RealField> aux_g;
};

/// Builds the context, solving for df/domega and (when f is not constant and
/// V = 0) the auxiliary field g.
InvariantContext make_context(const Background& background, const DerivedPotentials& potentials,
                              const CorrectionSolver& solver);

/// L2 g = df/dx.  Throws PreconditionError for constant f.
RealField aux_g(const Background& background, const MinNormSolver& l2_solver);

struct TwoRoute {
  double direct = 0.0;    // from the correction fields
  double shortcut = 0.0;  // from xi, eta and an auxiliary background field
};

inline constexpr double kTwoRouteTolerance = 1e-8;

/// Particle number of one nonlinear mode: via chi_+ and via df/domega.
TwoRoute particle_number(const InvariantContext& ctx, const LinearMode& mode,
                         const ModeCorrections& corr, double alpha);

/// omega N_p + (alpha^2/2) gamma int(xi eta^* + xi^* eta).
double energy(const InvariantContext& ctx, const LinearMode& mode, double particle_number,
              double alpha);

/// (alpha^2/2) gamma int(xi eta^* + xi^* eta): the part not exchanged with the
/// background in number-conserving processes.
double released_energy(const Grid& grid, const LinearMode& mode, double alpha);

/// int Re(xi eta^*): the quasi-particle number of a plane-wave mode.
double quasi_particle_number(const Grid& grid, const LinearMode& mode);

/// Momentum of one nonlinear mode: via chi_- and via g. Requires V = 0.
TwoRoute momentum(const InvariantContext& ctx, const LinearMode& mode, const ModeCorrections& corr,
                  double alpha);

struct ModeInvariants {
  int index = 0;
  double gamma = 0.0;
  double n_tilde = 0.0;
  TwoRoute np;
  double ep = 0.0;
  TwoRoute pp;
  double released = 0.0;
  double coeff_max = 0.0;  // largest time-dependent coefficient involving this mode
};

struct TimeDependentTerm {
  std::string label;
  double magnitude = 0.0;
};

struct InvariantReport {
  double alpha = 0.0;
  std::vector<ModeInvariants> rows;
  double np_total = 0.0;
  double ep_total = 0.0;
  double pp_total = 0.0;
  double released_energy = 0.0;
  std::vector<TimeDependentTerm> time_dependent;

  double coeff_max() const;
};

/// Every coefficient of an explicitly time-dependent term in the second-order
/// expansions of N_p, E_p and P_p (the P_p terms only when V = 0).
std::vector<TimeDependentTerm> time_dependent_coefficients(const InvariantContext& ctx,
                                                           const ModeBasis& basis,
                                                           const CorrectionSet& corrections);

InvariantReport invariant_report(const InvariantContext& ctx, const ModeBasis& basis,
                                 const CorrectionSet& corrections, double alpha);

/// The nine vanishing-overlap identities, each as the largest magnitude over
/// all modes / nondegenerate pairs.
struct IdentityReport {
  double a1_psi = 0.0;           // int(f psi_+ + (xi^2 - eta^2)/4)
  double a2_rho = 0.0;           // int(f rho_+ + (xi_n xi_k - eta_n eta_k)/2)
  double a3_theta = 0.0;         // int(f theta_+ + (xi_n xi_k^* + eta_n eta_k^*)/2)
  double b1_antisymmetric = 0.0; // int(eta_n xi_k - eta_k xi_n)
  double b1_stringent = 0.0;     // int eta_n xi_k
  double b2_conjugate = 0.0;     // int(eta_n xi_k^* + eta_k^* xi_n)
  double c1_psi = 0.0;           // int(f' psi_- - xi eta'/2)
  double c2_rho = 0.0;
  double c3_theta = 0.0;
  bool momentum_identities = false;  // C-items evaluated (V = 0)
  int modes = 0;
  int pairs = 0;

  double max() const;
  std::vector<std::pair<std::string, double>> items() const;
};

IdentityReport identity_report(const InvariantContext& ctx, const ModeBasis& basis,
                               const CorrectionSet& corrections);

/// Quadratic invariants without the nonlinear corrections.
struct LinearOnlyRow {
  int index = 0;
  double np_mean = 0.0;         // (alpha^2/2) int(|xi|^2 + |eta|^2)
  double np_oscillation = 0.0;  // (alpha^2/2) |int(xi^2 - eta^2)|, frequency 2 gamma
};

std::vector<LinearOnlyRow> linear_only_invariants(const Grid& grid, const ModeBasis& basis, double alpha);

}  // namespace nlsp
