#pragma once

#include <utility>

#include "nlsp/bdg.hpp"
#include "nlsp/linalg.hpp"

namespace nlsp {

/// Second-order fields of a single mode: static chi_+/chi_- and the
/// double-frequency psi_+/psi_-.
struct ModeCorrections {
  RealField chi_plus;
  ComplexField chi_minus;
  ComplexField psi_plus;
  ComplexField psi_minus;
  double residual = 0.0;
};

/// Interaction fields of an ordered pair n < k at frequencies gamma_n +- gamma_k.
struct PairCorrections {
  int n = 0;
  int k = 0;
  ComplexField rho_plus;
  ComplexField rho_minus;
  ComplexField theta_plus;
  ComplexField theta_minus;
  double residual = 0.0;
};

inline constexpr double kSolvabilityTolerance = 1e-8;
inline constexpr double kResonanceCondition = 1e12;
inline constexpr double kCorrectionResidualTolerance = 1e-8;

/// Solves the static and driven linear systems for the corrections.
///
/// Holds minimal-norm factorisations of L1 and L2 so that many modes can
/// share them. Thread-safe for concurrent const use.
class CorrectionSolver {
 public:
  CorrectionSolver(const Background& background, const DerivedPotentials& potentials,
                   const OperatorPair& operators);

  /// L1 chi_+ = -W(3|xi|^2 + |eta|^2) - 4J|xi|^2,  L2 chi_- = -W(xi^* eta - eta^* xi)
  std::pair<RealField, ComplexField> solve_chi(const LinearMode& mode) const;

  /// Coupled (psi_+, psi_-) system at frequency 2 gamma.
  std::pair<ComplexField, ComplexField> solve_psi(const LinearMode& mode) const;

  ModeCorrections solve_mode(const LinearMode& mode) const;
  PairCorrections solve_pair(const ModeBasis& basis, int n, int k) const;

  /// Solves  L1 a - w b = rhs_plus,  L2 b - w a = rhs_minus  as one
  /// symmetric block system. Throws ResonanceError when it is singular.
  std::pair<ComplexField, ComplexField> solve_block(double w, const ComplexField& rhs_plus,
                                                    const ComplexField& rhs_minus) const;

  const MinNormSolver& l1_solver() const { return l1_solver_; }
  const MinNormSolver& l2_solver() const { return l2_solver_; }
  const OperatorPair& operators() const { return ops_; }

 private:
  Background background_;
  DerivedPotentials pots_;
  OperatorPair ops_;
  MinNormSolver l1_solver_;
  MinNormSolver l2_solver_;
};

std::pair<RealField, ComplexField> solve_chi(const LinearMode& mode, const CorrectionSolver& solver);
std::pair<ComplexField, ComplexField> solve_psi(const LinearMode& mode, const CorrectionSolver& solver);
PairCorrections solve_pair(const ModeBasis& basis, int n, int k, const CorrectionSolver& solver);

/// Corrections of every mode and every nondegenerate ordered pair, solved in
/// parallel. Degenerate pairs are skipped.
struct CorrectionSet {
  std::vector<ModeCorrections> modes;
  std::vector<PairCorrections> pairs;
};
CorrectionSet solve_all(const ModeBasis& basis, const CorrectionSolver& solver);

/// All-zero corrections with the right shapes (the linear-only ansatz).
CorrectionSet zero_corrections(const ModeBasis& basis);

}  // namespace nlsp
