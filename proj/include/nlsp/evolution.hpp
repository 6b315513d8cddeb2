#pragma once

#include <optional>
#include <vector>

#include "nlsp/corrections.hpp"

namespace nlsp {

/// Perturbed field e^{-i omega t}(f + alpha phi(t)) built from the mode ansatz,
/// with or without the second-order correction fields.
struct PerturbationAssembly {
  Background background;
  std::vector<LinearMode> modes;
  std::vector<ModeCorrections> corrections;   // one per mode
  /// Pair fields; n, k index into `modes` with n < k.
  std::vector<PairCorrections> pairs;
  double alpha = 0.0;
  bool include_nonlinear = true;

  /// Builds an assembly from a subset of a basis; pair fields of the subset
  /// are looked up in `all` and re-indexed.
  static PerturbationAssembly from_basis(const Background& background, const ModeBasis& basis,
                                         const CorrectionSet& all, const std::vector<int>& selection,
                                         double alpha, bool include_nonlinear);

  /// Every frequency present in phi: gamma_n, 2 gamma_n, gamma_n +- gamma_k.
  double max_frequency() const;
};

/// phi(t) of the ansatz (without the e^{-i omega t} factor and without alpha).
ComplexField assemble_phi(const PerturbationAssembly& assembly, double t);

/// Psi(t0) = e^{-i omega t0}(f + alpha phi(t0)).
ComplexField assemble_initial(const PerturbationAssembly& assembly, double t0);

struct FieldIntegrals {
  double N = 0.0;
  double E = 0.0;
  double P = 0.0;
};

/// N, E and P of a field with the same quadrature and derivative as the
/// operators.
FieldIntegrals field_integrals(const Grid& grid, const ComplexField& psi, const RealField& potential,
                               const NonlinearityModel& model);

/// N_p, E_p and P_p of the assembled field at time t relative to the bare
/// background. N_p and P_p are evaluated from their expansion in phi, which is
/// exact and avoids cancelling N[f].
FieldIntegrals perturbation_integrals(const PerturbationAssembly& assembly, double t);

struct EvolveOptions {
  double T = 1.0;
  double dt = 1e-3;
  int sample_stride = 100;
  /// Fastest frequency the step has to resolve (0: no check).
  double max_frequency = 0.0;
};

struct TrajectoryDiagnostics {
  std::vector<double> times;
  std::vector<double> N;
  std::vector<double> E;
  std::vector<double> P;
  /// Integrals of the ansatz field at the same times (empty unless the run
  /// came from an assembly).
  std::vector<double> N_ansatz;
  std::vector<double> E_ansatz;
  double drift_N = 0.0;
  double drift_E = 0.0;
  double drift_P = 0.0;
  long steps = 0;
  double dt = 0.0;
  int order = 2;
  ComplexField final_field;
};

/// Strang split-step integration of the nonlinear Schroedinger equation:
/// half kinetic step in the Fourier (periodic) or sine (line) basis, full
/// pointwise potential + nonlinear step, half kinetic step.
TrajectoryDiagnostics evolve(const Grid& grid, const ComplexField& psi0, const RealField& potential,
                             const NonlinearityModel& model, const EvolveOptions& options);

/// Evolves the ansatz field from t = 0 and records the ansatz integrals
/// alongside the evolved ones.
TrajectoryDiagnostics evolve_assembly(const PerturbationAssembly& assembly, const EvolveOptions& options);

/// Integrals of the ansatz field sampled at the given times (no PDE solve).
TrajectoryDiagnostics ansatz_series(const PerturbationAssembly& assembly,
                                    const std::vector<double>& times);

struct DriftComparison {
  double nonlinear_drift = 0.0;      // max |N(t) - N(0)| of the nonlinear-ansatz run
  double linear_amplitude = 0.0;     // (max - min)/2 of N(t), linear-ansatz run
  double nonlinear_amplitude = 0.0;  // same for the nonlinear-ansatz run
  double predicted = 0.0;
  double ratio_to_prediction = 0.0;  // linear_amplitude / predicted
  double suppression = 0.0;          // linear_amplitude / nonlinear_amplitude
  double max_difference = 0.0;       // max_t |N_lin(t) - N_nl(t)|
};

DriftComparison drift_report(const TrajectoryDiagnostics& linear_run,
                             const TrajectoryDiagnostics& nonlinear_run, double predicted_oscillation);

/// Amplitude of the component of a uniformly sampled series at angular
/// frequency w (samples should cover whole periods).
double oscillation_amplitude(const std::vector<double>& times, const std::vector<double>& series, double w);

/// Slope of log|y| against log x by least squares.
double fitted_exponent(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nlsp
