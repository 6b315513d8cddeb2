#pragma once

#include <string>
#include <variant>
#include <vector>

#include "nlsp/grid.hpp"

namespace nlsp {

struct GrossPitaevskii {
  double g = 1.0;
};
struct Logarithmic {};
/// F(s) = sum_m coeffs[m] s^m
struct Polynomial {
  std::vector<double> coeffs;
};

/// The nonlinearity F(s) of i dPsi/dt = -Laplacian Psi + V Psi + F(|Psi|^2) Psi,
/// with its first two derivatives and its primitive.
class NonlinearityModel {
 public:
  using Variant = std::variant<GrossPitaevskii, Logarithmic, Polynomial>;

  explicit NonlinearityModel(Variant v) : v_(std::move(v)) {}
  static NonlinearityModel gross_pitaevskii(double g) { return NonlinearityModel{GrossPitaevskii{g}}; }
  static NonlinearityModel logarithmic() { return NonlinearityModel{Logarithmic{}}; }
  static NonlinearityModel polynomial(std::vector<double> c) {
    return NonlinearityModel{Polynomial{std::move(c)}};
  }

  const Variant& variant() const { return v_; }
  std::string name() const;

  double F(double s) const;
  double dF(double s) const;
  double d2F(double s) const;
  /// Integral of F from 0 to s.
  double primitive(double s) const;

  // Pointwise potentials in terms of the background amplitude f. Written
  // per variant so that tiny f in the logarithmic model never underflows
  // through f^2.
  double U(double f) const;  // F(f^2)
  double W(double f) const;  // F'(f^2) f
  double J(double f) const;  // F''(f^2) f^3 / 2

 private:
  Variant v_;
};

/// Smallest |f| at which the logarithmic model is evaluated.
inline constexpr double kLogAmplitudeFloor = 1e-300;

struct DerivedPotentials {
  RealField U;
  RealField W;
  RealField J;
};

/// Stationary solution e^{-i omega t} f(x) with a real profile.
struct Background {
  GridPtr grid;
  RealField f;
  double omega = 0.0;
  RealField potential;
  NonlinearityModel model{Logarithmic{}};
  double residual = 0.0;

  bool potential_is_zero() const;
};

DerivedPotentials eval_potentials(const Grid& grid, const RealField& f, const NonlinearityModel& model);
DerivedPotentials eval_potentials(const Background& background);

/// ||(-Laplacian + V + F(f^2) - omega) f|| / ||f||
double stationarity_residual(const Grid& grid, const RealField& f, double omega,
                             const RealField& potential, const NonlinearityModel& model);

inline constexpr double kStationarityTolerance = 1e-10;

/// Wraps an already known profile after checking it is stationary.
Background certify_background(GridPtr grid, RealField f, double omega, RealField potential,
                              NonlinearityModel model, double tolerance = kStationarityTolerance);

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = kStationarityTolerance;
};

/// Damped Newton iteration on (-Laplacian + V + F(f^2) - omega) f = 0.
Background solve_background(GridPtr grid, double omega, const RealField& potential,
                            const NonlinearityModel& model, const RealField& guess,
                            const NewtonOptions& options = {});

/// Solves L1 y = f (minimal-norm when L1 has a kernel).
RealField dfdomega(const Background& background);

double background_particle_number(const Background& background);
double background_energy(const Background& background);

}  // namespace nlsp
