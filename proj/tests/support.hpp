#pragma once

#include <cmath>
#include <memory>

#include "nlsp/bdg.hpp"
#include "nlsp/corrections.hpp"
#include "nlsp/grid.hpp"
#include "nlsp/invariants.hpp"
#include "nlsp/model.hpp"
#include "nlsp/operators.hpp"

namespace nlsp::test {

struct Problem {
  Background background;
  DerivedPotentials potentials;
  OperatorPair operators;
  ModeBasis basis;
};

inline Problem finish(Background bg, int count, bool adapt) {
  Problem p{std::move(bg), {}, {}, {}};
  p.potentials = eval_potentials(p.background);
  p.operators = assemble_pair(p.background, p.potentials);
  ModeOptions opts;
  opts.count = count;
  p.basis = solve_modes(p.operators.l1, p.operators.l2, opts);
  if (adapt) p.basis = adapt_to_translations(p.basis);
  return p;
}

/// Uniform GP background sqrt(omega/g) on PeriodicBox(length, n).
inline Problem gp_problem(double length, int n, int count, double omega = 1.0, double g = 1.0) {
  auto grid = std::make_shared<const Grid>(Grid::periodic(length, n));
  Background bg = certify_background(grid, RealField::Constant(n, std::sqrt(omega / g)), omega,
                                     RealField::Zero(n), NonlinearityModel::gross_pitaevskii(g));
  return finish(std::move(bg), count, true);
}

/// Gaussian e^{-x^2/2} (omega = 1) of the logarithmic model, Newton-polished.
inline Problem log_problem(const GridPtr& grid, int count) {
  const int n = grid->size();
  const RealField guess = (0.9 * (-0.5 * grid->nodes().array().square()).exp()).matrix();
  Background bg = solve_background(grid, 1.0, RealField::Zero(n), NonlinearityModel::logarithmic(), guess);
  return finish(std::move(bg), count, false);
}

inline GridPtr log_box(int n = 256) { return std::make_shared<const Grid>(Grid::periodic(20.0, n, -10.0)); }

inline GridPtr line(double half_width, int n) { return std::make_shared<const Grid>(Grid::line(half_width, n)); }

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace nlsp::test
