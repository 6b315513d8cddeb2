#include "nlsp/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlsp/errors.hpp"

namespace nlsp {
namespace {

using cd = std::complex<double>;

ComplexField cplx(const RealField& r) { return r.cast<cd>(); }

bool is_constant(const RealField& f) {
  const double scale = f.cwiseAbs().maxCoeff();
  return f.maxCoeff() - f.minCoeff() <= 1e-12 * scale;
}

void require_two_route(const TwoRoute& r, double alpha, const char* what) {
  const double scale = std::max({std::abs(r.direct), std::abs(r.shortcut), alpha * alpha});
  if (!(std::abs(r.direct - r.shortcut) <= kTwoRouteTolerance * scale)) {
    std::ostringstream msg;
    msg << what << ": direct route " << r.direct << " and shortcut " << r.shortcut << " disagree";
    throw ConsistencyError(msg.str());
  }
}

cd integ(const Grid& g, const ComplexField& z) { return integrate(g, z); }

struct IndexedTerm {
  std::string label;
  double magnitude;
  int n;
  int k;  // -1 for single-mode terms
};

std::vector<IndexedTerm> indexed_terms(const InvariantContext& ctx, const ModeBasis& basis,
                                       const CorrectionSet& corr) {
  const Grid& g = *ctx.background.grid;
  const ComplexField f = cplx(ctx.background.f);
  const ComplexField df = cplx(ctx.dfdx);
  const bool v0 = ctx.background.potential_is_zero();
  std::vector<IndexedTerm> out;
  for (int n = 0; n < basis.size(); ++n) {
    const LinearMode& m = basis.modes[static_cast<std::size_t>(n)];
    const ModeCorrections& c = corr.modes[static_cast<std::size_t>(n)];
    const std::string id = std::to_string(n);
    out.push_back({"N:gamma[" + id + "]", std::abs(integ(g, ComplexField(f.cwiseProduct(m.xi)))), n, -1});
    out.push_back({"N:2gamma[" + id + "]",
                   std::abs(integ(g, ComplexField(f.cwiseProduct(c.psi_plus) +
                                                  0.25 * (m.xi.cwiseProduct(m.xi) - m.eta.cwiseProduct(m.eta))))),
                   n, -1});
    if (v0) {
      out.push_back({"P:gamma[" + id + "]", std::abs(integ(g, ComplexField(df.cwiseProduct(m.eta)))), n, -1});
      const ComplexField deta = derivative(g, m.eta);
      out.push_back({"P:2gamma[" + id + "]",
                     std::abs(integ(g, ComplexField(df.cwiseProduct(c.psi_minus) - 0.5 * m.xi.cwiseProduct(deta)))),
                     n, -1});
    }
  }
  for (const PairCorrections& p : corr.pairs) {
    const LinearMode& a = basis.modes[static_cast<std::size_t>(p.n)];
    const LinearMode& b = basis.modes[static_cast<std::size_t>(p.k)];
    const std::string id = std::to_string(p.n) + "," + std::to_string(p.k);
    out.push_back({"N:sum[" + id + "]",
                   std::abs(integ(g, ComplexField(f.cwiseProduct(p.rho_plus) +
                                                  0.5 * (a.xi.cwiseProduct(b.xi) - a.eta.cwiseProduct(b.eta))))),
                   p.n, p.k});
    out.push_back({"N:diff[" + id + "]",
                   std::abs(integ(g, ComplexField(f.cwiseProduct(p.theta_plus) +
                                                  0.5 * (a.xi.cwiseProduct(b.xi.conjugate()) +
                                                         a.eta.cwiseProduct(b.eta.conjugate()))))),
                   p.n, p.k});
    out.push_back({"E:sum[" + id + "]",
                   std::abs((a.gamma - b.gamma) *
                            integ(g, ComplexField(a.eta.cwiseProduct(b.xi) - b.eta.cwiseProduct(a.xi)))),
                   p.n, p.k});
    out.push_back({"E:diff[" + id + "]",
                   std::abs((a.gamma + b.gamma) * integ(g, ComplexField(a.eta.cwiseProduct(b.xi.conjugate()) +
                                                                        b.eta.conjugate().cwiseProduct(a.xi)))),
                   p.n, p.k});
    if (v0) {
      const ComplexField da = derivative(g, a.eta);
      const ComplexField db = derivative(g, b.eta);
      out.push_back({"P:sum[" + id + "]",
                     std::abs(integ(g, ComplexField(df.cwiseProduct(p.rho_minus) -
                                                    0.5 * (b.xi.cwiseProduct(da) + a.xi.cwiseProduct(db))))),
                     p.n, p.k});
      out.push_back({"P:diff[" + id + "]",
                     std::abs(integ(g, ComplexField(df.cwiseProduct(p.theta_minus) -
                                                    0.5 * (b.xi.conjugate().cwiseProduct(da) -
                                                           a.xi.cwiseProduct(db.conjugate()))))),
                     p.n, p.k});
    }
  }
  return out;
}

}  // namespace

RealField aux_g(const Background& background, const MinNormSolver& l2_solver) {
  if (is_constant(background.f))
    throw PreconditionError("aux_g: the background is constant, L2 g = df/dx is degenerate");
  const Grid& g = *background.grid;
  const RealField df = derivative(g, background.f);
  if (l2_solver.kernel_component(df) > kSolvabilityTolerance)
    throw SolvabilityError("aux_g: df/dx has a component along the kernel of L2");
  return l2_solver.solve(df);
}

InvariantContext make_context(const Background& background, const DerivedPotentials& potentials,
                              const CorrectionSolver& solver) {
  const Grid& g = *background.grid;
  InvariantContext ctx{background, potentials, RealField(), derivative(g, background.f), std::nullopt};
  const MinNormSolver& l1 = solver.l1_solver();
  if (l1.kernel_component(background.f) > kSolvabilityTolerance)
    throw SolvabilityError("df/domega: f has a component along the kernel of L1");
  ctx.dfdomega = l1.solve(background.f);
  const double res =
      (solver.operators().l1.apply(ctx.dfdomega) - background.f).norm() / background.f.norm();
  if (!(res < 1e-8)) throw ConvergenceError("df/domega: residual of L1 y = f too large", res);
  if (background.potential_is_zero() && !is_constant(background.f))
    ctx.aux_g = aux_g(background, solver.l2_solver());
  return ctx;
}

TwoRoute particle_number(const InvariantContext& ctx, const LinearMode& mode, const ModeCorrections& corr,
                         double alpha) {
  const Grid& g = *ctx.background.grid;
  const RealField a2 = mode.xi.cwiseAbs2();
  const RealField b2 = mode.eta.cwiseAbs2();
  const RealField& y = ctx.dfdomega;
  const RealField& W = ctx.potentials.W;
  const RealField& J = ctx.potentials.J;
  const double a = alpha * alpha;
  TwoRoute r;
  r.direct = a * integrate(g, RealField(ctx.background.f.cwiseProduct(corr.chi_plus) + 0.5 * (a2 + b2)));
  r.shortcut = a * integrate(g, RealField(0.5 * (a2 + b2) - y.cwiseProduct(W).cwiseProduct(3.0 * a2 + b2) -
                                          4.0 * y.cwiseProduct(J).cwiseProduct(a2)));
  require_two_route(r, alpha, "particle number");
  return r;
}

double quasi_particle_number(const Grid& grid, const LinearMode& mode) {
  return integrate(grid, ComplexField(mode.xi.cwiseProduct(mode.eta.conjugate()))).real();
}

double released_energy(const Grid& grid, const LinearMode& mode, double alpha) {
  return alpha * alpha * mode.gamma * quasi_particle_number(grid, mode);
}

double energy(const InvariantContext& ctx, const LinearMode& mode, double particle_number, double alpha) {
  return ctx.background.omega * particle_number + released_energy(*ctx.background.grid, mode, alpha);
}

TwoRoute momentum(const InvariantContext& ctx, const LinearMode& mode, const ModeCorrections& corr,
                  double alpha) {
  if (!ctx.background.potential_is_zero())
    throw UnsupportedError("momentum is only conserved for V = 0");
  const Grid& g = *ctx.background.grid;
  const ComplexField deta = derivative(g, mode.eta);
  // xi^* d eta - xi d eta^*
  const ComplexField current = mode.xi.conjugate().cwiseProduct(deta) - mode.xi.cwiseProduct(deta.conjugate());
  const cd i(0.0, 1.0);
  const double a = alpha * alpha;
  const cd direct = i * a * integ(g, ComplexField(cplx(ctx.dfdx).cwiseProduct(corr.chi_minus) - 0.5 * current));
  cd shortcut;
  if (ctx.aux_g) {
    const ComplexField cross =
        mode.xi.conjugate().cwiseProduct(mode.eta) - mode.eta.conjugate().cwiseProduct(mode.xi);
    shortcut = -i * a *
               integ(g, ComplexField(0.5 * current +
                                     cplx(ctx.aux_g->cwiseProduct(ctx.potentials.W)).cwiseProduct(cross)));
  } else {
    shortcut = -i * a * integ(g, ComplexField(0.5 * current));
  }
  const double imag_scale = std::max({std::abs(direct), a});
  if (std::abs(direct.imag()) > 1e-10 * imag_scale || std::abs(shortcut.imag()) > 1e-10 * imag_scale)
    throw ConsistencyError("momentum has a non-negligible imaginary part");
  TwoRoute r{direct.real(), shortcut.real()};
  require_two_route(r, alpha, "momentum");
  return r;
}

double InvariantReport::coeff_max() const {
  double m = 0.0;
  for (const TimeDependentTerm& t : time_dependent) m = std::max(m, t.magnitude);
  return m;
}

std::vector<TimeDependentTerm> time_dependent_coefficients(const InvariantContext& ctx, const ModeBasis& basis,
                                                           const CorrectionSet& corrections) {
  std::vector<TimeDependentTerm> out;
  for (IndexedTerm& t : indexed_terms(ctx, basis, corrections)) out.push_back({std::move(t.label), t.magnitude});
  return out;
}

InvariantReport invariant_report(const InvariantContext& ctx, const ModeBasis& basis,
                                 const CorrectionSet& corrections, double alpha) {
  if (corrections.modes.size() != static_cast<std::size_t>(basis.size()))
    throw PreconditionError("invariant_report: corrections do not match the mode basis");
  const Grid& g = *ctx.background.grid;
  const bool v0 = ctx.background.potential_is_zero();
  InvariantReport rep;
  rep.alpha = alpha;
  const std::vector<IndexedTerm> terms = indexed_terms(ctx, basis, corrections);
  for (int n = 0; n < basis.size(); ++n) {
    const LinearMode& m = basis.modes[static_cast<std::size_t>(n)];
    const ModeCorrections& c = corrections.modes[static_cast<std::size_t>(n)];
    ModeInvariants row;
    row.index = n;
    row.gamma = m.gamma;
    row.n_tilde = quasi_particle_number(g, m);
    row.np = particle_number(ctx, m, c, alpha);
    row.ep = energy(ctx, m, row.np.direct, alpha);
    if (v0) row.pp = momentum(ctx, m, c, alpha);
    row.released = released_energy(g, m, alpha);
    for (const IndexedTerm& t : terms)
      if (t.n == n || t.k == n) row.coeff_max = std::max(row.coeff_max, t.magnitude);
    rep.np_total += row.np.direct;
    rep.ep_total += row.ep;
    rep.pp_total += row.pp.direct;
    rep.released_energy += row.released;
    rep.rows.push_back(row);
  }
  for (const IndexedTerm& t : terms) rep.time_dependent.push_back({t.label, t.magnitude});
  return rep;
}

double IdentityReport::max() const {
  double m = 0.0;
  for (const auto& [name, value] : items()) m = std::max(m, value);
  return m;
}

std::vector<std::pair<std::string, double>> IdentityReport::items() const {
  std::vector<std::pair<std::string, double>> v = {{"A1_psi", a1_psi},
                                                   {"A2_rho", a2_rho},
                                                   {"A3_theta", a3_theta},
                                                   {"B1_antisymmetric", b1_antisymmetric},
                                                   {"B1_stringent", b1_stringent},
                                                   {"B2_conjugate", b2_conjugate}};
  if (momentum_identities) {
    v.emplace_back("C1_psi", c1_psi);
    v.emplace_back("C2_rho", c2_rho);
    v.emplace_back("C3_theta", c3_theta);
  }
  return v;
}

IdentityReport identity_report(const InvariantContext& ctx, const ModeBasis& basis,
                               const CorrectionSet& corrections) {
  IdentityReport r;
  r.momentum_identities = ctx.background.potential_is_zero();
  r.modes = basis.size();
  r.pairs = static_cast<int>(corrections.pairs.size());
  for (const IndexedTerm& t : indexed_terms(ctx, basis, corrections)) {
    const std::string kind = t.label.substr(0, t.label.find('['));
    if (kind == "N:2gamma") r.a1_psi = std::max(r.a1_psi, t.magnitude);
    if (kind == "N:sum") r.a2_rho = std::max(r.a2_rho, t.magnitude);
    if (kind == "N:diff") r.a3_theta = std::max(r.a3_theta, t.magnitude);
    if (kind == "P:2gamma") r.c1_psi = std::max(r.c1_psi, t.magnitude);
    if (kind == "P:sum") r.c2_rho = std::max(r.c2_rho, t.magnitude);
    if (kind == "P:diff") r.c3_theta = std::max(r.c3_theta, t.magnitude);
  }
  const OrthogonalityReport o = check_orthogonality(basis);
  r.b1_antisymmetric = o.antisymmetric;
  r.b1_stringent = o.stringent;
  r.b2_conjugate = o.conjugate;
  return r;
}

std::vector<LinearOnlyRow> linear_only_invariants(const Grid& grid, const ModeBasis& basis, double alpha) {
  std::vector<LinearOnlyRow> out;
  const double a = alpha * alpha;
  for (int n = 0; n < basis.size(); ++n) {
    const LinearMode& m = basis.modes[static_cast<std::size_t>(n)];
    LinearOnlyRow row;
    row.index = n;
    row.np_mean = 0.5 * a * integrate(grid, RealField(m.xi.cwiseAbs2() + m.eta.cwiseAbs2()));
    row.np_oscillation =
        0.5 * a * std::abs(integrate(grid, ComplexField(m.xi.cwiseProduct(m.xi) - m.eta.cwiseProduct(m.eta))));
    out.push_back(row);
  }
  return out;
}

}  // namespace nlsp
