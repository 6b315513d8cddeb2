// Acceptance report: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion ran to completion, whatever the
// verdicts; --strict makes any FAIL an error as well.
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nlsp/errors.hpp"
#include "nlsp/evolution.hpp"
#include "nlsp/pipeline.hpp"
#include "nlsp/reference.hpp"
#include "support.hpp"

using namespace nlsp;
using cd = std::complex<double>;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double wavenumber(const Grid& g, const ComplexField& z) {
  Eigen::Index arg = 0;
  z.cwiseAbs().maxCoeff(&arg);
  return (derivative(g, z)[arg] / (cd(0, 1) * z[arg])).real();
}

struct Solved {
  test::Problem p;
  CorrectionSolver solver;
  CorrectionSet corrections;
  InvariantContext ctx;

  explicit Solved(test::Problem problem)
      : p(std::move(problem)),
        solver(p.background, p.potentials, p.operators),
        corrections(solve_all(p.basis, solver)),
        ctx(make_context(p.background, p.potentials, solver)) {}
};

test::Problem gp_box() { return test::gp_problem(2.0 * std::numbers::pi, 128, 8); }
test::Problem log_box(int count) { return test::log_problem(test::log_box(256), count); }

Outcome bogoliubov_dispersion() {
  const test::Problem p = gp_box();
  double worst = 0.0;
  for (int j = 0; j < 8; ++j)
    worst = std::max(worst, test::rel(p.basis.modes[j].gamma, reference::bogoliubov_gamma(1.0 + j / 2, 1.0)));
  return {worst < 1e-9, fmt("max rel error %.2e over 8 modes, gamma_0 = %.15f", worst, p.basis.modes[0].gamma)};
}

Outcome log_spectrum() {
  const test::Problem p = test::log_problem(test::line(12.0, 1601), 5);
  const Grid& g = *p.basis.grid;
  double worst_gamma = 0.0, worst_ratio = 0.0;
  for (int j = 0; j < 5; ++j) {
    const reference::LogModeLabel label{{j + 2}};
    const LinearMode& m = p.basis.modes[j];
    worst_gamma = std::max(worst_gamma, test::rel(m.gamma, reference::log_gamma(label)));
    worst_ratio = std::max(worst_ratio, test::rel(l2_norm(g, m.xi) / l2_norm(g, m.eta),
                                                  reference::log_amplitude_ratio(label)));
  }
  return {worst_gamma < 1e-5 && worst_ratio < 1e-5,
          fmt("sum n = 2..6: gamma rel %.2e, Y/Z rel %.2e", worst_gamma, worst_ratio)};
}

Outcome identity_suite() {
  std::string detail;
  bool pass = true;
  const char* names[] = {"gp", "log"};
  for (int which = 0; which < 2; ++which) {
    const Solved s(which == 0 ? test::gp_problem(2.0 * std::numbers::pi, 128, 6) : log_box(5));
    const IdentityReport r = identity_report(s.ctx, s.p.basis, s.corrections);
    pass = pass && r.modes >= 3 && r.pairs >= 3 && r.momentum_identities && r.items().size() == 9 && r.max() < 1e-8;
    detail += fmt("%s: %d modes, %d pairs, max %.2e; ", names[which], r.modes, r.pairs, r.max());
  }
  return {pass, detail.substr(0, detail.size() - 2)};
}

Outcome gp_invariants() {
  const Solved s(gp_box());
  const Grid& g = *s.p.basis.grid;
  const InvariantReport r = invariant_report(s.ctx, s.p.basis, s.corrections, 1.0);
  double worst = 0.0;
  bool chain = true;
  std::string k1;
  for (const ModeInvariants& row : r.rows) {
    const LinearMode& m = s.p.basis.modes[static_cast<std::size_t>(row.index)];
    const double k = std::round(wavenumber(g, m.xi));
    const reference::GPModeInvariants ref = reference::gp_mode_invariants({k, 1.0, 1.0});
    const double np = row.np.direct / row.n_tilde, ep = row.ep / row.n_tilde, pp = row.pp.direct / row.n_tilde;
    worst = std::max({worst, test::rel(np, ref.np), test::rel(ep, ref.ep), test::rel(pp, ref.pp)});
    chain = chain && row.ep >= std::sqrt(0.5) * std::abs(row.pp.direct);
    if (k == 1.0) k1 = fmt("k=1: Np %.12f, Ep %.12f, Pp %.12f", np, ep, pp);
  }
  return {worst < 1e-6 && chain, fmt("%s; max rel %.2e over %zu modes; Ep >= sqrt(w/2)|Pp| %s", k1.c_str(), worst,
                                     r.rows.size(), chain ? "holds" : "violated")};
}

// Relative to the larger route, or to the linear-only number alpha^2 int(|xi|^2 + |eta|^2)
// (= 1 here) when N_p itself vanishes, as it does for every logarithmic mode.
double route_gap(const TwoRoute& r) {
  return std::abs(r.direct - r.shortcut) / std::max({std::abs(r.direct), std::abs(r.shortcut), 1.0});
}

Outcome two_routes() {
  const Solved s(log_box(5));
  double worst_n = 0.0, worst_p = 0.0, smallest_p = INFINITY;
  for (int j = 0; j < 5; ++j) {
    const LinearMode& m = s.p.basis.modes[j];
    worst_n = std::max(worst_n, route_gap(particle_number(s.ctx, m, s.corrections.modes[j], 1.0)));
  }
  // Real standing modes carry no momentum; complex mixtures of neighbouring
  // (opposite-parity) modes do, and both routes apply to any such field.
  for (int j = 0; j + 1 < 5; ++j) {
    const LinearMode& a = s.p.basis.modes[j];
    const LinearMode& b = s.p.basis.modes[j + 1];
    LinearMode mix = a;
    mix.xi = (a.xi + cd(0, 0.7) * b.xi) / std::sqrt(1.49);
    mix.eta = (a.eta + cd(0, 0.7) * b.eta) / std::sqrt(1.49);
    ModeCorrections c;
    std::tie(c.chi_plus, c.chi_minus) = s.solver.solve_chi(mix);
    worst_n = std::max(worst_n, route_gap(particle_number(s.ctx, mix, c, 1.0)));
    const TwoRoute p = momentum(s.ctx, mix, c, 1.0);
    worst_p = std::max(worst_p, route_gap(p));
    smallest_p = std::min(smallest_p, std::abs(p.direct));
  }
  return {worst_n < 1e-8 && worst_p < 1e-8,
          fmt("N rel %.2e (5 modes + 4 mixtures), P rel %.2e (4 mixtures, |P| >= %.2e)", worst_n, worst_p,
              smallest_p)};
}

Outcome non_conservation() {
  const Solved s(log_box(1));
  const LinearMode& m = s.p.basis.modes[0];
  const Grid& g = *s.p.basis.grid;
  const double d2 = std::abs(integrate(g, ComplexField(m.xi.cwiseProduct(m.xi) - m.eta.cwiseProduct(m.eta))));
  const double period = std::numbers::pi / m.gamma;  // of the 2 gamma oscillation
  const double dt = period / 256;
  const EvolveOptions opts{8 * period, dt, 4, 0.0};
  const auto run = [&](double alpha, bool nonlinear) {
    return evolve_assembly(
        PerturbationAssembly::from_basis(s.p.background, s.p.basis, s.corrections, {0}, alpha, nonlinear), opts);
  };
  const double alpha = 1e-2;
  const TrajectoryDiagnostics lin = run(alpha, false);
  const TrajectoryDiagnostics nl = run(alpha, true);
  const double predicted = 0.5 * alpha * alpha * d2;
  const DriftComparison c = drift_report(lin, nl, predicted);
  const double amp = oscillation_amplitude(lin.times, lin.N_ansatz, 2.0 * m.gamma);

  std::vector<double> alphas{4e-3, 8e-3, 1.6e-2}, amps;
  for (double a : alphas) {
    const TrajectoryDiagnostics d = ansatz_series(
        PerturbationAssembly::from_basis(s.p.background, s.p.basis, s.corrections, {0}, a, false), lin.times);
    amps.push_back(oscillation_amplitude(d.times, d.N, 2.0 * m.gamma));
  }
  const double p = fitted_exponent(alphas, amps);
  const double rel = std::abs(amp / predicted - 1.0);
  return {rel < 0.05 && c.suppression >= 10.0 && std::abs(p - 2.0) <= 0.1,
          fmt("2gamma amplitude %.4e vs predicted %.4e (rel %.2e); nonlinear suppression %.1fx; exponent %.4f; "
              "PDE N drift %.1e",
              amp, predicted, rel, c.suppression, p, lin.drift_N)};
}

Outcome additivity() {
  const Solved s(log_box(2));
  const auto integrals = [&](const std::vector<int>& sel, double alpha) {
    return perturbation_integrals(
        PerturbationAssembly::from_basis(s.p.background, s.p.basis, s.corrections, sel, alpha, true), 0.0);
  };
  struct Cross {
    double cross, scale;
  };
  const auto cross = [&](double alpha) {
    const FieldIntegrals both = integrals({0, 1}, alpha), a = integrals({0}, alpha), b = integrals({1}, alpha);
    const double c = std::max({std::abs(both.N - a.N - b.N), std::abs(both.E - a.E - b.E),
                               std::abs(both.P - a.P - b.P)});
    const double scale = std::max({std::abs(a.N), std::abs(b.N), std::abs(a.E), std::abs(b.E)});
    return Cross{c, scale};
  };
  const std::vector<double> alphas{4e-3, 8e-3, 1.6e-2};
  std::vector<double> cs;
  for (double a : alphas) cs.push_back(cross(a).cross);
  const double p = fitted_exponent(alphas, cs);
  const Cross at = cross(1e-2);
  const double rel = at.cross / at.scale;

  // For reference only: the same cross term averaged over a long window, where
  // the oscillating third-order part averages out.
  const auto averaged = [&](const std::vector<int>& sel) {
    const PerturbationAssembly a =
        PerturbationAssembly::from_basis(s.p.background, s.p.basis, s.corrections, sel, 1e-2, true);
    std::array<double, 3> m{};
    const int samples = 8000;
    for (int j = 0; j < samples; ++j) {
      const FieldIntegrals q = perturbation_integrals(a, 0.025 * j);
      m[0] += q.N / samples;
      m[1] += q.E / samples;
      m[2] += q.P / samples;
    }
    return m;
  };
  const auto both = averaged({0, 1}), a = averaged({0}), b = averaged({1});
  double avg = 0.0;
  for (int q = 0; q < 3; ++q) avg = std::max(avg, std::abs(both[q] - a[q] - b[q]));
  return {p >= 2.7 && rel < 1e-5,
          fmt("modes 0,1 at t=0: exponent %.3f; at alpha=1e-2 cross %.2e / per-mode scale %.2e = %.2e "
              "(time-averaged over T=200: %.2e)",
              p, at.cross, at.scale, rel, avg / at.scale)};
}

Outcome epsilon_trick() {
  const test::Problem p = test::gp_problem(2.0 * std::numbers::pi, 128, 2);
  const Grid& g = *p.basis.grid;
  const auto sums = [&](const Background& bg, const DerivedPotentials& pots, const ModeBasis& basis) {
    const OperatorPair ops = assemble_pair(bg, pots);
    const CorrectionSolver solver(bg, pots, ops);
    const InvariantContext ctx = make_context(bg, pots, solver);
    std::array<double, 3> out{};
    for (const LinearMode& m : basis.modes) {
      const ModeCorrections c = solver.solve_mode(m);
      const double n = particle_number(ctx, m, c, 1.0).direct;
      out[0] += n;
      out[1] += energy(ctx, m, n, 1.0);
      out[2] += momentum(ctx, m, c, 1.0).direct;
    }
    return out;
  };
  const std::array<double, 3> plane = sums(p.background, p.potentials, p.basis);

  const RealField dw = (2.0 * g.nodes().array()).cos().matrix();
  const RealField du = -2.0 * p.background.f.cwiseProduct(dw);
  ModeOptions opts;
  opts.count = 2;
  const std::vector<double> eps{1e-2, 1e-3, 1e-4};
  std::vector<std::array<double, 3>> lifted;
  double split = 0.0;
  for (double e : eps) {
    const ModeBasis b = lift_degeneracy(p.background, p.potentials, p.basis, dw, du, e, 0, opts);
    DerivedPotentials mod = p.potentials;
    mod.W += e * dw;
    mod.U += e * du;
    lifted.push_back(sums(p.background, mod, b));
    split = b.modes[1].gamma - b.modes[0].gamma;
  }
  // Quadratic through the three points, evaluated at eps = 0.
  double worst = 0.0;
  std::array<double, 3> extrap{};
  for (int q = 0; q < 3; ++q) {
    double v = 0.0;
    for (int i = 0; i < 3; ++i) {
      double w = 1.0;
      for (int j = 0; j < 3; ++j)
        if (j != i) w *= (0.0 - eps[j]) / (eps[i] - eps[j]);
      v += w * lifted[i][q];
    }
    extrap[q] = v;
    worst = std::max(worst, std::abs(v - plane[q]) / std::max(1.0, std::abs(plane[q])));
  }
  return {worst < 1e-6, fmt("k=+-1: extrapolated (N,E,P) = (%.10f, %.10f, %.1e) vs sums (%.10f, %.10f, %.1e); "
                            "max deviation %.2e; splitting at eps=1e-4 %.2e",
                            extrap[0], extrap[1], extrap[2], plane[0], plane[1], plane[2], worst, split)};
}

Outcome thermodynamics() {
  const double h = 1e-4;
  const auto relation = [&](auto solve) {
    const Background lo = solve(1.0 - h), hi = solve(1.0 + h);
    const double dn = (background_particle_number(hi) - background_particle_number(lo)) / (2 * h);
    const double de = (background_energy(hi) - background_energy(lo)) / (2 * h);
    return std::abs(de - 1.0 * dn) / std::abs(de);
  };
  const GridPtr box = std::make_shared<const Grid>(Grid::periodic(2.0 * std::numbers::pi, 64));
  const double gp = relation([&](double w) {
    return solve_background(box, w, RealField::Zero(64), NonlinearityModel::gross_pitaevskii(1.0),
                            RealField::Constant(64, 0.95 * std::sqrt(w)));
  });
  const GridPtr lbox = test::log_box(256);
  const double lg = relation([&](double w) {
    const RealField guess = (0.95 * std::exp(0.5 * (1.0 - w)) * (-0.5 * lbox->nodes().array().square()).exp()).matrix();
    return solve_background(lbox, w, RealField::Zero(256), NonlinearityModel::logarithmic(), guess);
  });

  const double k = 0.05;
  const test::Problem soft = test::gp_problem(2.0 * std::numbers::pi / k, 64, 2);
  const LinearMode& m = soft.basis.modes[0];
  const Grid& g = *soft.basis.grid;
  // Linear-only number per quasi-particle: int(|a|^2 + |b|^2) / int(|a|^2 - |b|^2)
  // with a = (xi + eta)/2, b = (xi - eta)/2.
  const double ratio =
      0.5 * integrate(g, RealField(m.xi.cwiseAbs2() + m.eta.cwiseAbs2())) / quasi_particle_number(g, m);
  const double law = reference::gp_linear_number_small_k({k, 1.0, 1.0});
  const double small_k = std::abs(ratio / law - 1.0);
  return {gp < 1e-5 && lg < 1e-5 && small_k < 0.02,
          fmt("dE0/dw vs w dN0/dw: gp rel %.2e, log rel %.2e; k=0.05 N'/n %.4f vs %.4f (rel %.2e)", gp, lg, ratio,
              law, small_k)};
}

Outcome integrator_and_determinism() {
  double worst = 0.0;
  std::string detail;
  for (int which = 0; which < 2; ++which) {
    const test::Problem p = which == 0 ? test::gp_problem(2.0 * std::numbers::pi, 128, 1) : log_box(1);
    const TrajectoryDiagnostics d =
        evolve(*p.background.grid, p.background.f.cast<cd>(), RealField(), p.background.model, {50.0, 1e-3, 500, 0.0});
    const double rn = d.drift_N / std::abs(d.N.front()), re = d.drift_E / std::abs(d.E.front());
    worst = std::max({worst, rn, re});
    detail += fmt("%s drift N %.1e E %.1e; ", which == 0 ? "gp" : "log", rn, re);
  }

  const fs::path root = fs::temp_directory_path() / "nlsp_acceptance";
  std::vector<std::string> reports;
  for (int rep = 0; rep < 2; ++rep) {
    RunConfig c = scenario_preset("log");
    c.modes.count = 3;
    c.evolve.T = 1.0;
    c.evolve.dt = 5e-3;
    c.out_dir = root / std::to_string(rep);
    fs::remove_all(c.out_dir);
    run_pipeline(c, PipelineStage::Run);
    for (const char* name : {"invariants.json", "identities.json"}) {
      std::ifstream in(c.out_dir / name, std::ios::binary);
      std::ostringstream s;
      s << in.rdbuf();
      reports.push_back(s.str());
    }
  }
  fs::remove_all(root);
  const bool same = reports[0] == reports[2] && reports[1] == reports[3] && !reports[0].empty();
  detail += same ? "JSON bit-identical" : "JSON differs between runs";
  return {worst < 1e-9 && same, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"Bogolyubov dispersion", bogoliubov_dispersion},
      {"logarithmic spectrum", log_spectrum},
      {"identity suite", identity_suite},
      {"GP closed-form invariants", gp_invariants},
      {"two-route consistency", two_routes},
      {"non-conservation", non_conservation},
      {"additivity", additivity},
      {"degeneracy eps-trick", epsilon_trick},
      {"thermodynamic relation", thermodynamics},
      {"integrator and determinism", integrator_and_determinism},
  };
  std::printf("linear algebra backend: %s\n", backend_name(active_backend()));
  int failed = 0, errored = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
      ++errored;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= 60.0) o.pass = false;
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s: %s  [%s] (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return errored > 0 || (strict && failed > 0) ? 1 : 0;
}
