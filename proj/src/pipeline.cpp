#include "nlsp/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include <json.hpp>

#include "nlsp/bdg.hpp"
#include "nlsp/corrections.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/evolution.hpp"
#include "nlsp/invariants.hpp"
#include "nlsp/operators.hpp"

namespace nlsp {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config key '" + key + "' has an invalid value");
  }
}

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError("config block '" + where + "' must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

GridKind parse_grid_kind(const std::string& s) {
  if (s == "periodic" || s == "PeriodicBox") return GridKind::PeriodicBox;
  if (s == "line" || s == "TruncatedLine") return GridKind::TruncatedLine;
  throw ConfigError("grid.kind must be 'periodic' or 'line', got '" + s + "'");
}

std::string grid_kind_name(GridKind k) { return k == GridKind::PeriodicBox ? "periodic" : "line"; }

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    written_.push_back(p);
    out << content;
    if (!out) throw ConfigError("failed writing " + p.string());
  }

  void rollback() {
    std::error_code ec;
    for (const fs::path& p : written_) fs::remove(p, ec);
    written_.clear();
  }

  const std::vector<fs::path>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct Solved {
  Background background;
  DerivedPotentials potentials;
  OperatorPair operators;
  ModeBasis basis;
};

Background solve_configured_background(const RunConfig& cfg, GridPtr grid) {
  const NonlinearityModel model = cfg.model.build();
  RealField guess(grid->size());
  const double a = cfg.background.guess_amplitude;
  if (cfg.background.guess == "uniform")
    guess.setConstant(a);
  else
    guess = (a * (-0.5 * grid->nodes().array().square()).exp()).matrix();
  return solve_background(grid, cfg.background.omega, RealField::Zero(grid->size()), model, guess);
}

bool uniform(const RealField& f) { return f.maxCoeff() - f.minCoeff() <= 1e-12 * f.cwiseAbs().maxCoeff(); }

Solved solve_through_modes(const RunConfig& cfg, GridPtr grid) {
  Solved s{stage("background", [&] { return solve_configured_background(cfg, grid); }), {}, {}, {}};
  stage("modes", [&] {
    s.potentials = eval_potentials(s.background);
    s.operators = assemble_pair(s.background, s.potentials);
    ModeOptions opts;
    opts.count = cfg.modes.count;
    opts.gamma_min = cfg.modes.gamma_min;
    s.basis = solve_modes(s.operators.l1, s.operators.l2, opts);
    if (grid->periodic() && uniform(s.background.f)) s.basis = adapt_to_translations(s.basis);
    return 0;
  });
  return s;
}

std::string modes_csv(const ModeBasis& basis) {
  std::ostringstream o;
  o << "mode_index,gamma,residual_l1,residual_l2,degeneracy_class\n";
  for (int n = 0; n < basis.size(); ++n) {
    const LinearMode& m = basis.modes[static_cast<std::size_t>(n)];
    o << n << ',' << num(m.gamma) << ',' << num(m.residual_l1) << ',' << num(m.residual_l2) << ','
      << basis.class_of(n) << '\n';
  }
  return o.str();
}

json config_json(const RunConfig& cfg) {
  json g;
  g["kind"] = grid_kind_name(cfg.grid.kind);
  g["n_points"] = cfg.grid.n_points;
  if (cfg.grid.kind == GridKind::PeriodicBox) {
    g["length"] = cfg.grid.length;
    g["origin"] = cfg.grid.origin;
  } else {
    g["half_width"] = cfg.grid.half_width;
  }
  json j;
  j["scenario"] = cfg.scenario;
  j["model"] = cfg.model.kind;
  j["grid"] = g;
  j["omega"] = cfg.background.omega;
  return j;
}

std::string invariants_csv(const InvariantReport& r) {
  std::ostringstream o;
  o << "mode_index,gamma,Np,Ep,Pp_x,coeff_max\n";
  for (const ModeInvariants& m : r.rows)
    o << m.index << ',' << num(m.gamma) << ',' << num(m.np.direct) << ',' << num(m.ep) << ','
      << num(m.pp.direct) << ',' << num(m.coeff_max) << '\n';
  return o.str();
}

json invariants_json(const RunConfig& cfg, const InvariantReport& r) {
  json j = config_json(cfg);
  j["alpha"] = r.alpha;
  json rows = json::array();
  for (const ModeInvariants& m : r.rows) {
    json row;
    row["mode_index"] = m.index;
    row["gamma"] = m.gamma;
    row["n_tilde"] = m.n_tilde;
    row["Np"] = m.np.direct;
    row["Np_shortcut"] = m.np.shortcut;
    row["Ep"] = m.ep;
    row["Pp_x"] = m.pp.direct;
    row["Pp_x_shortcut"] = m.pp.shortcut;
    row["released_energy"] = m.released;
    row["coeff_max"] = m.coeff_max;
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["totals"] = {{"Np", r.np_total}, {"Ep", r.ep_total}, {"Pp_x", r.pp_total}};
  j["released_energy"] = r.released_energy;
  json td = json::array();
  for (const TimeDependentTerm& t : r.time_dependent) td.push_back({{"label", t.label}, {"magnitude", t.magnitude}});
  j["time_dependent"] = td;
  j["coeff_max"] = r.coeff_max();
  return j;
}

json identities_json(const RunConfig& cfg, const IdentityReport& r) {
  json j = config_json(cfg);
  json items = json::object();
  for (const auto& [name, value] : r.items()) items[name] = value;
  j["identities"] = items;
  j["max"] = r.max();
  j["modes"] = r.modes;
  j["pairs"] = r.pairs;
  j["momentum_identities"] = r.momentum_identities;
  return j;
}

std::string timeseries_csv(const TrajectoryDiagnostics& d) {
  std::ostringstream o;
  o << "t,N,E,Px,N_ansatz,E_ansatz\n";
  for (std::size_t j = 0; j < d.times.size(); ++j)
    o << num(d.times[j]) << ',' << num(d.N[j]) << ',' << num(d.E[j]) << ',' << num(d.P[j]) << ','
      << num(d.N_ansatz[j]) << ',' << num(d.E_ansatz[j]) << '\n';
  return o.str();
}

std::string alpha_tag(double a) {
  std::ostringstream s;
  s << std::setprecision(6) << a;
  return s.str();
}

}  // namespace

NonlinearityModel ModelConfig::build() const {
  if (kind == "gp") return NonlinearityModel::gross_pitaevskii(g);
  if (kind == "log") return NonlinearityModel::logarithmic();
  if (kind == "poly") {
    if (poly_coeffs.empty()) throw ConfigError("model 'poly' needs poly_coeffs");
    return NonlinearityModel::polynomial(poly_coeffs);
  }
  throw ConfigError("model must be 'gp', 'log' or 'poly', got '" + kind + "'");
}

RunConfig scenario_preset(const std::string& scenario) {
  RunConfig c;
  c.scenario = scenario;
  if (scenario == "gp") {
    c.model.kind = "gp";
    c.model.g = 1.0;
    c.grid = {GridKind::PeriodicBox, 2.0 * std::numbers::pi, 0.0, 128, 0.0};
    c.background = {1.0, "uniform", 1.0};
    c.modes = {16, 1e-6};
  } else if (scenario == "log") {
    c.model.kind = "log";
    c.grid = {GridKind::PeriodicBox, 20.0, 0.0, 256, -10.0};
    c.background = {1.0, "gaussian", 1.0};
    c.modes = {5, 1e-6};
  } else if (scenario == "custom") {
    c.grid = {GridKind::PeriodicBox, 2.0 * std::numbers::pi, 0.0, 64, 0.0};
  } else {
    throw ConfigError("scenario must be 'gp', 'log' or 'custom', got '" + scenario + "'");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  if (root.IsNull()) return base;
  check_keys(root, "", {"scenario", "model", "g", "poly_coeffs", "grid", "background", "modes", "alpha",
                        "evolve", "out_dir", "threads"});
  if (root["scenario"]) {
    const std::string s = scalar<std::string>(root["scenario"], "scenario");
    if (s != base.scenario) base = scenario_preset(s);
  }
  RunConfig c = base;
  if (root["model"]) c.model.kind = scalar<std::string>(root["model"], "model");
  if (root["g"]) c.model.g = scalar<double>(root["g"], "g");
  if (root["poly_coeffs"]) c.model.poly_coeffs = scalar<std::vector<double>>(root["poly_coeffs"], "poly_coeffs");
  if (const YAML::Node g = root["grid"]) {
    check_keys(g, "grid.", {"kind", "length", "half_width", "n_points", "origin"});
    if (g["kind"]) c.grid.kind = parse_grid_kind(scalar<std::string>(g["kind"], "grid.kind"));
    if (g["length"]) c.grid.length = scalar<double>(g["length"], "grid.length");
    if (g["half_width"]) c.grid.half_width = scalar<double>(g["half_width"], "grid.half_width");
    if (g["n_points"]) c.grid.n_points = scalar<int>(g["n_points"], "grid.n_points");
    if (g["origin"]) c.grid.origin = scalar<double>(g["origin"], "grid.origin");
  }
  if (const YAML::Node b = root["background"]) {
    check_keys(b, "background.", {"omega", "guess", "amplitude"});
    if (b["omega"]) c.background.omega = scalar<double>(b["omega"], "background.omega");
    if (b["guess"]) c.background.guess = scalar<std::string>(b["guess"], "background.guess");
    if (b["amplitude"]) c.background.guess_amplitude = scalar<double>(b["amplitude"], "background.amplitude");
  }
  if (const YAML::Node m = root["modes"]) {
    check_keys(m, "modes.", {"count", "gamma_min"});
    if (m["count"]) c.modes.count = scalar<int>(m["count"], "modes.count");
    if (m["gamma_min"]) c.modes.gamma_min = scalar<double>(m["gamma_min"], "modes.gamma_min");
  }
  if (root["alpha"]) c.alpha = scalar<double>(root["alpha"], "alpha");
  if (const YAML::Node e = root["evolve"]) {
    check_keys(e, "evolve.", {"enabled", "T", "dt", "sample_stride", "alpha_scan", "modes"});
    if (e["enabled"]) c.evolve.enabled = scalar<bool>(e["enabled"], "evolve.enabled");
    if (e["T"]) c.evolve.T = scalar<double>(e["T"], "evolve.T");
    if (e["dt"]) c.evolve.dt = scalar<double>(e["dt"], "evolve.dt");
    if (e["sample_stride"]) c.evolve.sample_stride = scalar<int>(e["sample_stride"], "evolve.sample_stride");
    if (e["alpha_scan"]) c.evolve.alpha_scan = scalar<std::vector<double>>(e["alpha_scan"], "evolve.alpha_scan");
    if (e["modes"]) c.evolve.modes = scalar<std::vector<int>>(e["modes"], "evolve.modes");
  }
  if (root["out_dir"]) c.out_dir = scalar<std::string>(root["out_dir"], "out_dir");
  if (root["threads"]) c.threads = scalar<int>(root["threads"], "threads");
  return c;
}

PipelineResult run_pipeline(const RunConfig& cfg, PipelineStage which) {
  if (cfg.background.guess != "uniform" && cfg.background.guess != "gaussian")
    throw ConfigError("background.guess must be 'uniform' or 'gaussian'");
  if (cfg.modes.count < 1) throw ConfigError("modes.count must be positive");
  if (!(cfg.alpha >= 0.0)) throw ConfigError("alpha must be nonnegative");
  (void)cfg.model.build();
  GridPtr grid;
  try {
    grid = std::make_shared<const Grid>(build_grid(cfg.grid));
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("invalid grid: ") + e.what());
  }
  if (grid->size() > kMaxDensePoints)
    throw ConfigError("grid.n_points exceeds the dense limit of " + std::to_string(kMaxDensePoints));
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec || !fs::is_directory(cfg.out_dir)) throw ConfigError("cannot create output directory " + cfg.out_dir.string());

  ArtifactWriter out(cfg.out_dir);
  std::ostringstream summary;
  try {
    const Solved s = solve_through_modes(cfg, grid);
    out.write("modes.csv", modes_csv(s.basis));
    summary << "modes: " << s.basis.size() << ", lowest gamma " << std::setprecision(10) << s.basis.modes[0].gamma
            << '\n';
    if (which == PipelineStage::Modes) return {out.written(), summary.str()};

    const auto solver = stage("corrections", [&] {
      return std::make_shared<CorrectionSolver>(s.background, s.potentials, s.operators);
    });
    const CorrectionSet corrections = stage("corrections", [&] { return solve_all(s.basis, *solver); });
    const InvariantContext ctx = stage("invariants", [&] { return make_context(s.background, s.potentials, *solver); });

    if (which == PipelineStage::Run || which == PipelineStage::Verify) {
      const IdentityReport ids = stage("invariants", [&] { return identity_report(ctx, s.basis, corrections); });
      out.write("identities.json", identities_json(cfg, ids).dump(2) + "\n");
      summary << "identities: max magnitude " << std::setprecision(3) << ids.max() << '\n';
    }
    if (which == PipelineStage::Run) {
      const InvariantReport rep = stage("invariants", [&] { return invariant_report(ctx, s.basis, corrections, cfg.alpha); });
      out.write("invariants.csv", invariants_csv(rep));
      out.write("invariants.json", invariants_json(cfg, rep).dump(2) + "\n");
      summary << "invariants: Np " << std::setprecision(10) << rep.np_total << ", Ep " << rep.ep_total << ", Pp_x "
              << rep.pp_total << '\n';
    }
    if (which == PipelineStage::Evolve || (which == PipelineStage::Run && cfg.evolve.enabled)) {
      std::vector<int> sel = cfg.evolve.modes;
      std::sort(sel.begin(), sel.end());
      for (int m : sel)
        if (m < 0 || m >= s.basis.size()) throw ConfigError("evolve.modes index out of range");
      std::vector<double> alphas = cfg.evolve.alpha_scan;
      if (alphas.empty()) alphas.push_back(cfg.alpha);
      EvolveOptions opts{cfg.evolve.T, cfg.evolve.dt, cfg.evolve.sample_stride, 0.0};
      std::ostringstream scan;
      scan << "alpha,drift_N,drift_E,drift_P,ansatz_drift_N,ansatz_drift_E\n";
      for (double a : alphas) {
        const TrajectoryDiagnostics d = stage("evolution", [&] {
          const PerturbationAssembly as =
              PerturbationAssembly::from_basis(s.background, s.basis, corrections, sel, a, true);
          return evolve_assembly(as, opts);
        });
        const std::string name =
            alphas.size() == 1 ? std::string("timeseries.csv") : "timeseries_alpha_" + alpha_tag(a) + ".csv";
        out.write(name, timeseries_csv(d));
        const auto spread = [](const std::vector<double>& v) {
          const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
          return *hi - *lo;
        };
        scan << num(a) << ',' << num(d.drift_N) << ',' << num(d.drift_E) << ',' << num(d.drift_P) << ','
             << num(spread(d.N_ansatz)) << ',' << num(spread(d.E_ansatz)) << '\n';
        summary << "evolution alpha " << a << ": drift N " << std::setprecision(3) << d.drift_N << ", E "
                << d.drift_E << '\n';
      }
      if (alphas.size() > 1) out.write("drift_scan.csv", scan.str());
    }
  } catch (...) {
    out.rollback();
    throw;
  }
  return {out.written(), summary.str()};
}

}  // namespace nlsp
