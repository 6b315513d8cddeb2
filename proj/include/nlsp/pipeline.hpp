#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nlsp/grid.hpp"
#include "nlsp/model.hpp"

namespace nlsp {

struct ModelConfig {
  std::string kind = "gp";  // gp | log | poly
  double g = 1.0;
  std::vector<double> poly_coeffs;

  NonlinearityModel build() const;
};

struct BackgroundConfig {
  double omega = 1.0;
  std::string guess = "uniform";  // uniform | gaussian
  double guess_amplitude = 1.0;
};

struct ModesConfig {
  int count = 6;
  double gamma_min = 1e-6;
};

struct EvolveConfig {
  bool enabled = true;
  double T = 10.0;
  double dt = 1e-3;
  int sample_stride = 10;
  std::vector<double> alpha_scan;
  std::vector<int> modes = {0};  // mode indices put into the evolved ansatz
};

struct RunConfig {
  std::string scenario = "gp";  // gp | log | custom
  ModelConfig model;
  GridConfig grid;
  BackgroundConfig background;
  ModesConfig modes;
  double alpha = 1e-2;
  EvolveConfig evolve;
  std::filesystem::path out_dir = ".";
  int threads = 0;  // 0: OpenMP default
};

/// Preset for "gp" or "log"; "custom" returns defaults.
RunConfig scenario_preset(const std::string& scenario);

/// Overlays the keys found in a YAML file onto `base`. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path, RunConfig base);

enum class PipelineStage { Run, Modes, Verify, Evolve };

/// Error from a named pipeline stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineResult {
  std::vector<std::filesystem::path> artifacts;
  std::string summary;
};

/// Runs the requested stage and writes its reports into config.out_dir.
/// On failure every artifact written so far is removed and StageError thrown.
PipelineResult run_pipeline(const RunConfig& config, PipelineStage stage);

}  // namespace nlsp
