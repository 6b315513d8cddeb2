// nls-perturb: batch driver for the perturbation-mode pipeline.
#include <omp.h>

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlsp/errors.hpp"
#include "nlsp/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear perturbation modes of stationary NLS solutions"};
  app.require_subcommand(1);

  std::optional<std::string> scenario;
  std::optional<double> alpha;
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<int> threads;

  const std::pair<const char*, nlsp::PipelineStage> commands[] = {
      {"run", nlsp::PipelineStage::Run},
      {"modes", nlsp::PipelineStage::Modes},
      {"verify", nlsp::PipelineStage::Verify},
      {"evolve", nlsp::PipelineStage::Evolve}};
  const char* help[] = {"full pipeline: modes, corrections, invariants, evolution",
                        "mode spectrum only", "vanishing-overlap identities only", "time evolution only"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < 4; ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("--scenario", scenario, "preset: gp, log or custom");
    sub->add_option("--alpha", alpha, "perturbation amplitude");
    sub->add_option("--config", config_path, "YAML configuration file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "OpenMP thread count")->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  nlsp::PipelineStage which = nlsp::PipelineStage::Run;
  for (std::size_t i = 0; i < 4; ++i)
    if (subs[i]->parsed()) which = commands[i].second;

  try {
    nlsp::RunConfig cfg = nlsp::scenario_preset(scenario.value_or(config_path ? "custom" : "gp"));
    if (config_path) {
      cfg = nlsp::load_config(*config_path, cfg);
      if (scenario && cfg.scenario != *scenario)
        throw nlsp::ConfigError("--scenario conflicts with the scenario named in the config file");
    }
    if (alpha) cfg.alpha = *alpha;
    if (out_dir) cfg.out_dir = *out_dir;
    if (threads) cfg.threads = *threads;
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    const nlsp::PipelineResult r = nlsp::run_pipeline(cfg, which);
    std::cout << r.summary;
    for (const auto& p : r.artifacts) std::cout << "wrote " << p.string() << '\n';
    return 0;
  } catch (const nlsp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlsp::StageError& e) {
    std::cerr << "numerical failure in stage " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
