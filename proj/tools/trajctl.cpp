#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "traj/model.hpp"
#include "traj/pipeline.hpp"

namespace {
constexpr int kExitConfig = 2;
constexpr int kExitMissingArtifact = 3;
constexpr int kExitDivergence = 4;
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patient-trajectory stratification pipeline"};

  std::string config_path;
  std::string stage = "all";
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool have_seed = false;

  app.add_option("--config", config_path,
                 "experiment config JSON (omit for the built-in benchmark)");
  app.add_option("--stage", stage,
                 "generate|preprocess|train|embed|cluster|evaluate|report|all");
  app.add_option("--seed", seed_override, "override the experiment seed")
      ->each([&](const std::string&) { have_seed = true; });
  app.add_option("--out", out_override, "override the output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    traj::pipeline::ExperimentConfig cfg;
    if (config_path.empty()) {
      cfg = traj::pipeline::benchmark_config(
          out_override.empty() ? "run" : out_override);
    } else {
      cfg = traj::pipeline::ExperimentConfig::load(config_path);
      if (!out_override.empty()) cfg.out_dir = out_override;
    }
    if (have_seed) cfg.seed = seed_override;

    traj::pipeline::Runner runner(std::move(cfg));
    runner.run_stage(stage);
    std::printf("stage '%s' done (out: %s)\n", stage.c_str(),
                runner.config().out_dir.c_str());
    return 0;
  } catch (const traj::pipeline::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const traj::pipeline::MissingArtifactError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitMissingArtifact;
  } catch (const traj::model::DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
