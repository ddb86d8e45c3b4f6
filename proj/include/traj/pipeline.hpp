#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "traj/cohort.hpp"
#include "traj/metrics.hpp"
#include "traj/model.hpp"
#include "traj/prep.hpp"
#include "vendor_json.hpp"

namespace traj::pipeline {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelSpec {
  std::string name;
  std::string kind;  // gru | agru | tlstm
  model::ModelConfig config;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "run";

  std::optional<cohort::CohortConfig> cohort;  // or external file
  std::optional<std::string> external_jsonl;

  prep::WindowGrid grid;
  double min_frequency = 0.01;
  prep::IndexEventCriteria criteria = prep::IndexEventCriteria::heart_failure();
  std::vector<prep::TrajectoryMode> modes{prep::TrajectoryMode::ALL};

  std::vector<ModelSpec> models;

  std::size_t cluster_k = 6;
  std::size_t cluster_d_out = 6;
  std::size_t cluster_restarts = 10;

  metrics::KnnErrorConfig knn;
  metrics::SurrogateConfig surrogate;

  void validate() const;  // throws ConfigError
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
  std::string digest() const;
};

// file-content digest (fnv1a64 hex)
std::string file_digest(const std::string& path);

class Runner {
 public:
  explicit Runner(ExperimentConfig config);

  void generate();
  void preprocess();
  void train();
  void embed();
  void cluster();
  void evaluate();
  void report();
  void all();

  // named stage dispatch; throws ConfigError on unknown stage
  void run_stage(const std::string& stage);

  const ExperimentConfig& config() const { return cfg_; }

 private:
  std::string path(const std::string& name) const;
  void require(const std::string& path, const std::string& stage) const;
  void write_manifest(const std::string& stage,
                      const std::vector<std::string>& inputs,
                      const std::vector<std::string>& outputs,
                      double wall_ms) const;

  ExperimentConfig cfg_;
};

// Benchmark experiment: synthetic default cohort, ALL + E2E trajectories,
// model matrix {gru, agru 0.1 / 1 / 10, tlstm}, desk-scale model sizes.
ExperimentConfig benchmark_config(const std::string& out_dir,
                                  std::uint64_t seed = 20240901);

}  // namespace traj::pipeline
