#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "traj/pipeline.hpp"

using namespace traj;
using namespace traj::pipeline;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

ExperimentConfig small_config(const std::string& out) {
  nlohmann::json codes = nlohmann::json::array();
  for (int i = 0; i < 8; ++i) {
    nlohmann::json rates = nlohmann::json::array();
    for (int p = 0; p < 2; ++p) rates.push_back(i % 2 == p ? 0.4 : 0.05);
    codes.push_back({{"kind", "secondary_dx"},
                     {"code", "C" + std::to_string(i)},
                     {"phenotype_rates", rates}});
  }
  nlohmann::json j{
      {"seed", 99},
      {"out", out},
      {"cohort",
       {{"n_patients", 60},
        {"n_phenotypes", 2},
        {"binary_codes", codes},
        {"index_event",
         {{"codes", {"I50.1"}}, {"fraction", 0.8}, {"min_day", 90}}}}},
      {"preprocess", {{"modes", {"ALL", "E2E"}}}},
      {"models",
       nlohmann::json::array(
           {{{"name", "gru"}, {"kind", "gru"}, {"feature_embed_dim", 8},
             {"n_z", 8}, {"hidden", 8}, {"epochs", 1}, {"batch_size", 16}},
            {{"name", "agru"}, {"kind", "agru"}, {"alpha", 1.0},
             {"feature_embed_dim", 8}, {"n_z", 8}, {"hidden", 8},
             {"epochs", 1}, {"batch_size", 16}}})},
      {"clustering", {{"k", 3}, {"components", 4}, {"restarts", 3}}},
      {"knn", {{"sample_size", 40}, {"repeats", 2}}},
      {"surrogate", {{"trees", 10}, {"repeats", 2}}}};
  return ExperimentConfig::from_json(j);
}

}  // namespace

TEST_CASE("config validation catches structural errors") {
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"seed", 1}}).validate(),
                  ConfigError);

  auto c = small_config("/tmp/unused");
  c.models[1].name = "gru";  // duplicate
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = small_config("/tmp/unused");
  c.models[0].kind = "transformer";
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = small_config("/tmp/unused");
  c.min_frequency = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.json"),
                  ConfigError);
}

TEST_CASE("stages demand their upstream artifacts") {
  const std::string out = (fs::temp_directory_path() / "pl_gate").string();
  fs::remove_all(out);
  Runner r(small_config(out));
  CHECK_THROWS_AS(r.evaluate(), MissingArtifactError);
  CHECK_THROWS_AS(r.train(), MissingArtifactError);
  CHECK_THROWS_AS(r.run_stage("nonsense"), ConfigError);
}

TEST_CASE("full run, stage re-run determinism, and report shape") {
  const std::string out = (fs::temp_directory_path() / "pl_full").string();
  fs::remove_all(out);
  Runner r(small_config(out));
  r.all();

  // metric csv exists with one row per model x mode
  const std::string metrics = slurp(out + "/metrics.csv");
  CHECK(metrics.find("gru,ALL,") != std::string::npos);
  CHECK(metrics.find("agru,E2E,") != std::string::npos);

  // report pivot: header + one row per model
  std::istringstream rep(slurp(out + "/report_knn_error.csv"));
  std::string line;
  std::getline(rep, line);
  CHECK(line == "model,ALL,E2E");
  int rows = 0;
  while (std::getline(rep, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);

  // deleting a downstream artifact and re-running its stage reproduces it
  const std::string cl = out + "/clusters_gru_ALL.csv";
  const std::string before = slurp(cl);
  fs::remove(cl);
  r.cluster();
  CHECK(slurp(cl) == before);

  const std::string met_before = slurp(out + "/metrics.csv");
  fs::remove(out + "/metrics.csv");
  r.evaluate();
  CHECK(slurp(out + "/metrics.csv") == met_before);
}

TEST_CASE("two identical runs produce identical artifact digests") {
  const std::string out_a = (fs::temp_directory_path() / "pl_a").string();
  const std::string out_b = (fs::temp_directory_path() / "pl_b").string();
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  {
    Runner r(small_config(out_a));
    r.all();
  }
  {
    Runner r(small_config(out_b));
    r.all();
  }
  for (const char* f :
       {"cohort.jsonl", "metrics.csv", "metrics.json", "embeddings_gru_ALL.csv",
        "clusters_agru_E2E.csv", "report_surrogate_ap.csv"})
    CHECK(file_digest(out_a + "/" + f) == file_digest(out_b + "/" + f));
}

TEST_CASE("manifest records input and output digests") {
  const std::string out = (fs::temp_directory_path() / "pl_manifest").string();
  fs::remove_all(out);
  Runner r(small_config(out));
  r.generate();
  nlohmann::json m;
  std::ifstream is(out + "/manifest_generate.json");
  REQUIRE(is);
  is >> m;
  CHECK(m.at("stage") == "generate");
  CHECK(m.at("outputs").contains(out + "/cohort.jsonl"));
  CHECK(m.at("outputs").at(out + "/cohort.jsonl") ==
        file_digest(out + "/cohort.jsonl"));
  CHECK(m.at("config_digest") == r.config().digest());
}

TEST_CASE("benchmark config mirrors the model matrix") {
  auto c = benchmark_config("/tmp/unused_bench");
  c.validate();
  REQUIRE(c.models.size() == 5);
  CHECK(c.models[0].config.alpha == 0.0);
  CHECK(c.models[3].config.alpha == 10.0);
  CHECK(c.models[4].kind == "tlstm");
  CHECK(c.modes.size() == 2);
}
