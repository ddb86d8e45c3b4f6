#include "traj/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "traj/cluster.hpp"
#include "traj/rng.hpp"

namespace fs = std::filesystem;

namespace traj::pipeline {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + tmp);
    os << content;
  }
  fs::rename(tmp, path);
}

struct EmbeddingSet {
  std::vector<std::string> ids;
  std::vector<int> lengths;
  Mat z;
};

void write_embeddings(const std::string& path, const EmbeddingSet& e) {
  std::ostringstream os;
  os << "patient_id,trajectory_length";
  for (std::size_t j = 0; j < e.z.cols(); ++j) os << ",z" << j;
  os << "\n";
  for (std::size_t i = 0; i < e.z.rows(); ++i) {
    os << e.ids[i] << "," << e.lengths[i];
    for (std::size_t j = 0; j < e.z.cols(); ++j) os << "," << fmt(e.z(i, j));
    os << "\n";
  }
  atomic_write(path, os.str());
}

EmbeddingSet read_embeddings(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MissingArtifactError("missing artifact: " + path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("empty embeddings file: " + path);
  std::size_t cols = 0;
  for (char c : line)
    if (c == ',') ++cols;
  if (cols < 2) throw std::runtime_error("bad embeddings header: " + path);
  cols -= 1;  // z columns

  EmbeddingSet e;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    e.ids.push_back(field);
    std::getline(row, field, ',');
    e.lengths.push_back(std::stoi(field));
    for (std::size_t j = 0; j < cols; ++j) {
      std::getline(row, field, ',');
      values.push_back(std::stod(field));
    }
  }
  e.z = Mat(e.ids.size(), cols);
  std::copy(values.begin(), values.end(), e.z.values().begin());
  return e;
}

std::vector<int> read_cluster_labels(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MissingArtifactError("missing artifact: " + path);
  std::string line;
  std::getline(is, line);  // header
  std::size_t cluster_col = 0, n_cols = 0;
  {
    std::istringstream h(line);
    std::string field;
    while (std::getline(h, field, ',')) {
      if (field == "cluster") cluster_col = n_cols;
      ++n_cols;
    }
  }
  std::vector<int> labels;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    for (std::size_t j = 0; j <= cluster_col; ++j) std::getline(row, field, ',');
    labels.push_back(std::stoi(field));
  }
  return labels;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!cohort && !external_jsonl)
    throw ConfigError("config: need either a cohort section or external_jsonl");
  if (cohort) {
    try {
      cohort->validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  if (grid.window_days <= 0 || grid.i_max <= 0)
    throw ConfigError("config: window_days and i_max must be positive");
  if (min_frequency < 0.0 || min_frequency >= 1.0)
    throw ConfigError("config: min_frequency must be in [0, 1)");
  if (modes.empty()) throw ConfigError("config: modes must not be empty");
  if (cluster_k == 0 || cluster_d_out == 0)
    throw ConfigError("config: cluster_k and cluster_d_out must be positive");
  std::vector<std::string> names;
  for (const auto& m : models) {
    if (m.kind != "gru" && m.kind != "agru" && m.kind != "tlstm")
      throw ConfigError("config: unknown model kind '" + m.kind + "'");
    if (m.name.empty()) throw ConfigError("config: model name must not be empty");
    for (const auto& n : names)
      if (n == m.name) throw ConfigError("config: duplicate model name '" + n + "'");
    names.push_back(m.name);
    try {
      m.config.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: model '") + m.name + "': " + e.what());
    }
  }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    c.seed = j.value("seed", std::uint64_t{0});
    c.out_dir = j.value("out", std::string("run"));
    if (j.contains("cohort"))
      c.cohort = cohort::cohort_config_from_json(j.at("cohort"));
    if (j.contains("external_jsonl"))
      c.external_jsonl = j.at("external_jsonl").get<std::string>();

    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      c.grid.window_days = p.value("window_days", c.grid.window_days);
      c.grid.i_max = p.value("i_max", c.grid.i_max);
      c.grid.anchor_day = p.value("anchor_day", c.grid.anchor_day);
      c.min_frequency = p.value("min_frequency", c.min_frequency);
      if (p.contains("criteria")) {
        const auto& cr = p.at("criteria");
        if (cr.is_string()) {
          const std::string name = cr.get<std::string>();
          if (name == "heart_failure")
            c.criteria = prep::IndexEventCriteria::heart_failure();
          else if (name == "stroke")
            c.criteria = prep::IndexEventCriteria::stroke();
          else
            throw ConfigError("config: unknown criteria preset '" + name + "'");
        } else {
          c.criteria = prep::IndexEventCriteria::from_json(cr);
        }
      }
      if (p.contains("modes")) {
        c.modes.clear();
        for (const auto& m : p.at("modes"))
          c.modes.push_back(
              prep::trajectory_mode_from_string(m.get<std::string>()));
      }
    }

    if (j.contains("models")) {
      for (const auto& mj : j.at("models")) {
        ModelSpec spec;
        spec.name = mj.at("name").get<std::string>();
        spec.kind = mj.value("kind", std::string("agru"));
        spec.config = model::ModelConfig::from_json(mj);
        if (spec.kind == "gru") spec.config.alpha = 0.0;
        c.models.push_back(std::move(spec));
      }
    }

    if (j.contains("clustering")) {
      const auto& k = j.at("clustering");
      c.cluster_k = k.value("k", c.cluster_k);
      c.cluster_d_out = k.value("components", c.cluster_d_out);
      c.cluster_restarts = k.value("restarts", c.cluster_restarts);
    }

    if (j.contains("knn")) {
      const auto& k = j.at("knn");
      c.knn.sample_size = k.value("sample_size", c.knn.sample_size);
      c.knn.neighbors = k.value("neighbors", c.knn.neighbors);
      c.knn.repeats = k.value("repeats", c.knn.repeats);
    }
    if (j.contains("surrogate")) {
      const auto& s = j.at("surrogate");
      c.surrogate.trees = s.value("trees", c.surrogate.trees);
      c.surrogate.max_depth = s.value("max_depth", c.surrogate.max_depth);
      c.surrogate.train_fraction =
          s.value("train_fraction", c.surrogate.train_fraction);
      c.surrogate.repeats = s.value("repeats", c.surrogate.repeats);
    }
    return c;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["out"] = out_dir;
  if (cohort) j["cohort"] = cohort::cohort_config_to_json(*cohort);
  if (external_jsonl) j["external_jsonl"] = *external_jsonl;
  nlohmann::json p;
  p["window_days"] = grid.window_days;
  p["i_max"] = grid.i_max;
  p["anchor_day"] = grid.anchor_day;
  p["min_frequency"] = min_frequency;
  p["criteria"] = criteria.to_json();
  p["modes"] = nlohmann::json::array();
  for (auto m : modes) p["modes"].push_back(prep::to_string(m));
  j["preprocess"] = p;
  j["models"] = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json mj = m.config.to_json();
    mj["name"] = m.name;
    mj["kind"] = m.kind;
    j["models"].push_back(mj);
  }
  j["clustering"] = {{"k", cluster_k},
                     {"components", cluster_d_out},
                     {"restarts", cluster_restarts}};
  j["knn"] = {{"sample_size", knn.sample_size},
              {"neighbors", knn.neighbors},
              {"repeats", knn.repeats}};
  j["surrogate"] = {{"trees", surrogate.trees},
                    {"max_depth", surrogate.max_depth},
                    {"train_fraction", surrogate.train_fraction},
                    {"repeats", surrogate.repeats}};
  return j;
}

std::string ExperimentConfig::digest() const {
  const std::string s = to_json().dump();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingArtifactError("missing artifact: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  const std::string s = buf.str();
  char out[24];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(fnv1a64(s)));
  return out;
}

Runner::Runner(ExperimentConfig config) : cfg_(std::move(config)) {
  cfg_.validate();
  fs::create_directories(cfg_.out_dir);
}

std::string Runner::path(const std::string& name) const {
  return cfg_.out_dir + "/" + name;
}

void Runner::require(const std::string& p, const std::string& stage) const {
  if (!fs::exists(p))
    throw MissingArtifactError("stage '" + stage + "' needs " + p +
                               "; run the producing stage first");
}

void Runner::write_manifest(const std::string& stage,
                            const std::vector<std::string>& inputs,
                            const std::vector<std::string>& outputs,
                            double wall_ms) const {
  nlohmann::json j;
  j["stage"] = stage;
  j["config_digest"] = cfg_.digest();
  j["wall_ms"] = wall_ms;
  j["inputs"] = nlohmann::json::object();
  for (const auto& p : inputs) j["inputs"][p] = file_digest(p);
  j["outputs"] = nlohmann::json::object();
  for (const auto& p : outputs) j["outputs"][p] = file_digest(p);
  atomic_write(path("manifest_" + stage + ".json"), j.dump(2) + "\n");
}

namespace {
struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};
}  // namespace

void Runner::generate() {
  Timer t;
  std::vector<cohort::PatientRecord> patients;
  std::vector<std::string> inputs;
  if (cfg_.external_jsonl) {
    require(*cfg_.external_jsonl, "generate");
    inputs.push_back(*cfg_.external_jsonl);
    patients = cohort::read_jsonl_file(*cfg_.external_jsonl);
  } else {
    cohort::CohortConfig cc = *cfg_.cohort;
    if (cc.seed == 0) cc.seed = derive_seed(cfg_.seed, "generate");
    patients = cohort::generate_cohort(cc);
    patients = cohort::inject_index_events(patients, cc);
  }
  std::ostringstream os;
  cohort::write_jsonl(patients, os);
  atomic_write(path("cohort.jsonl"), os.str());
  write_manifest("generate", inputs, {path("cohort.jsonl")}, t.ms());
}

void Runner::preprocess() {
  Timer t;
  const std::string cohort_path = path("cohort.jsonl");
  require(cohort_path, "preprocess");
  auto patients = cohort::read_jsonl_file(cohort_path);

  prep::TensorBundle all;
  all.grid = cfg_.grid;
  all.vocab = prep::build_vocabulary(patients, cfg_.min_frequency);
  all.normalizer = prep::fit_rank_normalizer(patients, all.vocab);
  for (const auto& p : patients)
    all.tensors.push_back(
        prep::assemble_sequence(p, all.grid, all.vocab, all.normalizer));

  std::vector<std::string> outputs;
  prep::save_bundle(all, path("tensors_ALL"));
  outputs.push_back(path("tensors_ALL.bin"));
  outputs.push_back(path("tensors_ALL.json"));

  for (auto mode : cfg_.modes) {
    if (mode == prep::TrajectoryMode::ALL) continue;
    prep::TensorBundle aligned;
    aligned.grid = all.grid;
    aligned.vocab = all.vocab;
    aligned.normalizer = all.normalizer;
    for (std::size_t i = 0; i < patients.size(); ++i) {
      auto index_day = prep::select_index_event(patients[i], cfg_.criteria);
      if (!index_day) continue;
      const int anchor = all.grid.anchor_day >= 0 ? all.grid.anchor_day
                         : patients[i].events.empty()
                             ? 0
                             : patients[i].events.front().day;
      const int index_window = (*index_day - anchor) / all.grid.window_days;
      if (index_window < 0 || index_window >= all.grid.i_max) continue;
      auto shifted = prep::align_trajectory(all.tensors[i], index_window, mode,
                                            all.vocab);
      if (shifted.length() == 0) continue;
      aligned.tensors.push_back(std::move(shifted));
    }
    const std::string prefix =
        path(std::string("tensors_") + prep::to_string(mode));
    prep::save_bundle(aligned, prefix);
    outputs.push_back(prefix + ".bin");
    outputs.push_back(prefix + ".json");
  }
  write_manifest("preprocess", {cohort_path}, outputs, t.ms());
}

void Runner::train() {
  Timer t;
  const std::string prefix = path("tensors_ALL");
  require(prefix + ".json", "train");
  auto bundle = prep::load_bundle(prefix);
  const std::size_t n_binary = bundle.vocab.n_binary();

  std::vector<std::string> outputs;
  for (const auto& spec : cfg_.models) {
    model::ModelConfig mc = spec.config;
    if (mc.seed == 0) mc.seed = derive_seed(cfg_.seed, "train");
    model::TrainResult result =
        spec.kind == "tlstm" ? model::tlstm_baseline(bundle.tensors, n_binary, mc)
                             : model::train(bundle.tensors, n_binary, mc);
    const std::string model_path = path("model_" + spec.name + ".json");
    const std::string log_path = path("trainlog_" + spec.name + ".csv");
    result.model.save(model_path);
    result.log.write_csv(log_path);
    outputs.push_back(model_path);
    outputs.push_back(log_path);
  }
  write_manifest("train", {prefix + ".bin", prefix + ".json"}, outputs, t.ms());
}

void Runner::embed() {
  Timer t;
  std::vector<std::string> inputs, outputs;
  for (auto mode : cfg_.modes) {
    const std::string prefix =
        path(std::string("tensors_") + prep::to_string(mode));
    require(prefix + ".json", "embed");
    auto bundle = prep::load_bundle(prefix);
    inputs.push_back(prefix + ".bin");

    for (const auto& spec : cfg_.models) {
      const std::string model_path = path("model_" + spec.name + ".json");
      require(model_path, "embed");
      auto m = model::AgruModel::load(model_path);

      EmbeddingSet e;
      if (m.config().time_delta_input) {
        auto compressed = model::time_delta_transform(bundle.tensors);
        e.z = m.encode(compressed);
      } else {
        e.z = m.encode(bundle.tensors);
      }
      for (const auto& tns : bundle.tensors) {
        e.ids.push_back(tns.patient_id);
        e.lengths.push_back(tns.length());
      }
      const std::string out = path("embeddings_" + spec.name + "_" +
                                   prep::to_string(mode) + ".csv");
      write_embeddings(out, e);
      outputs.push_back(out);
    }
  }
  write_manifest("embed", inputs, outputs, t.ms());
}

void Runner::cluster() {
  Timer t;
  std::vector<std::string> inputs, outputs;
  for (auto mode : cfg_.modes) {
    for (const auto& spec : cfg_.models) {
      const std::string tag =
          spec.name + "_" + std::string(prep::to_string(mode));
      const std::string emb_path = path("embeddings_" + tag + ".csv");
      require(emb_path, "cluster");
      inputs.push_back(emb_path);
      auto e = read_embeddings(emb_path);

      auto pca = cluster::pca_fit(e.z, cfg_.cluster_d_out);
      Mat projected = pca.transform(e.z);
      auto assignment = cluster::kmeans(
          projected, cfg_.cluster_k, cfg_.cluster_restarts,
          derive_seed(cfg_.seed, "cluster/" + tag));

      std::ostringstream os;
      os << "patient_id";
      for (std::size_t j = 0; j < projected.cols(); ++j) os << ",pc" << j + 1;
      os << ",cluster,trajectory_length\n";
      for (std::size_t i = 0; i < projected.rows(); ++i) {
        os << e.ids[i];
        for (std::size_t j = 0; j < projected.cols(); ++j)
          os << "," << fmt(projected(i, j));
        os << "," << assignment.labels[i] << "," << e.lengths[i] << "\n";
      }
      const std::string cl_path = path("clusters_" + tag + ".csv");
      atomic_write(cl_path, os.str());
      outputs.push_back(cl_path);

      auto stats = cluster::cluster_length_stats(assignment.labels, e.lengths);
      const std::string stats_path = path("length_stats_" + tag + ".csv");
      cluster::write_length_stats_csv(stats, stats_path);
      outputs.push_back(stats_path);
    }
  }
  write_manifest("cluster", inputs, outputs, t.ms());
}

void Runner::evaluate() {
  Timer t;
  std::vector<std::string> inputs;
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "model,mode,knn_error_mean,knn_error_std,surrogate_ap_mean,"
         "surrogate_ap_std,ari\n";

  for (auto mode : cfg_.modes) {
    const std::string prefix =
        path(std::string("tensors_") + prep::to_string(mode));
    require(prefix + ".json", "evaluate");
    auto bundle = prep::load_bundle(prefix);

    Mat presence(bundle.tensors.size(),
                 static_cast<std::size_t>(bundle.grid.i_max));
    std::vector<int> phenotypes;
    bool have_phenotypes = !bundle.tensors.empty();
    for (std::size_t i = 0; i < bundle.tensors.size(); ++i) {
      const auto& tns = bundle.tensors[i];
      for (std::size_t w = 0; w < tns.presence.size(); ++w)
        presence(i, w) = tns.presence[w] ? 1.0 : 0.0;
      if (tns.true_phenotype)
        phenotypes.push_back(*tns.true_phenotype);
      else
        have_phenotypes = false;
    }

    for (const auto& spec : cfg_.models) {
      const std::string tag =
          spec.name + "_" + std::string(prep::to_string(mode));
      const std::string emb_path = path("embeddings_" + tag + ".csv");
      const std::string cl_path = path("clusters_" + tag + ".csv");
      require(emb_path, "evaluate");
      require(cl_path, "evaluate");
      inputs.push_back(emb_path);
      inputs.push_back(cl_path);

      auto e = read_embeddings(emb_path);
      auto labels = read_cluster_labels(cl_path);

      metrics::KnnErrorConfig kc = cfg_.knn;
      kc.seed = derive_seed(cfg_.seed, "metrics/knn/" + tag);
      auto knn = metrics::knn_error(e.z, e.lengths, kc);

      metrics::SurrogateConfig sc = cfg_.surrogate;
      sc.seed = derive_seed(cfg_.seed, "metrics/surrogate/" + tag);
      auto ap = metrics::surrogate_precision(presence, labels, sc);

      double ari = std::numeric_limits<double>::quiet_NaN();
      if (have_phenotypes)
        ari = metrics::adjusted_rand_index(labels, phenotypes);

      csv << spec.name << "," << prep::to_string(mode) << ","
          << fmt(knn.mean) << "," << fmt(knn.std) << "," << fmt(ap.mean)
          << "," << fmt(ap.std) << "," << fmt(ari) << "\n";
      rows.push_back({{"model", spec.name},
                      {"mode", prep::to_string(mode)},
                      {"knn_error_mean", knn.mean},
                      {"knn_error_std", knn.std},
                      {"surrogate_ap_mean", ap.mean},
                      {"surrogate_ap_std", ap.std},
                      {"ari", ari}});
    }
  }
  atomic_write(path("metrics.csv"), csv.str());
  atomic_write(path("metrics.json"), rows.dump(2) + "\n");
  write_manifest("evaluate", inputs,
                 {path("metrics.csv"), path("metrics.json")}, t.ms());
}

void Runner::report() {
  Timer t;
  const std::string metrics_path = path("metrics.json");
  require(metrics_path, "report");
  std::ifstream is(metrics_path);
  nlohmann::json rows;
  is >> rows;

  // one pivot table per metric: rows = models, columns = modes
  const std::vector<std::pair<std::string, std::string>> tables = {
      {"knn_error", "knn_error_mean"},
      {"surrogate_ap", "surrogate_ap_mean"},
      {"ari", "ari"}};
  std::vector<std::string> outputs;
  for (const auto& [name, key] : tables) {
    std::ostringstream os;
    os << "model";
    for (auto mode : cfg_.modes) os << "," << prep::to_string(mode);
    os << "\n";
    for (const auto& spec : cfg_.models) {
      os << spec.name;
      for (auto mode : cfg_.modes) {
        double v = std::numeric_limits<double>::quiet_NaN();
        for (const auto& r : rows)
          if (r.at("model") == spec.name &&
              r.at("mode") == prep::to_string(mode))
            v = r.at(key).get<double>();
        os << "," << fmt(v);
      }
      os << "\n";
    }
    const std::string out = path("report_" + name + ".csv");
    atomic_write(out, os.str());
    outputs.push_back(out);
  }
  write_manifest("report", {metrics_path}, outputs, t.ms());
}

void Runner::all() {
  generate();
  preprocess();
  train();
  embed();
  cluster();
  evaluate();
  report();
}

void Runner::run_stage(const std::string& stage) {
  if (stage == "generate")
    generate();
  else if (stage == "preprocess")
    preprocess();
  else if (stage == "train")
    train();
  else if (stage == "embed")
    embed();
  else if (stage == "cluster")
    cluster();
  else if (stage == "evaluate")
    evaluate();
  else if (stage == "report")
    report();
  else if (stage == "all")
    all();
  else
    throw ConfigError("unknown stage '" + stage + "'");
}

ExperimentConfig benchmark_config(const std::string& out_dir,
                                  std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.out_dir = out_dir;
  c.cohort = cohort::default_synthetic_config();
  c.grid.i_max = c.cohort->i_max;
  c.grid.window_days = c.cohort->window_days;
  c.grid.anchor_day = 0;
  c.modes = {prep::TrajectoryMode::ALL, prep::TrajectoryMode::E2E};
  // Cluster on four PCA components with k above the phenotype count and a
  // deep restart pool: the extra clusters give the partition room to split
  // along residual length structure where a model retains it, and the
  // restarts keep k-means off local optima.
  c.cluster_k = 8;
  c.cluster_d_out = 4;
  c.cluster_restarts = 50;

  model::ModelConfig base;
  base.feature_embed_dim = 48;
  base.n_z = 48;
  base.hidden = 48;
  base.batch_size = 128;
  base.epochs = 100;
  // The single-dense discriminator needs a hotter learning rate and a looser
  // cap than the full-size model to reach a useful operating point at this
  // scale: its best achievable L_D plateaus near 0.015, so the default cap of
  // 0.01 would never release and the adversarial term would stay inert.
  base.lr_disc = 5e-3;
  // Large-alpha entries take violent update steps whenever the cap releases;
  // the norm clip keeps those steps from blowing past the operating point.
  base.grad_clip = 5.0;

  const std::vector<std::pair<std::string, double>> alphas = {
      {"gru", 0.0}, {"agru_a0.1", 0.1}, {"agru_a1", 1.0}, {"agru_a10", 10.0}};
  for (const auto& [name, alpha] : alphas) {
    ModelSpec s;
    s.name = name;
    s.kind = alpha == 0.0 ? "gru" : "agru";
    s.config = base;
    s.config.alpha = alpha;
    if (alpha > 0.0) s.config.beta = 0.05;
    c.models.push_back(std::move(s));
  }
  ModelSpec tl;
  tl.name = "tlstm";
  tl.kind = "tlstm";
  tl.config = base;
  tl.config.time_delta_input = true;
  c.models.push_back(std::move(tl));
  return c;
}

}  // namespace traj::pipeline
