#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "traj/nn.hpp"
#include "traj/prep.hpp"
#include "vendor_json.hpp"

namespace traj::model {

struct ModelConfig {
  std::size_t feature_embed_dim = 256;
  std::size_t n_z = 256;
  std::size_t hidden = 128;  // per direction
  double w_b = 100.0;
  double alpha = 0.0;  // 0 = plain GRU baseline
  double beta = 0.01;
  double lr_ae = 2e-3;
  double lr_disc = 2e-4;
  double weight_decay = 1e-6;
  std::size_t batch_size = 128;
  std::size_t epochs = 50;
  double train_fraction = 0.8;
  double grad_clip = 0.0;  // global norm; 0 disables
  bool time_delta_input = false;  // compressed sequence baseline
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_l_r = 0, train_l_bin = 0, train_l_cont = 0, train_l_d = 0,
         train_l_r_adv = 0;
  double val_l_r = 0, val_l_bin = 0, val_l_cont = 0, val_l_d = 0,
         val_l_r_adv = 0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  void write_csv(const std::string& path) const;
};

struct ReconstructionLoss {
  nn::Var l_bin, l_cont, l_r;  // 1x1 each
  std::size_t n_bin = 0, n_cont = 0;
};

class AgruModel {
 public:
  // n_binary: leading columns that get a sigmoid output and the w_b weight
  AgruModel(const ModelConfig& config, std::size_t n_features,
            std::size_t n_binary);

  const ModelConfig& config() const { return cfg_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t n_binary() const { return n_binary_; }

  // batch: window w of every sample stacked into one (batch x F) constant
  nn::Var encode_batch(const std::vector<nn::Var>& windows) const;
  std::vector<nn::Var> decode_batch(const nn::Var& z, std::size_t i_max) const;
  nn::Var discriminate(const nn::Var& z) const;

  std::vector<nn::Parameter*> ae_params();
  std::vector<nn::Parameter*> disc_params();
  std::vector<nn::Parameter*> all_params();

  // embedding matrix (one row per tensor), forward only
  Mat encode(const std::vector<prep::TrajectoryTensor>& data) const;

  nlohmann::json checkpoint() const;
  static AgruModel from_checkpoint(const nlohmann::json& j);
  void save(const std::string& path) const;
  static AgruModel load(const std::string& path);

 private:
  ModelConfig cfg_;
  std::size_t n_features_ = 0, n_binary_ = 0;
  nn::DenseLayer feat_embed_;
  nn::GruCell enc_fwd_, enc_bwd_;
  nn::DenseLayer bottleneck_;
  nn::DenseLayer dec_init_;
  nn::GruCell dec_cell_;
  nn::DenseLayer dec_out_;
  nn::DenseLayer disc_;
};

// Reconstruction loss over data windows only. Binary targets use all
// columns < n_binary; continuous targets additionally exclude the -0.1
// mask value and, when exclude_col >= 0, that input-only column.
// Throws if no element is included in either term.
ReconstructionLoss reconstruction_loss(
    const std::vector<nn::Var>& decoded,
    const std::vector<const prep::TrajectoryTensor*>& batch,
    std::size_t n_binary, double w_b, std::ptrdiff_t exclude_col = -1);

// batch mean of (n_w - n_w')^2
nn::Var discriminator_loss(const nn::Var& n_w_pred,
                           const std::vector<const prep::TrajectoryTensor*>& batch);

// L'_R = L_R - alpha * min(beta, L_D)
nn::Var adversarial_total(const nn::Var& l_r, const nn::Var& l_d, double alpha,
                          double beta);

struct TrainResult {
  AgruModel model;
  TrainLog log;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two-step adversarial training. Throws DivergenceError when a loss goes
// non-finite.
TrainResult train(const std::vector<prep::TrajectoryTensor>& dataset,
                  std::size_t n_binary, const ModelConfig& config);

// Compressed-sequence inputs: data windows only, each with one trailing
// extra feature holding the window gap to the previous data window (0 for
// the first). Padded to the cohort-max data-window count; n_w keeps its
// original value.
std::vector<prep::TrajectoryTensor> time_delta_transform(
    const std::vector<prep::TrajectoryTensor>& dataset);

TrainResult tlstm_baseline(const std::vector<prep::TrajectoryTensor>& dataset,
                           std::size_t n_binary, const ModelConfig& config);

}  // namespace traj::model
