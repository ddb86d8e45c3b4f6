#include "traj/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace traj::model {

using nn::Var;
using prep::TrajectoryTensor;

void ModelConfig::validate() const {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  if (beta <= 0.0) throw std::invalid_argument("beta must be > 0");
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw std::invalid_argument("train_fraction must be in (0,1)");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be > 0");
  if (n_z == 0 || hidden == 0 || feature_embed_dim == 0)
    throw std::invalid_argument("layer sizes must be > 0");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"feature_embed_dim", feature_embed_dim},
          {"n_z", n_z},
          {"hidden", hidden},
          {"w_b", w_b},
          {"alpha", alpha},
          {"beta", beta},
          {"lr_ae", lr_ae},
          {"lr_disc", lr_disc},
          {"weight_decay", weight_decay},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"train_fraction", train_fraction},
          {"grad_clip", grad_clip},
          {"time_delta_input", time_delta_input},
          {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.feature_embed_dim = j.value("feature_embed_dim", c.feature_embed_dim);
  c.n_z = j.value("n_z", c.n_z);
  c.hidden = j.value("hidden", c.hidden);
  c.w_b = j.value("w_b", c.w_b);
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.lr_ae = j.value("lr_ae", c.lr_ae);
  c.lr_disc = j.value("lr_disc", c.lr_disc);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.train_fraction = j.value("train_fraction", c.train_fraction);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.time_delta_input = j.value("time_delta_input", c.time_delta_input);
  c.seed = j.value("seed", c.seed);
  return c;
}

void TrainLog::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "epoch,train_l_r,train_l_bin,train_l_cont,train_l_d,train_l_r_adv,"
        "val_l_r,val_l_bin,val_l_cont,val_l_d,val_l_r_adv,best\n";
  char buf[512];
  for (const auto& e : epochs) {
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%d\n",
                  e.epoch, e.train_l_r, e.train_l_bin, e.train_l_cont,
                  e.train_l_d, e.train_l_r_adv, e.val_l_r, e.val_l_bin,
                  e.val_l_cont, e.val_l_d, e.val_l_r_adv,
                  e.epoch == best_epoch ? 1 : 0);
    os << buf;
  }
}

AgruModel::AgruModel(const ModelConfig& config, std::size_t n_features,
                     std::size_t n_binary)
    : cfg_(config), n_features_(n_features), n_binary_(n_binary) {
  cfg_.validate();
  if (n_binary > n_features)
    throw std::invalid_argument("n_binary > n_features");
  Rng rng(derive_seed(cfg_.seed, "model-init"));
  feat_embed_ = nn::DenseLayer::create("feat_embed", n_features,
                                       cfg_.feature_embed_dim, rng);
  enc_fwd_ = nn::GruCell::create("enc_fwd", cfg_.feature_embed_dim,
                                 cfg_.hidden, rng);
  enc_bwd_ = nn::GruCell::create("enc_bwd", cfg_.feature_embed_dim,
                                 cfg_.hidden, rng);
  bottleneck_ = nn::DenseLayer::create("bottleneck", 2 * cfg_.hidden,
                                       cfg_.n_z, rng);
  dec_init_ = nn::DenseLayer::create("dec_init", cfg_.n_z, cfg_.hidden, rng);
  dec_cell_ = nn::GruCell::create("dec_cell", 0, cfg_.hidden, rng);
  dec_out_ = nn::DenseLayer::create("dec_out", cfg_.hidden, n_features, rng);
  disc_ = nn::DenseLayer::create("disc", cfg_.n_z, 1, rng);
}

Var AgruModel::encode_batch(const std::vector<Var>& windows) const {
  if (windows.empty()) throw std::invalid_argument("encode_batch: no windows");
  const std::size_t batch = windows[0]->val.rows();
  for (const auto& w : windows)
    if (w->val.cols() != n_features_)
      throw std::invalid_argument("encode_batch: feature count mismatch");
  std::vector<Var> embedded;
  embedded.reserve(windows.size());
  for (const auto& w : windows)
    embedded.push_back(nn::relu(feat_embed_.apply(w)));

  Var h_f = nn::constant(Mat(batch, cfg_.hidden));
  for (std::size_t t = 0; t < embedded.size(); ++t)
    h_f = enc_fwd_.step(embedded[t], h_f);
  Var h_b = nn::constant(Mat(batch, cfg_.hidden));
  for (std::size_t t = embedded.size(); t-- > 0;)
    h_b = enc_bwd_.step(embedded[t], h_b);
  return bottleneck_.apply(nn::concat_cols({h_f, h_b}));
}

std::vector<Var> AgruModel::decode_batch(const Var& z,
                                         std::size_t i_max) const {
  Var h = dec_init_.apply(z);
  std::vector<Var> out;
  out.reserve(i_max);
  for (std::size_t t = 0; t < i_max; ++t) {
    h = dec_cell_.step(nullptr, h);
    Var raw = dec_out_.apply(h);
    if (n_binary_ == 0) {
      out.push_back(raw);
    } else if (n_binary_ == n_features_) {
      out.push_back(nn::sigmoid(raw));
    } else {
      out.push_back(nn::concat_cols(
          {nn::sigmoid(nn::slice_cols(raw, 0, n_binary_)),
           nn::slice_cols(raw, n_binary_, n_features_)}));
    }
  }
  return out;
}

Var AgruModel::discriminate(const Var& z) const {
  return nn::sigmoid(disc_.apply(z));
}

std::vector<nn::Parameter*> AgruModel::ae_params() {
  std::vector<nn::Parameter*> p;
  feat_embed_.collect(p);
  enc_fwd_.collect(p);
  enc_bwd_.collect(p);
  bottleneck_.collect(p);
  dec_init_.collect(p);
  dec_cell_.collect(p);
  dec_out_.collect(p);
  return p;
}

std::vector<nn::Parameter*> AgruModel::disc_params() {
  std::vector<nn::Parameter*> p;
  disc_.collect(p);
  return p;
}

std::vector<nn::Parameter*> AgruModel::all_params() {
  auto p = ae_params();
  auto d = disc_params();
  p.insert(p.end(), d.begin(), d.end());
  return p;
}

namespace {

// window w of every tensor in the batch stacked into one (B x F) constant
std::vector<Var> window_inputs(
    const std::vector<const TrajectoryTensor*>& batch) {
  const std::size_t i_max = batch[0]->x.rows();
  const std::size_t F = batch[0]->x.cols();
  std::vector<Var> out;
  out.reserve(i_max);
  for (std::size_t w = 0; w < i_max; ++w) {
    Mat m(batch.size(), F);
    for (std::size_t b = 0; b < batch.size(); ++b)
      std::copy(batch[b]->x.row(w), batch[b]->x.row(w) + F, m.row(b));
    out.push_back(nn::constant(std::move(m)));
  }
  return out;
}

}  // namespace

Mat AgruModel::encode(const std::vector<TrajectoryTensor>& data) const {
  Mat out(data.size(), cfg_.n_z);
  const std::size_t chunk = 256;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    const std::size_t end = std::min(data.size(), start + chunk);
    std::vector<const TrajectoryTensor*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&data[i]);
    Var z = encode_batch(window_inputs(batch));
    for (std::size_t i = start; i < end; ++i)
      std::copy(z->val.row(i - start), z->val.row(i - start) + cfg_.n_z,
                out.row(i));
  }
  return out;
}

nlohmann::json AgruModel::checkpoint() const {
  nlohmann::json j;
  j["config"] = cfg_.to_json();
  j["n_features"] = n_features_;
  j["n_binary"] = n_binary_;
  nlohmann::json params = nlohmann::json::object();
  auto collect = [&params](const nn::Parameter& p) {
    params[p.name] = {{"rows", p.node->val.rows()},
                      {"cols", p.node->val.cols()},
                      {"data", p.node->val.values()}};
  };
  auto* self = const_cast<AgruModel*>(this);
  for (nn::Parameter* p : self->all_params()) collect(*p);
  j["params"] = std::move(params);
  return j;
}

AgruModel AgruModel::from_checkpoint(const nlohmann::json& j) {
  AgruModel m(ModelConfig::from_json(j.at("config")),
              j.at("n_features").get<std::size_t>(),
              j.at("n_binary").get<std::size_t>());
  const auto& params = j.at("params");
  for (nn::Parameter* p : m.all_params()) {
    const auto& jp = params.at(p->name);
    const std::size_t rows = jp.at("rows").get<std::size_t>();
    const std::size_t cols = jp.at("cols").get<std::size_t>();
    if (rows != p->node->val.rows() || cols != p->node->val.cols())
      throw std::runtime_error("checkpoint shape mismatch for " + p->name);
    p->node->val.values() = jp.at("data").get<std::vector<double>>();
  }
  return m;
}

void AgruModel::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << checkpoint().dump() << '\n';
}

AgruModel AgruModel::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  is >> j;
  return from_checkpoint(j);
}

ReconstructionLoss reconstruction_loss(
    const std::vector<Var>& decoded,
    const std::vector<const TrajectoryTensor*>& batch, std::size_t n_binary,
    double w_b, std::ptrdiff_t exclude_col) {
  const std::size_t i_max = decoded.size();
  const std::size_t F = decoded[0]->val.cols();
  const std::size_t B = batch.size();

  Var bin_sum, cont_sum;
  std::size_t n_bin = 0, n_cont = 0;
  for (std::size_t w = 0; w < i_max; ++w) {
    Mat target(B, F);
    Mat mask_bin(B, F);
    Mat mask_cont(B, F);
    bool any = false;
    for (std::size_t b = 0; b < B; ++b) {
      std::copy(batch[b]->x.row(w), batch[b]->x.row(w) + F, target.row(b));
      if (!batch[b]->presence[w]) continue;
      any = true;
      for (std::size_t f = 0; f < F; ++f) {
        if (static_cast<std::ptrdiff_t>(f) == exclude_col) continue;
        if (f < n_binary) {
          mask_bin(b, f) = 1.0;
          ++n_bin;
        } else if (target(b, f) != prep::kContinuousMaskValue) {
          mask_cont(b, f) = 1.0;
          ++n_cont;
        }
      }
    }
    if (!any) continue;
    Var bs = nn::masked_sq_err_sum(decoded[w], target, mask_bin);
    Var cs = nn::masked_sq_err_sum(decoded[w], target, mask_cont);
    bin_sum = bin_sum ? nn::add(bin_sum, bs) : bs;
    cont_sum = cont_sum ? nn::add(cont_sum, cs) : cs;
  }
  if (n_bin == 0 && n_cont == 0)
    throw std::invalid_argument(
        "reconstruction_loss: no element included in either term");

  ReconstructionLoss out;
  out.n_bin = n_bin;
  out.n_cont = n_cont;
  out.l_bin = (bin_sum && n_bin > 0)
                  ? nn::scale(bin_sum, 1.0 / static_cast<double>(n_bin))
                  : nn::constant(Mat(1, 1));
  out.l_cont = (cont_sum && n_cont > 0)
                   ? nn::scale(cont_sum, 1.0 / static_cast<double>(n_cont))
                   : nn::constant(Mat(1, 1));
  out.l_r = nn::add(nn::scale(out.l_bin, w_b), out.l_cont);
  return out;
}

Var discriminator_loss(const Var& n_w_pred,
                       const std::vector<const TrajectoryTensor*>& batch) {
  const std::size_t B = batch.size();
  Mat target(B, 1);
  Mat ones(B, 1, 1.0);
  for (std::size_t b = 0; b < B; ++b) target(b, 0) = batch[b]->n_w;
  return nn::scale(nn::masked_sq_err_sum(n_w_pred, target, ones),
                   1.0 / static_cast<double>(B));
}

Var adversarial_total(const Var& l_r, const Var& l_d, double alpha,
                      double beta) {
  if (alpha == 0.0) return l_r;
  return nn::sub(l_r, nn::scale(nn::min_const(l_d, beta), alpha));
}

namespace {

struct BatchLosses {
  double l_r = 0, l_bin = 0, l_cont = 0, l_d = 0, l_r_adv = 0;
};

void check_finite(const BatchLosses& l, std::size_t epoch) {
  if (!std::isfinite(l.l_r) || !std::isfinite(l.l_d) ||
      !std::isfinite(l.l_r_adv))
    throw DivergenceError("training diverged at epoch " +
                          std::to_string(epoch) + ": L_R=" +
                          std::to_string(l.l_r) + " L_D=" +
                          std::to_string(l.l_d));
}

void clip_gradients(std::vector<nn::Parameter*>& params, double max_norm) {
  double sq = 0.0;
  for (nn::Parameter* p : params) {
    p->node->ensure_grad();
    const Mat& g = p->node->grad;
    sq += kernels::dot(g.data(), g.data(), g.size());
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double s = max_norm / norm;
  for (nn::Parameter* p : params)
    for (double& x : p->node->grad.values()) x *= s;
}

// forward-only loss evaluation over a full split
BatchLosses evaluate_split(const AgruModel& model,
                           const std::vector<TrajectoryTensor>& data,
                           const std::vector<std::size_t>& idx,
                           const ModelConfig& cfg, std::size_t i_max,
                           std::ptrdiff_t exclude_col) {
  BatchLosses acc;
  double weight = 0.0;
  const std::size_t chunk = 256;
  for (std::size_t start = 0; start < idx.size(); start += chunk) {
    const std::size_t end = std::min(idx.size(), start + chunk);
    std::vector<const TrajectoryTensor*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&data[idx[i]]);
    Var z = model.encode_batch(window_inputs(batch));
    Var l_d = discriminator_loss(model.discriminate(z), batch);
    auto rec = reconstruction_loss(model.decode_batch(z, i_max), batch,
                                   model.n_binary(), cfg.w_b, exclude_col);
    Var total = adversarial_total(rec.l_r, l_d, cfg.alpha, cfg.beta);
    const double w = static_cast<double>(batch.size());
    acc.l_r += w * nn::scalar_value(rec.l_r);
    acc.l_bin += w * nn::scalar_value(rec.l_bin);
    acc.l_cont += w * nn::scalar_value(rec.l_cont);
    acc.l_d += w * nn::scalar_value(l_d);
    acc.l_r_adv += w * nn::scalar_value(total);
    weight += w;
  }
  if (weight > 0.0) {
    acc.l_r /= weight;
    acc.l_bin /= weight;
    acc.l_cont /= weight;
    acc.l_d /= weight;
    acc.l_r_adv /= weight;
  }
  return acc;
}

}  // namespace

TrainResult train(const std::vector<TrajectoryTensor>& dataset,
                  std::size_t n_binary, const ModelConfig& config) {
  config.validate();
  if (dataset.size() < 2 * config.batch_size)
    throw std::invalid_argument("train: dataset smaller than 2 x batch_size");
  const std::size_t i_max = dataset[0].x.rows();
  const std::size_t F = dataset[0].x.cols();
  const std::ptrdiff_t exclude_col =
      config.time_delta_input ? static_cast<std::ptrdiff_t>(F - 1) : -1;

  AgruModel model(config, F, n_binary);
  auto ae_params = model.ae_params();
  auto disc_params = model.disc_params();
  nn::Adam adam_ae({config.lr_ae, 0.9, 0.999, 1e-8, config.weight_decay});
  nn::Adam adam_disc({config.lr_disc, 0.9, 0.999, 1e-8, config.weight_decay});

  // train/validation split on a fixed shuffling stream
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(derive_seed(config.seed, "split"));
  split_rng.shuffle(order);
  std::size_t n_train = static_cast<std::size_t>(
      std::lround(config.train_fraction * static_cast<double>(dataset.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, dataset.size() - 1);
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> val_idx(order.begin() + n_train, order.end());

  TrainLog log;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Mat> best_params;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng(
        derive_seed(config.seed, "epoch/" + std::to_string(epoch)));
    epoch_rng.shuffle(train_idx);

    BatchLosses acc;
    double weight = 0.0;
    for (std::size_t start = 0; start < train_idx.size();
         start += config.batch_size) {
      const std::size_t end =
          std::min(train_idx.size(), start + config.batch_size);
      std::vector<const TrajectoryTensor*> batch;
      for (std::size_t i = start; i < end; ++i)
        batch.push_back(&dataset[train_idx[i]]);

      auto windows = window_inputs(batch);
      Var z = model.encode_batch(windows);

      // step 1: discriminator on a detached embedding
      {
        Var l_d = discriminator_loss(model.discriminate(nn::detach(z)), batch);
        nn::zero_grad(disc_params);
        nn::backward(l_d);
        adam_disc.step(disc_params);
      }

      // step 2: autoencoder against the updated, frozen discriminator
      BatchLosses bl;
      {
        auto rec = reconstruction_loss(model.decode_batch(z, i_max), batch,
                                       n_binary, config.w_b, exclude_col);
        Var total = rec.l_r;
        Var l_d2;
        if (config.alpha > 0.0) {
          l_d2 = discriminator_loss(model.discriminate(z), batch);
          total = adversarial_total(rec.l_r, l_d2, config.alpha, config.beta);
        }
        nn::zero_grad(ae_params);
        nn::zero_grad(disc_params);
        nn::backward(total);
        if (config.grad_clip > 0.0) clip_gradients(ae_params, config.grad_clip);
        adam_ae.step(ae_params);

        bl.l_r = nn::scalar_value(rec.l_r);
        bl.l_bin = nn::scalar_value(rec.l_bin);
        bl.l_cont = nn::scalar_value(rec.l_cont);
        bl.l_d = l_d2 ? nn::scalar_value(l_d2) : 0.0;
        bl.l_r_adv = nn::scalar_value(total);
      }
      check_finite(bl, epoch);

      const double w = static_cast<double>(batch.size());
      acc.l_r += w * bl.l_r;
      acc.l_bin += w * bl.l_bin;
      acc.l_cont += w * bl.l_cont;
      acc.l_d += w * bl.l_d;
      acc.l_r_adv += w * bl.l_r_adv;
      weight += w;
    }
    acc.l_r /= weight;
    acc.l_bin /= weight;
    acc.l_cont /= weight;
    acc.l_d /= weight;
    acc.l_r_adv /= weight;

    const auto& eval_idx = val_idx.empty() ? train_idx : val_idx;
    BatchLosses val =
        evaluate_split(model, dataset, eval_idx, config, i_max, exclude_col);
    check_finite(val, epoch);

    EpochLog el;
    el.epoch = epoch;
    el.train_l_r = acc.l_r;
    el.train_l_bin = acc.l_bin;
    el.train_l_cont = acc.l_cont;
    el.train_l_d = acc.l_d;
    el.train_l_r_adv = acc.l_r_adv;
    el.val_l_r = val.l_r;
    el.val_l_bin = val.l_bin;
    el.val_l_cont = val.l_cont;
    el.val_l_d = val.l_d;
    el.val_l_r_adv = val.l_r_adv;
    log.epochs.push_back(el);

    if (val.l_r < best_val) {
      best_val = val.l_r;
      log.best_epoch = epoch;
      best_params.clear();
      for (nn::Parameter* p : model.all_params())
        best_params.push_back(p->node->val);
    }
  }

  // restore the best-validation checkpoint
  if (!best_params.empty()) {
    auto params = model.all_params();
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i]->node->val = best_params[i];
  }
  return {std::move(model), std::move(log)};
}

std::vector<TrajectoryTensor> time_delta_transform(
    const std::vector<TrajectoryTensor>& dataset) {
  if (dataset.empty()) return {};
  const std::size_t F = dataset[0].x.cols();
  std::size_t max_len = 1;
  for (const auto& t : dataset)
    max_len = std::max(max_len, static_cast<std::size_t>(t.length()));

  std::vector<TrajectoryTensor> out;
  out.reserve(dataset.size());
  for (const auto& t : dataset) {
    TrajectoryTensor c;
    c.patient_id = t.patient_id;
    c.true_phenotype = t.true_phenotype;
    c.n_w = t.n_w;  // discriminator target stays on the original grid
    c.x = Mat(max_len, F + 1);
    c.presence.assign(max_len, 0);
    // pad rows carry the canonical empty pattern of the source row set
    std::size_t dst = 0;
    int prev = -1;
    for (std::size_t w = 0; w < t.presence.size(); ++w) {
      if (!t.presence[w]) continue;
      std::copy(t.x.row(w), t.x.row(w) + F, c.x.row(dst));
      c.x(dst, F) =
          prev < 0 ? 0.0 : static_cast<double>(static_cast<int>(w) - prev);
      c.presence[dst] = 1;
      prev = static_cast<int>(w);
      ++dst;
    }
    if (dst < max_len) {
      // a patient needing padding always has at least one empty source
      // window; reuse its canonical empty pattern
      std::size_t empty_row = 0;
      for (std::size_t w = 0; w < t.presence.size(); ++w)
        if (!t.presence[w]) {
          empty_row = w;
          break;
        }
      for (; dst < max_len; ++dst) {
        std::copy(t.x.row(empty_row), t.x.row(empty_row) + F, c.x.row(dst));
        c.x(dst, F) = 0.0;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

TrainResult tlstm_baseline(const std::vector<TrajectoryTensor>& dataset,
                           std::size_t n_binary, const ModelConfig& config) {
  ModelConfig cfg = config;
  cfg.time_delta_input = true;
  return train(time_delta_transform(dataset), n_binary, cfg);
}

}  // namespace traj::model
