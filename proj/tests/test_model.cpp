#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <functional>

#include "doctest.h"
#include "traj/model.hpp"
#include "traj/nn.hpp"

using namespace traj;
using namespace traj::model;
using nn::Var;

namespace {

// 4 features (2 binary, 2 continuous), 3 windows
prep::TrajectoryTensor toy_tensor(const std::string& id,
                                  std::vector<char> presence,
                                  double fill_seed) {
  prep::TrajectoryTensor t;
  t.patient_id = id;
  t.x = Mat(3, 4);
  t.presence = std::move(presence);
  Rng rng(static_cast<std::uint64_t>(fill_seed * 1000) + 7);
  int count = 0;
  for (std::size_t w = 0; w < 3; ++w) {
    if (t.presence[w]) {
      ++count;
      t.x(w, 0) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      t.x(w, 1) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      t.x(w, 2) = rng.uniform();
      t.x(w, 3) = rng.uniform();
    } else {
      t.x(w, 2) = prep::kContinuousMaskValue;
      t.x(w, 3) = prep::kContinuousMaskValue;
    }
  }
  t.n_w = count / 3.0;
  return t;
}

ModelConfig toy_config(double alpha = 1.0, double beta = 10.0) {
  ModelConfig c;
  c.feature_embed_dim = 5;
  c.n_z = 4;
  c.hidden = 3;
  c.alpha = alpha;
  c.beta = beta;
  c.seed = 21;
  return c;
}

std::vector<Var> batch_windows(
    const std::vector<const prep::TrajectoryTensor*>& batch) {
  const std::size_t f = batch.front()->x.cols();
  const std::size_t i_max = batch.front()->x.rows();
  std::vector<Var> windows;
  for (std::size_t w = 0; w < i_max; ++w) {
    Mat m(batch.size(), f);
    for (std::size_t i = 0; i < batch.size(); ++i)
      std::copy(batch[i]->x.row(w), batch[i]->x.row(w) + f, m.row(i));
    windows.push_back(nn::constant(std::move(m)));
  }
  return windows;
}

}  // namespace

TEST_CASE("adversarial total follows the capped algebra") {
  auto one = [](double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return nn::constant(m);
  };
  CHECK(nn::scalar_value(adversarial_total(one(1.0), one(0.5), 1.0, 0.01)) ==
        doctest::Approx(0.99));
  CHECK(nn::scalar_value(adversarial_total(one(1.0), one(0.005), 10.0, 0.01)) ==
        doctest::Approx(0.95));
  CHECK(nn::scalar_value(adversarial_total(one(1.0), one(0.5), 0.0, 0.01)) ==
        1.0);
}

TEST_CASE("reconstruction loss: one binary miss costs w_b") {
  prep::TrajectoryTensor t;
  t.patient_id = "p";
  t.x = Mat(1, 1);
  t.x(0, 0) = 1.0;
  t.presence = {1};
  t.n_w = 1.0;
  std::vector<const prep::TrajectoryTensor*> batch{&t};

  std::vector<Var> decoded{nn::constant(Mat(1, 1, 0.0))};
  auto loss = reconstruction_loss(decoded, batch, 1, 100.0);
  CHECK(nn::scalar_value(loss.l_bin) == doctest::Approx(1.0));
  CHECK(nn::scalar_value(loss.l_r) == doctest::Approx(100.0));
}

TEST_CASE("reconstruction loss: perfect prediction is zero") {
  auto t = toy_tensor("p", {1, 0, 1}, 1.0);
  std::vector<const prep::TrajectoryTensor*> batch{&t};
  std::vector<Var> decoded;
  for (std::size_t w = 0; w < 3; ++w) {
    Mat m(1, 4);
    std::copy(t.x.row(w), t.x.row(w) + 4, m.row(0));
    decoded.push_back(nn::constant(std::move(m)));
  }
  auto loss = reconstruction_loss(decoded, batch, 2, 100.0);
  CHECK(nn::scalar_value(loss.l_r) == 0.0);
}

TEST_CASE("masked continuous targets and empty windows contribute nothing") {
  auto t = toy_tensor("p", {1, 0, 1}, 2.0);
  t.x(0, 2) = prep::kContinuousMaskValue;  // masked inside a data window
  std::vector<const prep::TrajectoryTensor*> batch{&t};

  std::vector<Var> decoded;
  std::vector<Var> window_params;
  for (std::size_t w = 0; w < 3; ++w) {
    Mat m(1, 4, 0.3);
    window_params.push_back(nn::parameter(m));
    decoded.push_back(window_params.back());
  }
  auto loss = reconstruction_loss(decoded, batch, 2, 100.0);
  nn::backward(loss.l_r);
  // empty window (index 1): all gradients zero
  for (std::size_t c = 0; c < 4; ++c) CHECK(window_params[1]->grad(0, c) == 0.0);
  // masked continuous element: zero gradient; unmasked sibling: non-zero
  CHECK(window_params[0]->grad(0, 2) == 0.0);
  CHECK(window_params[0]->grad(0, 3) != 0.0);
}

TEST_CASE("discriminator loss is the batch mean of squared errors") {
  prep::TrajectoryTensor a, b;
  a.x = Mat(1, 1);
  b.x = Mat(1, 1);
  a.presence = b.presence = {1};
  a.n_w = 0.5;
  b.n_w = 1.0;

  {
    std::vector<const prep::TrajectoryTensor*> batch{&a};
    Var pred = nn::constant(Mat(1, 1, 0.0));
    CHECK(nn::scalar_value(discriminator_loss(pred, batch)) ==
          doctest::Approx(0.25));
  }
  {
    std::vector<const prep::TrajectoryTensor*> batch{&a, &b};
    Mat p(2, 1);
    p(0, 0) = 0.5;
    p(1, 0) = 1.0;
    CHECK(nn::scalar_value(discriminator_loss(nn::constant(p), batch)) == 0.0);
    Mat q(2, 1);
    q(0, 0) = 1.5;  // errors 1 and 1
    q(1, 0) = 0.0;
    CHECK(nn::scalar_value(discriminator_loss(nn::constant(q), batch)) ==
          doctest::Approx(1.0));
  }
}

TEST_CASE("composite loss gradient matches finite differences on a toy") {
  AgruModel m(toy_config(1.0, 10.0), 4, 2);
  auto t1 = toy_tensor("a", {1, 1, 0}, 3.0);
  auto t2 = toy_tensor("b", {1, 0, 1}, 4.0);
  std::vector<const prep::TrajectoryTensor*> batch{&t1, &t2};

  auto params = m.all_params();
  auto build = [&] {
    auto z = m.encode_batch(batch_windows(batch));
    auto decoded = m.decode_batch(z, 3);
    auto rec = reconstruction_loss(decoded, batch, 2, 100.0);
    auto l_d = discriminator_loss(m.discriminate(z), batch);
    return adversarial_total(rec.l_r, l_d, 1.0, 10.0);
  };

  std::vector<nn::Parameter*> ps = params;
  Var loss = build();
  nn::zero_grad(ps);
  nn::backward(loss);
  std::vector<Mat> analytic;
  for (auto* p : ps) analytic.push_back(p->node->grad);

  const double h = 1e-4;
  double worst = 0.0;
  for (std::size_t pi = 0; pi < ps.size(); ++pi) {
    Mat& val = ps[pi]->node->val;
    for (std::size_t i = 0; i < val.size(); ++i) {
      const double saved = val.values()[i];
      val.values()[i] = saved + h;
      const double up = nn::scalar_value(build());
      val.values()[i] = saved - h;
      const double down = nn::scalar_value(build());
      val.values()[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = analytic[pi].values()[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("encode is deterministic and order-sensitive") {
  AgruModel m(toy_config(), 4, 2);
  auto t = toy_tensor("a", {1, 1, 0}, 5.0);
  Mat z1 = m.encode({t});
  Mat z2 = m.encode({t});
  CHECK(z1.values() == z2.values());
  CHECK(z1.cols() == 4);

  // swap two distinct data windows
  auto swapped = t;
  for (std::size_t c = 0; c < 4; ++c)
    std::swap(swapped.x(0, c), swapped.x(1, c));
  Mat z3 = m.encode({swapped});
  bool differs = false;
  for (std::size_t i = 0; i < z1.size(); ++i)
    if (z1.values()[i] != z3.values()[i]) differs = true;
  CHECK(differs);
}

TEST_CASE("decode shape and binary range") {
  AgruModel m(toy_config(), 4, 2);
  auto t = toy_tensor("a", {1, 1, 1}, 6.0);
  auto z = m.encode_batch(batch_windows({&t}));
  auto decoded = m.decode_batch(z, 3);
  REQUIRE(decoded.size() == 3);
  for (const auto& d : decoded) {
    CHECK(d->val.rows() == 1);
    CHECK(d->val.cols() == 4);
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(d->val(0, c) > 0.0);
      CHECK(d->val(0, c) < 1.0);
    }
  }
  auto n_w = m.discriminate(z);
  CHECK(n_w->val(0, 0) > 0.0);
  CHECK(n_w->val(0, 0) < 1.0);
}

TEST_CASE("parameter partition covers all parameters exactly once") {
  AgruModel m(toy_config(), 4, 2);
  auto ae = m.ae_params();
  auto disc = m.disc_params();
  auto all = m.all_params();
  CHECK(ae.size() + disc.size() == all.size());
  for (auto* d : disc)
    for (auto* a : ae) CHECK(a != d);
}

TEST_CASE("single-sample overfit drives reconstruction error down") {
  auto cfg = toy_config(0.0);
  cfg.feature_embed_dim = 8;
  cfg.n_z = 8;
  cfg.hidden = 8;
  AgruModel m(cfg, 4, 2);
  auto t = toy_tensor("a", {1, 0, 1}, 8.0);
  std::vector<const prep::TrajectoryTensor*> batch{&t};

  auto params = m.ae_params();
  nn::Adam opt({.lr = 0.02});
  for (int it = 0; it < 600; ++it) {
    auto z = m.encode_batch(batch_windows(batch));
    auto rec = reconstruction_loss(m.decode_batch(z, 3), batch, 2, 100.0);
    nn::zero_grad(params);
    nn::backward(rec.l_r);
    opt.step(params);
  }

  auto z = m.encode_batch(batch_windows(batch));
  auto decoded = m.decode_batch(z, 3);
  double worst = 0.0;
  for (std::size_t w = 0; w < 3; ++w) {
    if (!t.presence[w]) continue;
    for (std::size_t c = 0; c < 4; ++c)
      worst = std::max(worst, std::abs(decoded[w]->val(0, c) - t.x(w, c)));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("training is deterministic and tracks the best validation epoch") {
  std::vector<prep::TrajectoryTensor> data;
  Rng rng(2);
  for (int i = 0; i < 48; ++i) {
    std::vector<char> presence(3, 0);
    const int len = 1 + static_cast<int>(rng.uniform_index(3));
    for (int w = 0; w < len; ++w) presence[static_cast<std::size_t>(w)] = 1;
    data.push_back(toy_tensor("p" + std::to_string(i), presence,
                              static_cast<double>(i)));
  }
  auto cfg = toy_config(1.0, 0.01);
  cfg.batch_size = 16;
  cfg.epochs = 3;

  auto r1 = train(data, 2, cfg);
  auto r2 = train(data, 2, cfg);
  REQUIRE(r1.log.epochs.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(r1.log.epochs[e].train_l_r == r2.log.epochs[e].train_l_r);
    CHECK(r1.log.epochs[e].val_l_r == r2.log.epochs[e].val_l_r);
    CHECK(std::isfinite(r1.log.epochs[e].val_l_r));
  }
  CHECK(r1.log.best_epoch == r2.log.best_epoch);

  Mat e1 = r1.model.encode(data);
  Mat e2 = r2.model.encode(data);
  CHECK(e1.values() == e2.values());

  CHECK_THROWS(train(data, 2, [&] {
    auto bad = cfg;
    bad.batch_size = 48;  // dataset < 2 * batch
    return bad;
  }()));
}

TEST_CASE("time delta transform compresses to data windows plus gap feature") {
  std::vector<prep::TrajectoryTensor> data;
  {
    prep::TrajectoryTensor t;
    t.patient_id = "sparse";
    t.x = Mat(10, 2);
    t.presence.assign(10, 0);
    t.presence[0] = t.presence[9] = 1;
    t.x(0, 0) = 1.0;
    t.x(9, 0) = 1.0;
    for (std::size_t w = 0; w < 10; ++w) t.x(w, 1) = t.presence[w] ? 0.5 : -0.1;
    t.n_w = 0.2;
    data.push_back(t);
  }
  {
    prep::TrajectoryTensor t;
    t.patient_id = "dense";
    t.x = Mat(10, 2);
    t.presence.assign(10, 1);
    for (std::size_t w = 0; w < 10; ++w) t.x(w, 1) = 0.5;
    t.n_w = 1.0;
    data.push_back(t);
  }

  auto out = time_delta_transform(data);
  REQUIRE(out.size() == 2);
  // padded to the cohort max data-window count (10), one extra feature
  CHECK(out[0].x.rows() == 10);
  CHECK(out[0].x.cols() == 3);
  // sparse patient: rows 0,1 are old windows 0,9 with gaps [0, 9]
  CHECK(out[0].x(0, 2) == 0.0);
  CHECK(out[0].x(1, 2) == 9.0);
  CHECK(out[0].x(1, 0) == 1.0);
  CHECK(out[0].length() == 2);
  CHECK(out[0].n_w == doctest::Approx(0.2));  // n_w keeps its original value
  // dense patient: gaps all 1 after the first
  CHECK(out[1].x(0, 2) == 0.0);
  for (std::size_t w = 1; w < 10; ++w) CHECK(out[1].x(w, 2) == 1.0);
}

TEST_CASE("checkpoint reload is bit exact") {
  AgruModel m(toy_config(), 4, 2);
  auto t = toy_tensor("a", {1, 1, 0}, 9.0);
  const std::string path =
      (std::filesystem::temp_directory_path() / "model_test.json").string();
  m.save(path);
  auto back = AgruModel::load(path);
  CHECK(back.encode({t}).values() == m.encode({t}).values());
  CHECK(back.config().alpha == m.config().alpha);
}

TEST_CASE("model config validation") {
  auto cfg = toy_config();
  cfg.beta = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = toy_config();
  cfg.alpha = -1.0;
  CHECK_THROWS(cfg.validate());
  cfg = toy_config();
  cfg.train_fraction = 1.0;
  CHECK_THROWS(cfg.validate());
}
