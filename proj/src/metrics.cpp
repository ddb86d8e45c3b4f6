#include "traj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "traj/rng.hpp"

namespace traj::metrics {

std::vector<std::size_t> nearest_neighbors(const Mat& embeddings,
                                           std::size_t query, std::size_t k) {
  const std::size_t n = embeddings.rows();
  if (n < k + 1)
    throw std::invalid_argument("nearest_neighbors: cohort smaller than K+1");
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == query) continue;
    dist.emplace_back(
        kernels::sq_dist(embeddings.row(query), embeddings.row(j),
                         embeddings.cols()),
        j);
  }
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   dist.end());
  std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
  return out;
}

MeanStd knn_error(const Mat& embeddings, const std::vector<int>& lengths,
                  const KnnErrorConfig& config) {
  const std::size_t n = embeddings.rows();
  if (lengths.size() != n)
    throw std::invalid_argument("knn_error: lengths misaligned");
  if (config.neighbors < 1 || n < config.neighbors + 1)
    throw std::invalid_argument("knn_error: cohort smaller than K+1");
  const std::size_t sample = std::min(config.sample_size, n);

  std::vector<double> errors;
  for (std::size_t rep = 0; rep < config.repeats; ++rep) {
    Rng rng(derive_seed(config.seed, "knn/repeat/" + std::to_string(rep)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    idx.resize(sample);
    // accumulation order independent of the shuffle
    std::sort(idx.begin(), idx.end());

    double sq = 0.0;
    for (std::size_t i : idx) {
      auto nb = nearest_neighbors(embeddings, i, config.neighbors);
      double t_knn = 0.0;
      for (std::size_t j : nb) t_knn += static_cast<double>(lengths[j]);
      t_knn /= static_cast<double>(config.neighbors);
      const double d = t_knn - static_cast<double>(lengths[i]);
      sq += d * d;
    }
    errors.push_back(std::sqrt(sq / static_cast<double>(sample)));
  }

  MeanStd out;
  for (double e : errors) out.mean += e;
  out.mean /= static_cast<double>(errors.size());
  if (errors.size() > 1) {
    double var = 0.0;
    for (double e : errors) var += (e - out.mean) * (e - out.mean);
    out.std = std::sqrt(var / static_cast<double>(errors.size() - 1));
  }
  return out;
}

namespace {

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

}  // namespace

void RandomForest::fit(const Mat& x, const std::vector<int>& labels,
                       std::size_t n_classes, std::size_t trees,
                       std::size_t max_depth, std::uint64_t seed) {
  if (x.rows() != labels.size())
    throw std::invalid_argument("RandomForest::fit: size mismatch");
  if (trees < 1) throw std::invalid_argument("RandomForest::fit: trees >= 1");
  n_classes_ = n_classes;
  trees_.clear();
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t mtry = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(d)))));

  for (std::size_t t = 0; t < trees; ++t) {
    Rng rng(derive_seed(seed, "forest/tree/" + std::to_string(t)));
    std::vector<std::size_t> sample(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = rng.uniform_index(n);

    Tree tree;
    // recursive build over index ranges
    struct Frame {
      std::vector<std::size_t> idx;
      std::size_t depth;
      int slot;
    };
    std::vector<Frame> stack;
    tree.nodes.emplace_back();
    stack.push_back({sample, 0, 0});
    while (!stack.empty()) {
      Frame f = std::move(stack.back());
      stack.pop_back();

      std::vector<std::size_t> counts(n_classes, 0);
      for (std::size_t i : f.idx)
        ++counts[static_cast<std::size_t>(labels[i])];
      const double node_gini = gini(counts, f.idx.size());

      auto make_leaf = [&]() {
        TreeNode& node = tree.nodes[static_cast<std::size_t>(f.slot)];
        node.feature = -1;
        node.distribution.assign(n_classes, 0.0);
        for (std::size_t c = 0; c < n_classes; ++c)
          node.distribution[c] = static_cast<double>(counts[c]) /
                                 static_cast<double>(f.idx.size());
      };
      if (f.depth >= max_depth || f.idx.size() < 2 || node_gini == 0.0) {
        make_leaf();
        continue;
      }

      // candidate features: mtry drawn without replacement
      std::vector<std::size_t> feats(d);
      std::iota(feats.begin(), feats.end(), 0);
      rng.shuffle(feats);
      feats.resize(mtry);

      int best_feature = -1;
      double best_threshold = 0.0, best_score = node_gini;
      for (std::size_t feat : feats) {
        // midpoints of distinct sorted values
        std::vector<double> vals;
        vals.reserve(f.idx.size());
        for (std::size_t i : f.idx) vals.push_back(x(i, feat));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
          const double thr = 0.5 * (vals[v] + vals[v + 1]);
          std::vector<std::size_t> lc(n_classes, 0), rc(n_classes, 0);
          std::size_t ln = 0, rn = 0;
          for (std::size_t i : f.idx) {
            if (x(i, feat) <= thr) {
              ++lc[static_cast<std::size_t>(labels[i])];
              ++ln;
            } else {
              ++rc[static_cast<std::size_t>(labels[i])];
              ++rn;
            }
          }
          const double score =
              (static_cast<double>(ln) * gini(lc, ln) +
               static_cast<double>(rn) * gini(rc, rn)) /
              static_cast<double>(f.idx.size());
          if (score < best_score - 1e-12) {
            best_score = score;
            best_feature = static_cast<int>(feat);
            best_threshold = thr;
          }
        }
      }
      if (best_feature < 0) {
        make_leaf();
        continue;
      }

      std::vector<std::size_t> left, right;
      for (std::size_t i : f.idx) {
        if (x(i, static_cast<std::size_t>(best_feature)) <= best_threshold)
          left.push_back(i);
        else
          right.push_back(i);
      }
      const int li = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      const int ri = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[static_cast<std::size_t>(f.slot)];
      node.feature = best_feature;
      node.threshold = best_threshold;
      node.left = li;
      node.right = ri;
      stack.push_back({std::move(left), f.depth + 1, li});
      stack.push_back({std::move(right), f.depth + 1, ri});
    }
    trees_.push_back(std::move(tree));
  }
}

std::vector<double> RandomForest::predict_proba(const double* x) const {
  std::vector<double> proba(n_classes_, 0.0);
  for (const Tree& tree : trees_) {
    int i = 0;
    while (tree.nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const TreeNode& node = tree.nodes[static_cast<std::size_t>(i)];
      i = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    const auto& dist = tree.nodes[static_cast<std::size_t>(i)].distribution;
    for (std::size_t c = 0; c < n_classes_; ++c) proba[c] += dist[c];
  }
  for (double& p : proba) p /= static_cast<double>(trees_.size());
  return proba;
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& is_positive) {
  if (scores.size() != is_positive.size())
    throw std::invalid_argument("average_precision: size mismatch");
  std::size_t total_pos = 0;
  for (int p : is_positive) total_pos += p ? 1 : 0;
  if (total_pos == 0) return 0.0;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  // step formula over unique score thresholds
  double ap = 0.0;
  std::size_t tp = 0, seen = 0, prev_tp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (is_positive[order[j]]) ++tp;
      ++seen;
      ++j;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    const double delta_recall =
        static_cast<double>(tp - prev_tp) / static_cast<double>(total_pos);
    ap += precision * delta_recall;
    prev_tp = tp;
    i = j;
  }
  return ap;
}

MeanStd surrogate_precision(const Mat& presence_vectors,
                            const std::vector<int>& cluster_labels,
                            const SurrogateConfig& config) {
  const std::size_t n = presence_vectors.rows();
  if (cluster_labels.size() != n)
    throw std::invalid_argument("surrogate_precision: size mismatch");
  int max_label = 0;
  for (int l : cluster_labels) max_label = std::max(max_label, l);
  const std::size_t n_classes = static_cast<std::size_t>(max_label) + 1;
  {
    std::vector<bool> present(n_classes, false);
    std::size_t distinct = 0;
    for (int l : cluster_labels)
      if (!present[static_cast<std::size_t>(l)]) {
        present[static_cast<std::size_t>(l)] = true;
        ++distinct;
      }
    if (distinct < 2)
      throw std::invalid_argument("surrogate_precision: need >= 2 clusters");
  }

  std::vector<double> aps;
  for (std::size_t rep = 0; rep < config.repeats; ++rep) {
    Rng rng(derive_seed(config.seed, "surrogate/" + std::to_string(rep)));

    // stratified split
    std::vector<std::size_t> train_idx, test_idx;
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < n; ++i)
      by_class[static_cast<std::size_t>(cluster_labels[i])].push_back(i);
    for (auto& cls : by_class) {
      rng.shuffle(cls);
      const std::size_t cut = static_cast<std::size_t>(
          std::lround(config.train_fraction * static_cast<double>(cls.size())));
      for (std::size_t i = 0; i < cls.size(); ++i)
        (i < cut ? train_idx : test_idx).push_back(cls[i]);
    }
    if (train_idx.empty() || test_idx.empty())
      throw std::invalid_argument("surrogate_precision: split degenerate");

    Mat xtr(train_idx.size(), presence_vectors.cols());
    std::vector<int> ytr(train_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      std::copy(presence_vectors.row(train_idx[i]),
                presence_vectors.row(train_idx[i]) + presence_vectors.cols(),
                xtr.row(i));
      ytr[i] = cluster_labels[train_idx[i]];
    }

    RandomForest forest;
    forest.fit(xtr, ytr, n_classes, config.trees, config.max_depth,
               derive_seed(config.seed, "surrogate/fit/" + std::to_string(rep)));

    std::vector<std::vector<double>> proba;
    proba.reserve(test_idx.size());
    for (std::size_t i : test_idx)
      proba.push_back(forest.predict_proba(presence_vectors.row(i)));

    std::vector<bool> in_train(n_classes, false);
    for (int y : ytr) in_train[static_cast<std::size_t>(y)] = true;

    double macro = 0.0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (!in_train[c]) continue;  // class absent from the train split
      std::vector<double> scores;
      std::vector<int> pos;
      bool any_pos = false;
      for (std::size_t i = 0; i < test_idx.size(); ++i) {
        scores.push_back(proba[i][c]);
        const int is_pos =
            cluster_labels[test_idx[i]] == static_cast<int>(c) ? 1 : 0;
        any_pos = any_pos || is_pos;
        pos.push_back(is_pos);
      }
      if (!any_pos) continue;
      macro += average_precision(scores, pos);
      ++used;
    }
    if (used == 0)
      throw std::runtime_error("surrogate_precision: no scorable class");
    aps.push_back(macro / static_cast<double>(used));
  }

  MeanStd out;
  for (double a : aps) out.mean += a;
  out.mean /= static_cast<double>(aps.size());
  if (aps.size() > 1) {
    double var = 0.0;
    for (double a : aps) var += (a - out.mean) * (a - out.mean);
    out.std = std::sqrt(var / static_cast<double>(aps.size() - 1));
  }
  return out;
}

double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size())
    throw std::invalid_argument("adjusted_rand_index: size mismatch");
  const std::size_t n = labels_a.size();
  if (n < 2) return 1.0;

  int ka = 0, kb = 0;
  for (int l : labels_a) ka = std::max(ka, l + 1);
  for (int l : labels_b) kb = std::max(kb, l + 1);

  std::vector<std::vector<std::size_t>> table(
      static_cast<std::size_t>(ka),
      std::vector<std::size_t>(static_cast<std::size_t>(kb), 0));
  for (std::size_t i = 0; i < n; ++i)
    ++table[static_cast<std::size_t>(labels_a[i])]
           [static_cast<std::size_t>(labels_b[i])];

  auto comb2 = [](std::size_t m) {
    return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
  };

  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  std::vector<std::size_t> bsums(static_cast<std::size_t>(kb), 0);
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::size_t asum = 0;
    for (std::size_t j = 0; j < table[i].size(); ++j) {
      sum_ij += comb2(table[i][j]);
      asum += table[i][j];
      bsums[j] += table[i][j];
    }
    sum_a += comb2(asum);
  }
  for (std::size_t b : bsums) sum_b += comb2(b);

  const double expected = sum_a * sum_b / comb2(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;  // both partitions trivially identical
  return (sum_ij - expected) / denom;
}

}  // namespace traj::metrics
