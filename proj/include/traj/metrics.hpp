#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "traj/mat.hpp"

namespace traj::metrics {

struct KnnErrorConfig {
  std::size_t sample_size = 1000;  // shrunk to the cohort size if larger
  std::size_t neighbors = 5;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// K nearest rows of `embeddings` to row `query` (query excluded), ordered
// by (distance, index).
std::vector<std::size_t> nearest_neighbors(const Mat& embeddings,
                                           std::size_t query, std::size_t k);

// RMSE between each sampled patient's trajectory length and the mean
// length of its K nearest embedding-space neighbors; mean +- std over
// fresh resamples.
MeanStd knn_error(const Mat& embeddings, const std::vector<int>& lengths,
                  const KnnErrorConfig& config);

struct SurrogateConfig {
  std::size_t trees = 100;
  std::size_t max_depth = 8;
  double train_fraction = 0.7;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
};

// Random forest with Gini splits, per-tree bootstrap and sqrt(d) feature
// subsampling; multi-class via leaf class distributions.
class RandomForest {
 public:
  void fit(const Mat& x, const std::vector<int>& labels, std::size_t n_classes,
           std::size_t trees, std::size_t max_depth, std::uint64_t seed);
  std::vector<double> predict_proba(const double* x) const;
  std::size_t n_classes() const { return n_classes_; }

 private:
  struct TreeNode {
    int feature = -1;      // -1 = leaf
    double threshold = 0;  // go left if x[feature] <= threshold
    int left = -1, right = -1;
    std::vector<double> distribution;  // leaves only
  };
  struct Tree {
    std::vector<TreeNode> nodes;
  };
  std::size_t n_classes_ = 0;
  std::vector<Tree> trees_;
};

// One-vs-rest area under the precision-recall curve from ranked scores.
double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& is_positive);

// Macro one-vs-rest average precision of a surrogate forest predicting
// cluster labels from window-presence vectors, over stratified splits;
// mean +- std across repeats.
MeanStd surrogate_precision(const Mat& presence_vectors,
                            const std::vector<int>& cluster_labels,
                            const SurrogateConfig& config);

double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b);

}  // namespace traj::metrics
