#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "traj/mat.hpp"

namespace traj::cluster {

struct PcaModel {
  std::vector<double> mean;        // length d_in
  Mat components;                  // d_in x d_out, orthonormal columns
  std::vector<double> explained_variance;  // per component, non-increasing

  std::vector<double> transform(const double* x) const;
  Mat transform(const Mat& data) const;
  // x_hat = mean + components * y; exact for d_out = d_in
  std::vector<double> inverse_transform(const std::vector<double>& y) const;
};

// Centering + projection onto the top eigenvectors of the sample
// covariance. Sign convention: the largest-magnitude coordinate of each
// component is positive.
PcaModel pca_fit(const Mat& data, std::size_t d_out);

struct ClusterAssignment {
  std::vector<int> labels;  // per point
  Mat centroids;            // k x d
  double inertia = 0.0;
};

// k-means++ with Lloyd iterations, best inertia over restarts. Ties in
// nearest-centroid go to the lowest label; an empty cluster is reseeded at
// the point farthest from its centroid.
ClusterAssignment kmeans(const Mat& points, std::size_t k,
                         std::size_t restarts, std::uint64_t seed,
                         std::size_t max_iters = 300);

struct LengthStats {
  int cluster = 0;
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

std::vector<LengthStats> cluster_length_stats(
    const std::vector<int>& labels, const std::vector<int>& lengths);

void write_length_stats_csv(const std::vector<LengthStats>& stats,
                            const std::string& path);

}  // namespace traj::cluster
