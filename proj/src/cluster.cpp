#include "traj/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "traj/rng.hpp"

namespace traj::cluster {

namespace {

// cyclic Jacobi eigendecomposition of a symmetric matrix
void jacobi_eigen(Mat a, std::vector<double>& eigenvalues, Mat& eigenvectors) {
  const std::size_t n = a.rows();
  eigenvectors = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i) eigenvectors(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-20) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = eigenvectors(i, p), viq = eigenvectors(i, q);
          eigenvectors(i, p) = c * vip - s * viq;
          eigenvectors(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a(i, i);
}

}  // namespace

std::vector<double> PcaModel::transform(const double* x) const {
  const std::size_t d_in = mean.size();
  const std::size_t d_out = components.cols();
  std::vector<double> centered(d_in);
  for (std::size_t i = 0; i < d_in; ++i) centered[i] = x[i] - mean[i];
  std::vector<double> y(d_out, 0.0);
  for (std::size_t j = 0; j < d_out; ++j)
    for (std::size_t i = 0; i < d_in; ++i)
      y[j] += components(i, j) * centered[i];
  return y;
}

Mat PcaModel::transform(const Mat& data) const {
  Mat out(data.rows(), components.cols());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    auto y = transform(data.row(r));
    std::copy(y.begin(), y.end(), out.row(r));
  }
  return out;
}

std::vector<double> PcaModel::inverse_transform(
    const std::vector<double>& y) const {
  const std::size_t d_in = mean.size();
  std::vector<double> x = mean;
  for (std::size_t j = 0; j < y.size(); ++j)
    for (std::size_t i = 0; i < d_in; ++i) x[i] += components(i, j) * y[j];
  return x;
}

PcaModel pca_fit(const Mat& data, std::size_t d_out) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n < d_out + 1)
    throw std::invalid_argument("pca_fit: need at least d_out + 1 samples");
  d_out = std::min(d_out, d);

  PcaModel m;
  m.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) m.mean[c] += data(r, c);
  for (double& x : m.mean) x /= static_cast<double>(n);

  Mat cov(d, d);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) centered[c] = data(r, c) - m.mean[c];
    for (std::size_t i = 0; i < d; ++i)
      kernels::axpy(centered[i], centered.data(), cov.row(i), d);
  }
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (double& x : cov.values()) x /= denom;

  std::vector<double> eigenvalues;
  Mat eigenvectors;
  jacobi_eigen(cov, eigenvalues, eigenvectors);

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return eigenvalues[a] > eigenvalues[b];
  });

  m.components = Mat(d, d_out);
  m.explained_variance.resize(d_out);
  for (std::size_t j = 0; j < d_out; ++j) {
    const std::size_t src = order[j];
    m.explained_variance[j] = std::max(0.0, eigenvalues[src]);
    // sign convention: largest-magnitude coordinate positive
    std::size_t arg = 0;
    for (std::size_t i = 1; i < d; ++i)
      if (std::abs(eigenvectors(i, src)) > std::abs(eigenvectors(arg, src)))
        arg = i;
    const double sgn = eigenvectors(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i)
      m.components(i, j) = sgn * eigenvectors(i, src);
  }
  return m;
}

namespace {

double nearest_centroid(const double* p, const Mat& centroids, std::size_t d,
                        int& label) {
  double best = std::numeric_limits<double>::infinity();
  label = 0;
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double dist = kernels::sq_dist(p, centroids.row(c), d);
    if (dist < best) {
      best = dist;
      label = static_cast<int>(c);
    }
  }
  return best;
}

ClusterAssignment kmeans_once(const Mat& points, std::size_t k, Rng& rng,
                              std::size_t max_iters) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();

  // k-means++ seeding
  Mat centroids(k, d);
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.uniform_index(n);
  std::copy(points.row(first), points.row(first) + d, centroids.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = kernels::sq_dist(points.row(i), centroids.row(c - 1), d);
      dist2[i] = std::min(dist2[i], d2);
      total += dist2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double run = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        run += dist2[i];
        if (run >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);
    }
    std::copy(points.row(pick), points.row(pick) + d, centroids.row(c));
  }

  std::vector<int> labels(n, -1);
  std::vector<double> point_dist(n, 0.0);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int l;
      point_dist[i] = nearest_centroid(points.row(i), centroids, d, l);
      if (l != labels[i]) {
        labels[i] = l;
        changed = true;
      }
    }

    // recompute centroids; reseed empty clusters at the farthest point
    Mat sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      kernels::axpy(1.0, points.row(i),
                    sums.row(static_cast<std::size_t>(labels[i])), d);
      ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
          if (point_dist[i] > point_dist[far]) far = i;
        std::copy(points.row(far), points.row(far) + d, centroids.row(c));
        labels[far] = static_cast<int>(c);
        point_dist[far] = 0.0;
        changed = true;
        continue;
      }
      for (std::size_t j = 0; j < d; ++j)
        centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }
    if (!changed) break;
  }

  ClusterAssignment out;
  out.centroids = centroids;
  out.labels = labels;
  out.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int l;
    const double d2 = nearest_centroid(points.row(i), centroids, d, l);
    out.labels[i] = l;
    out.inertia += d2;
  }
  return out;
}

}  // namespace

ClusterAssignment kmeans(const Mat& points, std::size_t k,
                         std::size_t restarts, std::uint64_t seed,
                         std::size_t max_iters) {
  if (points.rows() < k)
    throw std::invalid_argument("kmeans: fewer points than clusters");
  if (restarts == 0) restarts = 1;
  ClusterAssignment best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, "kmeans/restart/" + std::to_string(r)));
    ClusterAssignment cur = kmeans_once(points, k, rng, max_iters);
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return 0.0;
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

std::vector<LengthStats> cluster_length_stats(const std::vector<int>& labels,
                                              const std::vector<int>& lengths) {
  if (labels.size() != lengths.size())
    throw std::invalid_argument("cluster_length_stats: size mismatch");
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  std::vector<std::vector<double>> per_cluster(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i)
    per_cluster[static_cast<std::size_t>(labels[i])].push_back(
        static_cast<double>(lengths[i]));
  std::vector<LengthStats> out;
  for (int c = 0; c < k; ++c) {
    auto& v = per_cluster[static_cast<std::size_t>(c)];
    std::sort(v.begin(), v.end());
    LengthStats s;
    s.cluster = c;
    s.count = v.size();
    if (!v.empty()) {
      s.min = v.front();
      s.q1 = quantile_sorted(v, 0.25);
      s.median = quantile_sorted(v, 0.5);
      s.q3 = quantile_sorted(v, 0.75);
      s.max = v.back();
    }
    out.push_back(s);
  }
  return out;
}

void write_length_stats_csv(const std::vector<LengthStats>& stats,
                            const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "cluster,count,min,q1,median,q3,max\n";
  char buf[256];
  for (const auto& s : stats) {
    std::snprintf(buf, sizeof(buf), "%d,%zu,%g,%g,%g,%g,%g\n", s.cluster,
                  s.count, s.min, s.q1, s.median, s.q3, s.max);
    os << buf;
  }
}

}  // namespace traj::cluster
