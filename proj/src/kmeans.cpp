#include "shna/kmeans.hpp"

#include <limits>
#include <random>

#include "shna/error.hpp"
#include "shna/log.hpp"

namespace shna {
namespace {

Eigen::MatrixXd plus_plus_init(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd c(k, x.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  c.row(0) = x.row(pick(rng));
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = (x.row(i) - c.row(0)).squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (chosen = 0; chosen < n - 1; ++chosen) {
        r -= d2(chosen);
        if (r <= 0.0) break;
      }
    } else {
      chosen = pick(rng);
    }
    c.row(j) = x.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), (x.row(i) - c.row(j)).squaredNorm());
  }
  return c;
}

KMeansResult lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centroids, int max_iters) {
  const Eigen::Index n = x.rows();
  const int k = static_cast<int>(centroids.rows());
  KMeansResult res;
  res.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);

  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = (x.row(i) - centroids.row(j)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      dist[static_cast<std::size_t>(i)] = best_d;
      if (res.labels[static_cast<std::size_t>(i)] != best) {
        res.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    res.iterations = iter + 1;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(res.labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        centroids.row(j) = sums.row(j) / counts[static_cast<std::size_t>(j)];
        continue;
      }
      // Empty cluster: move it to the worst-served point.
      Eigen::Index far = 0;
      for (Eigen::Index i = 1; i < n; ++i)
        if (dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(far)]) far = i;
      centroids.row(j) = x.row(far);
      dist[static_cast<std::size_t>(far)] = 0.0;
      res.labels[static_cast<std::size_t>(far)] = j;
      ++res.empty_cluster_repairs;
      changed = true;
      log::debug("k-means: re-seeded empty cluster " + std::to_string(j));
    }
    if (!changed) break;
  }

  res.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    res.inertia += (x.row(i) - centroids.row(res.labels[static_cast<std::size_t>(i)])).squaredNorm();
  res.centroids = std::move(centroids);
  return res;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& options) {
  if (k < 1) throw UsageError("k-means: k must be positive");
  if (points.rows() < k) throw UsageError("k-means: fewer points than clusters");
  if (!points.allFinite()) throw UsageError("k-means: non-finite input");

  std::mt19937_64 rng(options.seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    auto run = lloyd(points, plus_plus_init(points, k, rng), options.max_iters);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  // Canonical numbering: first appearance order.
  std::vector<int> remap(static_cast<std::size_t>(k), -1);
  int next = 0;
  for (int& l : best.labels) {
    auto& slot = remap[static_cast<std::size_t>(l)];
    if (slot < 0) slot = next++;
    l = slot;
  }
  for (auto& slot : remap)
    if (slot < 0) slot = next++;
  Eigen::MatrixXd c(best.centroids.rows(), best.centroids.cols());
  for (int j = 0; j < k; ++j) c.row(remap[static_cast<std::size_t>(j)]) = best.centroids.row(j);
  best.centroids = std::move(c);
  if (best.empty_cluster_repairs > 0)
    log::info("k-means: " + std::to_string(best.empty_cluster_repairs) + " empty-cluster repair(s)");
  return best;
}

}  // namespace shna
