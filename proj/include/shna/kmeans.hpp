#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace shna {

struct KMeansOptions {
  int max_iters = 300;
  /// Independent k-means++ restarts; the lowest-inertia run wins.
  int restarts = 10;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  /// Cluster id per row, renumbered in order of first appearance.
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  int iterations = 0;
  int empty_cluster_repairs = 0;
};

/// Lloyd's algorithm over the rows of `points`. An emptied cluster is
/// re-seeded at the point farthest from its current centroid.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& options = {});

}  // namespace shna
