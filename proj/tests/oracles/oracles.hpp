#pragma once

// Brute-force reference implementations. Deliberately naive and kept apart
// from the production arithmetic: walks are enumerated edge by edge, scores
// are evaluated one scalar at a time, matrices are dense loops.

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "shna/meta_diagram.hpp"
#include "shna/network.hpp"

namespace oracle {

struct Budget {
  std::size_t max_users = 20;
  std::size_t max_edges = 60;
  std::size_t max_candidates = 26;
};

struct BudgetExceeded : std::length_error {
  using std::length_error::length_error;
};

using Table = std::vector<std::vector<double>>;

/// Number of typed walks matching `path` from user x to user y.
long long enumerate_paths(const shna::HeterogeneousNetwork& net, shna::MetaPath path, shna::Index x,
                          shna::Index y, const Budget& budget = {});
long long enumerate_paths(const shna::AlignedPair& pair, shna::MetaPath path, shna::Index x, shna::Index y,
                          const Budget& budget = {});

/// Full count tables, entry [x][y], built from enumerate_paths.
Table path_table(const shna::HeterogeneousNetwork& net, shna::MetaPath path, const Budget& budget = {});
Table path_table(const shna::AlignedPair& pair, shna::MetaPath path, const Budget& budget = {});

/// Diagram counts: elementwise product of the factor tables.
Table diagram_table(const shna::HeterogeneousNetwork& net, const shna::MetaDiagram& diagram,
                    const Budget& budget = {});
Table diagram_table(const shna::AlignedPair& pair, const shna::MetaDiagram& diagram, const Budget& budget = {});

/// Scalar intra-network score of one diagram for the pair (x, y).
double intra_score(const Table& counts, std::size_t x, std::size_t y);
/// Scalar inter-network score of one diagram.
double inter_score(const Table& counts, std::size_t x, std::size_t y);

/// y minimising ||X w - y||^2 over labelings with labeled links fixed to 1 and
/// every user in at most one selected link. `ends` holds the (left, right)
/// local user of each candidate.
std::vector<int> exhaustive_alignment(const Eigen::MatrixXd& X, const std::vector<char>& labeled,
                                      const std::vector<std::pair<int, int>>& ends, const Eigen::VectorXd& w,
                                      const Budget& budget = {});

/// Central differences, one entry at a time.
Eigen::MatrixXd finite_difference_gradient(const std::function<double(const Eigen::MatrixXd&)>& f,
                                           const Eigen::MatrixXd& point, double h);

/// Frobenius discrepancy with the n x n products formed explicitly.
double dense_discrepancy(const Eigen::MatrixXd& H1, const Eigen::MatrixXd& H2, const Eigen::MatrixXd& S);

/// Same disagreement split into unordered off-diagonal pairs (i < j) and the
/// diagonal: dense = 2 * pairs + diagonal.
struct PairwiseDiscrepancy {
  double pairs = 0.0;
  double diagonal = 0.0;
};
PairwiseDiscrepancy pairwise_discrepancy(const Eigen::MatrixXd& H1, const Eigen::MatrixXd& H2,
                                         const Eigen::MatrixXd& S);

/// Plain normalized spectral clustering: top-k eigenvectors of
/// D^-1/2 S D^-1/2, rows normalised, farthest-first seeding, nearest-seed
/// assignment. Only reliable on cleanly separated inputs.
std::vector<int> spectral_clusters(const Eigen::MatrixXd& S, int k);

/// True when the two labelings induce the same partition.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace oracle
