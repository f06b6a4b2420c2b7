#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "shna/matching.hpp"
#include "shna/meta_diagram.hpp"

namespace shna {

struct AlignmentConfig {
  /// Trade-off between the squared loss and the weight norm.
  double c = 10.0;
  int max_iters = 50;
  /// A candidate can be labeled positive only if its score reaches this.
  double threshold = 0.5;
};

/// Candidate links of one matched sub-network pair.
struct AlignmentProblem {
  /// All (net1 user, net2 user) pairs of the sub-network pair, row-major over
  /// users1 x users2. Global user indices.
  std::vector<AnchorLink> candidates;
  /// |H| x (f + 1): one column per inter diagram, last column all ones.
  Eigen::MatrixXd X;
  /// 1 for candidates that are labeled anchors.
  std::vector<char> labeled;
  /// Node-link incidence matrices, |U_a| x |H| and |U_b| x |H|.
  SparseMatrix A1;
  SparseMatrix A2;

  /// Throws ValidationError on a malformed problem (incidence columns not
  /// one-hot, missing bias column, labeled links violating one-to-one).
  void validate() const;
};

/// Per-diagram InterMD-Pro scores over the whole aligned pair, in the order
/// of `diagrams`. Anchor paths use the pair's labeled anchors.
std::vector<SparseMatrix> inter_feature_maps(const AlignedPair& aligned,
                                             std::span<const MetaDiagram> diagrams);

/// Feature rows for the candidates of `pair`, looked up in the per-diagram
/// score maps, plus the trailing bias column.
Eigen::MatrixXd extract_features(const MatchedPair& pair, std::span<const SparseMatrix> feature_maps);

Eigen::MatrixXd extract_features(const MatchedPair& pair, const AlignedPair& aligned,
                                 std::span<const MetaDiagram> diagrams);

AlignmentProblem build_problem(const MatchedPair& pair, std::span<const SparseMatrix> feature_maps);

/// w = c (I + c X^T X)^{-1} X^T y, the minimizer of
/// (c/2)||Xw - y||^2 + (1/2)||w||^2.
Eigen::VectorXd solve_w(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double c);

/// Labeled links first, then the rest in descending score (ties by index):
/// a link is taken if its score reaches `threshold` and neither endpoint is
/// already used. Returns a 0/1 vector.
Eigen::VectorXd greedy_select(const Eigen::VectorXd& y_hat, const SparseMatrix& A1, const SparseMatrix& A2,
                              std::span<const char> labeled, double threshold = 0.5);

struct AlignmentSolution {
  Eigen::VectorXd w;
  Eigen::VectorXd y;
  Eigen::VectorXd y_hat;
  /// ||y_i - y_{i-1}||_1 per iteration.
  std::vector<double> delta_y;
  int iterations = 0;
  bool converged = false;
  /// The label sequence revisited an earlier state; the best-objective
  /// iterate is returned.
  bool oscillated = false;
};

/// Alternates solve_w and greedy_select until the labels stop changing.
AlignmentSolution align_pair(const AlignmentProblem& problem, const AlignmentConfig& config = {});

/// Runs align_pair over all problems on `threads` workers; results are in
/// input order regardless of scheduling.
std::vector<AlignmentSolution> align_all(std::span<const AlignmentProblem> problems,
                                         const AlignmentConfig& config, int threads);

struct Prediction {
  AnchorLink link;
  int label = 0;
  double score = 0.0;
  int pair_rank = 0;
  bool labeled = false;
};

/// Concatenates the per-pair candidates in pair order. Links outside every
/// pair are pruned, i.e. implicitly negative. Throws std::logic_error if two
/// pairs predict links sharing a user.
std::vector<Prediction> aggregate(std::span<const MatchedPair> pairs,
                                  std::span<const AlignmentProblem> problems,
                                  std::span<const AlignmentSolution> solutions);

/// u1, u2, label, score (user identifiers).
void write_predictions(std::span<const Prediction> predictions, const HeterogeneousNetwork& net1,
                       const HeterogeneousNetwork& net2, const std::filesystem::path& file);

/// Reads the positive rows of a predictions file.
std::vector<AnchorLink> load_positive_predictions(const std::filesystem::path& file,
                                                  const HeterogeneousNetwork& net1,
                                                  const HeterogeneousNetwork& net2);

/// pair_rank, iter, delta_y
void write_convergence(std::span<const MatchedPair> pairs, std::span<const AlignmentSolution> solutions,
                       const std::filesystem::path& file);

}  // namespace shna
