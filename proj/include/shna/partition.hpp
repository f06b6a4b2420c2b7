#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "shna/network.hpp"

namespace shna {

struct PartitionConfig {
  int k = 4;
  double alpha = 1.0;
  double beta = 1.0;
  double theta = 80.0;
  double rho1 = 1e3;
  double rho2 = 1e3;
  /// Initial step length for each H1 / H2 step.
  double eta1 = 1e-3;
  double eta2 = 1e-3;
  /// Halve the step until the objective does not increase. When false the
  /// fixed steps eta1 / eta2 are taken as-is.
  bool backtracking = true;
  int max_iters = 300;
  /// Stop once the relative objective decrease of one iteration is below tol.
  double tol = 1e-6;
  std::uint64_t seed = 42;

  /// Throws UsageError on a nonpositive weight (theta may be zero) or a k
  /// outside [2, min(n1, n2)].
  void validate(std::size_t n1, std::size_t n2) const;
};

/// L = D - S for a symmetric proximity matrix S.
struct Laplacian {
  SparseMatrix L;
  Eigen::VectorXd degree;  // diagonal of D
};

Laplacian make_laplacian(const SparseMatrix& proximity);

struct TraceEntry {
  int iter = 0;
  double objective = 0.0;
  double ncut1 = 0.0;
  double ncut2 = 0.0;
  double discrepancy = 0.0;
};

struct PartitionState {
  Eigen::MatrixXd H1;  // |U1| x k belonging confidence
  Eigen::MatrixXd H2;  // |U2| x k
  Laplacian lap1;
  Laplacian lap2;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  bool converged = false;
  bool random_init = false;
};

/// Tr(H^T L H).
double ncut_value(const Eigen::MatrixXd& H, const SparseMatrix& L);

/// Confidence transported from the partner network: S * H_other. Use the
/// transpose of S for the reverse direction.
Eigen::MatrixXd transition_confidence(const SparseMatrix& s_inter, const Eigen::MatrixXd& h_other);

/// ||S H2 H2^T S^T - H1 H1^T||_F^2 + ||S^T H1 H1^T S - H2 H2^T||_F^2.
/// Evaluated through k x k Gram matrices, never forming n x n products.
double discrepancy(const Eigen::MatrixXd& H1, const Eigen::MatrixXd& H2, const SparseMatrix& s_inter);

struct ObjectiveTerms {
  double ncut1 = 0.0;
  double ncut2 = 0.0;
  double discrepancy = 0.0;
  double penalty1 = 0.0;  // ||H1^T D1 H1 - I||_F^2
  double penalty2 = 0.0;
  double total = 0.0;
};

ObjectiveTerms objective_terms(const PartitionState& state, const PartitionConfig& config,
                               const SparseMatrix& s_inter);

/// alpha*Ncut1 + beta*Ncut2 + theta*discrepancy + rho1*pen1 + rho2*pen2.
double joint_objective(const PartitionState& state, const PartitionConfig& config,
                       const SparseMatrix& s_inter);

/// Analytic gradient of joint_objective with respect to H1 (which == 1) or
/// H2 (which == 2).
Eigen::MatrixXd gradient_H(const PartitionState& state, const PartitionConfig& config,
                           const SparseMatrix& s_inter, int which);

/// D^{-1/2} times the top-k eigenvectors of D^{-1/2} S D^{-1/2}, so that
/// H^T D H = I. Returns an empty matrix if the eigensolve is not usable.
Eigen::MatrixXd spectral_embedding(const SparseMatrix& proximity, int k);

/// Laplacians plus spectral warm start (seeded random fallback).
PartitionState initialize_partition(const SparseMatrix& s1, const SparseMatrix& s2,
                                    const PartitionConfig& config);

/// Alternating descent: one step on H1 then one on H2 per iteration.
/// Throws DivergenceError if the objective rises ten iterations in a row.
PartitionState synergistic_partition(const SparseMatrix& s1, const SparseMatrix& s2,
                                     const SparseMatrix& s_inter, const PartitionConfig& config);

/// Continues the descent from an existing state.
void run_descent(PartitionState& state, const SparseMatrix& s_inter, const PartitionConfig& config);

struct ClusterAssignment {
  int k = 0;
  std::vector<int> labels1;
  std::vector<int> labels2;

  /// User indices of cluster `id` in network 1 or 2, ascending.
  std::vector<Index> members(int network, int id) const;
};

/// K-means over the rows of H1 and H2.
ClusterAssignment extract_clusters(const PartitionState& state, int k, std::uint64_t seed);

/// One sub-network per cluster, users in ascending index order.
std::vector<HeterogeneousNetwork> extract_subnetworks(const HeterogeneousNetwork& net,
                                                      const std::vector<int>& labels, int k);

void write_clusters(const HeterogeneousNetwork& net, const std::vector<int>& labels,
                    const std::filesystem::path& file);
std::vector<int> load_clusters(const HeterogeneousNetwork& net, const std::filesystem::path& file);

/// iter, objective, ncut1, ncut2, discrepancy
void write_trace(const std::vector<TraceEntry>& trace, const std::filesystem::path& file);

}  // namespace shna
