#include "shna/partition.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "shna/error.hpp"
#include "shna/kmeans.hpp"
#include "shna/log.hpp"
#include "shna/tsv.hpp"

namespace shna {
namespace {

using Eigen::MatrixXd;

constexpr int kMaxHalvings = 60;
constexpr int kDivergencePatience = 10;
// Dense eigensolves above this size are too slow for a warm start.
constexpr Index kMaxDenseEigen = 6000;

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

/// ||P P^T - Q Q^T||_F^2 via k x k Gram matrices.
double gram_gap(const MatrixXd& P, const MatrixXd& Q) {
  const MatrixXd pp = P.transpose() * P;
  const MatrixXd pq = P.transpose() * Q;
  const MatrixXd qq = Q.transpose() * Q;
  const double v = pp.squaredNorm() - 2.0 * pq.squaredNorm() + qq.squaredNorm();
  return std::max(v, 0.0);
}

double orthogonality_penalty(const MatrixXd& H, const Eigen::VectorXd& degree) {
  MatrixXd g = H.transpose() * degree.asDiagonal() * H;
  g.diagonal().array() -= 1.0;
  return g.squaredNorm();
}

MatrixXd random_init(Index n, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0 / std::sqrt(static_cast<double>(k)));
  MatrixXd h(n, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < n; ++i) h(i, j) = u(rng);
  return h;
}

}  // namespace

void PartitionConfig::validate(std::size_t n1, std::size_t n2) const {
  require(k >= 2, "partition: k must be at least 2");
  require(static_cast<std::size_t>(k) <= std::min(n1, n2),
          "partition: k exceeds the user count of a network");
  require(theta >= 0.0 && std::isfinite(theta), "partition: theta must be nonnegative");
  for (auto [name, v] : {std::pair{"alpha", alpha}, {"beta", beta}, {"rho1", rho1},
                         {"rho2", rho2}, {"eta1", eta1}, {"eta2", eta2}, {"tol", tol}})
    require(v > 0.0 && std::isfinite(v), std::string("partition: ") + name + " must be positive");
  require(max_iters >= 0, "partition: max_iters must be nonnegative");
}

Laplacian make_laplacian(const SparseMatrix& s) {
  require(s.rows() == s.cols(), "laplacian: proximity matrix must be square");
  Laplacian out;
  out.degree = Eigen::VectorXd::Zero(s.rows());
  for (Index c = 0; c < s.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(s, c); it; ++it) out.degree(it.row()) += it.value();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(s.nonZeros() + s.rows()));
  for (Index c = 0; c < s.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(s, c); it; ++it)
      if (it.row() != it.col()) t.emplace_back(it.row(), c, -it.value());
  // Diagonal: D(i,i) - S(i,i) = sum of the off-diagonal row entries.
  Eigen::VectorXd diag = out.degree;
  for (Index c = 0; c < s.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(s, c); it; ++it)
      if (it.row() == it.col()) diag(c) -= it.value();
  for (Index i = 0; i < s.rows(); ++i) t.emplace_back(i, i, diag(i));
  out.L.resize(s.rows(), s.cols());
  out.L.setFromTriplets(t.begin(), t.end());
  return out;
}

double ncut_value(const MatrixXd& H, const SparseMatrix& L) {
  require(L.rows() == L.cols() && L.cols() == H.rows(), "ncut: dimension mismatch");
  return (H.transpose() * (L * H)).trace();
}

MatrixXd transition_confidence(const SparseMatrix& s_inter, const MatrixXd& h_other) {
  require(s_inter.cols() == h_other.rows(), "transition_confidence: dimension mismatch");
  return s_inter * h_other;
}

double discrepancy(const MatrixXd& H1, const MatrixXd& H2, const SparseMatrix& s_inter) {
  require(s_inter.rows() == H1.rows() && s_inter.cols() == H2.rows() && H1.cols() == H2.cols(),
          "discrepancy: dimension mismatch");
  const MatrixXd bar1 = s_inter * H2;
  const MatrixXd bar2 = s_inter.transpose() * H1;
  return gram_gap(bar1, H1) + gram_gap(bar2, H2);
}

ObjectiveTerms objective_terms(const PartitionState& st, const PartitionConfig& cfg,
                               const SparseMatrix& s_inter) {
  ObjectiveTerms t;
  t.ncut1 = ncut_value(st.H1, st.lap1.L);
  t.ncut2 = ncut_value(st.H2, st.lap2.L);
  t.discrepancy = discrepancy(st.H1, st.H2, s_inter);
  t.penalty1 = orthogonality_penalty(st.H1, st.lap1.degree);
  t.penalty2 = orthogonality_penalty(st.H2, st.lap2.degree);
  t.total = cfg.alpha * t.ncut1 + cfg.beta * t.ncut2 + cfg.theta * t.discrepancy +
            cfg.rho1 * t.penalty1 + cfg.rho2 * t.penalty2;
  return t;
}

double joint_objective(const PartitionState& st, const PartitionConfig& cfg, const SparseMatrix& s_inter) {
  return objective_terms(st, cfg, s_inter).total;
}

MatrixXd gradient_H(const PartitionState& st, const PartitionConfig& cfg, const SparseMatrix& s_inter,
                    int which) {
  require(which == 1 || which == 2, "gradient_H: which must be 1 or 2");
  const bool first = which == 1;
  const MatrixXd& h = first ? st.H1 : st.H2;
  const MatrixXd& other = first ? st.H2 : st.H1;
  const Laplacian& lap = first ? st.lap1 : st.lap2;
  const double ncut_weight = first ? cfg.alpha : cfg.beta;
  const double rho = first ? cfg.rho1 : cfg.rho2;

  // Let T map the other network's confidences into this one (S or S^T).
  // Own term:     ||T O O^T T^T - H H^T||^2  ->  4 (H (H^T H) - P (P^T H)),  P = T O
  // Partner term: ||T^T H H^T T - O O^T||^2  ->  4 T (R (R^T R) - O (O^T R)), R = T^T H
  MatrixXd p, r, partner;
  if (first) {
    p = s_inter * other;
    r = s_inter.transpose() * h;
  } else {
    p = s_inter.transpose() * other;
    r = s_inter * h;
  }
  const MatrixXd own = h * (h.transpose() * h) - p * (p.transpose() * h);
  const MatrixXd inner = r * (r.transpose() * r) - other * (other.transpose() * r);
  if (first) partner = s_inter * inner;
  else partner = s_inter.transpose() * inner;

  const MatrixXd dh = lap.degree.asDiagonal() * h;
  MatrixXd gram = h.transpose() * dh;
  gram.diagonal().array() -= 1.0;

  return 2.0 * ncut_weight * (lap.L * h) + 4.0 * cfg.theta * (own + partner) + 4.0 * rho * (dh * gram);
}

MatrixXd spectral_embedding(const SparseMatrix& s, int k) {
  const Index n = s.rows();
  if (n < k || n > kMaxDenseEigen) return {};
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (Index c = 0; c < s.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(s, c); it; ++it) degree(it.row()) += it.value();
  Eigen::VectorXd inv_sqrt(n);
  for (Index i = 0; i < n; ++i) inv_sqrt(i) = degree(i) > 0.0 ? 1.0 / std::sqrt(degree(i)) : 0.0;

  const MatrixXd normalized = inv_sqrt.asDiagonal() * MatrixXd(s) * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(normalized);
  if (solver.info() != Eigen::Success) return {};
  // Eigenvalues ascend; the largest of the normalized affinity are the
  // smallest of the normalized Laplacian.
  const MatrixXd top = solver.eigenvectors().rightCols(k).rowwise().reverse();
  MatrixXd h = inv_sqrt.asDiagonal() * top;
  if (!h.allFinite()) return {};
  return h;
}

PartitionState initialize_partition(const SparseMatrix& s1, const SparseMatrix& s2,
                                    const PartitionConfig& cfg) {
  cfg.validate(static_cast<std::size_t>(s1.rows()), static_cast<std::size_t>(s2.rows()));
  PartitionState st;
  st.lap1 = make_laplacian(s1);
  st.lap2 = make_laplacian(s2);
  std::mt19937_64 rng(cfg.seed);
  st.H1 = spectral_embedding(s1, cfg.k);
  st.H2 = spectral_embedding(s2, cfg.k);
  if (st.H1.size() == 0 || st.H2.size() == 0) {
    log::warning("partition: spectral warm start unavailable, using seeded random initialization");
    st.random_init = true;
    st.H1 = random_init(s1.rows(), cfg.k, rng);
    st.H2 = random_init(s2.rows(), cfg.k, rng);
  }
  return st;
}

void run_descent(PartitionState& st, const SparseMatrix& s_inter, const PartitionConfig& cfg) {
  auto record = [&](int iter) {
    const auto t = objective_terms(st, cfg, s_inter);
    st.trace.push_back({iter, t.total, t.ncut1, t.ncut2, t.discrepancy});
    return t.total;
  };
  double current = st.trace.empty() ? record(st.iterations) : st.trace.back().objective;
  int rising = 0;

  auto step = [&](int which) {
    const MatrixXd grad = gradient_H(st, cfg, s_inter, which);
    MatrixXd& h = which == 1 ? st.H1 : st.H2;
    const double eta0 = which == 1 ? cfg.eta1 : cfg.eta2;
    if (!cfg.backtracking) {
      h -= eta0 * grad;
      return;
    }
    const MatrixXd start = h;
    double eta = eta0;
    for (int i = 0; i < kMaxHalvings; ++i, eta *= 0.5) {
      h = start - eta * grad;
      const double f = joint_objective(st, cfg, s_inter);
      if (std::isfinite(f) && f <= current) {
        current = f;
        return;
      }
    }
    h = start;
  };

  while (st.iterations < cfg.max_iters) {
    const double before = current;
    step(1);
    step(2);
    ++st.iterations;
    current = record(st.iterations);
    if (!std::isfinite(current)) {
      throw DivergenceError("partition diverged (non-finite objective at iteration " +
                            std::to_string(st.iterations) + "); reduce eta");
    }
    if (current > before) {
      if (++rising >= kDivergencePatience) {
        std::ostringstream msg;
        msg << "partition diverged: objective increased for " << kDivergencePatience
            << " consecutive iterations (now " << current << "); reduce eta1/eta2 or enable backtracking";
        throw DivergenceError(msg.str());
      }
      continue;
    }
    rising = 0;
    const double decrease = (before - current) / std::max(std::abs(before), 1e-300);
    if (decrease < cfg.tol) {
      st.converged = true;
      break;
    }
  }
}

PartitionState synergistic_partition(const SparseMatrix& s1, const SparseMatrix& s2,
                                     const SparseMatrix& s_inter, const PartitionConfig& cfg) {
  require(s_inter.rows() == s1.rows() && s_inter.cols() == s2.rows(),
          "synergistic_partition: inter proximity dimensions do not match the networks");
  PartitionState st = initialize_partition(s1, s2, cfg);
  run_descent(st, s_inter, cfg);
  return st;
}

std::vector<Index> ClusterAssignment::members(int network, int id) const {
  const auto& labels = network == 1 ? labels1 : labels2;
  std::vector<Index> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == id) out.push_back(static_cast<Index>(i));
  return out;
}

ClusterAssignment extract_clusters(const PartitionState& st, int k, std::uint64_t seed) {
  require(k >= 1, "extract_clusters: k must be positive");
  ClusterAssignment out;
  out.k = k;
  KMeansOptions opts;
  opts.seed = seed;
  out.labels1 = kmeans(st.H1, k, opts).labels;
  opts.seed = seed + 1;
  out.labels2 = kmeans(st.H2, k, opts).labels;
  return out;
}

std::vector<HeterogeneousNetwork> extract_subnetworks(const HeterogeneousNetwork& net,
                                                      const std::vector<int>& labels, int k) {
  require(labels.size() == net.num_users(), "extract_subnetworks: label count mismatch");
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < k, "extract_subnetworks: label out of range");
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
  }
  std::vector<HeterogeneousNetwork> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(net.induced(m));
  return out;
}

void write_clusters(const HeterogeneousNetwork& net, const std::vector<int>& labels,
                    const std::filesystem::path& file) {
  require(labels.size() == net.num_users(), "write_clusters: label count mismatch");
  auto out = tsv::open_output(file);
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << net.id(NodeKind::User, static_cast<Index>(i)) << '\t' << labels[i] << '\n';
}

std::vector<int> load_clusters(const HeterogeneousNetwork& net, const std::filesystem::path& file) {
  std::vector<int> labels(net.num_users(), -1);
  tsv::for_each_row(file, [&](std::span<const std::string_view> f, std::size_t line) {
    const std::string where = file.filename().string() + ":" + std::to_string(line);
    if (f.size() != 2) throw ParseError(where + ": expected 2 columns (user_id, cluster_id)");
    const auto u = net.find(NodeKind::User, f[0]);
    if (!u) throw ValidationError(where + ": unknown user '" + std::string(f[0]) + "'");
    const auto c = tsv::parse_int(f[1], where);
    if (c < 0) throw ValidationError(where + ": negative cluster id");
    labels[static_cast<std::size_t>(*u)] = static_cast<int>(c);
  });
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0)
      throw ValidationError(file.filename().string() + ": user '" +
                            net.id(NodeKind::User, static_cast<Index>(i)) + "' has no cluster");
  return labels;
}

void write_trace(const std::vector<TraceEntry>& trace, const std::filesystem::path& file) {
  auto out = tsv::open_output(file);
  out << "#iter\tobjective\tncut1\tncut2\tdiscrepancy\n";
  for (const auto& t : trace)
    out << t.iter << '\t' << tsv::format_double(t.objective) << '\t' << tsv::format_double(t.ncut1) << '\t'
        << tsv::format_double(t.ncut2) << '\t' << tsv::format_double(t.discrepancy) << '\n';
}

}  // namespace shna
