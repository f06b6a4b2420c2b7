#include "shna/alignment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>

#include "shna/error.hpp"
#include "shna/log.hpp"
#include "shna/proximity.hpp"
#include "shna/tsv.hpp"

namespace shna {
namespace {

/// Row of the single nonzero in each column of a one-hot incidence matrix.
std::vector<Index> column_owner(const SparseMatrix& a, const char* name) {
  std::vector<Index> owner(static_cast<std::size_t>(a.cols()), -1);
  for (Index c = 0; c < a.outerSize(); ++c) {
    int nnz = 0;
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
      if (it.value() != 1.0) throw ValidationError(std::string(name) + ": incidence entries must be 0/1");
      owner[static_cast<std::size_t>(c)] = it.row();
      ++nnz;
    }
    if (nnz != 1)
      throw ValidationError(std::string(name) + ": candidate " + std::to_string(c) +
                            " must touch exactly one user");
  }
  return owner;
}

double step_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& w, const Eigen::VectorXd& y, double c) {
  return 0.5 * c * (X * w - y).squaredNorm() + 0.5 * w.squaredNorm();
}

}  // namespace

void AlignmentProblem::validate() const {
  const auto n = static_cast<Index>(candidates.size());
  if (X.rows() != n) throw ValidationError("alignment problem: X has the wrong number of rows");
  if (X.cols() < 1 || !(X.col(X.cols() - 1).array() == 1.0).all())
    throw ValidationError("alignment problem: last feature column must be the all-ones bias");
  if (!X.allFinite()) throw ValidationError("alignment problem: non-finite features");
  if (static_cast<Index>(labeled.size()) != n) throw ValidationError("alignment problem: label mask size");
  if (A1.cols() != n || A2.cols() != n) throw ValidationError("alignment problem: incidence width");
  const auto o1 = column_owner(A1, "A1");
  const auto o2 = column_owner(A2, "A2");
  std::vector<char> used1(static_cast<std::size_t>(A1.rows()), 0), used2(static_cast<std::size_t>(A2.rows()), 0);
  for (Index l = 0; l < n; ++l) {
    if (!labeled[static_cast<std::size_t>(l)]) continue;
    if (used1[static_cast<std::size_t>(o1[static_cast<std::size_t>(l)])]++ ||
        used2[static_cast<std::size_t>(o2[static_cast<std::size_t>(l)])]++)
      throw ValidationError("alignment problem: labeled links violate one-to-one");
  }
}

std::vector<SparseMatrix> inter_feature_maps(const AlignedPair& aligned, std::span<const MetaDiagram> diagrams) {
  std::vector<SparseMatrix> out;
  out.reserve(diagrams.size());
  for (const auto& d : diagrams) out.push_back(inter_diagram_proximity(count_diagram(aligned, d)));
  return out;
}

Eigen::MatrixXd extract_features(const MatchedPair& pair, std::span<const SparseMatrix> maps) {
  const auto f = static_cast<Index>(maps.size());
  const auto rows = static_cast<Index>(pair.users1.size() * pair.users2.size());
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(rows, f + 1);
  X.col(f).setOnes();
  const auto n2 = static_cast<Index>(pair.users2.size());
  for (Index d = 0; d < f; ++d) {
    const auto& m = maps[static_cast<std::size_t>(d)];
    // Column-major walk over the pair's net2 users, binary search on rows.
    for (Index j = 0; j < n2; ++j) {
      const Index col = pair.users2[static_cast<std::size_t>(j)];
      if (col < 0 || col >= m.cols()) throw UsageError("extract_features: user index out of range");
      for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
        const auto pos = std::lower_bound(pair.users1.begin(), pair.users1.end(), it.row());
        if (pos == pair.users1.end() || *pos != it.row()) continue;
        const Index i = pos - pair.users1.begin();
        X(i * n2 + j, d) = it.value();
      }
    }
  }
  return X;
}

Eigen::MatrixXd extract_features(const MatchedPair& pair, const AlignedPair& aligned,
                                 std::span<const MetaDiagram> diagrams) {
  const auto maps = inter_feature_maps(aligned, diagrams);
  return extract_features(pair, maps);
}

AlignmentProblem build_problem(const MatchedPair& pair, std::span<const SparseMatrix> feature_maps) {
  if (!std::is_sorted(pair.users1.begin(), pair.users1.end()) ||
      !std::is_sorted(pair.users2.begin(), pair.users2.end()))
    throw UsageError("build_problem: pair user lists must be ascending");
  AlignmentProblem p;
  const auto n1 = static_cast<Index>(pair.users1.size());
  const auto n2 = static_cast<Index>(pair.users2.size());
  const Index n = n1 * n2;
  p.candidates.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j)
      p.candidates.push_back({pair.users1[static_cast<std::size_t>(i)], pair.users2[static_cast<std::size_t>(j)]});
  p.X = extract_features(pair, feature_maps);

  p.labeled.assign(static_cast<std::size_t>(n), 0);
  for (const auto& a : pair.known_anchors) {
    const auto i = std::lower_bound(pair.users1.begin(), pair.users1.end(), a.user1) - pair.users1.begin();
    const auto j = std::lower_bound(pair.users2.begin(), pair.users2.end(), a.user2) - pair.users2.begin();
    if (i >= n1 || j >= n2 || pair.users1[static_cast<std::size_t>(i)] != a.user1 ||
        pair.users2[static_cast<std::size_t>(j)] != a.user2)
      throw UsageError("build_problem: known anchor outside the pair");
    p.labeled[static_cast<std::size_t>(i * n2 + j)] = 1;
  }

  std::vector<Eigen::Triplet<double>> t1, t2;
  t1.reserve(static_cast<std::size_t>(n));
  t2.reserve(static_cast<std::size_t>(n));
  for (Index l = 0; l < n; ++l) {
    t1.emplace_back(l / std::max<Index>(n2, 1), l, 1.0);
    t2.emplace_back(l % std::max<Index>(n2, 1), l, 1.0);
  }
  p.A1.resize(n1, n);
  p.A1.setFromTriplets(t1.begin(), t1.end());
  p.A2.resize(n2, n);
  p.A2.setFromTriplets(t2.begin(), t2.end());
  return p;
}

Eigen::VectorXd solve_w(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double c) {
  if (!(c > 0.0)) throw UsageError("solve_w: c must be positive");
  if (X.rows() != y.size()) throw UsageError("solve_w: dimension mismatch");
  Eigen::MatrixXd system = c * (X.transpose() * X);
  system.diagonal().array() += 1.0;
  return Eigen::LDLT<Eigen::MatrixXd>(system).solve(c * (X.transpose() * y));
}

Eigen::VectorXd greedy_select(const Eigen::VectorXd& y_hat, const SparseMatrix& A1, const SparseMatrix& A2,
                              std::span<const char> labeled, double threshold) {
  const Index n = y_hat.size();
  if (A1.cols() != n || A2.cols() != n || static_cast<Index>(labeled.size()) != n)
    throw UsageError("greedy_select: dimension mismatch");
  if (!y_hat.allFinite()) throw UsageError("greedy_select: non-finite scores");
  const auto o1 = column_owner(A1, "A1");
  const auto o2 = column_owner(A2, "A2");
  std::vector<char> used1(static_cast<std::size_t>(A1.rows()), 0), used2(static_cast<std::size_t>(A2.rows()), 0);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);

  for (Index l = 0; l < n; ++l) {
    if (!labeled[static_cast<std::size_t>(l)]) continue;
    auto& a = used1[static_cast<std::size_t>(o1[static_cast<std::size_t>(l)])];
    auto& b = used2[static_cast<std::size_t>(o2[static_cast<std::size_t>(l)])];
    if (a || b) throw ValidationError("greedy_select: labeled links violate one-to-one");
    a = b = 1;
    y(l) = 1.0;
  }

  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Index l = 0; l < n; ++l)
    if (!labeled[static_cast<std::size_t>(l)] && y_hat(l) >= threshold) order.push_back(l);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return y_hat(a) > y_hat(b); });
  for (const Index l : order) {
    auto& a = used1[static_cast<std::size_t>(o1[static_cast<std::size_t>(l)])];
    auto& b = used2[static_cast<std::size_t>(o2[static_cast<std::size_t>(l)])];
    if (a || b) continue;
    a = b = 1;
    y(l) = 1.0;
  }
  return y;
}

AlignmentSolution align_pair(const AlignmentProblem& problem, const AlignmentConfig& config) {
  problem.validate();
  if (!(config.c > 0.0)) throw UsageError("align_pair: c must be positive");
  const auto& X = problem.X;
  const Index n = X.rows();

  // (I + c X^T X) is fixed for the whole run; factor it once.
  Eigen::MatrixXd system = config.c * (X.transpose() * X);
  system.diagonal().array() += 1.0;
  const Eigen::LDLT<Eigen::MatrixXd> factor(system);
  auto fit = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return factor.solve(config.c * (X.transpose() * y));
  };

  AlignmentSolution sol;
  Eigen::VectorXd y(n);
  for (Index l = 0; l < n; ++l) y(l) = problem.labeled[static_cast<std::size_t>(l)] ? 1.0 : 0.0;

  std::vector<Eigen::VectorXd> history{y};
  struct Iterate {
    Eigen::VectorXd w, y;
    double objective;
  };
  std::optional<Iterate> best;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const Eigen::VectorXd w = fit(y);
    const Eigen::VectorXd y_hat = X * w;
    Eigen::VectorXd next = greedy_select(y_hat, problem.A1, problem.A2, problem.labeled, config.threshold);
    const double delta = (next - y).lpNorm<1>();
    sol.delta_y.push_back(delta);
    sol.iterations = iter + 1;
    sol.w = w;
    sol.y_hat = y_hat;

    const double obj = step_objective(X, w, next, config.c);
    if (!best || obj < best->objective) best = Iterate{w, next, obj};

    if (delta == 0.0) {
      sol.converged = true;
      sol.y = std::move(next);
      return sol;
    }
    // Revisiting an older label vector means the updates cycle.
    for (std::size_t h = 0; h + 1 < history.size(); ++h) {
      if (history[h] == next) {
        sol.oscillated = true;
        log::warning("align_pair: label updates cycle after " + std::to_string(iter + 1) +
                     " iterations; returning the best-objective iterate");
        sol.w = best->w;
        sol.y = best->y;
        sol.y_hat = X * best->w;
        return sol;
      }
    }
    history.push_back(next);
    y = std::move(next);
  }

  if (sol.iterations == 0) {
    sol.w = fit(y);
    sol.y_hat = X * sol.w;
  }
  sol.y = y;
  return sol;
}

std::vector<AlignmentSolution> align_all(std::span<const AlignmentProblem> problems, const AlignmentConfig& config,
                                         int threads) {
  std::vector<AlignmentSolution> out(problems.size());
  const auto workers = static_cast<std::size_t>(std::clamp<int>(threads, 1, 256));
  if (workers == 1 || problems.size() <= 1) {
    for (std::size_t i = 0; i < problems.size(); ++i) out[i] = align_pair(problems[i], config);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= problems.size()) return;
      try {
        out[i] = align_pair(problems[i], config);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(workers, problems.size()); ++t) pool.emplace_back(work);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<Prediction> aggregate(std::span<const MatchedPair> pairs, std::span<const AlignmentProblem> problems,
                                  std::span<const AlignmentSolution> solutions) {
  if (pairs.size() != problems.size() || pairs.size() != solutions.size())
    throw UsageError("aggregate: pairs, problems and solutions must align");
  std::vector<Prediction> out;
  std::map<Index, int> owner1, owner2;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& prob = problems[p];
    const auto& sol = solutions[p];
    for (std::size_t l = 0; l < prob.candidates.size(); ++l) {
      Prediction pred;
      pred.link = prob.candidates[l];
      pred.label = sol.y(static_cast<Index>(l)) > 0.5 ? 1 : 0;
      pred.score = sol.y_hat(static_cast<Index>(l));
      pred.pair_rank = pairs[p].rank;
      pred.labeled = prob.labeled[l] != 0;
      if (pred.label == 1) {
        const auto [it1, fresh1] = owner1.emplace(pred.link.user1, pred.pair_rank);
        const auto [it2, fresh2] = owner2.emplace(pred.link.user2, pred.pair_rank);
        if (!fresh1 || !fresh2)
          throw std::logic_error("aggregate: positive links from different pairs share a user");
      }
      out.push_back(pred);
    }
  }
  return out;
}

void write_predictions(std::span<const Prediction> predictions, const HeterogeneousNetwork& net1,
                       const HeterogeneousNetwork& net2, const std::filesystem::path& file) {
  auto out = tsv::open_output(file);
  out << "#u1\tu2\tlabel\tscore\n";
  for (const auto& p : predictions)
    out << net1.id(NodeKind::User, p.link.user1) << '\t' << net2.id(NodeKind::User, p.link.user2) << '\t'
        << p.label << '\t' << tsv::format_double(p.score) << '\n';
}

std::vector<AnchorLink> load_positive_predictions(const std::filesystem::path& file,
                                                  const HeterogeneousNetwork& net1,
                                                  const HeterogeneousNetwork& net2) {
  std::vector<AnchorLink> out;
  tsv::for_each_row(file, [&](std::span<const std::string_view> f, std::size_t line) {
    const std::string where = file.filename().string() + ":" + std::to_string(line);
    if (f.size() != 4) throw ParseError(where + ": expected 4 columns (u1, u2, label, score)");
    const auto label = tsv::parse_int(f[2], where);
    if (label != 0 && label != 1) throw ParseError(where + ": label must be 0 or 1");
    if (label == 0) return;
    const auto a = net1.find(NodeKind::User, f[0]);
    const auto b = net2.find(NodeKind::User, f[1]);
    if (!a || !b) throw ValidationError(where + ": unknown user");
    out.push_back({*a, *b});
  });
  return out;
}

void write_convergence(std::span<const MatchedPair> pairs, std::span<const AlignmentSolution> solutions,
                       const std::filesystem::path& file) {
  auto out = tsv::open_output(file);
  out << "#pair_rank\titer\tdelta_y\n";
  for (std::size_t p = 0; p < pairs.size() && p < solutions.size(); ++p)
    for (std::size_t i = 0; i < solutions[p].delta_y.size(); ++i)
      out << pairs[p].rank << '\t' << i + 1 << '\t' << tsv::format_double(solutions[p].delta_y[i]) << '\n';
}

}  // namespace shna
