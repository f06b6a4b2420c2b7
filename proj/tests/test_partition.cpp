#include <gtest/gtest.h>

#include "oracles/oracles.hpp"
#include "shna/error.hpp"
#include "shna/kmeans.hpp"
#include "shna/partition.hpp"
#include "shna/proximity.hpp"
#include "shna/synthetic.hpp"
#include "support/corpus.hpp"
#include "support/scratch.hpp"

using namespace shna;
using Eigen::MatrixXd;

namespace {

PartitionState state_for(const SparseMatrix& s1, const SparseMatrix& s2, MatrixXd h1, MatrixXd h2) {
  PartitionState st;
  st.lap1 = make_laplacian(s1);
  st.lap2 = make_laplacian(s2);
  st.H1 = std::move(h1);
  st.H2 = std::move(h2);
  return st;
}

MatrixXd one_hot(const std::vector<int>& labels, int k) {
  MatrixXd h = MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) h(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return h;
}

SparseMatrix identity(int n) {
  SparseMatrix m(n, n);
  m.setIdentity();
  return m;
}

double relative_error(const MatrixXd& a, const MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

/// Proximity of a planted block network built by the generator.
SparseMatrix planted_proximity(const HeterogeneousNetwork& net) {
  const auto ds = lookup_diagrams(std::vector<std::string>{"PI1", "PI3", "PI4", "PI5", "PI6", "PSI_I1"});
  return intra_md_pro(net, ds, DiagramWeights::uniform(ds)).values;
}

}  // namespace

TEST(Laplacian, RowSumsVanish) {
  corpus::Rng rng(1);
  const auto s = corpus::random_symmetric(rng, 9);
  const auto lap = make_laplacian(s);
  const MatrixXd L(lap.L);
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    EXPECT_NEAR(L.row(i).sum(), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(lap.degree(i), MatrixXd(s).row(i).sum());
  }
}

TEST(Ncut, Examples) {
  corpus::Rng rng(2);
  const auto s = corpus::random_symmetric(rng, 4);
  const auto L = make_laplacian(s).L;
  EXPECT_EQ(ncut_value(MatrixXd::Zero(4, 2), L), 0.0);

  // Two components {0,1} and {2,3}; the matching one-hot cut costs nothing.
  MatrixXd blocks = MatrixXd::Zero(4, 4);
  blocks(0, 1) = blocks(1, 0) = 0.7;
  blocks(2, 3) = blocks(3, 2) = 0.4;
  EXPECT_NEAR(ncut_value(one_hot({0, 0, 1, 1}, 2), make_laplacian(blocks.sparseView()).L), 0.0, 1e-15);

  const MatrixXd h = corpus::random_dense(rng, 4, 2);
  const MatrixXd Ld(L);
  double direct = 0.0;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) direct += h(i, c) * Ld(i, j) * h(j, c);
  EXPECT_NEAR(ncut_value(h, L), direct, 1e-12);
}

TEST(TransitionConfidence, Examples) {
  corpus::Rng rng(3);
  const MatrixXd h2 = corpus::random_dense(rng, 3, 2);
  EXPECT_EQ(transition_confidence(identity(3), h2), h2);
  EXPECT_EQ(transition_confidence(SparseMatrix(3, 3), h2), MatrixXd::Zero(3, 2));
  const MatrixXd s = corpus::random_dense(rng, 3, 3);
  MatrixXd hand(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 2; ++c) hand(i, c) = s(i, 0) * h2(0, c) + s(i, 1) * h2(1, c) + s(i, 2) * h2(2, c);
  EXPECT_LE((transition_confidence(s.sparseView(), h2) - hand).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(transition_confidence(identity(4), h2), UsageError);
}

TEST(Discrepancy, ConsistentPartitionsAgree) {
  const MatrixXd h = one_hot({0, 1, 1, 2, 0}, 3);
  EXPECT_EQ(discrepancy(h, h, identity(5)), 0.0);
  corpus::Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const MatrixXd r = corpus::random_dense(rng, 7, 3);
    EXPECT_NEAR(discrepancy(r, r, identity(7)), 0.0, 1e-12);
  }
}

TEST(Discrepancy, OneFlippedUserIsPositive) {
  const MatrixXd h1 = one_hot({0, 0, 0, 1, 1, 1}, 2);
  const MatrixXd h2 = one_hot({0, 0, 1, 1, 1, 1}, 2);
  EXPECT_GT(discrepancy(h1, h2, identity(6)), 0.0);
  EXPECT_NEAR(discrepancy(h1, h2, identity(6)), oracle::dense_discrepancy(h1, h2, MatrixXd::Identity(6, 6)), 1e-12);
}

TEST(Discrepancy, MatchesDenseAndPairwiseOracles) {
  corpus::Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const int n1 = corpus::uniform_int(rng, 2, 8), n2 = corpus::uniform_int(rng, 2, 8);
    const MatrixXd h1 = corpus::random_dense(rng, n1, 3, 0, 1), h2 = corpus::random_dense(rng, n2, 3, 0, 1);
    const MatrixXd s = MatrixXd(corpus::random_rect(rng, n1, n2));
    const double fast = discrepancy(h1, h2, s.sparseView());
    const double dense = oracle::dense_discrepancy(h1, h2, s);
    const auto pw = oracle::pairwise_discrepancy(h1, h2, s);
    EXPECT_NEAR(fast, dense, 1e-10 * std::max(1.0, dense));
    EXPECT_NEAR(dense, 2.0 * pw.pairs + pw.diagonal, 1e-10 * std::max(1.0, dense));
  }
}

TEST(JointObjective, ZeroConfidencesCostOnlyThePenalty) {
  corpus::Rng rng(6);
  PartitionConfig cfg;
  cfg.k = 3;
  cfg.rho1 = 7.0;
  cfg.rho2 = 11.0;
  const auto st = state_for(corpus::random_symmetric(rng, 5), corpus::random_symmetric(rng, 4), MatrixXd::Zero(5, 3),
                            MatrixXd::Zero(4, 3));
  EXPECT_DOUBLE_EQ(joint_objective(st, cfg, corpus::random_rect(rng, 5, 4)), (7.0 + 11.0) * 3);
}

TEST(JointObjective, ThetaZeroDecouples) {
  corpus::Rng rng(7);
  PartitionConfig cfg;
  cfg.theta = 0.0;
  cfg.k = 2;
  const auto s1 = corpus::random_symmetric(rng, 5), s2 = corpus::random_symmetric(rng, 6);
  const auto st = state_for(s1, s2, corpus::random_dense(rng, 5, 2), corpus::random_dense(rng, 6, 2));
  const auto a = joint_objective(st, cfg, corpus::random_rect(rng, 5, 6));
  const auto b = joint_objective(st, cfg, corpus::random_rect(rng, 5, 6));
  EXPECT_DOUBLE_EQ(a, b);
  const auto t = objective_terms(st, cfg, SparseMatrix(5, 6));
  EXPECT_NEAR(a, (t.ncut1 + cfg.rho1 * t.penalty1) + (t.ncut2 + cfg.rho2 * t.penalty2), 1e-9 * std::abs(a));
}

TEST(JointObjective, TermByTerm) {
  corpus::Rng rng(8);
  PartitionConfig cfg;
  cfg.k = 2;
  cfg.alpha = 1.5;
  cfg.beta = 0.5;
  cfg.theta = 3.0;
  cfg.rho1 = 2.0;
  cfg.rho2 = 4.0;
  const auto s1 = corpus::random_symmetric(rng, 4), s2 = corpus::random_symmetric(rng, 3);
  const auto si = corpus::random_rect(rng, 4, 3);
  const auto st = state_for(s1, s2, corpus::random_dense(rng, 4, 2), corpus::random_dense(rng, 3, 2));
  auto penalty = [](const MatrixXd& h, const Eigen::VectorXd& d) {
    double s = 0.0;
    for (int a = 0; a < h.cols(); ++a)
      for (int b = 0; b < h.cols(); ++b) {
        double g = 0.0;
        for (int i = 0; i < h.rows(); ++i) g += h(i, a) * d(i) * h(i, b);
        if (a == b) g -= 1.0;
        s += g * g;
      }
    return s;
  };
  const double want = 1.5 * ncut_value(st.H1, st.lap1.L) + 0.5 * ncut_value(st.H2, st.lap2.L) +
                      3.0 * oracle::dense_discrepancy(st.H1, st.H2, MatrixXd(si)) +
                      2.0 * penalty(st.H1, st.lap1.degree) + 4.0 * penalty(st.H2, st.lap2.degree);
  EXPECT_NEAR(joint_objective(st, cfg, si), want, 1e-10 * std::abs(want));
}

TEST(Gradient, MatchesFiniteDifferences) {
  corpus::Rng rng(9);
  for (int t = 0; t < 15; ++t) {
    const int n1 = corpus::uniform_int(rng, 3, 7), n2 = corpus::uniform_int(rng, 3, 7), k = corpus::uniform_int(rng, 2, 3);
    PartitionConfig cfg;
    cfg.k = k;
    cfg.alpha = corpus::uniform_real(rng, 0.5, 2.0);
    cfg.beta = corpus::uniform_real(rng, 0.5, 2.0);
    cfg.theta = corpus::uniform_real(rng, 0.0, 80.0);
    cfg.rho1 = corpus::uniform_real(rng, 1.0, 1e3);
    cfg.rho2 = corpus::uniform_real(rng, 1.0, 1e3);
    const auto si = corpus::random_rect(rng, n1, n2);
    auto st = state_for(corpus::random_symmetric(rng, n1), corpus::random_symmetric(rng, n2),
                        corpus::random_dense(rng, n1, k, 0, 0.6), corpus::random_dense(rng, n2, k, 0, 0.6));
    for (int which : {1, 2}) {
      const MatrixXd analytic = gradient_H(st, cfg, si, which);
      auto f = [&](const MatrixXd& h) {
        auto probe = st;
        (which == 1 ? probe.H1 : probe.H2) = h;
        return joint_objective(probe, cfg, si);
      };
      const MatrixXd numeric = oracle::finite_difference_gradient(f, which == 1 ? st.H1 : st.H2, 1e-6);
      EXPECT_LE(relative_error(analytic, numeric), 1e-5) << "trial " << t << " H" << which;
    }
  }
}

TEST(Gradient, VanishesAtZeroWithoutCoupling) {
  PartitionConfig cfg;
  cfg.k = 2;
  cfg.theta = 0.0;
  cfg.rho1 = cfg.rho2 = 1e-3;
  const SparseMatrix zero(4, 4);
  // L = 0 and D = 0: every term is flat at H = 0.
  const auto st = state_for(zero, zero, MatrixXd::Zero(4, 2), MatrixXd::Zero(4, 2));
  EXPECT_EQ(gradient_H(st, cfg, zero, 1).norm(), 0.0);
  EXPECT_EQ(gradient_H(st, cfg, zero, 2).norm(), 0.0);
}

TEST(Gradient, LinearInTheta) {
  corpus::Rng rng(10);
  PartitionConfig cfg;
  cfg.k = 2;
  const auto si = corpus::random_rect(rng, 5, 4);
  const auto st = state_for(corpus::random_symmetric(rng, 5), corpus::random_symmetric(rng, 4),
                            corpus::random_dense(rng, 5, 2), corpus::random_dense(rng, 4, 2));
  cfg.theta = 0.0;
  const MatrixXd g0 = gradient_H(st, cfg, si, 1);
  cfg.theta = 5.0;
  const MatrixXd g1 = gradient_H(st, cfg, si, 1);
  cfg.theta = 10.0;
  const MatrixXd g2 = gradient_H(st, cfg, si, 1);
  EXPECT_LE(((g2 - g0) - 2.0 * (g1 - g0)).norm(), 1e-9 * std::max(1.0, g2.norm()));
}

TEST(Descent, BacktrackingNeverIncreases) {
  corpus::Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    const int n1 = corpus::uniform_int(rng, 6, 12), n2 = corpus::uniform_int(rng, 6, 12);
    PartitionConfig cfg;
    cfg.k = 3;
    cfg.max_iters = 40;
    cfg.seed = static_cast<std::uint64_t>(t);
    const auto st = synergistic_partition(corpus::random_symmetric(rng, n1), corpus::random_symmetric(rng, n2),
                                          corpus::random_rect(rng, n1, n2), cfg);
    ASSERT_GE(st.trace.size(), 2u);
    for (std::size_t i = 1; i < st.trace.size(); ++i) EXPECT_LE(st.trace[i].objective, st.trace[i - 1].objective);
  }
}

TEST(Descent, SmallFixedStepsDecrease) {
  corpus::Rng rng(12);
  for (int t = 0; t < 5; ++t) {
    PartitionConfig cfg;
    cfg.k = 2;
    cfg.backtracking = false;
    cfg.eta1 = cfg.eta2 = 1e-6;
    cfg.max_iters = 25;
    const auto st = synergistic_partition(corpus::random_symmetric(rng, 8), corpus::random_symmetric(rng, 8),
                                          corpus::random_rect(rng, 8, 8), cfg);
    for (std::size_t i = 5; i < st.trace.size(); ++i)
      EXPECT_LE(st.trace[i].objective, st.trace[i - 5].objective * (1 + 1e-12));
  }
}

TEST(Descent, ZeroIterationsKeepsTheWarmStart) {
  corpus::Rng rng(13);
  PartitionConfig cfg;
  cfg.k = 2;
  cfg.max_iters = 0;
  const auto s1 = corpus::random_symmetric(rng, 6), s2 = corpus::random_symmetric(rng, 6);
  const auto init = initialize_partition(s1, s2, cfg);
  const auto st = synergistic_partition(s1, s2, corpus::random_rect(rng, 6, 6), cfg);
  EXPECT_EQ(st.iterations, 0);
  EXPECT_EQ(st.H1, init.H1);
  EXPECT_EQ(st.H2, init.H2);
}

TEST(Descent, LargeFixedStepDiverges) {
  corpus::Rng rng(14);
  PartitionConfig cfg;
  cfg.k = 2;
  cfg.backtracking = false;
  cfg.eta1 = cfg.eta2 = 10.0;
  EXPECT_THROW(synergistic_partition(corpus::random_symmetric(rng, 8), corpus::random_symmetric(rng, 8),
                                     corpus::random_rect(rng, 8, 8), cfg),
               DivergenceError);
}

TEST(Descent, InvalidConfig) {
  PartitionConfig cfg;
  cfg.k = 1;
  EXPECT_THROW(cfg.validate(10, 10), UsageError);
  cfg.k = 11;
  EXPECT_THROW(cfg.validate(10, 12), UsageError);
  cfg.k = 2;
  cfg.rho1 = 0.0;
  EXPECT_THROW(cfg.validate(10, 10), UsageError);
  cfg.rho1 = 1.0;
  cfg.theta = 0.0;
  EXPECT_NO_THROW(cfg.validate(10, 10));
}

TEST(Descent, DecoupledRunRecoversSpectralBlocks) {
  SyntheticParams p;
  p.n_users = 40;
  p.k_blocks = 2;
  p.p_in = 0.5;
  p.attr_vocab = 20;
  p.seed = 3;
  const auto data = generate_synthetic(p);
  const auto s1 = planted_proximity(data.pair.net1());
  const auto s2 = planted_proximity(data.pair.net2());
  PartitionConfig cfg;
  cfg.k = 2;
  cfg.theta = 0.0;
  cfg.rho1 = cfg.rho2 = 1e6;
  const auto st = synergistic_partition(s1, s2, SparseMatrix(40, 40), cfg);
  const auto clusters = extract_clusters(st, 2, 1);
  const auto reference = oracle::spectral_clusters(MatrixXd(s1), 2);
  EXPECT_TRUE(oracle::same_partition(reference, data.blocks1));
  EXPECT_TRUE(oracle::same_partition(clusters.labels1, reference));
  EXPECT_TRUE(oracle::same_partition(clusters.labels2, oracle::spectral_clusters(MatrixXd(s2), 2)));
}

TEST(Descent, IsomorphicNetworksReduceDiscrepancy) {
  SyntheticParams p;
  p.n_users = 40;
  p.k_blocks = 2;
  p.p_in = 0.4;
  p.p_out = 0.05;
  p.attr_vocab = 40;
  p.anchor_fraction = 1.0;
  p.seed = 4;
  const auto data = generate_synthetic(p);
  const auto ds = lookup_diagrams(std::vector<std::string>{"PA1", "PA2", "PA5", "PA6"});
  const auto si = inter_md_pro(data.pair, ds, DiagramWeights::uniform(ds)).values;
  PartitionConfig cfg;
  cfg.k = 2;
  cfg.max_iters = 100;
  const auto st = synergistic_partition(planted_proximity(data.pair.net1()), planted_proximity(data.pair.net2()), si,
                                        cfg);
  ASSERT_GE(st.trace.size(), 2u);
  EXPECT_LT(st.trace.back().discrepancy, st.trace.front().discrepancy);
}

TEST(ExtractClusters, Examples) {
  const std::vector<int> labels{0, 2, 1, 1, 0, 2};
  PartitionState st;
  st.H1 = one_hot(labels, 3);
  st.H2 = one_hot({1, 1, 0, 2}, 3);
  const auto c = extract_clusters(st, 3, 5);
  EXPECT_TRUE(oracle::same_partition(c.labels1, labels));
  EXPECT_TRUE(oracle::same_partition(c.labels2, {1, 1, 0, 2}));
  EXPECT_EQ(c.labels1.front(), 0);  // first-appearance numbering

  const auto single = extract_clusters(st, 1, 5);
  EXPECT_EQ(single.labels1, std::vector<int>(6, 0));

  corpus::Rng rng(15);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<int> planted(30);
  for (int i = 0; i < 30; ++i) planted[static_cast<std::size_t>(i)] = i % 2;
  st.H1 = one_hot(planted, 2);
  for (Eigen::Index i = 0; i < st.H1.size(); ++i) st.H1.data()[i] += noise(rng);
  st.H2 = st.H1;
  EXPECT_TRUE(oracle::same_partition(extract_clusters(st, 2, 9).labels1, planted));
}

TEST(ExtractClusters, SubnetworksPartitionUsers) {
  corpus::Rng rng(16);
  const auto net = corpus::random_network(rng, 10, 20, 6);
  std::vector<int> labels(net.num_users());
  for (auto& l : labels) l = corpus::uniform_int(rng, 0, 2);
  const auto subs = extract_subnetworks(net, labels, 3);
  std::multiset<std::string> seen;
  for (const auto& s : subs)
    for (const auto& id : s.ids(NodeKind::User)) seen.insert(id);
  EXPECT_EQ(seen, std::multiset<std::string>(net.ids(NodeKind::User).begin(), net.ids(NodeKind::User).end()));
}

TEST(ExtractClusters, FileRoundTrip) {
  corpus::Rng rng(17);
  const auto net = corpus::random_network(rng);
  std::vector<int> labels(net.num_users());
  for (auto& l : labels) l = corpus::uniform_int(rng, 0, 3);
  const auto d = scratch::dir();
  write_clusters(net, labels, d / "c" / "clusters.tsv");
  EXPECT_EQ(load_clusters(net, d / "c" / "clusters.tsv"), labels);
  scratch::write(d / "bad.tsv", "u0\t1\n");
  EXPECT_THROW(load_clusters(net, d / "bad.tsv"), ValidationError);
}

TEST(KMeans, Basics) {
  MatrixXd pts(6, 2);
  pts << 0, 0, 0.1, 0, 0, 0.1, 5, 5, 5.1, 5, 5, 5.1;
  KMeansOptions o;
  o.seed = 3;
  const auto r = kmeans(pts, 2, o);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 0, 1, 1, 1}));
  EXPECT_NEAR(r.inertia, 4 * 0.01 * 2.0 / 3.0, 1e-12);
  EXPECT_EQ(kmeans(pts, 2, o).labels, r.labels);
  EXPECT_THROW(kmeans(pts, 0, o), UsageError);
  EXPECT_THROW(kmeans(pts, 7, o), UsageError);
}
