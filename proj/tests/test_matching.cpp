#include <gtest/gtest.h>

#include "shna/error.hpp"
#include "shna/matching.hpp"
#include "support/corpus.hpp"
#include "support/scratch.hpp"

using namespace shna;

namespace {

/// Clusters of `size` consecutive users per side; anchors[a][b] links
/// between side-1 cluster a and side-2 cluster b.
struct Layout {
  ClusterAssignment clusters;
  std::vector<AnchorLink> anchors;
};

Layout layout(int k, int size, const std::vector<std::vector<int>>& links) {
  Layout out;
  out.clusters.k = k;
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < size; ++i) {
      out.clusters.labels1.push_back(c);
      out.clusters.labels2.push_back(c);
    }
  std::vector<int> next1(static_cast<std::size_t>(k), 0), next2(static_cast<std::size_t>(k), 0);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int n = 0; n < links[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; ++n)
        out.anchors.push_back({a * size + next1[static_cast<std::size_t>(a)]++, b * size + next2[static_cast<std::size_t>(b)]++});
  return out;
}

/// Replays the selection rule over an explicit score table.
std::vector<std::pair<int, int>> greedy_replay(const std::vector<std::vector<double>>& score, int s) {
  const int k = static_cast<int>(score.size());
  std::vector<char> used1(static_cast<std::size_t>(k), 0), used2(static_cast<std::size_t>(k), 0);
  std::vector<std::pair<int, int>> out;
  while (static_cast<int>(out.size()) < s) {
    int ba = -1, bb = -1;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        if (used1[static_cast<std::size_t>(a)] || used2[static_cast<std::size_t>(b)]) continue;
        if (ba < 0 || score[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] >
                          score[static_cast<std::size_t>(ba)][static_cast<std::size_t>(bb)]) {
          ba = a;
          bb = b;
        }
      }
    if (ba < 0) break;
    used1[static_cast<std::size_t>(ba)] = used2[static_cast<std::size_t>(bb)] = 1;
    out.emplace_back(ba, bb);
  }
  return out;
}

}  // namespace

TEST(MScore, Examples) {
  EXPECT_EQ(m_score(0, 10, 8), 0.0);
  EXPECT_DOUBLE_EQ(m_score(4, 10, 8), 0.2);
  // Fully anchored equal clusters: n^2 / (n n) = 1.
  EXPECT_DOUBLE_EQ(m_score(7, 7, 7), 1.0);
  EXPECT_EQ(m_score(0, 0, 5), 0.0);
}

TEST(MatchTopS, SingleCluster) {
  const auto l = layout(1, 4, {{2}});
  const auto pairs = match_top_s(l.clusters, l.anchors, 1);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].users1.size(), 4u);
  EXPECT_EQ(pairs[0].known_anchors.size(), 2u);
}

TEST(MatchTopS, GreedyTrace) {
  const auto l = layout(2, 10, {{5, 1}, {2, 4}});
  const auto pairs = match_top_s(l.clusters, l.anchors, 2);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(std::pair(pairs[0].sub1, pairs[0].sub2), std::pair(0, 0));
  EXPECT_EQ(std::pair(pairs[1].sub1, pairs[1].sub2), std::pair(1, 1));
  EXPECT_DOUBLE_EQ(pairs[0].m_score, 0.25);
  EXPECT_EQ(pairs[1].rank, 1);
}

TEST(MatchTopS, TiesGoToTheSmallerPair) {
  const auto l = layout(2, 5, {{1, 1}, {1, 1}});
  const auto pairs = match_top_s(l.clusters, l.anchors, 2);
  EXPECT_EQ(std::pair(pairs[0].sub1, pairs[0].sub2), std::pair(0, 0));
  EXPECT_EQ(std::pair(pairs[1].sub1, pairs[1].sub2), std::pair(1, 1));
}

TEST(MatchTopS, MatchesGreedyReplay) {
  corpus::Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 5;
    ClusterAssignment c;
    c.k = k;
    const int n1 = 30, n2 = 30;
    for (int i = 0; i < n1; ++i) c.labels1.push_back(i < k ? i : corpus::uniform_int(rng, 0, k - 1));
    for (int i = 0; i < n2; ++i) c.labels2.push_back(i < k ? i : corpus::uniform_int(rng, 0, k - 1));
    const auto anchors = corpus::random_anchors(rng, n1, n2);
    std::vector<std::vector<double>> score(k, std::vector<double>(k));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        std::size_t s1 = 0, s2 = 0, m = 0;
        for (int l : c.labels1) s1 += l == a;
        for (int l : c.labels2) s2 += l == b;
        for (const auto& x : anchors)
          m += c.labels1[static_cast<std::size_t>(x.user1)] == a && c.labels2[static_cast<std::size_t>(x.user2)] == b;
        score[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
            static_cast<double>(m * m) / static_cast<double>(s1 * s2);
      }
    const int s = corpus::uniform_int(rng, 0, k);
    const auto pairs = match_top_s(c, anchors, s);
    const auto want = greedy_replay(score, s);
    ASSERT_EQ(pairs.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_EQ(std::pair(pairs[i].sub1, pairs[i].sub2), want[i]);
      EXPECT_DOUBLE_EQ(pairs[i].m_score, score[static_cast<std::size_t>(want[i].first)][static_cast<std::size_t>(want[i].second)]);
    }
    std::set<int> seen1, seen2;
    for (const auto& p : pairs) {
      EXPECT_TRUE(seen1.insert(p.sub1).second);
      EXPECT_TRUE(seen2.insert(p.sub2).second);
    }
  }
}

TEST(MatchTopS, CoverageGrowsWithS) {
  corpus::Rng rng(22);
  ClusterAssignment c;
  c.k = 4;
  for (int i = 0; i < 40; ++i) {
    c.labels1.push_back(i % 4);
    c.labels2.push_back(corpus::uniform_int(rng, 0, 3));
  }
  const auto anchors = corpus::random_anchors(rng, 40, 40);
  const std::vector<AnchorLink> train(anchors.begin(), anchors.begin() + static_cast<std::ptrdiff_t>(anchors.size() / 2));
  const std::vector<AnchorLink> test(anchors.begin() + static_cast<std::ptrdiff_t>(anchors.size() / 2), anchors.end());
  double last = -1.0;
  std::size_t last_candidates = 0;
  for (int s = 0; s <= 4; ++s) {
    const auto pairs = match_top_s(c, train, s);
    const double cov = coverage_ratio(pairs, test);
    EXPECT_GE(cov, last);
    EXPECT_GE(candidate_count(pairs), last_candidates);
    EXPECT_LE(candidate_count(pairs), 40u * 40u);
    last = cov;
    last_candidates = candidate_count(pairs);
  }
  EXPECT_EQ(coverage_ratio(match_top_s(c, train, 0), test), 0.0);
  EXPECT_EQ(coverage_ratio(match_top_s(c, train, 4), {}), 0.0);
}

TEST(MatchTopS, Errors) {
  const auto l = layout(2, 3, {{1, 0}, {0, 1}});
  EXPECT_THROW(match_top_s(l.clusters, l.anchors, 3), UsageError);
  EXPECT_THROW(match_top_s(l.clusters, l.anchors, -1), UsageError);
  auto bad = l.clusters;
  bad.labels1[0] = 7;
  EXPECT_THROW(match_top_s(bad, l.anchors, 1), ValidationError);
}

TEST(Pairs, FileRoundTrip) {
  const auto l = layout(3, 4, {{3, 0, 0}, {0, 1, 0}, {0, 0, 2}});
  const auto pairs = match_top_s(l.clusters, l.anchors, 3);
  const auto d = scratch::dir();
  write_pairs(pairs, d / "pairs.tsv");
  const auto back = load_pairs(d / "pairs.tsv", l.clusters, l.anchors);
  ASSERT_EQ(back.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(back[i].sub1, pairs[i].sub1);
    EXPECT_EQ(back[i].sub2, pairs[i].sub2);
    EXPECT_EQ(back[i].users1, pairs[i].users1);
    EXPECT_EQ(back[i].known_anchors, pairs[i].known_anchors);
    EXPECT_DOUBLE_EQ(back[i].m_score, pairs[i].m_score);
  }
  scratch::write(d / "dup.tsv", "0\t0\t0\t1\t1\n1\t0\t1\t1\t1\n");
  EXPECT_THROW(load_pairs(d / "dup.tsv", l.clusters, l.anchors), ValidationError);
}
