#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "shna/network.hpp"
#include "shna/partition.hpp"

namespace shna {

struct MatchedPair {
  int rank = 0;  // 0-based position in the selection order
  int sub1 = 0;
  int sub2 = 0;
  std::vector<Index> users1;  // ascending net1 user indices
  std::vector<Index> users2;
  std::vector<AnchorLink> known_anchors;  // labeled anchors inside the pair
  double m_score = 0.0;
};

/// |A|^2 / (|U_i| |U_j|); zero when either side is empty.
double m_score(std::size_t known_anchors, std::size_t users1, std::size_t users2);

/// Scores every cluster pair and greedily takes the best remaining pair in
/// descending M-Score, each cluster used at most once. Ties go to the
/// lexicographically smaller (sub1, sub2). Returns at most s pairs.
std::vector<MatchedPair> match_top_s(const ClusterAssignment& clusters,
                                     std::span<const AnchorLink> labeled_anchors, int s);

/// Fraction of `anchors` whose endpoints fall inside one selected pair.
/// Empty anchor set gives 0.
double coverage_ratio(std::span<const MatchedPair> pairs, std::span<const AnchorLink> anchors);

/// Sum over pairs of |U_a| * |U_b|.
std::size_t candidate_count(std::span<const MatchedPair> pairs);

/// rank, sub1, sub2, m_score, n_known_anchors
void write_pairs(std::span<const MatchedPair> pairs, const std::filesystem::path& file);

/// Reads pairs.tsv and fills user sets and known anchors from the clusters.
std::vector<MatchedPair> load_pairs(const std::filesystem::path& file, const ClusterAssignment& clusters,
                                    std::span<const AnchorLink> labeled_anchors);

}  // namespace shna
