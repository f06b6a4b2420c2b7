#include "shna/matching.hpp"

#include <algorithm>
#include <tuple>

#include "shna/error.hpp"
#include "shna/log.hpp"
#include "shna/tsv.hpp"

namespace shna {
namespace {

std::vector<std::vector<Index>> group(const std::vector<int>& labels, int k) {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) throw ValidationError("cluster label out of range");
    out[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
  }
  return out;
}

MatchedPair build_pair(int sub1, int sub2, const std::vector<std::vector<Index>>& g1,
                      const std::vector<std::vector<Index>>& g2, const ClusterAssignment& clusters,
                      std::span<const AnchorLink> anchors) {
  MatchedPair p;
  p.sub1 = sub1;
  p.sub2 = sub2;
  p.users1 = g1[static_cast<std::size_t>(sub1)];
  p.users2 = g2[static_cast<std::size_t>(sub2)];
  for (const auto& a : anchors)
    if (clusters.labels1[static_cast<std::size_t>(a.user1)] == sub1 &&
        clusters.labels2[static_cast<std::size_t>(a.user2)] == sub2)
      p.known_anchors.push_back(a);
  p.m_score = m_score(p.known_anchors.size(), p.users1.size(), p.users2.size());
  return p;
}

}  // namespace

double m_score(std::size_t known_anchors, std::size_t users1, std::size_t users2) {
  if (users1 == 0 || users2 == 0) {
    log::debug("m_score: empty sub-network scored 0");
    return 0.0;
  }
  const double a = static_cast<double>(known_anchors);
  return a * a / (static_cast<double>(users1) * static_cast<double>(users2));
}

std::vector<MatchedPair> match_top_s(const ClusterAssignment& clusters,
                                     std::span<const AnchorLink> labeled_anchors, int s) {
  const int k = clusters.k;
  if (s < 0 || s > k) throw UsageError("match: s must lie in [0, k]");
  validate_anchors(labeled_anchors, clusters.labels1.size(), clusters.labels2.size());
  const auto g1 = group(clusters.labels1, k);
  const auto g2 = group(clusters.labels2, k);

  // Anchor counts per cluster pair in one pass.
  std::vector<std::size_t> counts(static_cast<std::size_t>(k * k), 0);
  for (const auto& a : labeled_anchors)
    ++counts[static_cast<std::size_t>(clusters.labels1[static_cast<std::size_t>(a.user1)] * k +
                                      clusters.labels2[static_cast<std::size_t>(a.user2)])];

  struct Candidate {
    double score;
    int sub1;
    int sub2;
  };
  std::vector<Candidate> all;
  all.reserve(counts.size());
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      all.push_back({m_score(counts[static_cast<std::size_t>(i * k + j)], g1[static_cast<std::size_t>(i)].size(),
                             g2[static_cast<std::size_t>(j)].size()),
                     i, j});
  std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    return std::tuple(-a.score, a.sub1, a.sub2) < std::tuple(-b.score, b.sub1, b.sub2);
  });

  std::vector<char> used1(static_cast<std::size_t>(k), 0), used2(static_cast<std::size_t>(k), 0);
  std::vector<MatchedPair> out;
  for (const auto& c : all) {
    if (static_cast<int>(out.size()) >= s) break;
    if (used1[static_cast<std::size_t>(c.sub1)] || used2[static_cast<std::size_t>(c.sub2)]) continue;
    used1[static_cast<std::size_t>(c.sub1)] = used2[static_cast<std::size_t>(c.sub2)] = 1;
    auto p = build_pair(c.sub1, c.sub2, g1, g2, clusters, labeled_anchors);
    p.rank = static_cast<int>(out.size());
    out.push_back(std::move(p));
  }
  return out;
}

double coverage_ratio(std::span<const MatchedPair> pairs, std::span<const AnchorLink> anchors) {
  if (anchors.empty()) return 0.0;
  std::size_t covered = 0;
  for (const auto& a : anchors) {
    for (const auto& p : pairs) {
      if (std::binary_search(p.users1.begin(), p.users1.end(), a.user1) &&
          std::binary_search(p.users2.begin(), p.users2.end(), a.user2)) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(anchors.size());
}

std::size_t candidate_count(std::span<const MatchedPair> pairs) {
  std::size_t total = 0;
  for (const auto& p : pairs) total += p.users1.size() * p.users2.size();
  return total;
}

void write_pairs(std::span<const MatchedPair> pairs, const std::filesystem::path& file) {
  auto out = tsv::open_output(file);
  out << "#rank\tsub1\tsub2\tm_score\tn_known_anchors\n";
  for (const auto& p : pairs)
    out << p.rank << '\t' << p.sub1 << '\t' << p.sub2 << '\t' << tsv::format_double(p.m_score) << '\t'
        << p.known_anchors.size() << '\n';
}

std::vector<MatchedPair> load_pairs(const std::filesystem::path& file, const ClusterAssignment& clusters,
                                    std::span<const AnchorLink> labeled_anchors) {
  const auto g1 = group(clusters.labels1, clusters.k);
  const auto g2 = group(clusters.labels2, clusters.k);
  std::vector<MatchedPair> out;
  tsv::for_each_row(file, [&](std::span<const std::string_view> f, std::size_t line) {
    const std::string where = file.filename().string() + ":" + std::to_string(line);
    if (f.size() != 5) throw ParseError(where + ": expected 5 columns");
    const auto rank = tsv::parse_int(f[0], where);
    const auto a = tsv::parse_int(f[1], where);
    const auto b = tsv::parse_int(f[2], where);
    if (a < 0 || a >= clusters.k || b < 0 || b >= clusters.k)
      throw ValidationError(where + ": cluster id out of range");
    auto p = build_pair(static_cast<int>(a), static_cast<int>(b), g1, g2, clusters, labeled_anchors);
    p.rank = static_cast<int>(rank);
    out.push_back(std::move(p));
  });
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.rank < y.rank; });
  std::vector<char> used1(static_cast<std::size_t>(clusters.k), 0), used2(static_cast<std::size_t>(clusters.k), 0);
  for (const auto& p : out) {
    if (used1[static_cast<std::size_t>(p.sub1)]++ || used2[static_cast<std::size_t>(p.sub2)]++)
      throw ValidationError(file.filename().string() + ": a sub-network appears in more than one pair");
  }
  return out;
}

}  // namespace shna
