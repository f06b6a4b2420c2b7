#include "shna/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "shna/error.hpp"

namespace shna {

EvalReport evaluate(std::span<const AnchorLink> predicted_positive, std::span<const AnchorLink> test_anchors,
                    std::span<const AnchorLink> train_anchors) {
  const std::set<AnchorLink> test(test_anchors.begin(), test_anchors.end());
  const std::set<AnchorLink> train(train_anchors.begin(), train_anchors.end());
  for (const auto& a : train)
    if (test.contains(a))
      throw ValidationError("evaluate: anchor (" + std::to_string(a.user1) + ", " + std::to_string(a.user2) +
                            ") is in both the training and the test set");

  const std::set<AnchorLink> predicted(predicted_positive.begin(), predicted_positive.end());
  EvalReport r;
  for (const auto& p : predicted) {
    if (train.contains(p)) continue;
    if (test.contains(p)) ++r.tp;
    else ++r.fp;
  }
  r.fn = test.size() - r.tp;
  const double tp = static_cast<double>(r.tp);
  r.precision = (r.tp + r.fp) > 0 ? tp / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = !test.empty() ? tp / static_cast<double>(test.size()) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

std::pair<std::vector<AnchorLink>, std::vector<AnchorLink>> split_anchors(std::span<const AnchorLink> anchors,
                                                                          double train_ratio,
                                                                          std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw UsageError("split ratio must lie in (0, 1)");
  std::vector<AnchorLink> shuffled(anchors.begin(), anchors.end());
  std::sort(shuffled.begin(), shuffled.end());
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::lround(train_ratio * static_cast<double>(shuffled.size())));
  std::vector<AnchorLink> train(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<AnchorLink> test(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

}  // namespace shna
