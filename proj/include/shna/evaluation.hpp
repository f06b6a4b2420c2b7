#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shna/network.hpp"

namespace shna {

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double coverage_ratio = 0.0;
  std::map<std::string, double> stage_seconds;
};

/// Scores predicted positive links against held-out anchors. Predicted
/// links that are training anchors are known, not predictions, and are
/// skipped. Test anchors never predicted (including pruned ones) count as
/// false negatives. Precision is 0 when nothing is predicted.
/// Throws ValidationError if the training and test anchors overlap.
EvalReport evaluate(std::span<const AnchorLink> predicted_positive, std::span<const AnchorLink> test_anchors,
                    std::span<const AnchorLink> train_anchors = {});

/// Seeded uniform split of true anchors; `train_ratio` of them (rounded)
/// go to the training side.
std::pair<std::vector<AnchorLink>, std::vector<AnchorLink>> split_anchors(std::span<const AnchorLink> anchors,
                                                                          double train_ratio,
                                                                          std::uint64_t seed);

}  // namespace shna
