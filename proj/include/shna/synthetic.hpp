#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "shna/network.hpp"

namespace shna {

/// Planted two-network model: k-block stochastic follow graphs, a hidden
/// one-to-one correspondence over a shared user subset, and per-user
/// location/timestamp profiles that twins reuse.
struct SyntheticParams {
  int n_users = 200;         // users per network
  int k_blocks = 4;
  double p_in = 0.15;        // follow probability inside a block
  double p_out = 0.0;        // follow probability across blocks
  int posts_per_user = 10;
  int attr_vocab = 2000;     // distinct location and timestamp tokens each
  double anchor_fraction = 0.5;  // share of true anchors revealed as labeled
  double noise = 0.0;        // chance a post ignores the profile / a follow slot is redrawn
  double overlap = 1.0;      // share of users present in both networks
  int profile_size = 3;      // tokens per user profile
  std::uint64_t seed = 1;

  /// Throws ValidationError for infeasible parameters.
  void validate() const;
};

struct SyntheticData {
  /// Networks with the labeled (training) anchors.
  AlignedPair pair;
  std::vector<AnchorLink> true_anchors;
  std::vector<AnchorLink> train_anchors;
  std::vector<AnchorLink> test_anchors;
  std::vector<int> blocks1;  // planted block per user
  std::vector<int> blocks2;
};

SyntheticData generate_synthetic(const SyntheticParams& params);

}  // namespace shna
