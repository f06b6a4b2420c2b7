#include "shna/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "shna/error.hpp"

namespace shna {
namespace {

constexpr long long kEpochBase = 1'600'000'000 - 1'600'000'000 % 3600;

struct Profile {
  std::vector<int> locations;
  std::vector<int> timestamps;
};

int block_of(int user, int n, int k) { return static_cast<int>(static_cast<long long>(user) * k / n); }

std::vector<int> sample_tokens(int block, int k, int vocab, int count, std::mt19937_64& rng) {
  const int lo = static_cast<int>(static_cast<long long>(block) * vocab / k);
  const int hi = static_cast<int>(static_cast<long long>(block + 1) * vocab / k);
  std::uniform_int_distribution<int> pick(lo, hi - 1);
  std::vector<int> out(static_cast<std::size_t>(count));
  for (auto& t : out) t = pick(rng);
  return out;
}

}  // namespace

void SyntheticParams::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError("synthetic: " + m); };
  if (n_users < 1) fail("n_users must be positive");
  if (k_blocks < 1 || k_blocks > n_users) fail("k_blocks must lie in [1, n_users]");
  if (!(p_in > 0.0 && p_in <= 1.0)) fail("p_in must lie in (0, 1]");
  if (!(p_out >= 0.0 && p_out < p_in)) fail("p_out must lie in [0, p_in)");
  if (posts_per_user < 1) fail("posts_per_user must be positive");
  if (attr_vocab < k_blocks) fail("attr_vocab must be at least k_blocks");
  if (!(anchor_fraction >= 0.0 && anchor_fraction <= 1.0)) fail("anchor_fraction must lie in [0, 1]");
  if (!(noise >= 0.0 && noise <= 1.0)) fail("noise must lie in [0, 1]");
  if (!(overlap >= 0.0 && overlap <= 1.0)) fail("overlap must lie in [0, 1]");
  if (profile_size < 1) fail("profile_size must be positive");
}

SyntheticData generate_synthetic(const SyntheticParams& p) {
  p.validate();
  std::mt19937_64 rng(p.seed);
  std::bernoulli_distribution coin_noise(p.noise);
  const int n = p.n_users;
  const int k = p.k_blocks;
  const int shared = static_cast<int>(std::lround(p.overlap * n));

  // Logical users 0..n-1 in each network; logical u < shared is the same
  // person in both. Network 2 stores logical user u at index perm[u].
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  auto follow_prob = [&](int a, int b) { return block_of(a, n, k) == block_of(b, n, k) ? p.p_in : p.p_out; };

  std::vector<char> follow1(static_cast<std::size_t>(n) * n, 0), follow2(static_cast<std::size_t>(n) * n, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) follow1[static_cast<std::size_t>(a) * n + b] = unit(rng) < follow_prob(a, b);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const bool twin_slot = a < shared && b < shared;
      const bool redraw = !twin_slot || coin_noise(rng);
      const double u = unit(rng);
      follow2[static_cast<std::size_t>(a) * n + b] =
          redraw ? u < follow_prob(a, b) : follow1[static_cast<std::size_t>(a) * n + b];
    }

  std::vector<Profile> profile1(static_cast<std::size_t>(n)), profile2(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    const int b = block_of(u, n, k);
    profile1[static_cast<std::size_t>(u)] = {sample_tokens(b, k, p.attr_vocab, p.profile_size, rng),
                                             sample_tokens(b, k, p.attr_vocab, p.profile_size, rng)};
  }
  for (int u = 0; u < n; ++u) {
    const int b = block_of(u, n, k);
    profile2[static_cast<std::size_t>(u)] =
        u < shared ? profile1[static_cast<std::size_t>(u)]
                   : Profile{sample_tokens(b, k, p.attr_vocab, p.profile_size, rng),
                             sample_tokens(b, k, p.attr_vocab, p.profile_size, rng)};
  }

  auto build = [&](int net_id, const std::vector<char>& follow, const std::vector<Profile>& profiles,
                   auto&& index_of) {
    NetworkBuilder builder;
    const std::string prefix = net_id == 1 ? "a" : "b";
    std::vector<int> logical_at(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) logical_at[static_cast<std::size_t>(index_of(u))] = u;
    for (int i = 0; i < n; ++i) builder.add_node(NodeKind::User, prefix + std::to_string(i));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (follow[static_cast<std::size_t>(a) * n + b]) builder.add_edge(Relation::Follow, index_of(a), index_of(b));

    std::uniform_int_distribution<int> any_token(0, p.attr_vocab - 1);
    std::uniform_int_distribution<int> minute_offset(0, 3599);
    std::uniform_int_distribution<int> profile_pick(0, p.profile_size - 1);
    for (int i = 0; i < n; ++i) {
      const int u = logical_at[static_cast<std::size_t>(i)];
      const auto& prof = profiles[static_cast<std::size_t>(u)];
      for (int m = 0; m < p.posts_per_user; ++m) {
        const Index post = builder.add_node(NodeKind::Post, prefix + "p" + std::to_string(i) + "_" + std::to_string(m));
        builder.add_edge(Relation::Write, i, post);
        const int loc = coin_noise(rng) ? any_token(rng) : prof.locations[static_cast<std::size_t>(profile_pick(rng))];
        const int ts = coin_noise(rng) ? any_token(rng) : prof.timestamps[static_cast<std::size_t>(profile_pick(rng))];
        const Index loc_node = builder.add_node(NodeKind::Location, "loc" + std::to_string(loc));
        const long long when = kEpochBase + 3600LL * ts + minute_offset(rng);
        const Index ts_node = builder.add_node(NodeKind::Timestamp, std::to_string(when));
        builder.add_edge(Relation::Checkin, post, loc_node);
        builder.add_edge(Relation::At, post, ts_node);
      }
    }
    return std::move(builder).build();
  };

  HeterogeneousNetwork net1 = build(1, follow1, profile1, [](int u) { return u; });
  HeterogeneousNetwork net2 = build(2, follow2, profile2, [&](int u) { return perm[static_cast<std::size_t>(u)]; });

  SyntheticData out;
  out.blocks1.resize(static_cast<std::size_t>(n));
  out.blocks2.resize(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    out.blocks1[static_cast<std::size_t>(u)] = block_of(u, n, k);
    out.blocks2[static_cast<std::size_t>(perm[static_cast<std::size_t>(u)])] = block_of(u, n, k);
  }
  for (int u = 0; u < shared; ++u) out.true_anchors.push_back({u, perm[static_cast<std::size_t>(u)]});

  std::vector<AnchorLink> shuffled = out.true_anchors;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::lround(p.anchor_fraction * static_cast<double>(shuffled.size())));
  out.train_anchors.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test_anchors.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  std::sort(out.train_anchors.begin(), out.train_anchors.end());
  std::sort(out.test_anchors.begin(), out.test_anchors.end());
  out.pair = AlignedPair(std::move(net1), std::move(net2), out.train_anchors);
  return out;
}

}  // namespace shna
