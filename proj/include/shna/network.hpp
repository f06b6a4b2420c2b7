#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

namespace shna {

using Index = std::ptrdiff_t;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class NodeKind { User = 0, Post = 1, Location = 2, Timestamp = 3 };
inline constexpr std::size_t kNodeKindCount = 4;

/// Typed relations of the (user, post, location, timestamp) schema.
/// follow: user -> user, write: user -> post,
/// checkin: post -> location, at: post -> timestamp.
enum class Relation { Follow = 0, Write = 1, Checkin = 2, At = 3 };
inline constexpr std::size_t kRelationCount = 4;

std::string_view to_string(NodeKind kind);
std::string_view to_string(Relation relation);
std::optional<NodeKind> parse_node_kind(std::string_view text);
std::optional<Relation> parse_relation(std::string_view text);

NodeKind source_kind(Relation relation);
NodeKind target_kind(Relation relation);

struct Edge {
  Index src = 0;
  Index dst = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct IngestOptions {
  /// Width of the timestamp buckets in seconds. Numeric timestamp ids are
  /// floored to a multiple of this width; non-numeric ids are kept verbatim.
  /// Zero disables bucketing.
  long long timestamp_bucket_seconds = 3600;
};

/// Maps a raw timestamp identifier to its bucket identifier.
std::string bucket_timestamp(std::string_view id, long long bucket_seconds);

/// An attributed heterogeneous social network. Immutable once built; every
/// node kind is densely indexed 0..n-1 in declaration order.
class HeterogeneousNetwork {
 public:
  HeterogeneousNetwork() = default;

  std::size_t size(NodeKind kind) const { return ids_[static_cast<std::size_t>(kind)].size(); }
  std::size_t num_users() const { return size(NodeKind::User); }
  std::size_t num_posts() const { return size(NodeKind::Post); }

  const std::vector<std::string>& ids(NodeKind kind) const {
    return ids_[static_cast<std::size_t>(kind)];
  }
  const std::string& id(NodeKind kind, Index index) const;
  std::optional<Index> find(NodeKind kind, std::string_view id) const;

  std::span<const Edge> edges(Relation relation) const {
    return edges_[static_cast<std::size_t>(relation)];
  }
  std::size_t num_edges() const;

  /// Binary adjacency matrix of one relation, rows indexed by the source
  /// kind and columns by the target kind.
  SparseMatrix adjacency(Relation relation) const;

  /// Sub-network induced by a user subset: follow edges among those users,
  /// their posts, and the attributes of those posts. Users keep the order
  /// given in `users`.
  HeterogeneousNetwork induced(std::span<const Index> users) const;

 private:
  friend class NetworkBuilder;

  std::array<std::vector<std::string>, kNodeKindCount> ids_;
  std::array<std::unordered_map<std::string, Index>, kNodeKindCount> index_;
  std::array<std::vector<Edge>, kRelationCount> edges_;
};

/// Incrementally assembles a validated network.
class NetworkBuilder {
 public:
  explicit NetworkBuilder(IngestOptions options = {});

  /// Declares a node; returns its dense index. Redeclaring an id returns the
  /// existing index (timestamps routinely collapse into one bucket).
  Index add_node(NodeKind kind, std::string_view id);

  /// Adds an edge between declared nodes. Throws ValidationError when an
  /// endpoint is undeclared.
  void add_edge(Relation relation, std::string_view src_id, std::string_view dst_id);
  void add_edge(Relation relation, Index src, Index dst);

  std::size_t size(NodeKind kind) const { return net_.size(kind); }

  /// Deduplicates edges (with a warning) and drops self-follows.
  HeterogeneousNetwork build() &&;

 private:
  IngestOptions options_;
  HeterogeneousNetwork net_;
};

/// Undirected anchor link stored as (net1 user index, net2 user index).
struct AnchorLink {
  Index user1 = 0;
  Index user2 = 0;
  friend auto operator<=>(const AnchorLink&, const AnchorLink&) = default;
};

/// Throws ValidationError if a user appears twice on either side or an
/// index is out of range.
void validate_anchors(std::span<const AnchorLink> anchors, std::size_t n1, std::size_t n2);

/// Two networks plus the labeled anchor links between them.
class AlignedPair {
 public:
  AlignedPair() = default;
  AlignedPair(HeterogeneousNetwork net1, HeterogeneousNetwork net2,
              std::vector<AnchorLink> labeled_anchors);

  const HeterogeneousNetwork& net1() const { return net1_; }
  const HeterogeneousNetwork& net2() const { return net2_; }
  std::span<const AnchorLink> labeled_anchors() const { return labeled_; }

  /// |U1| x |U2| binary matrix of the labeled anchors.
  SparseMatrix anchor_matrix() const;

  /// Same networks, different labeled set.
  AlignedPair with_anchors(std::vector<AnchorLink> labeled_anchors) const;

 private:
  HeterogeneousNetwork net1_;
  HeterogeneousNetwork net2_;
  std::vector<AnchorLink> labeled_;
};

// File formats (TSV):
//   nodes:   kind<TAB>id             kind in {user, post, location, timestamp}
//   edges:   relation<TAB>src<TAB>dst relation in {follow, write, checkin, at}
//   anchors: user_id_net1<TAB>user_id_net2
// Blank lines and lines starting with '#' are ignored.

HeterogeneousNetwork load_network(const std::filesystem::path& node_file,
                                  const std::filesystem::path& edge_file,
                                  const IngestOptions& options = {});

void write_network(const HeterogeneousNetwork& net, const std::filesystem::path& node_file,
                   const std::filesystem::path& edge_file);

std::vector<AnchorLink> load_anchors(const std::filesystem::path& anchor_file,
                                     const HeterogeneousNetwork& net1,
                                     const HeterogeneousNetwork& net2);

void write_anchors(std::span<const AnchorLink> anchors, const HeterogeneousNetwork& net1,
                   const HeterogeneousNetwork& net2, const std::filesystem::path& anchor_file);

AlignedPair load_aligned_pair(HeterogeneousNetwork net1, HeterogeneousNetwork net2,
                              const std::filesystem::path& anchor_file);

}  // namespace shna
