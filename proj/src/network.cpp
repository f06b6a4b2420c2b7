#include "shna/network.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "shna/error.hpp"
#include "shna/log.hpp"
#include "shna/tsv.hpp"

namespace shna {
namespace {

constexpr std::size_t idx(NodeKind k) { return static_cast<std::size_t>(k); }
constexpr std::size_t idx(Relation r) { return static_cast<std::size_t>(r); }

std::string location(const std::filesystem::path& file, std::size_t line) {
  return file.filename().string() + ":" + std::to_string(line);
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::User: return "user";
    case NodeKind::Post: return "post";
    case NodeKind::Location: return "location";
    case NodeKind::Timestamp: return "timestamp";
  }
  return "?";
}

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::Follow: return "follow";
    case Relation::Write: return "write";
    case Relation::Checkin: return "checkin";
    case Relation::At: return "at";
  }
  return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  for (auto k : {NodeKind::User, NodeKind::Post, NodeKind::Location, NodeKind::Timestamp})
    if (text == to_string(k)) return k;
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view text) {
  for (auto r : {Relation::Follow, Relation::Write, Relation::Checkin, Relation::At})
    if (text == to_string(r)) return r;
  return std::nullopt;
}

NodeKind source_kind(Relation relation) {
  switch (relation) {
    case Relation::Follow:
    case Relation::Write: return NodeKind::User;
    case Relation::Checkin:
    case Relation::At: return NodeKind::Post;
  }
  return NodeKind::User;
}

NodeKind target_kind(Relation relation) {
  switch (relation) {
    case Relation::Follow: return NodeKind::User;
    case Relation::Write: return NodeKind::Post;
    case Relation::Checkin: return NodeKind::Location;
    case Relation::At: return NodeKind::Timestamp;
  }
  return NodeKind::User;
}

std::string bucket_timestamp(std::string_view id, long long bucket_seconds) {
  if (bucket_seconds <= 0) return std::string(id);
  long long t = 0;
  const auto res = std::from_chars(id.data(), id.data() + id.size(), t);
  if (res.ec != std::errc{} || res.ptr != id.data() + id.size()) return std::string(id);
  long long q = t / bucket_seconds;
  if (t % bucket_seconds != 0 && t < 0) --q;
  return std::to_string(q * bucket_seconds);
}

// ---------------------------------------------------------------------------

const std::string& HeterogeneousNetwork::id(NodeKind kind, Index index) const {
  const auto& v = ids_[idx(kind)];
  if (index < 0 || static_cast<std::size_t>(index) >= v.size())
    throw UsageError(std::string(to_string(kind)) + " index out of range: " + std::to_string(index));
  return v[static_cast<std::size_t>(index)];
}

std::optional<Index> HeterogeneousNetwork::find(NodeKind kind, std::string_view id) const {
  const auto& map = index_[idx(kind)];
  const auto it = map.find(std::string(id));
  if (it == map.end()) return std::nullopt;
  return it->second;
}

std::size_t HeterogeneousNetwork::num_edges() const {
  std::size_t n = 0;
  for (const auto& e : edges_) n += e.size();
  return n;
}

SparseMatrix HeterogeneousNetwork::adjacency(Relation relation) const {
  const auto rows = static_cast<Index>(size(source_kind(relation)));
  const auto cols = static_cast<Index>(size(target_kind(relation)));
  std::vector<Eigen::Triplet<double>> triplets;
  const auto es = edges(relation);
  triplets.reserve(es.size());
  for (const auto& e : es) triplets.emplace_back(e.src, e.dst, 1.0);
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

HeterogeneousNetwork HeterogeneousNetwork::induced(std::span<const Index> users) const {
  HeterogeneousNetwork out;
  const auto n_users = static_cast<Index>(num_users());
  std::vector<Index> user_map(num_users(), -1);
  for (const Index u : users) {
    if (u < 0 || u >= n_users) throw UsageError("induced: user index out of range");
    if (user_map[static_cast<std::size_t>(u)] >= 0) throw UsageError("induced: duplicate user");
    user_map[static_cast<std::size_t>(u)] = static_cast<Index>(out.ids_[idx(NodeKind::User)].size());
    out.ids_[idx(NodeKind::User)].push_back(ids_[idx(NodeKind::User)][static_cast<std::size_t>(u)]);
  }

  auto remap = [&](NodeKind kind, std::vector<Index>& map, Index old) {
    auto& slot = map[static_cast<std::size_t>(old)];
    if (slot < 0) {
      slot = static_cast<Index>(out.ids_[idx(kind)].size());
      out.ids_[idx(kind)].push_back(ids_[idx(kind)][static_cast<std::size_t>(old)]);
    }
    return slot;
  };

  for (const auto& e : edges(Relation::Follow)) {
    const Index a = user_map[static_cast<std::size_t>(e.src)];
    const Index b = user_map[static_cast<std::size_t>(e.dst)];
    if (a >= 0 && b >= 0) out.edges_[idx(Relation::Follow)].push_back({a, b});
  }

  std::vector<Index> post_map(num_posts(), -1);
  // Posts follow the order of the kept users, then original post order.
  std::vector<Edge> writes;
  for (const auto& e : edges(Relation::Write))
    if (user_map[static_cast<std::size_t>(e.src)] >= 0) writes.push_back(e);
  std::stable_sort(writes.begin(), writes.end(), [&](const Edge& a, const Edge& b) {
    return user_map[static_cast<std::size_t>(a.src)] < user_map[static_cast<std::size_t>(b.src)];
  });
  for (const auto& e : writes) {
    const Index p = remap(NodeKind::Post, post_map, e.dst);
    out.edges_[idx(Relation::Write)].push_back({user_map[static_cast<std::size_t>(e.src)], p});
  }

  for (auto [rel, kind] : {std::pair{Relation::Checkin, NodeKind::Location},
                           std::pair{Relation::At, NodeKind::Timestamp}}) {
    std::vector<Index> attr_map(size(kind), -1);
    for (const auto& e : edges(rel)) {
      const Index p = post_map[static_cast<std::size_t>(e.src)];
      if (p < 0) continue;
      out.edges_[idx(rel)].push_back({p, remap(kind, attr_map, e.dst)});
    }
  }

  for (std::size_t k = 0; k < kNodeKindCount; ++k) {
    const auto& v = out.ids_[k];
    for (std::size_t i = 0; i < v.size(); ++i) out.index_[k].emplace(v[i], static_cast<Index>(i));
  }
  return out;
}

// ---------------------------------------------------------------------------

NetworkBuilder::NetworkBuilder(IngestOptions options) : options_(options) {}

Index NetworkBuilder::add_node(NodeKind kind, std::string_view raw_id) {
  std::string id = kind == NodeKind::Timestamp
                       ? bucket_timestamp(raw_id, options_.timestamp_bucket_seconds)
                       : std::string(raw_id);
  if (id.empty()) throw ValidationError(std::string("empty ") + std::string(to_string(kind)) + " id");
  auto& map = net_.index_[idx(kind)];
  const auto next = static_cast<Index>(net_.ids_[idx(kind)].size());
  const auto [it, inserted] = map.emplace(id, next);
  if (!inserted) {
    if (kind == NodeKind::User || kind == NodeKind::Post)
      log::warning("duplicate " + std::string(to_string(kind)) + " '" + id + "' ignored");
    return it->second;
  }
  net_.ids_[idx(kind)].push_back(std::move(id));
  return next;
}

void NetworkBuilder::add_edge(Relation relation, std::string_view src_id, std::string_view dst_id) {
  const NodeKind sk = source_kind(relation);
  const NodeKind dk = target_kind(relation);
  const auto src = net_.find(sk, src_id);
  const std::string dst_key = dk == NodeKind::Timestamp
                                  ? bucket_timestamp(dst_id, options_.timestamp_bucket_seconds)
                                  : std::string(dst_id);
  const auto dst = net_.find(dk, dst_key);
  if (!src || !dst) {
    std::ostringstream msg;
    msg << to_string(relation) << " edge " << src_id << " -> " << dst_id << " references undeclared "
        << (!src ? to_string(sk) : to_string(dk)) << " '" << (!src ? src_id : dst_id) << "'";
    throw ValidationError(msg.str());
  }
  net_.edges_[idx(relation)].push_back({*src, *dst});
}

void NetworkBuilder::add_edge(Relation relation, Index src, Index dst) {
  const auto ns = static_cast<Index>(net_.size(source_kind(relation)));
  const auto nd = static_cast<Index>(net_.size(target_kind(relation)));
  if (src < 0 || src >= ns || dst < 0 || dst >= nd)
    throw ValidationError(std::string(to_string(relation)) + " edge index out of range");
  net_.edges_[idx(relation)].push_back({src, dst});
}

HeterogeneousNetwork NetworkBuilder::build() && {
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    auto& es = net_.edges_[r];
    std::set<Edge> seen;
    std::vector<Edge> kept;
    kept.reserve(es.size());
    std::size_t duplicates = 0;
    std::size_t loops = 0;
    for (const auto& e : es) {
      if (r == idx(Relation::Follow) && e.src == e.dst) {
        ++loops;
        continue;
      }
      if (seen.insert(e).second) kept.push_back(e);
      else ++duplicates;
    }
    const auto name = std::string(to_string(static_cast<Relation>(r)));
    if (duplicates > 0)
      log::warning("dropped " + std::to_string(duplicates) + " duplicate " + name + " edge(s)");
    if (loops > 0) log::warning("dropped " + std::to_string(loops) + " self-follow edge(s)");
    es = std::move(kept);
  }
  return std::move(net_);
}

// ---------------------------------------------------------------------------

void validate_anchors(std::span<const AnchorLink> anchors, std::size_t n1, std::size_t n2) {
  std::vector<char> used1(n1, 0), used2(n2, 0);
  for (const auto& a : anchors) {
    if (a.user1 < 0 || static_cast<std::size_t>(a.user1) >= n1 || a.user2 < 0 ||
        static_cast<std::size_t>(a.user2) >= n2)
      throw ValidationError("anchor (" + std::to_string(a.user1) + ", " + std::to_string(a.user2) +
                            ") out of range");
    if (used1[static_cast<std::size_t>(a.user1)]++)
      throw ValidationError("one-to-one violation: net1 user " + std::to_string(a.user1) +
                            " appears in more than one anchor");
    if (used2[static_cast<std::size_t>(a.user2)]++)
      throw ValidationError("one-to-one violation: net2 user " + std::to_string(a.user2) +
                            " appears in more than one anchor");
  }
}

AlignedPair::AlignedPair(HeterogeneousNetwork net1, HeterogeneousNetwork net2,
                         std::vector<AnchorLink> labeled_anchors)
    : net1_(std::move(net1)), net2_(std::move(net2)), labeled_(std::move(labeled_anchors)) {
  validate_anchors(labeled_, net1_.num_users(), net2_.num_users());
  std::sort(labeled_.begin(), labeled_.end());
}

SparseMatrix AlignedPair::anchor_matrix() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(labeled_.size());
  for (const auto& a : labeled_) t.emplace_back(a.user1, a.user2, 1.0);
  SparseMatrix m(static_cast<Index>(net1_.num_users()), static_cast<Index>(net2_.num_users()));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

AlignedPair AlignedPair::with_anchors(std::vector<AnchorLink> labeled_anchors) const {
  return AlignedPair(net1_, net2_, std::move(labeled_anchors));
}

// ---------------------------------------------------------------------------

HeterogeneousNetwork load_network(const std::filesystem::path& node_file,
                                  const std::filesystem::path& edge_file,
                                  const IngestOptions& options) {
  NetworkBuilder builder(options);
  tsv::for_each_row(node_file, [&](std::span<const std::string_view> f, std::size_t line) {
    if (f.size() != 2)
      throw ParseError(location(node_file, line) + ": expected 2 columns (kind, id), got " +
                       std::to_string(f.size()));
    const auto kind = parse_node_kind(f[0]);
    if (!kind) throw ParseError(location(node_file, line) + ": unknown node kind '" + std::string(f[0]) + "'");
    builder.add_node(*kind, f[1]);
  });
  tsv::for_each_row(edge_file, [&](std::span<const std::string_view> f, std::size_t line) {
    if (f.size() != 3)
      throw ParseError(location(edge_file, line) + ": expected 3 columns (relation, src, dst), got " +
                       std::to_string(f.size()));
    const auto rel = parse_relation(f[0]);
    if (!rel) throw ParseError(location(edge_file, line) + ": unknown relation '" + std::string(f[0]) + "'");
    try {
      builder.add_edge(*rel, f[1], f[2]);
    } catch (const ValidationError& e) {
      throw ValidationError(location(edge_file, line) + ": " + e.what());
    }
  });
  return std::move(builder).build();
}

void write_network(const HeterogeneousNetwork& net, const std::filesystem::path& node_file,
                   const std::filesystem::path& edge_file) {
  auto nodes = tsv::open_output(node_file);
  for (auto k : {NodeKind::User, NodeKind::Post, NodeKind::Location, NodeKind::Timestamp})
    for (const auto& id : net.ids(k)) nodes << to_string(k) << '\t' << id << '\n';
  auto edges = tsv::open_output(edge_file);
  for (auto r : {Relation::Follow, Relation::Write, Relation::Checkin, Relation::At}) {
    const auto sk = source_kind(r);
    const auto dk = target_kind(r);
    for (const auto& e : net.edges(r))
      edges << to_string(r) << '\t' << net.id(sk, e.src) << '\t' << net.id(dk, e.dst) << '\n';
  }
}

std::vector<AnchorLink> load_anchors(const std::filesystem::path& anchor_file,
                                     const HeterogeneousNetwork& net1,
                                     const HeterogeneousNetwork& net2) {
  std::vector<AnchorLink> out;
  tsv::for_each_row(anchor_file, [&](std::span<const std::string_view> f, std::size_t line) {
    if (f.size() != 2)
      throw ParseError(location(anchor_file, line) + ": expected 2 columns, got " + std::to_string(f.size()));
    const auto a = net1.find(NodeKind::User, f[0]);
    const auto b = net2.find(NodeKind::User, f[1]);
    if (!a) throw ValidationError(location(anchor_file, line) + ": unknown net1 user '" + std::string(f[0]) + "'");
    if (!b) throw ValidationError(location(anchor_file, line) + ": unknown net2 user '" + std::string(f[1]) + "'");
    out.push_back({*a, *b});
  });
  validate_anchors(out, net1.num_users(), net2.num_users());
  return out;
}

void write_anchors(std::span<const AnchorLink> anchors, const HeterogeneousNetwork& net1,
                   const HeterogeneousNetwork& net2, const std::filesystem::path& anchor_file) {
  auto out = tsv::open_output(anchor_file);
  for (const auto& a : anchors)
    out << net1.id(NodeKind::User, a.user1) << '\t' << net2.id(NodeKind::User, a.user2) << '\n';
}

AlignedPair load_aligned_pair(HeterogeneousNetwork net1, HeterogeneousNetwork net2,
                              const std::filesystem::path& anchor_file) {
  auto anchors = load_anchors(anchor_file, net1, net2);
  return AlignedPair(std::move(net1), std::move(net2), std::move(anchors));
}

}  // namespace shna
