#include "shna/meta_diagram.hpp"

#include <array>

#include "shna/error.hpp"

namespace shna {
namespace {

constexpr std::array<std::string_view, 12> kPathNames = {
    "PI1", "PI2", "PI3", "PI4", "PI5", "PI6", "PA1", "PA2", "PA3", "PA4", "PA5", "PA6"};

void zero_diagonal(SparseMatrix& m) {
  for (Index col = 0; col < m.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(m, col); it; ++it)
      if (it.row() == it.col()) it.valueRef() = 0.0;
  m.prune(0.0);
}

/// |A1| x |A2| matrix joining attribute values with equal identifiers.
SparseMatrix attribute_join(const HeterogeneousNetwork& a, const HeterogeneousNetwork& b,
                            NodeKind kind) {
  std::vector<Eigen::Triplet<double>> t;
  const auto& ids = a.ids(kind);
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (const auto j = b.find(kind, ids[i])) t.emplace_back(static_cast<Index>(i), *j, 1.0);
  SparseMatrix m(static_cast<Index>(a.size(kind)), static_cast<Index>(b.size(kind)));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// User -> attribute value counts through write then checkin/at.
SparseMatrix user_attribute(const HeterogeneousNetwork& net, Relation attr) {
  SparseMatrix m = net.adjacency(Relation::Write) * net.adjacency(attr);
  return m;
}

Relation attribute_relation(MetaPath path) {
  return (path == MetaPath::PI5 || path == MetaPath::PA5) ? Relation::At : Relation::Checkin;
}

}  // namespace

Scope scope_of(MetaPath path) {
  return static_cast<int>(path) <= static_cast<int>(MetaPath::PI6) ? Scope::Intra : Scope::Inter;
}

bool is_social(MetaPath path) {
  switch (path) {
    case MetaPath::PI5:
    case MetaPath::PI6:
    case MetaPath::PA5:
    case MetaPath::PA6: return false;
    default: return true;
  }
}

bool uses_anchors(MetaPath path) { return scope_of(path) == Scope::Inter && is_social(path); }

std::string_view to_string(MetaPath path) { return kPathNames[static_cast<std::size_t>(path)]; }

std::optional<MetaPath> parse_meta_path(std::string_view text) {
  for (std::size_t i = 0; i < kPathNames.size(); ++i)
    if (kPathNames[i] == text) return static_cast<MetaPath>(i);
  return std::nullopt;
}

CompositionClass classify(const MetaDiagram& diagram) {
  if (diagram.factors.empty()) throw UsageError("diagram '" + diagram.name + "' has no factors");
  int social = 0;
  int attribute = 0;
  for (const auto& f : diagram.factors) {
    if (scope_of(f.path) != diagram.scope)
      throw UsageError("diagram '" + diagram.name + "' mixes intra and inter paths");
    if (f.transposed && diagram.scope == Scope::Inter)
      throw UsageError("diagram '" + diagram.name + "': inter-network factors cannot be transposed");
    (is_social(f.path) ? social : attribute)++;
  }
  if (social + attribute == 1) return CompositionClass::Single;
  if (social == 2 && attribute == 0) return CompositionClass::SocialSquared;
  if (social == 0 && attribute == 2) return CompositionClass::AttributeSquared;
  if (social == 1 && attribute == 1) return CompositionClass::SocialAttribute;
  if (social == 1 && attribute == 2) return CompositionClass::SocialAttributeSquared;
  if (social == 2 && attribute == 2) return CompositionClass::SocialSquaredAttributeSquared;
  throw UsageError("diagram '" + diagram.name + "' is not a catalogued composition (" +
                   std::to_string(social) + " social x " + std::to_string(attribute) + " attribute)");
}

MetaDiagram single_path_diagram(MetaPath path) {
  return MetaDiagram{std::string(to_string(path)), scope_of(path), {{path, false}}};
}

const std::vector<MetaDiagram>& diagram_catalog() {
  static const std::vector<MetaDiagram> catalog = [] {
    std::vector<MetaDiagram> c;
    for (auto p : kAllMetaPaths) c.push_back(single_path_diagram(p));
    using P = MetaPath;
    c.push_back({"PSI_I1", Scope::Intra, {{P::PI1, false}, {P::PI1, true}}});
    c.push_back({"PSI_I2", Scope::Intra, {{P::PI5}, {P::PI6}}});
    c.push_back({"PSI_I3", Scope::Intra, {{P::PI1}, {P::PI5}, {P::PI6}}});
    c.push_back({"PSI_A1", Scope::Inter, {{P::PA1}, {P::PA2}}});
    c.push_back({"PSI_A2", Scope::Inter, {{P::PA5}, {P::PA6}}});
    c.push_back({"PSI_A3", Scope::Inter, {{P::PA1}, {P::PA5}, {P::PA6}}});
    for (const auto& d : c) classify(d);
    return c;
  }();
  return catalog;
}

MetaDiagram lookup_diagram(std::string_view name) {
  for (const auto& d : diagram_catalog())
    if (d.name == name) return d;

  MetaDiagram d;
  d.name = std::string(name);
  std::size_t start = 0;
  while (start <= name.size()) {
    auto end = name.find('x', start);
    if (end == std::string_view::npos) end = name.size();
    auto token = name.substr(start, end - start);
    bool transposed = false;
    if (!token.empty() && token.back() == '\'') {
      transposed = true;
      token.remove_suffix(1);
    }
    const auto path = parse_meta_path(token);
    if (!path) throw UsageError("unknown meta diagram '" + std::string(name) + "'");
    d.factors.push_back({*path, transposed});
    start = end + 1;
  }
  d.scope = scope_of(d.factors.front().path);
  classify(d);
  return d;
}

std::vector<MetaDiagram> lookup_diagrams(std::span<const std::string> names) {
  std::vector<MetaDiagram> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(lookup_diagram(n));
  return out;
}

CountMatrix count_meta_path(const HeterogeneousNetwork& net, MetaPath path) {
  if (scope_of(path) != Scope::Intra)
    throw UsageError(std::string(to_string(path)) + " is an inter-network path; pass an AlignedPair");
  const SparseMatrix follow = net.adjacency(Relation::Follow);
  SparseMatrix out;
  switch (path) {
    case MetaPath::PI1: out = follow; break;
    case MetaPath::PI2: out = follow * follow; break;
    case MetaPath::PI3: out = follow * SparseMatrix(follow.transpose()); break;
    case MetaPath::PI4: out = SparseMatrix(follow.transpose()) * follow; break;
    case MetaPath::PI5:
    case MetaPath::PI6: {
      const SparseMatrix ua = user_attribute(net, attribute_relation(path));
      out = ua * SparseMatrix(ua.transpose());
      break;
    }
    default: break;
  }
  zero_diagonal(out);
  return out;
}

CountMatrix count_meta_path(const AlignedPair& pair, MetaPath path) {
  if (scope_of(path) != Scope::Inter)
    throw UsageError(std::string(to_string(path)) + " is an intra-network path; pass one network");
  const auto& n1 = pair.net1();
  const auto& n2 = pair.net2();
  SparseMatrix out;
  if (uses_anchors(path)) {
    const SparseMatrix f1 = n1.adjacency(Relation::Follow);
    const SparseMatrix f2 = n2.adjacency(Relation::Follow);
    const SparseMatrix anchors = pair.anchor_matrix();
    const SparseMatrix f1t = f1.transpose();
    const SparseMatrix f2t = f2.transpose();
    switch (path) {
      case MetaPath::PA1: out = (f1 * anchors) * f2t; break;
      case MetaPath::PA2: out = (f1t * anchors) * f2; break;
      case MetaPath::PA3: out = (f1 * anchors) * f2; break;
      case MetaPath::PA4: out = (f1t * anchors) * f2t; break;
      default: break;
    }
  } else {
    const Relation rel = attribute_relation(path);
    const NodeKind kind = target_kind(rel);
    const SparseMatrix ua1 = user_attribute(n1, rel);
    const SparseMatrix ua2 = user_attribute(n2, rel);
    out = (ua1 * attribute_join(n1, n2, kind)) * SparseMatrix(ua2.transpose());
  }
  out.prune(0.0);
  return out;
}

CountMatrix compose_diagram(std::span<const CountMatrix> factor_counts) {
  if (factor_counts.empty()) throw UsageError("compose_diagram: no factors");
  CountMatrix out = factor_counts.front();
  for (std::size_t i = 1; i < factor_counts.size(); ++i) {
    const auto& f = factor_counts[i];
    if (f.rows() != out.rows() || f.cols() != out.cols())
      throw UsageError("compose_diagram: factor dimensions differ (" + std::to_string(out.rows()) +
                       "x" + std::to_string(out.cols()) + " vs " + std::to_string(f.rows()) + "x" +
                       std::to_string(f.cols()) + ")");
    out = out.cwiseProduct(f);
  }
  out.prune(0.0);
  return out;
}

CountMatrix count_diagram(const HeterogeneousNetwork& net, const MetaDiagram& diagram) {
  if (classify(diagram); diagram.scope != Scope::Intra)
    throw UsageError("diagram '" + diagram.name + "' is inter-network; pass an AlignedPair");
  std::vector<CountMatrix> factors;
  for (const auto& f : diagram.factors) {
    CountMatrix m = count_meta_path(net, f.path);
    factors.push_back(f.transposed ? CountMatrix(m.transpose()) : std::move(m));
  }
  return compose_diagram(factors);
}

CountMatrix count_diagram(const AlignedPair& pair, const MetaDiagram& diagram) {
  if (classify(diagram); diagram.scope != Scope::Inter)
    throw UsageError("diagram '" + diagram.name + "' is intra-network; pass one network");
  std::vector<CountMatrix> factors;
  for (const auto& f : diagram.factors) factors.push_back(count_meta_path(pair, f.path));
  return compose_diagram(factors);
}

}  // namespace shna
