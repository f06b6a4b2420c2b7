#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shna/network.hpp"

namespace shna {

/// The catalogued meta paths. PI* live inside one network, PA* cross the
/// two networks through an anchor link or a shared attribute value.
///
///   PI1  U -follow-> U
///   PI2  U -follow-> U -follow-> U
///   PI3  U -follow-> U <-follow- U                  common out-neighbour
///   PI4  U <-follow- U -follow-> U                  common in-neighbour
///   PI5  U -write-> P -at-> T <-at- P <-write- U    common timestamp
///   PI6  U -write-> P -checkin-> L <-checkin- P <-write- U
///   PA1  U -follow-> U <-anchor-> U <-follow- U     common anchored followee
///   PA2  U <-follow- U <-anchor-> U -follow-> U     common anchored follower
///   PA3  U -follow-> U <-anchor-> U -follow-> U
///   PA4  U <-follow- U <-anchor-> U <-follow- U
///   PA5  U -write-> P -at-> T <-at- P <-write- U    (across networks)
///   PA6  U -write-> P -checkin-> L <-checkin- P <-write- U
enum class MetaPath { PI1, PI2, PI3, PI4, PI5, PI6, PA1, PA2, PA3, PA4, PA5, PA6 };

inline constexpr MetaPath kAllMetaPaths[] = {
    MetaPath::PI1, MetaPath::PI2, MetaPath::PI3, MetaPath::PI4, MetaPath::PI5, MetaPath::PI6,
    MetaPath::PA1, MetaPath::PA2, MetaPath::PA3, MetaPath::PA4, MetaPath::PA5, MetaPath::PA6};

enum class Scope { Intra, Inter };

Scope scope_of(MetaPath path);
/// Social paths run through follow links; attribute paths through posts.
bool is_social(MetaPath path);
/// PA1..PA4 traverse a labeled anchor link.
bool uses_anchors(MetaPath path);

std::string_view to_string(MetaPath path);
std::optional<MetaPath> parse_meta_path(std::string_view text);

using CountMatrix = SparseMatrix;

/// One factor of a diagram. A transposed factor counts the path from the
/// target back to the source; only meaningful inside one network.
struct DiagramFactor {
  MetaPath path;
  bool transposed = false;
};

enum class CompositionClass {
  Single,                        // one path
  SocialSquared,                 // f x f
  AttributeSquared,              // a x a
  SocialAttribute,               // f x a
  SocialAttributeSquared,        // f x a x a
  SocialSquaredAttributeSquared  // f x f x a x a
};

/// A meta diagram: factor paths that must join the same endpoint pair.
struct MetaDiagram {
  std::string name;
  Scope scope = Scope::Intra;
  std::vector<DiagramFactor> factors;
};

/// Throws UsageError if the factors mix scopes, transpose an inter path, or
/// do not form one of the catalogued composition classes.
CompositionClass classify(const MetaDiagram& diagram);

MetaDiagram single_path_diagram(MetaPath path);

/// The named catalogue: PI1..PI6, PA1..PA6 and
///   PSI_I1 = PI1 x PI1'   (mutual follow)
///   PSI_I2 = PI5 x PI6
///   PSI_I3 = PI1 x PI5 x PI6
///   PSI_A1 = PA1 x PA2
///   PSI_A2 = PA5 x PA6
///   PSI_A3 = PA1 x PA5 x PA6
const std::vector<MetaDiagram>& diagram_catalog();

/// Resolves a catalogue name, or an ad-hoc composition written as factor
/// names joined by 'x' (a trailing apostrophe transposes an intra factor),
/// e.g. "PA3xPA6" or "PI3xPI1'".
MetaDiagram lookup_diagram(std::string_view name);

std::vector<MetaDiagram> lookup_diagrams(std::span<const std::string> names);

/// Instance counts of an intra-network path: entry (x, y) is the number of
/// path instances from user x to user y. The diagonal is always zero.
CountMatrix count_meta_path(const HeterogeneousNetwork& net, MetaPath path);

/// Instance counts of an inter-network path, |U1| x |U2|. Anchor steps use
/// the pair's labeled anchors; attribute steps join equal identifiers.
CountMatrix count_meta_path(const AlignedPair& pair, MetaPath path);

/// Elementwise product of the factor counts.
CountMatrix compose_diagram(std::span<const CountMatrix> factor_counts);

CountMatrix count_diagram(const HeterogeneousNetwork& net, const MetaDiagram& diagram);
CountMatrix count_diagram(const AlignedPair& pair, const MetaDiagram& diagram);

}  // namespace shna
