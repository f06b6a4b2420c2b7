#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "shna/meta_diagram.hpp"

namespace shna {

/// Per-diagram mixing weights. Must be nonnegative and sum to one.
class DiagramWeights {
 public:
  DiagramWeights() = default;
  explicit DiagramWeights(std::map<std::string, double> weights);

  static DiagramWeights uniform(std::span<const MetaDiagram> diagrams);

  double at(const std::string& name) const;
  const std::map<std::string, double>& values() const { return weights_; }

  /// Throws UsageError unless the weight keys are exactly the diagram names.
  void check_covers(std::span<const MetaDiagram> diagrams) const;

 private:
  std::map<std::string, double> weights_;
};

enum class ProximityScope { IntraNet1, IntraNet2, Inter };

struct ProximityMatrix {
  ProximityScope scope = ProximityScope::IntraNet1;
  SparseMatrix values;
};

/// Single-diagram intra score: (A(x,y) + A(y,x)) / (sum_m A(x,m) + sum_m A(y,m)),
/// zero where the denominator vanishes.
SparseMatrix intra_diagram_proximity(const CountMatrix& counts);

/// Single-diagram inter score: 2 A(x,y) / (sum_m A(x,m) + sum_m A(m,y)).
SparseMatrix inter_diagram_proximity(const CountMatrix& counts);

/// Weighted IntraMD-Pro over the given diagrams. Terms are accumulated in
/// diagram-name order so the result does not depend on the input order.
ProximityMatrix intra_md_pro(const HeterogeneousNetwork& net, std::span<const MetaDiagram> diagrams,
                             const DiagramWeights& weights,
                             ProximityScope scope = ProximityScope::IntraNet1);

ProximityMatrix inter_md_pro(const AlignedPair& pair, std::span<const MetaDiagram> diagrams,
                             const DiagramWeights& weights);

/// Writes `row<TAB>col<TAB>value` triples for the nonzero entries, row-major.
void write_proximity_tsv(const SparseMatrix& matrix, const std::filesystem::path& file);

}  // namespace shna
