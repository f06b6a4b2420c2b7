#include "shna/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shna/error.hpp"
#include "shna/tsv.hpp"

namespace shna {
namespace {

constexpr double kWeightSumTolerance = 1e-9;

Eigen::VectorXd row_sums(const SparseMatrix& m) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m.rows());
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) r(it.row()) += it.value();
  return r;
}

Eigen::VectorXd col_sums(const SparseMatrix& m) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m.cols());
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) s(c) += it.value();
  return s;
}

std::vector<const MetaDiagram*> sorted_by_name(std::span<const MetaDiagram> diagrams) {
  std::vector<const MetaDiagram*> out;
  for (const auto& d : diagrams) out.push_back(&d);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->name < b->name; });
  return out;
}

}  // namespace

DiagramWeights::DiagramWeights(std::map<std::string, double> weights) : weights_(std::move(weights)) {
  double total = 0.0;
  for (const auto& [name, w] : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw UsageError("weight of '" + name + "' must be a finite nonnegative number");
    total += w;
  }
  if (weights_.empty()) throw UsageError("diagram weights are empty");
  if (std::abs(total - 1.0) > kWeightSumTolerance)
    throw UsageError("diagram weights sum to " + tsv::format_double(total) + ", expected 1");
}

DiagramWeights DiagramWeights::uniform(std::span<const MetaDiagram> diagrams) {
  if (diagrams.empty()) throw UsageError("no diagrams configured");
  std::map<std::string, double> w;
  for (const auto& d : diagrams) w[d.name] = 1.0 / static_cast<double>(diagrams.size());
  if (w.size() != diagrams.size()) throw UsageError("duplicate diagram names");
  return DiagramWeights(std::move(w));
}

double DiagramWeights::at(const std::string& name) const {
  const auto it = weights_.find(name);
  if (it == weights_.end()) throw UsageError("no weight for diagram '" + name + "'");
  return it->second;
}

void DiagramWeights::check_covers(std::span<const MetaDiagram> diagrams) const {
  std::vector<std::string> names;
  for (const auto& d : diagrams) names.push_back(d.name);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw UsageError("duplicate diagram names");
  std::vector<std::string> keys;
  for (const auto& [k, v] : weights_) keys.push_back(k);
  if (keys != names) throw UsageError("diagram weights do not match the configured diagram set");
}

SparseMatrix intra_diagram_proximity(const CountMatrix& counts) {
  if (counts.rows() != counts.cols()) throw UsageError("intra count matrix must be square");
  const Eigen::VectorXd out_deg = row_sums(counts);
  SparseMatrix sym = counts + SparseMatrix(counts.transpose());
  for (Index c = 0; c < sym.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(sym, c); it; ++it) {
      const double denom = out_deg(it.row()) + out_deg(it.col());
      it.valueRef() = denom > 0.0 ? it.value() / denom : 0.0;
    }
  sym.prune(0.0);
  return sym;
}

SparseMatrix inter_diagram_proximity(const CountMatrix& counts) {
  const Eigen::VectorXd out_deg = row_sums(counts);
  const Eigen::VectorXd in_deg = col_sums(counts);
  SparseMatrix s = counts;
  for (Index c = 0; c < s.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(s, c); it; ++it) {
      const double denom = out_deg(it.row()) + in_deg(c);
      it.valueRef() = denom > 0.0 ? 2.0 * it.value() / denom : 0.0;
    }
  s.prune(0.0);
  return s;
}

ProximityMatrix intra_md_pro(const HeterogeneousNetwork& net, std::span<const MetaDiagram> diagrams,
                             const DiagramWeights& weights, ProximityScope scope) {
  if (scope == ProximityScope::Inter) throw UsageError("intra_md_pro: scope must be intra");
  weights.check_covers(diagrams);
  const auto n = static_cast<Index>(net.num_users());
  SparseMatrix total(n, n);
  for (const auto* d : sorted_by_name(diagrams)) {
    if (d->scope != Scope::Intra) throw UsageError("diagram '" + d->name + "' is not intra-network");
    total += weights.at(d->name) * intra_diagram_proximity(count_diagram(net, *d));
  }
  total.prune(0.0);
  return {scope, std::move(total)};
}

ProximityMatrix inter_md_pro(const AlignedPair& pair, std::span<const MetaDiagram> diagrams,
                             const DiagramWeights& weights) {
  weights.check_covers(diagrams);
  SparseMatrix total(static_cast<Index>(pair.net1().num_users()),
                     static_cast<Index>(pair.net2().num_users()));
  for (const auto* d : sorted_by_name(diagrams)) {
    if (d->scope != Scope::Inter) throw UsageError("diagram '" + d->name + "' is not inter-network");
    total += weights.at(d->name) * inter_diagram_proximity(count_diagram(pair, *d));
  }
  total.prune(0.0);
  return {ProximityScope::Inter, std::move(total)};
}

void write_proximity_tsv(const SparseMatrix& matrix, const std::filesystem::path& file) {
  const Eigen::SparseMatrix<double, Eigen::RowMajor> rm = matrix;
  auto out = tsv::open_output(file);
  for (Index r = 0; r < rm.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rm, r); it; ++it)
      out << r << '\t' << it.col() << '\t' << tsv::format_double(it.value()) << '\n';
}

}  // namespace shna
