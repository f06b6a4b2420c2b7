#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "shna/alignment.hpp"
#include "shna/evaluation.hpp"
#include "shna/matching.hpp"
#include "shna/partition.hpp"
#include "shna/proximity.hpp"
#include "shna/synthetic.hpp"

namespace shna {

std::vector<std::string> default_intra_diagrams();
std::vector<std::string> default_inter_diagrams();

struct PipelineConfig {
  PartitionConfig partition;
  std::vector<std::string> intra_diagrams = default_intra_diagrams();
  std::vector<std::string> inter_diagrams = default_inter_diagrams();
  /// Empty means uniform over the configured diagrams.
  std::map<std::string, double> intra_weights;
  std::map<std::string, double> inter_weights;
  int top_s = 4;
  AlignmentConfig align;
  double train_ratio = 0.5;
  int threads = 1;

  void validate(std::size_t n1, std::size_t n2) const;
};

/// Networks with their training anchors plus the held-out test anchors.
struct Dataset {
  AlignedPair pair;
  std::vector<AnchorLink> test_anchors;
};

/// Dataset directory layout:
///   net1_nodes.tsv net1_edges.tsv net2_nodes.tsv net2_edges.tsv
///   anchors_train.tsv anchors_test.tsv
/// If the split files are absent but anchors.tsv exists, it is split with
/// `train_ratio` and `seed`.
struct DatasetPaths {
  std::filesystem::path net1_nodes, net1_edges, net2_nodes, net2_edges;
  std::filesystem::path train_anchors, test_anchors, all_anchors;
  static DatasetPaths in(const std::filesystem::path& dir);
};

Dataset load_dataset(const DatasetPaths& paths, double train_ratio = 0.5, std::uint64_t seed = 42,
                     const IngestOptions& options = {});

/// Writes the dataset layout above; anchors.tsv holds all true anchors.
void write_dataset(const SyntheticData& data, const std::filesystem::path& dir);

struct PipelineResult {
  EvalReport report;
  ProximityMatrix intra1;
  ProximityMatrix intra2;
  ProximityMatrix inter;
  PartitionState partition;
  ClusterAssignment clusters;
  std::vector<MatchedPair> pairs;
  std::vector<AlignmentProblem> problems;
  std::vector<AlignmentSolution> solutions;
  std::vector<Prediction> predictions;
  std::size_t candidate_links = 0;  // sum of |U_a| |U_b| over pairs
  std::size_t total_links = 0;      // |U1| |U2|
};

// Stage functions; each throws its errors prefixed with the stage name.

struct ProximityStage {
  ProximityMatrix intra1, intra2, inter;
};
ProximityStage run_proximity_stage(const AlignedPair& pair, const PipelineConfig& config);

/// proximity -> partition -> match -> parallel align -> aggregate -> evaluate.
PipelineResult run_pipeline(const PipelineConfig& config, const Dataset& data);

/// Writes clusters, trace, pairs, predictions, convergence and report.json.
void write_artifacts(const PipelineResult& result, const Dataset& data, const PipelineConfig& config,
                     const std::filesystem::path& dir);

std::string report_json(const PipelineResult& result, const PipelineConfig& config);

}  // namespace shna
