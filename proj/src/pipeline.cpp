#include "shna/pipeline.hpp"

#include <chrono>
#include <filesystem>

#include <json.hpp>

#include "shna/error.hpp"
#include "shna/log.hpp"
#include "shna/tsv.hpp"

namespace shna {
namespace {

using Clock = std::chrono::steady_clock;

template <class F>
auto in_stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

DiagramWeights weights_for(const std::map<std::string, double>& configured,
                           const std::vector<MetaDiagram>& diagrams) {
  if (configured.empty()) return DiagramWeights::uniform(diagrams);
  DiagramWeights w(configured);
  w.check_covers(diagrams);
  return w;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<std::string> default_intra_diagrams() { return {"PI1", "PI3", "PI4", "PI5", "PI6", "PSI_I1"}; }
std::vector<std::string> default_inter_diagrams() { return {"PA1", "PA2", "PA5", "PA6", "PSI_A1", "PSI_A2"}; }

void PipelineConfig::validate(std::size_t n1, std::size_t n2) const {
  partition.validate(n1, n2);
  if (top_s < 0 || top_s > partition.k) throw UsageError("top_s must lie in [0, k]");
  if (!(align.c > 0.0)) throw UsageError("c must be positive");
  if (align.max_iters < 1) throw UsageError("alignment max_iters must be positive");
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw UsageError("train_ratio must lie in (0, 1)");
  if (threads < 1) throw UsageError("threads must be positive");
  const auto intra = lookup_diagrams(intra_diagrams);
  const auto inter = lookup_diagrams(inter_diagrams);
  for (const auto& d : intra)
    if (d.scope != Scope::Intra) throw UsageError("'" + d.name + "' is not an intra-network diagram");
  for (const auto& d : inter)
    if (d.scope != Scope::Inter) throw UsageError("'" + d.name + "' is not an inter-network diagram");
  weights_for(intra_weights, intra);
  weights_for(inter_weights, inter);
}

DatasetPaths DatasetPaths::in(const std::filesystem::path& dir) {
  return {dir / "net1_nodes.tsv",        dir / "net1_edges.tsv",       dir / "net2_nodes.tsv",
          dir / "net2_edges.tsv",        dir / "anchors_train.tsv",    dir / "anchors_test.tsv",
          dir / "anchors.tsv"};
}

Dataset load_dataset(const DatasetPaths& paths, double train_ratio, std::uint64_t seed,
                     const IngestOptions& options) {
  auto net1 = load_network(paths.net1_nodes, paths.net1_edges, options);
  auto net2 = load_network(paths.net2_nodes, paths.net2_edges, options);
  std::vector<AnchorLink> train, test;
  if (std::filesystem::exists(paths.train_anchors)) {
    train = load_anchors(paths.train_anchors, net1, net2);
    if (std::filesystem::exists(paths.test_anchors)) test = load_anchors(paths.test_anchors, net1, net2);
  } else if (std::filesystem::exists(paths.all_anchors)) {
    const auto all = load_anchors(paths.all_anchors, net1, net2);
    std::tie(train, test) = split_anchors(all, train_ratio, seed);
  } else {
    throw Error("no anchor file found (expected " + paths.train_anchors.string() + " or " +
                paths.all_anchors.string() + ")");
  }
  Dataset d;
  d.pair = AlignedPair(std::move(net1), std::move(net2), std::move(train));
  d.test_anchors = std::move(test);
  return d;
}

void write_dataset(const SyntheticData& data, const std::filesystem::path& dir) {
  const auto paths = DatasetPaths::in(dir);
  const auto& n1 = data.pair.net1();
  const auto& n2 = data.pair.net2();
  write_network(n1, paths.net1_nodes, paths.net1_edges);
  write_network(n2, paths.net2_nodes, paths.net2_edges);
  write_anchors(data.train_anchors, n1, n2, paths.train_anchors);
  write_anchors(data.test_anchors, n1, n2, paths.test_anchors);
  write_anchors(data.true_anchors, n1, n2, paths.all_anchors);
}

ProximityStage run_proximity_stage(const AlignedPair& pair, const PipelineConfig& config) {
  const auto intra = lookup_diagrams(config.intra_diagrams);
  const auto inter = lookup_diagrams(config.inter_diagrams);
  const auto wi = weights_for(config.intra_weights, intra);
  const auto wa = weights_for(config.inter_weights, inter);
  return {intra_md_pro(pair.net1(), intra, wi, ProximityScope::IntraNet1),
          intra_md_pro(pair.net2(), intra, wi, ProximityScope::IntraNet2), inter_md_pro(pair, inter, wa)};
}

PipelineResult run_pipeline(const PipelineConfig& config, const Dataset& data) {
  const auto& pair = data.pair;
  in_stage("config", [&] {
    config.validate(pair.net1().num_users(), pair.net2().num_users());
    return 0;
  });
  PipelineResult r;
  r.total_links = pair.net1().num_users() * pair.net2().num_users();

  auto t = Clock::now();
  auto prox = in_stage("proximity", [&] { return run_proximity_stage(pair, config); });
  r.intra1 = std::move(prox.intra1);
  r.intra2 = std::move(prox.intra2);
  r.inter = std::move(prox.inter);
  r.report.stage_seconds["proximity"] = seconds_since(t);

  t = Clock::now();
  in_stage("partition", [&] {
    r.partition = synergistic_partition(r.intra1.values, r.intra2.values, r.inter.values, config.partition);
    r.clusters = extract_clusters(r.partition, config.partition.k, config.partition.seed);
    return 0;
  });
  r.report.stage_seconds["partition"] = seconds_since(t);

  t = Clock::now();
  in_stage("match", [&] {
    r.pairs = match_top_s(r.clusters, pair.labeled_anchors(), config.top_s);
    r.candidate_links = candidate_count(r.pairs);
    r.report.coverage_ratio = coverage_ratio(r.pairs, data.test_anchors);
    return 0;
  });
  r.report.stage_seconds["match"] = seconds_since(t);

  t = Clock::now();
  in_stage("align", [&] {
    const auto inter = lookup_diagrams(config.inter_diagrams);
    const auto maps = inter_feature_maps(pair, inter);
    r.problems.reserve(r.pairs.size());
    for (const auto& p : r.pairs) r.problems.push_back(build_problem(p, maps));
    r.solutions = align_all(r.problems, config.align, config.threads);
    r.predictions = aggregate(r.pairs, r.problems, r.solutions);
    return 0;
  });
  r.report.stage_seconds["align"] = seconds_since(t);

  t = Clock::now();
  in_stage("evaluate", [&] {
    std::vector<AnchorLink> positives;
    for (const auto& p : r.predictions)
      if (p.label == 1 && !p.labeled) positives.push_back(p.link);
    const double coverage = r.report.coverage_ratio;
    auto timings = r.report.stage_seconds;
    r.report = evaluate(positives, data.test_anchors, pair.labeled_anchors());
    r.report.coverage_ratio = coverage;
    r.report.stage_seconds = std::move(timings);
    return 0;
  });
  r.report.stage_seconds["evaluate"] = seconds_since(t);
  return r;
}

std::string report_json(const PipelineResult& r, const PipelineConfig& config) {
  nlohmann::ordered_json j;
  j["precision"] = r.report.precision;
  j["recall"] = r.report.recall;
  j["f1"] = r.report.f1;
  j["tp"] = r.report.tp;
  j["fp"] = r.report.fp;
  j["fn"] = r.report.fn;
  j["coverage_ratio"] = r.report.coverage_ratio;
  j["candidate_links"] = r.candidate_links;
  j["total_links"] = r.total_links;
  j["search_space_ratio"] =
      r.total_links > 0 ? static_cast<double>(r.candidate_links) / static_cast<double>(r.total_links) : 0.0;
  j["partition"] = {{"k", config.partition.k},
                    {"iterations", r.partition.iterations},
                    {"converged", r.partition.converged},
                    {"random_init", r.partition.random_init},
                    {"final_objective", r.partition.trace.empty() ? 0.0 : r.partition.trace.back().objective}};
  auto pairs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    const auto& p = r.pairs[i];
    nlohmann::ordered_json e = {{"rank", p.rank},
                                {"sub1", p.sub1},
                                {"sub2", p.sub2},
                                {"m_score", p.m_score},
                                {"users1", p.users1.size()},
                                {"users2", p.users2.size()},
                                {"known_anchors", p.known_anchors.size()}};
    if (i < r.solutions.size()) {
      e["iterations"] = r.solutions[i].iterations;
      e["converged"] = r.solutions[i].converged;
      e["oscillated"] = r.solutions[i].oscillated;
    }
    pairs.push_back(std::move(e));
  }
  j["pairs"] = std::move(pairs);
  j["timings_seconds"] = r.report.stage_seconds;
  return j.dump(2) + "\n";
}

void write_artifacts(const PipelineResult& r, const Dataset& data, const PipelineConfig& config,
                     const std::filesystem::path& dir) {
  const auto& n1 = data.pair.net1();
  const auto& n2 = data.pair.net2();
  write_clusters(n1, r.clusters.labels1, dir / "net1" / "clusters.tsv");
  write_clusters(n2, r.clusters.labels2, dir / "net2" / "clusters.tsv");
  write_trace(r.partition.trace, dir / "trace.tsv");
  write_pairs(r.pairs, dir / "pairs.tsv");
  write_predictions(r.predictions, n1, n2, dir / "predictions.tsv");
  write_convergence(r.pairs, r.solutions, dir / "convergence.tsv");
  auto out = tsv::open_output(dir / "report.json");
  out << report_json(r, config);
}

}  // namespace shna
