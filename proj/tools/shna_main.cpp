// shna: command line front end for the two-stage network alignment pipeline.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shna/error.hpp"
#include "shna/log.hpp"
#include "shna/pipeline.hpp"
#include "shna/tsv.hpp"

namespace fs = std::filesystem;
using namespace shna;

namespace {

struct DataOptions {
  fs::path dir;
  fs::path train_anchors;
  fs::path test_anchors;
  double train_ratio = 0.5;
  std::uint64_t split_seed = 42;
  long long timestamp_bucket = 3600;

  void attach(CLI::App& app) {
    app.add_option("--data", dir, "Dataset directory (net1_nodes.tsv, net1_edges.tsv, ...)")->required();
    app.add_option("--train-anchors", train_anchors, "Labeled anchor file (overrides the dataset's)");
    app.add_option("--test-anchors", test_anchors, "Held-out anchor file, used only for evaluation");
    app.add_option("--train-ratio", train_ratio, "Split ratio when only anchors.tsv is present")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--split-seed", split_seed, "Seed of the anchor split");
    app.add_option("--timestamp-bucket", timestamp_bucket, "Timestamp bucket width in seconds, 0 disables")
        ->check(CLI::NonNegativeNumber);
  }

  Dataset load() const {
    auto paths = DatasetPaths::in(dir);
    if (!train_anchors.empty()) paths.train_anchors = train_anchors;
    if (!test_anchors.empty()) paths.test_anchors = test_anchors;
    IngestOptions ingest;
    ingest.timestamp_bucket_seconds = timestamp_bucket;
    return load_dataset(paths, train_ratio, split_seed, ingest);
  }
};

void attach_diagrams(CLI::App& app, PipelineConfig& cfg) {
  app.add_option("--intra-diagrams", cfg.intra_diagrams, "Intra-network diagrams for the partition stage")
      ->delimiter(',');
  app.add_option("--inter-diagrams", cfg.inter_diagrams, "Inter-network diagrams (proximity and features)")
      ->delimiter(',');
}

void attach_partition(CLI::App& app, PartitionConfig& p) {
  app.add_option("--k", p.k, "Clusters per network");
  app.add_option("--alpha", p.alpha, "Weight of the network 1 cut");
  app.add_option("--beta", p.beta, "Weight of the network 2 cut");
  app.add_option("--theta", p.theta, "Weight of the discrepancy term");
  app.add_option("--rho", p.rho1, "Orthogonality penalty weight, both networks")
      ->each([&p](const std::string&) { p.rho2 = p.rho1; });
  app.add_option("--eta", p.eta1, "Initial gradient step, both networks")
      ->each([&p](const std::string&) { p.eta2 = p.eta1; });
  app.add_flag("!--fixed-step", p.backtracking, "Take eta as a fixed step instead of backtracking");
  app.add_option("--partition-max-iters", p.max_iters, "Descent iterations cap");
  app.add_option("--tol", p.tol, "Relative objective decrease that counts as converged");
  app.add_option("--seed", p.seed, "Seed for initialisation and k-means");
}

void attach_align(CLI::App& app, PipelineConfig& cfg) {
  app.add_option("--c", cfg.align.c, "Loss / weight-norm trade-off");
  app.add_option("--max-iters", cfg.align.max_iters, "Alignment iterations cap per pair");
  app.add_option("--threshold", cfg.align.threshold, "Minimum score of a positive link");
  app.add_option("--threads", cfg.threads, "Alignment worker threads")->check(CLI::PositiveNumber);
}

template <class F>
void stage(const char* name, F&& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << "\n"; }

// CLI11 only reads config files attached to the root app, so a subcommand's file is applied here.
// Unknown keys are errors and flags given on the command line keep their values.
void apply_config(CLI::App& sub) {
  CLI::Option* file = sub.get_config_ptr();
  if (file == nullptr || file->count() == 0) return;
  for (const auto& item : sub.get_config_formatter()->from_file(file->as<std::string>())) {
    if (item.name == "++" || item.name == "--") continue;
    CLI::Option* op = item.parents.empty() ? sub.get_option_no_throw("--" + item.name) : nullptr;
    if (op == nullptr || op == file) throw CLI::ConfigError::Extras(item.fullname());
    if (op->count() > 0) continue;
    op->add_result(item.inputs);
    op->run_callback();
  }
}

std::vector<AnchorLink> positives_of(const std::vector<Prediction>& predictions) {
  std::vector<AnchorLink> out;
  for (const auto& p : predictions)
    if (p.label == 1 && !p.labeled) out.push_back(p.link);
  return out;
}

ClusterAssignment load_assignment(const Dataset& d, const fs::path& dir, int k) {
  ClusterAssignment c;
  c.labels1 = load_clusters(d.pair.net1(), dir / "net1" / "clusters.tsv");
  c.labels2 = load_clusters(d.pair.net2(), dir / "net2" / "clusters.tsv");
  int top = -1;
  for (int l : c.labels1) top = std::max(top, l);
  for (int l : c.labels2) top = std::max(top, l);
  c.k = std::max(k, top + 1);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partition-then-align anchor link prediction across two attributed social networks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "More logging (repeat for debug)");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only errors");

  // gen
  auto* gen = app.add_subcommand("gen", "Write a synthetic planted dataset");
  SyntheticParams sp;
  fs::path gen_out;
  gen->add_option("--out", gen_out, "Output dataset directory")->required();
  gen->add_option("--n-users", sp.n_users, "Users per network");
  gen->add_option("--k-blocks", sp.k_blocks, "Planted communities");
  gen->add_option("--p-in", sp.p_in, "Follow probability inside a block");
  gen->add_option("--p-out", sp.p_out, "Follow probability across blocks");
  gen->add_option("--posts-per-user", sp.posts_per_user);
  gen->add_option("--attr-vocab", sp.attr_vocab, "Distinct location and timestamp tokens");
  gen->add_option("--anchor-fraction", sp.anchor_fraction, "Share of anchors revealed as training labels");
  gen->add_option("--noise", sp.noise, "Attribute and follow noise");
  gen->add_option("--overlap", sp.overlap, "Share of users present in both networks");
  gen->add_option("--profile-size", sp.profile_size, "Tokens per user profile");
  gen->add_option("--seed", sp.seed);

  // partition
  auto* part = app.add_subcommand("partition", "Proximity plus synergistic partition of both networks");
  DataOptions part_data;
  PipelineConfig part_cfg;
  fs::path part_out = "out";
  part_data.attach(*part);
  attach_diagrams(*part, part_cfg);
  attach_partition(*part, part_cfg.partition);
  part->add_option("--out", part_out, "Output directory");

  // match
  auto* match = app.add_subcommand("match", "Select the top sub-network pairs by M-Score");
  DataOptions match_data;
  fs::path match_clusters = "out";
  fs::path match_out;
  int top_s = 4;
  match_data.attach(*match);
  match->add_option("--clusters", match_clusters, "Directory holding net1/ and net2/ clusters.tsv");
  match->add_option("--top-s", top_s, "Number of sub-network pairs");
  match->add_option("--out", match_out, "Output directory (defaults to --clusters)");

  // align
  auto* align = app.add_subcommand("align", "Align users inside the matched sub-network pairs");
  DataOptions align_data;
  PipelineConfig align_cfg;
  fs::path align_clusters = "out";
  fs::path align_pairs;
  fs::path align_out;
  align_data.attach(*align);
  attach_diagrams(*align, align_cfg);
  attach_align(*align, align_cfg);
  align->add_option("--clusters", align_clusters, "Directory holding net1/ and net2/ clusters.tsv");
  align->add_option("--pairs", align_pairs, "pairs.tsv (defaults to CLUSTERS/pairs.tsv)");
  align->add_option("--out", align_out, "Output directory (defaults to --clusters)");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a predictions file against held-out anchors");
  DataOptions eval_data;
  fs::path eval_predictions;
  fs::path eval_report;
  eval_data.attach(*eval);
  eval->add_option("--predictions", eval_predictions, "predictions.tsv")->required();
  eval->add_option("--report", eval_report, "Also write the metrics as JSON here");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run every stage and write all artifacts plus report.json");
  DataOptions pipe_data;
  PipelineConfig pipe_cfg;
  fs::path pipe_out = "out";
  pipe->set_config("--config", "", "Flat key = value config file; command line flags win");
  pipe_data.attach(*pipe);
  attach_diagrams(*pipe, pipe_cfg);
  attach_partition(*pipe, pipe_cfg.partition);
  attach_align(*pipe, pipe_cfg);
  pipe->add_option("--top-s", pipe_cfg.top_s, "Number of sub-network pairs");
  pipe->add_option("--out", pipe_out, "Output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    apply_config(*pipe);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }

  if (quiet)
    log::set_level(log::Level::Error);
  else if (verbosity >= 2)
    log::set_level(log::Level::Debug);
  else if (verbosity == 1)
    log::set_level(log::Level::Info);

  try {
    if (*gen) {
      stage("gen", [&] {
        const auto data = generate_synthetic(sp);
        write_dataset(data, gen_out);
        print_json({{"users1", data.pair.net1().num_users()},
                    {"users2", data.pair.net2().num_users()},
                    {"edges1", data.pair.net1().num_edges()},
                    {"edges2", data.pair.net2().num_edges()},
                    {"anchors", data.true_anchors.size()},
                    {"train_anchors", data.train_anchors.size()},
                    {"test_anchors", data.test_anchors.size()}});
      });
    } else if (*part) {
      Dataset d;
      stage("load", [&] { d = part_data.load(); });
      stage("config", [&] {
        part_cfg.top_s = std::min(part_cfg.top_s, part_cfg.partition.k);
        part_cfg.validate(d.pair.net1().num_users(), d.pair.net2().num_users());
      });
      ProximityStage prox;
      stage("proximity", [&] { prox = run_proximity_stage(d.pair, part_cfg); });
      stage("partition", [&] {
        const auto state = synergistic_partition(prox.intra1.values, prox.intra2.values, prox.inter.values,
                                                 part_cfg.partition);
        const auto clusters = extract_clusters(state, part_cfg.partition.k, part_cfg.partition.seed);
        write_clusters(d.pair.net1(), clusters.labels1, part_out / "net1" / "clusters.tsv");
        write_clusters(d.pair.net2(), clusters.labels2, part_out / "net2" / "clusters.tsv");
        write_trace(state.trace, part_out / "trace.tsv");
        print_json({{"iterations", state.iterations},
                    {"converged", state.converged},
                    {"objective", state.trace.empty() ? 0.0 : state.trace.back().objective}});
      });
    } else if (*match) {
      Dataset d;
      stage("load", [&] { d = match_data.load(); });
      stage("match", [&] {
        const auto clusters = load_assignment(d, match_clusters, top_s);
        const auto pairs = match_top_s(clusters, d.pair.labeled_anchors(), top_s);
        write_pairs(pairs, (match_out.empty() ? match_clusters : match_out) / "pairs.tsv");
        nlohmann::ordered_json j = {{"pairs", pairs.size()},
                                    {"candidate_links", candidate_count(pairs)},
                                    {"total_links", d.pair.net1().num_users() * d.pair.net2().num_users()}};
        if (!d.test_anchors.empty()) j["coverage_ratio"] = coverage_ratio(pairs, d.test_anchors);
        print_json(j);
      });
    } else if (*align) {
      Dataset d;
      stage("load", [&] { d = align_data.load(); });
      stage("align", [&] {
        const fs::path out = align_out.empty() ? align_clusters : align_out;
        const auto clusters = load_assignment(d, align_clusters, 0);
        const auto pairs = load_pairs(align_pairs.empty() ? align_clusters / "pairs.tsv" : align_pairs, clusters,
                                      d.pair.labeled_anchors());
        const auto diagrams = lookup_diagrams(align_cfg.inter_diagrams);
        const auto maps = inter_feature_maps(d.pair, diagrams);
        std::vector<AlignmentProblem> problems;
        for (const auto& p : pairs) problems.push_back(build_problem(p, maps));
        const auto solutions = align_all(problems, align_cfg.align, align_cfg.threads);
        const auto predictions = aggregate(pairs, problems, solutions);
        write_predictions(predictions, d.pair.net1(), d.pair.net2(), out / "predictions.tsv");
        write_convergence(pairs, solutions, out / "convergence.tsv");
        print_json({{"pairs", pairs.size()}, {"predicted_positive", positives_of(predictions).size()}});
      });
    } else if (*eval) {
      Dataset d;
      stage("load", [&] { d = eval_data.load(); });
      stage("eval", [&] {
        const auto predicted = load_positive_predictions(eval_predictions, d.pair.net1(), d.pair.net2());
        const auto r = evaluate(predicted, d.test_anchors, d.pair.labeled_anchors());
        nlohmann::ordered_json j = {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
                                    {"tp", r.tp},               {"fp", r.fp},         {"fn", r.fn}};
        if (!eval_report.empty()) tsv::open_output(eval_report) << j.dump(2) << "\n";
        print_json(j);
      });
    } else if (*pipe) {
      Dataset d;
      stage("load", [&] { d = pipe_data.load(); });
      pipe_cfg.train_ratio = pipe_data.train_ratio;
      const auto result = run_pipeline(pipe_cfg, d);
      stage("write", [&] { write_artifacts(result, d, pipe_cfg, pipe_out); });
      std::cout << report_json(result, pipe_cfg);
    }
  } catch (const StageError& e) {
    std::cerr << "shna: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "shna: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
