#include <gtest/gtest.h>

#include <json.hpp>

#include "shna/error.hpp"
#include "shna/evaluation.hpp"
#include "shna/pipeline.hpp"
#include "support/scratch.hpp"

using namespace shna;

namespace {

SyntheticParams small() {
  SyntheticParams p;
  p.n_users = 60;
  p.k_blocks = 3;
  p.p_in = 0.3;
  p.posts_per_user = 6;
  p.attr_vocab = 600;
  p.seed = 5;
  return p;
}

PipelineConfig config_for(int k) {
  PipelineConfig c;
  c.partition.k = k;
  c.top_s = k;
  return c;
}

Dataset dataset_of(const SyntheticData& d) { return {d.pair, d.test_anchors}; }

}  // namespace

TEST(Evaluate, Examples) {
  const std::vector<AnchorLink> test{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}};
  auto r = evaluate(test, test);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);

  r = evaluate({}, test);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.f1, 0.0);
  EXPECT_EQ(r.fn, 5u);

  const std::vector<AnchorLink> predicted{{0, 0}, {1, 1}, {2, 2}, {7, 3}};
  r = evaluate(predicted, test);
  EXPECT_EQ(r.tp, 3u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 2u);
  EXPECT_DOUBLE_EQ(r.precision, 0.75);
  EXPECT_DOUBLE_EQ(r.recall, 0.6);
  EXPECT_NEAR(r.f1, 2 * 0.75 * 0.6 / 1.35, 1e-15);
}

TEST(Evaluate, TrainingAnchorsAreNotPredictions) {
  const std::vector<AnchorLink> train{{9, 9}}, test{{0, 0}};
  const std::vector<AnchorLink> predicted{{9, 9}, {0, 0}};
  const auto r = evaluate(predicted, test, train);
  EXPECT_EQ(r.fp, 0u);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_THROW(evaluate(predicted, test, test), ValidationError);
}

TEST(SplitAnchors, SeededAndDisjoint) {
  std::vector<AnchorLink> all;
  for (int i = 0; i < 11; ++i) all.push_back({i, 10 - i});
  const auto [train, test] = split_anchors(all, 0.5, 3);
  EXPECT_EQ(train.size(), 6u);
  EXPECT_EQ(test.size(), 5u);
  EXPECT_EQ(split_anchors(all, 0.5, 3).first, train);
  std::set<AnchorLink> u(train.begin(), train.end());
  u.insert(test.begin(), test.end());
  EXPECT_EQ(u.size(), all.size());
  EXPECT_THROW(split_anchors(all, 1.0, 3), UsageError);
}

TEST(Synthetic, Validation) {
  auto p = small();
  p.p_out = p.p_in;
  EXPECT_THROW(generate_synthetic(p), ValidationError);
  p = small();
  p.n_users = 0;
  EXPECT_THROW(generate_synthetic(p), ValidationError);
  p = small();
  p.noise = 1.5;
  EXPECT_THROW(generate_synthetic(p), ValidationError);
}

TEST(Synthetic, PlantedStructure) {
  auto p = small();
  p.anchor_fraction = 1.0;
  const auto d = generate_synthetic(p);
  EXPECT_EQ(d.true_anchors.size(), 60u);
  EXPECT_EQ(d.train_anchors.size(), 60u);
  EXPECT_TRUE(d.test_anchors.empty());
  // Noiseless twins: follows and blocks carry over through the correspondence.
  std::map<Index, Index> twin;
  for (const auto& a : d.true_anchors) {
    twin[a.user1] = a.user2;
    EXPECT_EQ(d.blocks1[static_cast<std::size_t>(a.user1)], d.blocks2[static_cast<std::size_t>(a.user2)]);
  }
  std::set<Edge> f2(d.pair.net2().edges(Relation::Follow).begin(), d.pair.net2().edges(Relation::Follow).end());
  for (const auto& e : d.pair.net1().edges(Relation::Follow)) {
    EXPECT_TRUE(f2.count({twin[e.src], twin[e.dst]}));
    EXPECT_EQ(d.blocks1[static_cast<std::size_t>(e.src)], d.blocks1[static_cast<std::size_t>(e.dst)]);
  }
  EXPECT_EQ(f2.size(), d.pair.net1().edges(Relation::Follow).size());
}

TEST(Synthetic, SameSeedSameFiles) {
  const auto a = scratch::dir() / "a";
  const auto b = scratch::dir() / "b";
  write_dataset(generate_synthetic(small()), a);
  write_dataset(generate_synthetic(small()), b);
  for (const char* f : {"net1_nodes.tsv", "net1_edges.tsv", "net2_nodes.tsv", "net2_edges.tsv", "anchors.tsv",
                        "anchors_train.tsv", "anchors_test.tsv"})
    EXPECT_EQ(scratch::read(a / f), scratch::read(b / f)) << f;
}

TEST(Dataset, RoundTripAndSplitFallback) {
  const auto data = generate_synthetic(small());
  const auto d = scratch::dir();
  write_dataset(data, d);
  const auto loaded = load_dataset(DatasetPaths::in(d));
  EXPECT_EQ(std::vector<AnchorLink>(loaded.pair.labeled_anchors().begin(), loaded.pair.labeled_anchors().end()),
            data.train_anchors);
  EXPECT_EQ(loaded.test_anchors, data.test_anchors);

  std::filesystem::remove(d / "anchors_train.tsv");
  std::filesystem::remove(d / "anchors_test.tsv");
  const auto split = load_dataset(DatasetPaths::in(d), 0.5, 1);
  EXPECT_EQ(split.pair.labeled_anchors().size() + split.test_anchors.size(), data.true_anchors.size());

  std::filesystem::remove(d / "anchors.tsv");
  EXPECT_THROW(load_dataset(DatasetPaths::in(d)), Error);
}

TEST(Pipeline, RecoversPlantedAnchors) {
  const auto data = generate_synthetic(small());
  const auto r = run_pipeline(config_for(3), dataset_of(data));
  // Small pairs with few labeled anchors may never bootstrap, so recall can dip; mistakes may not.
  EXPECT_EQ(r.report.precision, 1.0);
  EXPECT_GE(r.report.f1, 0.8);
  EXPECT_EQ(r.report.coverage_ratio, 1.0);
  EXPECT_LT(r.candidate_links, r.total_links);
  for (const char* s : {"proximity", "partition", "match", "align", "evaluate"}) EXPECT_TRUE(r.report.stage_seconds.count(s));
}

TEST(Pipeline, ZeroPairsPredictNothing) {
  const auto data = generate_synthetic(small());
  auto cfg = config_for(3);
  cfg.top_s = 0;
  const auto r = run_pipeline(cfg, dataset_of(data));
  EXPECT_TRUE(r.predictions.empty());
  EXPECT_EQ(r.report.recall, 0.0);
  EXPECT_EQ(r.report.coverage_ratio, 0.0);
}

TEST(Pipeline, NoLabeledAnchorsStillRuns) {
  auto p = small();
  p.anchor_fraction = 0.0;
  const auto data = generate_synthetic(p);
  const auto r = run_pipeline(config_for(3), dataset_of(data));
  EXPECT_EQ(r.pairs.size(), 3u);
  EXPECT_GE(r.report.f1, 0.0);
}

TEST(Pipeline, Deterministic) {
  const auto data = generate_synthetic(small());
  auto cfg = config_for(3);
  const auto a = run_pipeline(cfg, dataset_of(data));
  cfg.threads = 3;
  const auto b = run_pipeline(cfg, dataset_of(data));
  ASSERT_EQ(a.predictions.size(), b.predictions.size());
  for (std::size_t i = 0; i < a.predictions.size(); ++i) {
    EXPECT_EQ(a.predictions[i].link, b.predictions[i].link);
    EXPECT_EQ(a.predictions[i].label, b.predictions[i].label);
    EXPECT_EQ(a.predictions[i].score, b.predictions[i].score);
  }
  EXPECT_EQ(a.report.f1, b.report.f1);
}

TEST(Pipeline, ErrorsCarryTheStage) {
  const auto data = generate_synthetic(small());
  auto cfg = config_for(3);
  cfg.intra_diagrams = {"PA1"};
  try {
    run_pipeline(cfg, dataset_of(data));
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "config");
  }
  cfg = config_for(3);
  cfg.partition.backtracking = false;
  cfg.partition.eta1 = cfg.partition.eta2 = 1e3;
  try {
    run_pipeline(cfg, dataset_of(data));
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "partition");
    EXPECT_NE(std::string(e.what()).find("eta"), std::string::npos);
  }
}

TEST(Pipeline, ArtifactsAndReport) {
  const auto data = generate_synthetic(small());
  const auto cfg = config_for(3);
  const auto r = run_pipeline(cfg, dataset_of(data));
  const auto d = scratch::dir();
  write_artifacts(r, dataset_of(data), cfg, d);
  for (const char* f : {"net1/clusters.tsv", "net2/clusters.tsv", "trace.tsv", "pairs.tsv", "predictions.tsv",
                        "convergence.tsv", "report.json"})
    EXPECT_TRUE(std::filesystem::exists(d / f)) << f;
  const auto j = nlohmann::json::parse(scratch::read(d / "report.json"));
  EXPECT_EQ(j.at("f1").get<double>(), r.report.f1);
  EXPECT_EQ(j.at("pairs").size(), 3u);
  EXPECT_TRUE(j.at("timings_seconds").contains("partition"));
  EXPECT_EQ(j.at("candidate_links").get<std::size_t>(), r.candidate_links);
}
