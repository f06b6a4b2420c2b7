#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "shna/error.hpp"
#include "shna/meta_diagram.hpp"
#include "shna/pipeline.hpp"

namespace py = pybind11;
using namespace shna;

namespace {

using IdLink = std::pair<std::string, std::string>;

std::vector<IdLink> by_id(const AlignedPair& pair, std::span<const AnchorLink> links) {
  std::vector<IdLink> out;
  out.reserve(links.size());
  for (const auto& l : links)
    out.emplace_back(pair.net1().id(NodeKind::User, l.user1), pair.net2().id(NodeKind::User, l.user2));
  return out;
}

py::object parse_json(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

// Network 0 is the cross-network count, 1 and 2 the intra counts.
SparseMatrix diagram_counts(const Dataset& d, const std::string& name, int network) {
  const auto diagram = lookup_diagram(name);
  if (network == 0) return count_diagram(d.pair, diagram);
  if (network == 1) return count_diagram(d.pair.net1(), diagram);
  if (network == 2) return count_diagram(d.pair.net2(), diagram);
  throw UsageError("network must be 0, 1 or 2");
}

}  // namespace

PYBIND11_MODULE(_shna, m) {
  m.doc() = "Partition-then-align anchor link prediction";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<UsageError>(m, "UsageError", error.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", error.ptr());
  py::register_exception<StageError>(m, "StageError", error.ptr());

  py::class_<SyntheticParams>(m, "SyntheticParams")
      .def(py::init<>())
      .def_readwrite("n_users", &SyntheticParams::n_users)
      .def_readwrite("k_blocks", &SyntheticParams::k_blocks)
      .def_readwrite("p_in", &SyntheticParams::p_in)
      .def_readwrite("p_out", &SyntheticParams::p_out)
      .def_readwrite("posts_per_user", &SyntheticParams::posts_per_user)
      .def_readwrite("attr_vocab", &SyntheticParams::attr_vocab)
      .def_readwrite("anchor_fraction", &SyntheticParams::anchor_fraction)
      .def_readwrite("noise", &SyntheticParams::noise)
      .def_readwrite("overlap", &SyntheticParams::overlap)
      .def_readwrite("profile_size", &SyntheticParams::profile_size)
      .def_readwrite("seed", &SyntheticParams::seed);

  py::class_<PartitionConfig>(m, "PartitionConfig")
      .def(py::init<>())
      .def_readwrite("k", &PartitionConfig::k)
      .def_readwrite("alpha", &PartitionConfig::alpha)
      .def_readwrite("beta", &PartitionConfig::beta)
      .def_readwrite("theta", &PartitionConfig::theta)
      .def_readwrite("rho1", &PartitionConfig::rho1)
      .def_readwrite("rho2", &PartitionConfig::rho2)
      .def_readwrite("eta1", &PartitionConfig::eta1)
      .def_readwrite("eta2", &PartitionConfig::eta2)
      .def_readwrite("backtracking", &PartitionConfig::backtracking)
      .def_readwrite("max_iters", &PartitionConfig::max_iters)
      .def_readwrite("tol", &PartitionConfig::tol)
      .def_readwrite("seed", &PartitionConfig::seed);

  py::class_<AlignmentConfig>(m, "AlignmentConfig")
      .def(py::init<>())
      .def_readwrite("c", &AlignmentConfig::c)
      .def_readwrite("max_iters", &AlignmentConfig::max_iters)
      .def_readwrite("threshold", &AlignmentConfig::threshold);

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("partition", &PipelineConfig::partition)
      .def_readwrite("align", &PipelineConfig::align)
      .def_readwrite("intra_diagrams", &PipelineConfig::intra_diagrams)
      .def_readwrite("inter_diagrams", &PipelineConfig::inter_diagrams)
      .def_readwrite("intra_weights", &PipelineConfig::intra_weights)
      .def_readwrite("inter_weights", &PipelineConfig::inter_weights)
      .def_readwrite("top_s", &PipelineConfig::top_s)
      .def_readwrite("train_ratio", &PipelineConfig::train_ratio)
      .def_readwrite("threads", &PipelineConfig::threads);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("users1", [](const Dataset& d) { return d.pair.net1().ids(NodeKind::User); })
      .def_property_readonly("users2", [](const Dataset& d) { return d.pair.net2().ids(NodeKind::User); })
      .def_property_readonly("train_anchors", [](const Dataset& d) { return by_id(d.pair, d.pair.labeled_anchors()); })
      .def_property_readonly("test_anchors", [](const Dataset& d) { return by_id(d.pair, d.test_anchors); });

  m.def(
      "generate",
      [](const SyntheticParams& p, const std::filesystem::path& dir) { write_dataset(generate_synthetic(p), dir); },
      py::arg("params"), py::arg("out_dir"), "Writes a planted dataset directory.");

  m.def(
      "load_dataset",
      [](const std::filesystem::path& dir, double train_ratio, std::uint64_t seed, long long timestamp_bucket) {
        IngestOptions opts;
        opts.timestamp_bucket_seconds = timestamp_bucket;
        return load_dataset(DatasetPaths::in(dir), train_ratio, seed, opts);
      },
      py::arg("data_dir"), py::arg("train_ratio") = 0.5, py::arg("seed") = 42, py::arg("timestamp_bucket") = 3600,
      "Loads a dataset directory; anchors.tsv is split only when the split files are absent.");

  m.def("diagram_counts", &diagram_counts, py::arg("dataset"), py::arg("diagram"), py::arg("network") = 0,
        "Sparse count matrix of a meta path or diagram; network 0 is cross-network.");

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_property_readonly("f1", [](const PipelineResult& r) { return r.report.f1; })
      .def_property_readonly("labels1", [](const PipelineResult& r) { return r.clusters.labels1; })
      .def_property_readonly("labels2", [](const PipelineResult& r) { return r.clusters.labels2; })
      .def_readonly("candidate_links", &PipelineResult::candidate_links)
      .def_readonly("total_links", &PipelineResult::total_links);

  m.def(
      "run_pipeline",
      [](const PipelineConfig& cfg, const Dataset& d) {
        py::gil_scoped_release unlocked;
        return run_pipeline(cfg, d);
      },
      py::arg("config"), py::arg("dataset"));

  m.def(
      "report",
      [](const PipelineResult& r, const PipelineConfig& cfg) { return parse_json(report_json(r, cfg)); },
      py::arg("result"), py::arg("config"), "Report as a dict, same content as report.json.");

  m.def(
      "predictions",
      [](const PipelineResult& r, const Dataset& d) {
        py::list out;
        for (const auto& p : r.predictions)
          out.append(py::make_tuple(d.pair.net1().id(NodeKind::User, p.link.user1),
                                    d.pair.net2().id(NodeKind::User, p.link.user2), p.label, p.score, p.pair_rank));
        return out;
      },
      py::arg("result"), py::arg("dataset"), "(user1, user2, label, score, pair rank) per candidate.");

  m.def("write_artifacts", &write_artifacts, py::arg("result"), py::arg("dataset"), py::arg("config"),
        py::arg("out_dir"));
}
