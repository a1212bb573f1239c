#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <string>

#include "iccc/conceptbase.h"
#include "iccc/corpus.h"
#include "iccc/emitter.h"
#include "iccc/error.h"
#include "iccc/extractor.h"
#include "iccc/pipeline.h"
#include "iccc/udtree.h"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

// Results cross the boundary as JSON text; the Python package decodes them.
std::string records_json(const iccc::IngestResult& r) {
  std::ostringstream out;
  iccc::write_records(out, r.records);
  return out.str();
}

iccc::Corpus corpus_from(const std::string& conllu_path,
                         const std::string& records_path) {
  iccc::ConlluResult parses = iccc::read_conllu_file(conllu_path);
  auto records = records_path.empty() ? iccc::records_from_trees(parses.trees)
                                       : iccc::read_records(fs::path(records_path));
  return iccc::join_corpus(std::move(records), std::move(parses));
}

std::string extract_text(const std::string& conllu_text,
                         const std::string& types) {
  const iccc::ConceptTypeSet enabled = iccc::parse_concept_types(types);
  iccc::ConlluResult parses = iccc::read_conllu_string(conllu_text);
  std::ostringstream out;
  for (const auto& tree : parses.trees)
    out << iccc::annotation_to_json(iccc::extract_all(tree, enabled)) << '\n';
  return out.str();
}

std::string build_base(const std::string& conllu, const std::string& records,
                       std::size_t min_count, double top_drop,
                       const fs::path& out) {
  const iccc::Corpus corpus = corpus_from(conllu, records);
  const iccc::ConceptBase base = iccc::build_filtered_base(
      iccc::annotate(corpus), {min_count, top_drop});
  iccc::write_base(out, base);
  std::ostringstream text;
  iccc::write_base(text, base);
  return text.str();
}

std::string construct(const std::string& conllu, const std::string& records,
                      const fs::path& out, const std::string& base_path,
                      double p_c, double p_s, std::size_t batch_size,
                      std::uint64_t seed, const std::string& types,
                      const std::string& preset, bool random_baseline,
                      std::size_t samples_per_caption, unsigned workers,
                      std::size_t min_count, double top_drop,
                      bool drain_leftover, bool per_dataset_base) {
  iccc::ConstructConfig config;
  config.mix.p_c = p_c;
  config.mix.p_s = p_s;
  config.mix.batch_size = batch_size;
  config.mix.seed = seed;
  config.mix.enabled_types = iccc::parse_concept_types(types);
  config.mix.preset = preset;
  config.mix.samples_per_caption = samples_per_caption;
  config.mix.drain_leftover = drain_leftover;
  config.random_baseline = random_baseline;
  config.per_dataset_base = per_dataset_base;
  config.workers = workers;
  config.filter = {min_count, top_drop};

  py::gil_scoped_release release;
  const iccc::Corpus corpus = corpus_from(conllu, records);
  const auto annotations = iccc::annotate(corpus);
  iccc::ConceptBase base;
  if (!random_baseline && !per_dataset_base)
    base = base_path.empty()
               ? iccc::build_filtered_base(annotations, config.filter)
               : iccc::read_base(fs::path(base_path));
  iccc::ConstructResult result =
      iccc::construct(corpus, annotations, base, config);
  iccc::StatsReport report;
  report.emitted = iccc::write_jsonl(result.mix.batches, out);
  report.construction = result.counts;
  return iccc::stats_to_json(report, -1);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Caption correction data construction (native core)";

  auto error = py::register_exception<iccc::Error>(m, "Error");
  py::register_exception<iccc::ParseError>(m, "ParseError", error);
  py::register_exception<iccc::DuplicateRecordError>(m, "DuplicateRecordError",
                                                     error);
  py::register_exception<iccc::ValidationError>(m, "ValidationError", error);
  py::register_exception<iccc::ConfigError>(m, "ConfigError", error);
  py::register_exception<iccc::SchemaError>(m, "SchemaError", error);

  m.def("ingest_coco",
        [](const fs::path& p) { return records_json(iccc::ingest_coco(p)); });
  m.def("ingest_jsonl",
        [](const fs::path& p) { return records_json(iccc::ingest_jsonl(p)); });
  m.def("extract", &extract_text, py::arg("conllu_text"),
        py::arg("types") = "noun,verb,ent,pred,attr");
  m.def("detokenize", [](const std::string& conllu_text) {
    std::vector<std::string> out;
    for (const auto& t : iccc::read_conllu_string(conllu_text).trees)
      out.push_back(iccc::detokenize(t));
    return out;
  });
  m.def("build_base", &build_base, py::arg("conllu"), py::arg("records") = "",
        py::arg("min_count") = 5, py::arg("top_drop") = 0.001,
        py::arg("out"));
  m.def("construct", &construct, py::arg("conllu"), py::arg("records"),
        py::arg("out"), py::arg("base") = "", py::arg("p_c") = 0.3,
        py::arg("p_s") = 0.15, py::arg("batch_size") = 64, py::arg("seed") = 0,
        py::arg("types") = "noun,verb,ent,pred,attr",
        py::arg("preset") = "blip2", py::arg("random_baseline") = false,
        py::arg("samples_per_caption") = 1, py::arg("workers") = 1,
        py::arg("min_count") = 5, py::arg("top_drop") = 0.001,
        py::arg("drain_leftover") = false, py::arg("per_dataset_base") = false);
  m.def("compute_stats", [](const fs::path& p) {
    return iccc::stats_to_json(iccc::compute_stats(p), -1);
  });
  m.def("iccc_quota", &iccc::iccc_quota, py::arg("p_c"), py::arg("batch_size"));
}
