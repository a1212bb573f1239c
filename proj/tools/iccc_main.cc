// iccc: builds image-conditioned caption correction training data.
//
//   iccc ingest --coco captions.json --out records.jsonl
//   iccc extract --conllu parses.conllu --out annotations.jsonl
//   iccc build-base --conllu parses.conllu --out concepts.tsv
//   iccc construct --records records.jsonl --conllu parses.conllu --out train.jsonl
//   iccc stats train.jsonl
//   iccc validate --records records.jsonl --conllu parses.conllu --training train.jsonl
//
// Output paths default to files under $ICCC_WORKDIR (or the current
// directory).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "iccc/conceptbase.h"
#include "iccc/corpus.h"
#include "iccc/emitter.h"
#include "iccc/error.h"
#include "iccc/extractor.h"
#include "iccc/perturb.h"
#include "iccc/pipeline.h"
#include "iccc/udtree.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

fs::path workdir() {
  const char* env = std::getenv("ICCC_WORKDIR");
  fs::path dir = env && *env ? fs::path(env) : fs::current_path();
  fs::create_directories(dir);
  return dir;
}

fs::path or_default(const std::string& given, const char* name) {
  return given.empty() ? workdir() / name : fs::path(given);
}

iccc::ConlluResult load_conllu(const std::string& path) {
  iccc::ConlluResult parses = iccc::read_conllu_file(path);
  spdlog::info("{}: {} trees, {} rejected blocks", path, parses.trees.size(),
               parses.rejections.size());
  return parses;
}

iccc::Corpus load_corpus(const std::string& records_path,
                         const std::string& conllu_path) {
  iccc::ConlluResult parses = load_conllu(conllu_path);
  std::vector<iccc::CaptionRecord> records =
      records_path.empty() ? iccc::records_from_trees(parses.trees)
                           : iccc::read_records(fs::path(records_path));
  return iccc::join_corpus(std::move(records), std::move(parses));
}

struct IngestArgs {
  std::string coco, jsonl, out;
};

int run_ingest(const IngestArgs& a) {
  if (a.coco.empty() == a.jsonl.empty())
    throw iccc::ConfigError("ingest needs exactly one of --coco and --jsonl");
  iccc::IngestResult r = a.coco.empty() ? iccc::ingest_jsonl(fs::path(a.jsonl))
                                        : iccc::ingest_coco(fs::path(a.coco));
  const fs::path out = or_default(a.out, "records.jsonl");
  iccc::write_records(out, r.records);
  ordered_json j;
  j["records"] = r.report.records;
  j["skipped"] = r.report.skipped;
  j["out"] = out.string();
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct ExtractArgs {
  std::string conllu, records, types = "noun,verb,ent,pred,attr", out;
};

int run_extract(const ExtractArgs& a) {
  const iccc::ConceptTypeSet types = iccc::parse_concept_types(a.types);
  iccc::Corpus corpus = load_corpus(a.records, a.conllu);
  std::vector<iccc::ConceptAnnotation> annotations = iccc::annotate(corpus);
  ordered_json counts = ordered_json::object();
  for (iccc::ConceptType t : types) {
    std::size_t n = 0;
    for (const auto& ann : annotations) n += ann.units(t).size();
    counts[std::string(iccc::concept_type_name(t))] = n;
  }
  // Only the requested types go to the file.
  for (auto& ann : annotations)
    for (iccc::ConceptType t : iccc::kAllConceptTypes)
      if (!types.contains(t)) ann.set_units(t, {});
  const fs::path out = or_default(a.out, "annotations.jsonl");
  std::ofstream f(out);
  if (!f) throw iccc::Error("cannot write " + out.string());
  iccc::write_annotations(f, annotations);
  ordered_json j;
  j["captions"] = corpus.records.size();
  j["parsed"] = corpus.parsed();
  j["rejected_parses"] = corpus.rejected_parses;
  j["units"] = counts;
  j["out"] = out.string();
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct BaseArgs {
  std::string conllu, records, out;
  iccc::FilterConfig filter;
};

int run_build_base(const BaseArgs& a) {
  iccc::Corpus corpus = load_corpus(a.records, a.conllu);
  const iccc::ConceptBase base =
      iccc::build_filtered_base(iccc::annotate(corpus), a.filter);
  const fs::path out = or_default(a.out, "concepts.tsv");
  iccc::write_base(out, base);
  ordered_json j;
  for (iccc::BaseType t : {iccc::BaseType::kEntity, iccc::BaseType::kPredicate,
                           iccc::BaseType::kAttribute})
    j[std::string(iccc::base_type_name(t))] = base.size(t);
  j["out"] = out.string();
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct ConstructArgs {
  std::string conllu, records, base, out, stats, types = "noun,verb,ent,pred,attr";
  iccc::ConstructConfig config;
};

int run_construct(ConstructArgs a) {
  a.config.mix.enabled_types = iccc::parse_concept_types(a.types);
  a.config.mix.validate();
  if (a.config.per_dataset_base && !a.base.empty())
    throw iccc::ConfigError("--base and --per-dataset-base exclude each other");
  iccc::Corpus corpus = load_corpus(a.records, a.conllu);
  const auto annotations = iccc::annotate(corpus);
  iccc::ConceptBase base;
  if (!a.config.random_baseline) {
    base = a.base.empty()
               ? iccc::build_filtered_base(annotations, a.config.filter)
               : iccc::read_base(fs::path(a.base));
  }
  iccc::ConstructResult result =
      iccc::construct(corpus, annotations, base, a.config);

  const fs::path out = or_default(a.out, "iccc_train.jsonl");
  iccc::StatsReport report;
  report.emitted = iccc::write_jsonl(result.mix.batches, out);
  report.construction = result.counts;
  const fs::path stats =
      a.stats.empty() ? fs::path(out.string() + ".stats.json") : fs::path(a.stats);
  const std::string text = iccc::stats_to_json(report);
  std::ofstream(stats) << text << '\n';
  std::cout << text << '\n';
  return 0;
}

int run_stats(const std::string& path) {
  std::cout << iccc::stats_to_json(iccc::compute_stats(path)) << '\n';
  return 0;
}

struct ValidateArgs {
  std::string records, conllu, training;
};

int run_validate(const ValidateArgs& a) {
  if (a.records.empty() && a.conllu.empty() && a.training.empty())
    throw iccc::ConfigError(
        "validate needs at least one of --records, --conllu, --training");
  bool ok = true;
  auto check = [&](const std::string& what, auto&& body) {
    try {
      const std::string detail = body();
      std::cout << "ok    " << what << ": " << detail << '\n';
    } catch (const std::exception& e) {
      ok = false;
      std::cout << "FAIL  " << what << ": " << e.what() << '\n';
    }
  };
  if (!a.records.empty())
    check(a.records, [&] {
      const auto records = iccc::read_records(fs::path(a.records));
      iccc::validate_records(records);
      return std::to_string(records.size()) + " records";
    });
  if (!a.conllu.empty())
    check(a.conllu, [&] {
      const auto parses = iccc::read_conllu_file(a.conllu);
      for (const auto& r : parses.rejections)
        std::cout << "      line " << r.line << " (" << r.caption_id
                  << "): " << r.reason << '\n';
      if (!parses.rejections.empty())
        throw iccc::ValidationError(std::to_string(parses.rejections.size()) +
                                    " rejected blocks");
      return std::to_string(parses.trees.size()) + " trees";
    });
  if (!a.training.empty())
    check(a.training, [&] {
      const auto lines = iccc::read_training_file(a.training);
      std::size_t replayed = 0;
      for (const auto& e : lines) {
        if (!e.record.sample) continue;
        const iccc::IcccSample& s = *e.record.sample;
        if (iccc::replay_perturbation(s.original_caption, s.perturbation) !=
            s.mismatched_caption)
          throw iccc::ValidationError("caption " + s.caption_id +
                                      " does not replay");
        ++replayed;
      }
      return std::to_string(lines.size()) + " records, " +
             std::to_string(replayed) + " perturbations replayed";
    });
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-conditioned caption correction data construction"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "warn";
  app.add_option("--log-level", log_level,
                 "trace, debug, info, warn, error or off")
      ->capture_default_str();

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Normalize caption files");
  ingest_cmd->add_option("--coco", ingest.coco, "COCO caption annotation JSON");
  ingest_cmd->add_option("--jsonl", ingest.jsonl, "JSONL caption file");
  ingest_cmd->add_option("--out", ingest.out, "Record file to write");

  ExtractArgs extract;
  auto* extract_cmd =
      app.add_subcommand("extract", "Extract linguistic units from parses");
  extract_cmd->add_option("--conllu", extract.conllu)->required();
  extract_cmd->add_option("--records", extract.records);
  extract_cmd->add_option("--types", extract.types)->capture_default_str();
  extract_cmd->add_option("--out", extract.out, "Annotation file to write");

  BaseArgs base;
  auto* base_cmd = app.add_subcommand("build-base", "Build the concept base");
  base_cmd->add_option("--conllu", base.conllu)->required();
  base_cmd->add_option("--records", base.records);
  base_cmd->add_option("--min-count", base.filter.min_count)
      ->capture_default_str();
  base_cmd->add_option("--top-drop", base.filter.top_quantile_drop,
                       "Fraction of most frequent concepts to drop")
      ->capture_default_str();
  base_cmd->add_option("--out", base.out, "Concept base TSV to write");

  ConstructArgs con;
  auto* con_cmd =
      app.add_subcommand("construct", "Generate and mix correction samples");
  con_cmd->add_option("--conllu", con.conllu)->required();
  con_cmd->add_option("--records", con.records,
                      "Caption records; default: built from the parses");
  con_cmd->add_option("--base", con.base,
                      "Concept base TSV; default: built from the parses");
  auto& mix = con.config.mix;
  con_cmd->add_option("--p-c", mix.p_c, "ICCC share of each batch")
      ->capture_default_str();
  con_cmd->add_option("--p-s", mix.p_s, "Swap probability")
      ->capture_default_str();
  con_cmd->add_option("--batch-size", mix.batch_size)->capture_default_str();
  con_cmd->add_option("--seed", mix.seed)->capture_default_str();
  con_cmd->add_option("--types", con.types)->capture_default_str();
  con_cmd->add_option("--preset", mix.preset, "Template preset")
      ->capture_default_str();
  con_cmd->add_option("--templates", con.config.presets_file,
                      "JSON file with extra template presets");
  con_cmd->add_flag("--random-baseline", con.config.random_baseline,
                    "Corrupt one random word instead of a concept");
  con_cmd->add_flag("--per-dataset-base", con.config.per_dataset_base,
                    "Replacement pool per dataset instead of shared");
  con_cmd->add_option("--samples-per-caption", mix.samples_per_caption)
      ->capture_default_str();
  con_cmd->add_option("--min-count", con.config.filter.min_count)
      ->capture_default_str();
  con_cmd->add_option("--top-drop", con.config.filter.top_quantile_drop)
      ->capture_default_str();
  con_cmd->add_option("--workers", con.config.workers, "0: all cores")
      ->capture_default_str();
  con_cmd->add_flag("--drain-leftover", mix.drain_leftover,
                    "Emit leftover records in off-proportion batches");
  con_cmd->add_option("--out", con.out, "Training JSONL to write");
  con_cmd->add_option("--stats", con.stats,
                      "Summary JSON; default: <out>.stats.json");

  std::string stats_path;
  auto* stats_cmd = app.add_subcommand("stats", "Recount an emitted file");
  stats_cmd->add_option("file", stats_path)->required();

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Check input or output files");
  val_cmd->add_option("--records", val.records);
  val_cmd->add_option("--conllu", val.conllu);
  val_cmd->add_option("--training", val.training);

  CLI11_PARSE(app, argc, argv);

  auto logger = spdlog::stderr_color_mt("iccc");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*ingest_cmd) return run_ingest(ingest);
    if (*extract_cmd) return run_extract(extract);
    if (*base_cmd) return run_build_base(base);
    if (*con_cmd) return run_construct(con);
    if (*stats_cmd) return run_stats(stats_path);
    if (*val_cmd) return run_validate(val);
  } catch (const iccc::ConfigError& e) {
    std::cerr << "iccc: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "iccc: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
