#include "iccc/pipeline.h"

#include <algorithm>
#include <map>
#include <ostream>
#include <thread>

#include <spdlog/spdlog.h>

#include "iccc/error.h"
#include "iccc/perturb.h"
#include "iccc/rng.h"
#include "iccc/templates.h"
#include "json.hpp"

namespace iccc {

std::size_t Corpus::parsed() const {
  return std::count_if(trees.begin(), trees.end(),
                       [](const auto& t) { return t.has_value(); });
}

Corpus join_corpus(std::vector<CaptionRecord> records, ConlluResult parses) {
  validate_records(records);
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.ref() < b.ref(); });

  std::map<CaptionRef, std::size_t> by_ref;
  std::map<std::string, std::vector<std::size_t>> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_ref.emplace(records[i].ref(), i);
    by_id[records[i].caption_id].push_back(i);
  }

  Corpus corpus;
  corpus.trees.resize(records.size());
  corpus.rejected_parses = parses.rejections.size();
  for (auto& tree : parses.trees) {
    std::optional<std::size_t> slot;
    if (tree.caption_ref.dataset.empty()) {
      auto it = by_id.find(tree.caption_ref.caption_id);
      if (it != by_id.end()) {
        if (it->second.size() > 1)
          throw ValidationError("parse of caption '" +
                                tree.caption_ref.caption_id +
                                "' names no dataset and the id is ambiguous");
        slot = it->second.front();
      }
    } else if (auto it = by_ref.find(tree.caption_ref); it != by_ref.end()) {
      slot = it->second;
    }
    if (!slot) {
      ++corpus.unmatched_trees;
      continue;
    }
    if (corpus.trees[*slot])
      throw ValidationError("caption '" + records[*slot].caption_id +
                            "' is parsed twice");
    tree.caption_ref = records[*slot].ref();
    corpus.trees[*slot] = std::move(tree);
  }
  if (corpus.unmatched_trees > 0)
    spdlog::warn("{} parses match no caption record", corpus.unmatched_trees);
  corpus.records = std::move(records);
  return corpus;
}

std::vector<CaptionRecord> records_from_trees(const std::vector<DepTree>& trees) {
  std::vector<CaptionRecord> out;
  out.reserve(trees.size());
  for (const auto& t : trees) {
    const std::string& dataset =
        t.caption_ref.dataset.empty() ? std::string("conllu")
                                      : t.caption_ref.dataset;
    out.push_back({dataset, t.caption_ref.caption_id, t.caption_ref.caption_id,
                   detokenize(t)});
  }
  return out;
}

std::vector<ConceptAnnotation> annotate(const Corpus& corpus) {
  std::vector<ConceptAnnotation> out;
  out.reserve(corpus.records.size());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    if (corpus.trees[i])
      out.push_back(extract_all(*corpus.trees[i], all_concept_types()));
    else
      out.emplace_back(corpus.records[i].ref());
  }
  return out;
}

ConceptBase build_filtered_base(const std::vector<ConceptAnnotation>& annotations,
                                const FilterConfig& filter) {
  return filter_base(build_base(annotations), filter);
}

namespace {

struct Attempt {
  std::optional<IcccSample> sample;
  std::string skip_reason;
};

struct Generator {
  const ConstructConfig& config;
  const ConceptBase& shared_base;
  const std::map<std::string, ConceptBase>& dataset_bases;
  const TokenVocabulary& vocabulary;
  const TemplateSet& templates;

  Attempt run(const CaptionRecord& record, const DepTree& tree,
              const ConceptAnnotation& annotation, std::uint32_t index) const {
    const MixConfig& mix = config.mix;
    Rng rng(derive_seed(mix.seed, "sample",
                        record.dataset_tag + '\x1f' + record.caption_id, index));
    Attempt out;
    Perturbed perturbed;
    bool swap_feasible = false;
    try {
      if (config.random_baseline) {
        perturbed = corrupt_random(tree, vocabulary, rng);
      } else {
        const Target target = select_target(annotation, mix.enabled_types, rng);
        const auto& units = annotation.units(target.type);
        swap_feasible = units.size() >= 2;
        bool done = false;
        if (choose_operation(annotation, target.type, mix.p_s, rng) ==
            PerturbOp::kSwap) {
          const std::size_t partner = choose_partner(annotation, target, rng);
          try {
            perturbed = apply_swap(tree, units[target.unit], units[partner]);
            done = true;
          } catch (const SwapDegenerate& e) {
            spdlog::debug("{}: {}; replacing instead", record.caption_id,
                          e.what());
          }
        }
        if (!done) {
          const ConceptBase& base = config.per_dataset_base
                                        ? dataset_bases.at(record.dataset_tag)
                                        : shared_base;
          perturbed = apply_replace(tree, units[target.unit], base, rng);
        }
      }
    } catch (const CaptionSkipped&) {
      out.skip_reason = config.random_baseline ? "no_token" : "no_units";
      return out;
    } catch (const NoReplacementAvailable&) {
      out.skip_reason = "no_replacement";
      return out;
    }
    IcccSample s = render_sample({record.dataset_tag, record.image_id},
                                 detokenize(tree), perturbed.text,
                                 perturbed.record, templates, rng);
    s.caption_id = record.caption_id;
    s.seed_path = {mix.seed, record.caption_id, index};
    s.swap_feasible = swap_feasible;
    out.sample = std::move(s);
    return out;
  }
};

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

ConstructResult construct(const Corpus& corpus,
                          const std::vector<ConceptAnnotation>& annotations,
                          const ConceptBase& base,
                          const ConstructConfig& config) {
  config.mix.validate();
  if (annotations.size() != corpus.records.size())
    throw std::invalid_argument("construct: annotations do not match corpus");
  const TemplateSet templates =
      resolve_preset(config.mix.preset, config.presets_file);

  ConstructResult result;
  ConstructionCounts& counts = result.counts;
  counts.captions = corpus.records.size();
  counts.trees = corpus.parsed();
  counts.parse_failures = counts.captions - counts.trees;

  std::vector<std::size_t> jobs;
  for (std::size_t i = 0; i < corpus.records.size(); ++i)
    if (corpus.trees[i]) jobs.push_back(i);

  TokenVocabulary vocabulary;
  if (config.random_baseline) {
    std::vector<DepTree> trees;
    for (std::size_t i : jobs) trees.push_back(*corpus.trees[i]);
    vocabulary = build_token_vocabulary(trees);
  }

  std::map<std::string, ConceptBase> dataset_bases;
  if (config.per_dataset_base && !config.random_baseline) {
    std::map<std::string, std::vector<ConceptAnnotation>> grouped;
    for (std::size_t i = 0; i < corpus.records.size(); ++i)
      grouped[corpus.records[i].dataset_tag].push_back(annotations[i]);
    for (const auto& [dataset, anns] : grouped)
      dataset_bases.emplace(dataset, build_filtered_base(anns, config.filter));
  }

  // p_c = 0 asks for no correction samples at all.
  const std::size_t k =
      config.mix.p_c > 0.0 ? config.mix.samples_per_caption : 0;
  std::vector<Attempt> attempts(jobs.size() * k);
  const Generator gen{config, base, dataset_bases, vocabulary, templates};
  const unsigned workers = std::min<std::size_t>(
      resolve_workers(config.workers), std::max<std::size_t>(1, jobs.size()));
  {
    // Each attempt seeds its own stream, so the split across workers cannot
    // change any output.
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t a = w; a < attempts.size(); a += workers) {
          const std::size_t i = jobs[a / k];
          attempts[a] = gen.run(corpus.records[i], *corpus.trees[i],
                                annotations[i], static_cast<std::uint32_t>(a % k));
        }
      });
    }
  }

  counts.attempts = attempts.size();
  for (auto& a : attempts) {
    if (a.sample)
      result.samples.push_back(std::move(*a.sample));
    else
      ++counts.skipped[a.skip_reason];
  }
  counts.generated = result.samples.size();

  std::vector<TrainingRecord> originals, iccc;
  originals.reserve(corpus.records.size());
  for (const auto& r : corpus.records)
    originals.push_back(
        TrainingRecord::original({r.dataset_tag, r.image_id}, r.caption_id, r.text));
  iccc.reserve(result.samples.size());
  for (const auto& s : result.samples) iccc.push_back(TrainingRecord::iccc(s));
  result.mix = mix_stream(std::move(originals), std::move(iccc), config.mix);
  counts.dropped_originals = result.mix.dropped_originals;
  counts.dropped_iccc = result.mix.dropped_iccc;
  counts.deviant_batches = result.mix.deviant_batches;
  return result;
}

std::string annotation_to_json(const ConceptAnnotation& annotation) {
  nlohmann::ordered_json j;
  j["dataset"] = annotation.caption_ref().dataset;
  j["caption_id"] = annotation.caption_ref().caption_id;
  nlohmann::ordered_json units = nlohmann::ordered_json::object();
  for (ConceptType type : kAllConceptTypes) {
    auto list = nlohmann::ordered_json::array();
    for (const auto& u : annotation.units(type))
      list.push_back({u.span.first, u.span.last, u.surface});
    units[std::string(concept_type_name(type))] = std::move(list);
  }
  j["units"] = std::move(units);
  return j.dump();
}

void write_annotations(std::ostream& out,
                       const std::vector<ConceptAnnotation>& annotations) {
  for (const auto& a : annotations) out << annotation_to_json(a) << '\n';
}

}  // namespace iccc
