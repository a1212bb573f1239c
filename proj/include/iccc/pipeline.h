// End-to-end construction: joins caption records with their parses, builds
// the concept base and generates, mixes and counts correction samples.

#ifndef ICCC_PIPELINE_H_
#define ICCC_PIPELINE_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iccc/conceptbase.h"
#include "iccc/corpus.h"
#include "iccc/emitter.h"
#include "iccc/extractor.h"
#include "iccc/udtree.h"

namespace iccc {

struct ConstructConfig {
  MixConfig mix;
  FilterConfig filter;
  // Structure-blind corruption of one random word instead of concepts.
  bool random_baseline = false;
  // Draw replacements from a base built over the caption's own dataset
  // rather than the shared one; per-dataset bases use `filter`.
  bool per_dataset_base = false;
  // 0 picks std::thread::hardware_concurrency().
  unsigned workers = 1;
  std::filesystem::path presets_file;
};

// Records sorted by (dataset, caption_id) with the parse of each, if any.
struct Corpus {
  std::vector<CaptionRecord> records;
  std::vector<std::optional<DepTree>> trees;  // parallel to records
  std::size_t rejected_parses = 0;  // blocks the CoNLL-U reader refused
  std::size_t unmatched_trees = 0;  // parses without a caption record

  std::size_t parsed() const;
};

// A tree whose "# dataset" comment is missing matches on caption_id alone;
// throws ValidationError when that is ambiguous or a caption is parsed twice.
Corpus join_corpus(std::vector<CaptionRecord> records, ConlluResult parses);

// Builds records from the trees themselves, for input that comes without a
// caption file. The image id defaults to the caption id.
std::vector<CaptionRecord> records_from_trees(const std::vector<DepTree>& trees);

// All concept types of every parsed caption, parallel to corpus.records
// (unparsed captions get an empty annotation).
std::vector<ConceptAnnotation> annotate(const Corpus& corpus);

ConceptBase build_filtered_base(const std::vector<ConceptAnnotation>& annotations,
                                const FilterConfig& filter);

struct ConstructResult {
  std::vector<IcccSample> samples;  // generation order
  MixResult mix;
  ConstructionCounts counts;
};

// `base` is ignored in random-baseline mode and with per_dataset_base.
ConstructResult construct(const Corpus& corpus,
                          const std::vector<ConceptAnnotation>& annotations,
                          const ConceptBase& base,
                          const ConstructConfig& config);

// Per-caption annotation file, one JSON object per line.
std::string annotation_to_json(const ConceptAnnotation& annotation);
void write_annotations(std::ostream& out,
                       const std::vector<ConceptAnnotation>& annotations);

}  // namespace iccc

#endif  // ICCC_PIPELINE_H_
