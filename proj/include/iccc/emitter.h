// Batch mixing of correction samples with original captions, the training
// JSONL writer and the statistics recount.

#ifndef ICCC_EMITTER_H_
#define ICCC_EMITTER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iccc/extractor.h"
#include "iccc/perturb.h"

namespace iccc {

struct MixConfig {
  double p_c = 0.3;
  double p_s = 0.15;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  ConceptTypeSet enabled_types = all_concept_types();
  std::size_t samples_per_caption = 1;
  std::string preset = "blip2";
  // Emit records left over once one stream runs dry, in batches that break
  // the proportion. Off: leftovers are dropped and counted.
  bool drain_leftover = false;

  // Throws ConfigError.
  void validate() const;
};

enum class RecordKind { kOriginal, kIccc };

struct TrainingRecord {
  RecordKind kind = RecordKind::kOriginal;
  ImageRef image;
  std::string caption_id;
  std::string instruction;  // empty for originals
  std::string target;       // caption for originals, answer for ICCC
  std::string caption;      // unperturbed caption text
  std::optional<IcccSample> sample;  // set iff kind == kIccc

  static TrainingRecord original(const ImageRef& image,
                                 std::string caption_id, std::string caption);
  static TrainingRecord iccc(IcccSample sample);
};

using Batch = std::vector<TrainingRecord>;

// ICCC records per batch of `batch_size`: p_c * batch_size rounded half up.
std::size_t iccc_quota(double p_c, std::size_t batch_size);

struct MixResult {
  std::vector<Batch> batches;
  std::size_t dropped_originals = 0;
  std::size_t dropped_iccc = 0;
  std::size_t deviant_batches = 0;
};

// Both streams are shuffled with seeded substreams, then dealt into batches
// of exactly iccc_quota ICCC records plus originals. When a stream can no
// longer fill its share, one final partial batch with the same rounded
// proportion is emitted; within-batch order is a seeded shuffle.
MixResult mix_stream(std::vector<TrainingRecord> originals,
                     std::vector<TrainingRecord> iccc, const MixConfig& config);

// Counters recoverable from an emitted training file.
struct EmissionCounts {
  std::size_t records = 0;
  std::map<std::string, std::size_t> by_kind;
  std::map<std::string, std::size_t> by_op;
  std::map<std::string, std::size_t> by_concept_type;  // "none": random mode
  std::map<std::string, std::size_t> by_template;      // "replace:2" etc.
  std::size_t swap_feasible = 0;
  std::size_t swap_feasible_swaps = 0;
  std::vector<std::size_t> batch_sizes;
  std::vector<std::size_t> iccc_per_batch;

  std::size_t iccc() const;
  double swap_fraction() const;
  double feasible_swap_fraction() const;
  std::size_t full_batch_size() const;  // largest batch seen
  std::size_t full_batches() const;

  bool operator==(const EmissionCounts&) const = default;
};

// Counters only the constructing run knows.
struct ConstructionCounts {
  std::size_t captions = 0;
  std::size_t trees = 0;
  std::size_t parse_failures = 0;
  std::size_t attempts = 0;   // captions * samples_per_caption
  std::size_t generated = 0;
  std::map<std::string, std::size_t> skipped;
  std::size_t dropped_originals = 0;
  std::size_t dropped_iccc = 0;
  std::size_t deviant_batches = 0;

  std::size_t total_skipped() const;
};

struct StatsReport {
  EmissionCounts emitted;
  std::optional<ConstructionCounts> construction;
};

std::string stats_to_json(const StatsReport& report, int indent = 2);

// One record per line, in batch order. Written to "<path>.partial" and
// renamed on success; the partial file is removed on failure.
EmissionCounts write_jsonl(const std::vector<Batch>& batches,
                           const std::filesystem::path& path);

std::string record_to_json(const TrainingRecord& record, std::size_t batch);

// Recount from the file alone. Throws SchemaError on a malformed record.
StatsReport compute_stats(const std::filesystem::path& path);

// Parsed form of one output line, for consumers that verify the file.
struct EmittedRecord {
  std::size_t batch = 0;
  TrainingRecord record;
};
std::vector<EmittedRecord> read_training_file(const std::filesystem::path& path);

}  // namespace iccc

#endif  // ICCC_EMITTER_H_
