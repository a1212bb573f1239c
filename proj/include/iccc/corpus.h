// Caption ingestion and the persisted record file.

#ifndef ICCC_CORPUS_H_
#define ICCC_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace iccc {

struct CaptionRef {
  std::string dataset;
  std::string caption_id;

  auto operator<=>(const CaptionRef&) const = default;
};

struct CaptionRecord {
  std::string dataset_tag;
  std::string image_id;
  std::string caption_id;
  std::string text;  // normalized

  CaptionRef ref() const { return {dataset_tag, caption_id}; }
  bool operator==(const CaptionRecord&) const = default;
};

struct IngestReport {
  std::size_t records = 0;
  // Entries or lines that were skipped, keyed by reason.
  std::map<std::string, std::size_t> skipped;

  std::size_t total_skipped() const;
};

struct IngestResult {
  std::vector<CaptionRecord> records;
  IngestReport report;
};

// COCO caption annotation file: {"annotations": [{"image_id", "id",
// "caption"}, ...]}. Numeric ids are rendered in decimal.
IngestResult ingest_coco(const std::filesystem::path& path);
IngestResult ingest_coco(std::istream& in);

// One object per line with "image_id", "caption_id", "caption" and an
// optional "dataset" (defaults to "jsonl").
IngestResult ingest_jsonl(const std::filesystem::path& path);
IngestResult ingest_jsonl(std::istream& in);

// Throws ValidationError on the first violated record invariant, including
// duplicate (dataset, caption_id) pairs.
void validate_records(const std::vector<CaptionRecord>& records);

// Persisted intermediate format: JSONL with keys dataset, image_id,
// caption_id, text.
void write_records(std::ostream& out, const std::vector<CaptionRecord>& records);
void write_records(const std::filesystem::path& path,
                   const std::vector<CaptionRecord>& records);
// Also accepts raw caption lines, normalizing their "caption" field.
std::vector<CaptionRecord> read_records(std::istream& in);
std::vector<CaptionRecord> read_records(const std::filesystem::path& path);

}  // namespace iccc

#endif  // ICCC_CORPUS_H_
