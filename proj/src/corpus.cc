#include "iccc/corpus.h"

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <utility>

#include <spdlog/spdlog.h>

#include "iccc/error.h"
#include "iccc/text.h"
#include "json.hpp"

namespace iccc {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

// Ids are opaque; COCO stores them as integers, other sources as strings.
std::optional<std::string> id_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return std::nullopt;
}

class RecordCollector {
 public:
  // Returns the skip reason, or nullopt if the record was accepted.
  std::optional<std::string> add(std::string dataset, const json& image_id,
                                 const json& caption_id, const json& caption) {
    auto image = id_text(image_id);
    auto cid = id_text(caption_id);
    if (!image || !cid || !caption.is_string()) return "bad_type";
    const auto& raw = caption.get_ref<const std::string&>();
    if (!text::is_valid_utf8(raw)) return "invalid_utf8";
    std::string normalized = text::normalize_caption(raw);
    if (normalized.empty()) return "empty_caption";
    if (!seen_.emplace(dataset, *cid).second) {
      throw DuplicateRecordError("duplicate caption (" + dataset + ", " +
                                 *cid + ")");
    }
    result_.records.push_back(
        {std::move(dataset), std::move(*image), std::move(*cid),
         std::move(normalized)});
    return std::nullopt;
  }

  void skip(const std::string& reason) { ++result_.report.skipped[reason]; }

  IngestResult finish() {
    result_.report.records = result_.records.size();
    return std::move(result_);
  }

 private:
  IngestResult result_;
  std::set<std::pair<std::string, std::string>> seen_;
};

}  // namespace

std::size_t IngestReport::total_skipped() const {
  std::size_t n = 0;
  for (const auto& [_, count] : skipped) n += count;
  return n;
}

IngestResult ingest_coco(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed COCO file: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("annotations") ||
      !doc["annotations"].is_array()) {
    throw ParseError("COCO file has no top-level \"annotations\" array", 0);
  }
  RecordCollector collector;
  for (const json& entry : doc["annotations"]) {
    if (!entry.is_object() || !entry.contains("image_id") ||
        !entry.contains("id") || !entry.contains("caption")) {
      collector.skip("missing_key");
      continue;
    }
    if (auto reason = collector.add("coco", entry["image_id"], entry["id"],
                                    entry["caption"])) {
      collector.skip(*reason);
    }
  }
  return collector.finish();
}

IngestResult ingest_coco(const std::filesystem::path& path) {
  auto in = open_input(path);
  return ingest_coco(in);
}

IngestResult ingest_jsonl(std::istream& in) {
  RecordCollector collector;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json entry = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (entry.is_discarded() || !entry.is_object()) {
      spdlog::warn("jsonl line {}: unparseable, skipped", line_no);
      collector.skip("unparseable");
      continue;
    }
    if (!entry.contains("image_id") || !entry.contains("caption_id") ||
        !entry.contains("caption")) {
      collector.skip("missing_key");
      continue;
    }
    std::string dataset = "jsonl";
    if (entry.contains("dataset")) {
      if (!entry["dataset"].is_string()) {
        collector.skip("bad_type");
        continue;
      }
      dataset = entry["dataset"].get<std::string>();
    }
    if (auto reason = collector.add(std::move(dataset), entry["image_id"],
                                    entry["caption_id"], entry["caption"])) {
      collector.skip(*reason);
    }
  }
  return collector.finish();
}

IngestResult ingest_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  return ingest_jsonl(in);
}

void validate_records(const std::vector<CaptionRecord>& records) {
  std::set<CaptionRef> seen;
  for (const auto& r : records) {
    if (r.dataset_tag.empty())
      throw ValidationError("record " + r.caption_id + ": empty dataset tag");
    if (r.caption_id.empty())
      throw ValidationError("record with empty caption id in " + r.dataset_tag);
    if (r.text.empty() || r.text != text::normalize_caption(r.text))
      throw ValidationError("record " + r.caption_id + ": text not normalized");
    if (!seen.insert(r.ref()).second)
      throw ValidationError("duplicate caption (" + r.dataset_tag + ", " +
                            r.caption_id + ")");
  }
}

void write_records(std::ostream& out,
                   const std::vector<CaptionRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["dataset"] = r.dataset_tag;
    j["image_id"] = r.image_id;
    j["caption_id"] = r.caption_id;
    j["text"] = r.text;
    out << j.dump() << '\n';
  }
}

void write_records(const std::filesystem::path& path,
                   const std::vector<CaptionRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_records(out, records);
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<CaptionRecord> read_records(std::istream& in) {
  std::vector<CaptionRecord> records;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      // Raw caption lines ("caption" instead of "text") are normalized here.
      std::string text =
          j.contains("text")
              ? j.at("text").get<std::string>()
              : text::normalize_caption(j.at("caption").get<std::string>());
      records.push_back({j.at("dataset").get<std::string>(),
                         j.at("image_id").get<std::string>(),
                         j.at("caption_id").get<std::string>(),
                         std::move(text)});
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad record line: ") + e.what(),
                       line_start);
    }
  }
  return records;
}

std::vector<CaptionRecord> read_records(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_records(in);
}

}  // namespace iccc
