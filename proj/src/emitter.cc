#include "iccc/emitter.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <utility>

#include <spdlog/spdlog.h>

#include "iccc/error.h"
#include "iccc/rng.h"
#include "json.hpp"

namespace iccc {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view kind_name(RecordKind kind) {
  return kind == RecordKind::kIccc ? "iccc" : "original";
}

std::string template_key(std::string_view group, std::size_t index) {
  return std::string(group) + ":" + std::to_string(index);
}

void tally_batch(EmissionCounts& c, const Batch& batch) {
  c.batch_sizes.push_back(batch.size());
  std::size_t iccc = 0;
  for (const auto& r : batch) {
    ++c.records;
    ++c.by_kind[std::string(kind_name(r.kind))];
    if (r.kind != RecordKind::kIccc) continue;
    ++iccc;
    const IcccSample& s = *r.sample;
    const auto& p = s.perturbation;
    ++c.by_op[std::string(perturb_op_name(p.op))];
    ++c.by_concept_type[p.concept_type
                            ? std::string(concept_type_name(*p.concept_type))
                            : "none"];
    ++c.by_template[template_key("instruction", s.instruction_template)];
    ++c.by_template[template_key(perturb_op_name(p.op), s.answer_template)];
    if (s.swap_feasible) {
      ++c.swap_feasible;
      if (p.op == PerturbOp::kSwap) ++c.swap_feasible_swaps;
    }
  }
  c.iccc_per_batch.push_back(iccc);
}

json spans_json(const std::vector<TokenSpan>& spans) {
  json out = json::array();
  for (const auto& s : spans) out.push_back({s.first, s.last});
  return out;
}

json byte_spans_json(const std::vector<ByteSpan>& spans) {
  json out = json::array();
  for (const auto& s : spans) out.push_back({s.begin, s.end});
  return out;
}

[[noreturn]] void schema_fail(std::size_t line, const std::string& what) {
  throw SchemaError("training file line " + std::to_string(line) + ": " + what);
}

}  // namespace

void MixConfig::validate() const {
  if (!(p_c >= 0.0 && p_c <= 1.0)) throw ConfigError("p_c must be in [0, 1]");
  if (!(p_s >= 0.0 && p_s <= 1.0)) throw ConfigError("p_s must be in [0, 1]");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (samples_per_caption < 1)
    throw ConfigError("samples per caption must be >= 1");
  if (enabled_types.empty()) throw ConfigError("no concept types enabled");
}

TrainingRecord TrainingRecord::original(const ImageRef& image,
                                        std::string caption_id,
                                        std::string caption) {
  TrainingRecord r;
  r.kind = RecordKind::kOriginal;
  r.image = image;
  r.caption_id = std::move(caption_id);
  r.target = caption;
  r.caption = std::move(caption);
  return r;
}

TrainingRecord TrainingRecord::iccc(IcccSample sample) {
  TrainingRecord r;
  r.kind = RecordKind::kIccc;
  r.image = sample.image;
  r.caption_id = sample.caption_id;
  r.instruction = sample.instruction;
  r.target = sample.answer;
  r.caption = sample.original_caption;
  r.sample = std::move(sample);
  return r;
}

std::size_t iccc_quota(double p_c, std::size_t batch_size) {
  // The epsilon keeps exact halves like 0.3 * 15 from rounding down.
  return static_cast<std::size_t>(
      std::floor(p_c * static_cast<double>(batch_size) + 0.5 + 1e-9));
}

MixResult mix_stream(std::vector<TrainingRecord> originals,
                     std::vector<TrainingRecord> iccc,
                     const MixConfig& config) {
  config.validate();
  Rng(derive_seed(config.seed, "mix", "originals"))
      .shuffle(std::span<TrainingRecord>(originals));
  Rng(derive_seed(config.seed, "mix", "iccc"))
      .shuffle(std::span<TrainingRecord>(iccc));

  MixResult result;
  std::size_t oi = 0, ii = 0;
  auto emit = [&](std::size_t n_iccc, std::size_t n_orig) {
    Batch batch;
    batch.reserve(n_iccc + n_orig);
    for (std::size_t k = 0; k < n_iccc; ++k)
      batch.push_back(std::move(iccc[ii++]));
    for (std::size_t k = 0; k < n_orig; ++k)
      batch.push_back(std::move(originals[oi++]));
    Rng(derive_seed(config.seed, "batch", "", result.batches.size()))
        .shuffle(std::span<TrainingRecord>(batch));
    result.batches.push_back(std::move(batch));
  };

  const std::size_t B = config.batch_size;
  const std::size_t want_iccc = iccc_quota(config.p_c, B);
  const std::size_t want_orig = B - want_iccc;
  while (ii + want_iccc <= iccc.size() && oi + want_orig <= originals.size() &&
         (ii < iccc.size() || oi < originals.size()))
    emit(want_iccc, want_orig);

  // Largest smaller batch whose rounded split both streams can still supply.
  for (std::size_t b = B - 1; b >= 1; --b) {
    const std::size_t q = iccc_quota(config.p_c, b);
    if (q <= iccc.size() - ii && b - q <= originals.size() - oi) {
      emit(q, b - q);
      break;
    }
  }

  const std::size_t left_orig = originals.size() - oi;
  const std::size_t left_iccc = iccc.size() - ii;
  if (left_orig + left_iccc == 0) return result;
  if (config.drain_leftover) {
    spdlog::warn("mix: draining {} original and {} ICCC records in batches "
                 "that deviate from p_c = {}",
                 left_orig, left_iccc, config.p_c);
    while (ii < iccc.size() || oi < originals.size()) {
      const std::size_t n_i = std::min(B, iccc.size() - ii);
      const std::size_t n_o = std::min(B - n_i, originals.size() - oi);
      emit(n_i, n_o);
      ++result.deviant_batches;
    }
  } else {
    spdlog::info("mix: {} original and {} ICCC records left over after the "
                 "last proportional batch; not emitted",
                 left_orig, left_iccc);
    result.dropped_originals = left_orig;
    result.dropped_iccc = left_iccc;
  }
  return result;
}

std::size_t EmissionCounts::iccc() const {
  auto it = by_kind.find("iccc");
  return it == by_kind.end() ? 0 : it->second;
}

double EmissionCounts::swap_fraction() const {
  const std::size_t n = iccc();
  if (n == 0) return 0.0;
  auto it = by_op.find("swap");
  return it == by_op.end() ? 0.0 : static_cast<double>(it->second) / n;
}

double EmissionCounts::feasible_swap_fraction() const {
  return swap_feasible == 0
             ? 0.0
             : static_cast<double>(swap_feasible_swaps) / swap_feasible;
}

std::size_t EmissionCounts::full_batch_size() const {
  return batch_sizes.empty()
             ? 0
             : *std::max_element(batch_sizes.begin(), batch_sizes.end());
}

std::size_t EmissionCounts::full_batches() const {
  const std::size_t full = full_batch_size();
  return std::count(batch_sizes.begin(), batch_sizes.end(), full);
}

std::size_t ConstructionCounts::total_skipped() const {
  std::size_t n = 0;
  for (const auto& [_, v] : skipped) n += v;
  return n;
}

std::string stats_to_json(const StatsReport& report, int indent) {
  const EmissionCounts& e = report.emitted;
  ordered_json j;
  j["records"] = e.records;
  j["by_kind"] = e.by_kind;
  j["by_op"] = e.by_op;
  j["by_concept_type"] = e.by_concept_type;
  j["by_template"] = e.by_template;
  j["swap_fraction"] = e.swap_fraction();
  j["swap_feasible"] = e.swap_feasible;
  j["swap_feasible_swaps"] = e.swap_feasible_swaps;
  j["swap_fraction_feasible"] = e.feasible_swap_fraction();
  j["batches"] = e.batch_sizes.size();
  j["full_batch_size"] = e.full_batch_size();
  j["full_batches"] = e.full_batches();
  const std::size_t full = e.full_batch_size();
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t b = 0; b < e.batch_sizes.size(); ++b) {
    if (e.batch_sizes[b] != full) continue;
    const double f = static_cast<double>(e.iccc_per_batch[b]) / full;
    lo = first ? f : std::min(lo, f);
    hi = first ? f : std::max(hi, f);
    first = false;
  }
  j["full_batch_iccc_fraction_min"] = lo;
  j["full_batch_iccc_fraction_max"] = hi;
  j["batch_sizes"] = e.batch_sizes;
  j["iccc_per_batch"] = e.iccc_per_batch;
  if (const auto& c = report.construction) {
    ordered_json cj;
    cj["captions"] = c->captions;
    cj["trees"] = c->trees;
    cj["parse_failures"] = c->parse_failures;
    cj["attempts"] = c->attempts;
    cj["generated"] = c->generated;
    cj["skipped"] = c->skipped;
    cj["dropped_originals"] = c->dropped_originals;
    cj["dropped_iccc"] = c->dropped_iccc;
    cj["deviant_batches"] = c->deviant_batches;
    j["construction"] = cj;
  }
  return j.dump(indent);
}

std::string record_to_json(const TrainingRecord& r, std::size_t batch) {
  ordered_json j;
  j["batch"] = batch;
  j["kind"] = kind_name(r.kind);
  j["dataset"] = r.image.dataset;
  j["image"] = r.image.image_id;
  j["caption_id"] = r.caption_id;
  j["instruction"] = r.instruction;
  j["target"] = r.target;
  j["caption"] = r.caption;
  if (r.kind != RecordKind::kIccc) {
    for (const char* k : {"mismatched", "op", "concept_type", "mode",
                          "original", "injected", "swapped", "spans",
                          "char_spans", "template_ids", "swap_feasible",
                          "seed_path"})
      j[k] = nullptr;
    return j.dump();
  }
  const IcccSample& s = *r.sample;
  const PerturbationRecord& p = s.perturbation;
  j["mismatched"] = s.mismatched_caption;
  j["op"] = perturb_op_name(p.op);
  if (p.concept_type)
    j["concept_type"] = concept_type_name(*p.concept_type);
  else
    j["concept_type"] = nullptr;
  j["mode"] = p.concept_type ? "concept" : "random";
  j["original"] = p.original_surfaces;
  if (p.op == PerturbOp::kReplace) {
    j["injected"] = p.injected_surface;
    j["swapped"] = nullptr;
  } else {
    j["injected"] = nullptr;
    j["swapped"] = answer_values(p);
  }
  j["spans"] = spans_json(p.spans);
  j["char_spans"] = byte_spans_json(p.char_spans);
  j["template_ids"] = {s.instruction_template, s.answer_template};
  j["swap_feasible"] = s.swap_feasible;
  j["seed_path"] = {{"seed", s.seed_path.seed},
                    {"caption_id", s.seed_path.caption_id},
                    {"sample", s.seed_path.sample_index}};
  return j.dump();
}

EmissionCounts write_jsonl(const std::vector<Batch>& batches,
                           const std::filesystem::path& path) {
  std::filesystem::path partial = path;
  partial += ".partial";
  EmissionCounts counts;
  try {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + partial.string());
    for (std::size_t b = 0; b < batches.size(); ++b) {
      for (const auto& r : batches[b]) out << record_to_json(r, b) << '\n';
      tally_batch(counts, batches[b]);
    }
    out.close();
    if (!out) throw Error("write failed: " + partial.string());
    std::filesystem::rename(partial, path);
  } catch (...) {
    std::error_code ignored;
    std::filesystem::remove(partial, ignored);
    throw;
  }
  return counts;
}

namespace {

std::string require_string(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j[key].is_string())
    schema_fail(line, std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

std::vector<std::string> require_strings(const json& j, const char* key,
                                         std::size_t line) {
  if (!j.contains(key) || !j[key].is_array())
    schema_fail(line, std::string("missing array field '") + key + "'");
  std::vector<std::string> out;
  for (const auto& v : j[key]) {
    if (!v.is_string()) schema_fail(line, std::string("bad '") + key + "'");
    out.push_back(v.get<std::string>());
  }
  return out;
}

// Two-element integer arrays, e.g. [[3, 4], [7, 8]].
template <typename T>
std::vector<std::pair<T, T>> require_pairs(const json& j, const char* key,
                                           std::size_t line) {
  if (!j.contains(key) || !j[key].is_array())
    schema_fail(line, std::string("missing array field '") + key + "'");
  std::vector<std::pair<T, T>> out;
  for (const auto& v : j[key]) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
        !v[1].is_number_integer())
      schema_fail(line, std::string("bad '") + key + "'");
    out.emplace_back(v[0].get<T>(), v[1].get<T>());
  }
  return out;
}

EmittedRecord parse_line(const std::string& text, std::size_t line) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) schema_fail(line, "not a JSON object");
  if (!j.contains("batch") || !j["batch"].is_number_unsigned())
    schema_fail(line, "missing 'batch'");
  EmittedRecord out;
  out.batch = j["batch"].get<std::size_t>();
  TrainingRecord& r = out.record;
  const std::string kind = require_string(j, "kind", line);
  r.image.dataset = require_string(j, "dataset", line);
  r.image.image_id = require_string(j, "image", line);
  r.caption_id = require_string(j, "caption_id", line);
  r.instruction = require_string(j, "instruction", line);
  r.target = require_string(j, "target", line);
  r.caption = require_string(j, "caption", line);
  if (kind == "original") {
    r.kind = RecordKind::kOriginal;
    if (!r.instruction.empty() || r.target != r.caption)
      schema_fail(line, "original record with instruction or foreign target");
    if (j.contains("op") && !j["op"].is_null())
      schema_fail(line, "original record carries a perturbation");
    return out;
  }
  if (kind != "iccc") schema_fail(line, "unknown kind '" + kind + "'");
  r.kind = RecordKind::kIccc;
  IcccSample s;
  s.image = r.image;
  s.caption_id = r.caption_id;
  s.original_caption = r.caption;
  s.instruction = r.instruction;
  s.answer = r.target;
  s.mismatched_caption = require_string(j, "mismatched", line);
  auto& p = s.perturbation;
  auto op = parse_perturb_op(require_string(j, "op", line));
  if (!op) schema_fail(line, "unknown op");
  p.op = *op;
  if (j.contains("concept_type") && j["concept_type"].is_string()) {
    auto type = parse_concept_type(j["concept_type"].get<std::string>());
    if (!type) schema_fail(line, "unknown concept_type");
    p.concept_type = *type;
  } else if (!j.contains("concept_type") || !j["concept_type"].is_null()) {
    schema_fail(line, "missing 'concept_type'");
  }
  p.original_surfaces = require_strings(j, "original", line);
  if (p.op == PerturbOp::kReplace) {
    p.injected_surface = require_string(j, "injected", line);
    if (p.original_surfaces.size() != 1) schema_fail(line, "bad 'original'");
  } else {
    if (p.original_surfaces.size() != 2) schema_fail(line, "bad 'original'");
    if (require_strings(j, "swapped", line) != answer_values(p))
      schema_fail(line, "'swapped' disagrees with 'original'");
  }
  for (auto [first, last] : require_pairs<int>(j, "spans", line))
    p.spans.push_back({first, last});
  for (auto [begin, end] : require_pairs<std::size_t>(j, "char_spans", line))
    p.char_spans.push_back({begin, end});
  if (p.spans.size() != p.original_surfaces.size() ||
      p.char_spans.size() != p.spans.size())
    schema_fail(line, "span counts disagree");
  const json& ids = j.value("template_ids", json());
  if (!ids.is_array() || ids.size() != 2 || !ids[0].is_number_unsigned() ||
      !ids[1].is_number_unsigned())
    schema_fail(line, "bad 'template_ids'");
  s.instruction_template = ids[0].get<std::size_t>();
  s.answer_template = ids[1].get<std::size_t>();
  if (!j.contains("swap_feasible") || !j["swap_feasible"].is_boolean())
    schema_fail(line, "missing 'swap_feasible'");
  s.swap_feasible = j["swap_feasible"].get<bool>();
  const json& seed = j.value("seed_path", json());
  if (!seed.is_object() || !seed.contains("seed") ||
      !seed["seed"].is_number_unsigned() || !seed.contains("caption_id") ||
      !seed["caption_id"].is_string() || !seed.contains("sample") ||
      !seed["sample"].is_number_unsigned())
    schema_fail(line, "bad 'seed_path'");
  s.seed_path = {seed["seed"].get<std::uint64_t>(),
                 seed["caption_id"].get<std::string>(),
                 seed["sample"].get<std::uint32_t>()};
  r.sample = std::move(s);
  return out;
}

}  // namespace

std::vector<EmittedRecord> read_training_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<EmittedRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) schema_fail(line_no, "blank line");
    out.push_back(parse_line(line, line_no));
  }
  return out;
}

StatsReport compute_stats(const std::filesystem::path& path) {
  // Counts straight from the JSON lines rather than through the in-memory
  // tally used while writing, so the two can be compared.
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  StatsReport report;
  EmissionCounts& c = report.emitted;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> current_batch;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) schema_fail(line_no, "blank line");
    const EmittedRecord parsed = parse_line(line, line_no);
    json j = json::parse(line);
    const std::size_t batch = parsed.batch;
    if (!current_batch || batch != *current_batch) {
      const std::size_t expected = current_batch ? *current_batch + 1 : 0;
      if (batch != expected)
        schema_fail(line_no, "batch index out of sequence");
      current_batch = batch;
      c.batch_sizes.push_back(0);
      c.iccc_per_batch.push_back(0);
    }
    ++c.batch_sizes.back();
    ++c.records;
    const std::string kind = j["kind"].get<std::string>();
    ++c.by_kind[kind];
    if (kind != "iccc") continue;
    ++c.iccc_per_batch.back();
    const std::string op = j["op"].get<std::string>();
    ++c.by_op[op];
    ++c.by_concept_type[j["concept_type"].is_null()
                            ? "none"
                            : j["concept_type"].get<std::string>()];
    ++c.by_template[template_key("instruction",
                                 j["template_ids"][0].get<std::size_t>())];
    ++c.by_template[template_key(op, j["template_ids"][1].get<std::size_t>())];
    if (j["swap_feasible"].get<bool>()) {
      ++c.swap_feasible;
      if (op == "swap") ++c.swap_feasible_swaps;
    }
  }
  return report;
}

}  // namespace iccc
