// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Runs entirely from the checked-in fixtures.

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "iccc/conceptbase.h"
#include "iccc/corpus.h"
#include "iccc/emitter.h"
#include "iccc/extractor.h"
#include "iccc/perturb.h"
#include "iccc/pipeline.h"
#include "iccc/udtree.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

const fs::path kData = ICCC_TEST_DATA;

// Tolerances and budgets.
constexpr double kGoldenBudgetSeconds = 1.0;
constexpr double kExclusionBudgetSeconds = 30.0;
constexpr double kSwapTolerance = 0.02;
constexpr std::size_t kSamplesPerCaption = 10;  // 1,000 captions -> 10,000

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// The mini-corpus is ASCII, so plain lowercasing is a faithful fold and stays
// independent of the library's ICU folding.
std::string ascii_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct Fixture {
  iccc::Corpus corpus;
  std::vector<iccc::ConceptAnnotation> annotations;
  iccc::ConceptBase base;
};

const Fixture& mini() {
  static const Fixture* f = [] {
    auto* out = new Fixture;
    out->corpus = iccc::join_corpus(
        iccc::ingest_jsonl(kData / "minicorpus.jsonl").records,
        iccc::read_conllu_file((kData / "minicorpus.conllu").string()));
    out->annotations = iccc::annotate(out->corpus);
    out->base = iccc::build_filtered_base(out->annotations, {});
    return out;
  }();
  return *f;
}

iccc::ConstructResult run(const iccc::ConstructConfig& config) {
  const Fixture& f = mini();
  return iccc::construct(f.corpus, f.annotations, f.base, config);
}

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "iccc_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

// 1. Extraction against the hand-enumerated units.
Outcome golden_extraction() {
  const auto start = Clock::now();
  std::ifstream in(kData / "golden_units.json");
  const auto expected = nlohmann::json::parse(in);
  const iccc::ConlluResult r =
      iccc::read_conllu_file((kData / "golden.conllu").string());
  std::size_t mismatches = 0, units = 0;
  for (const auto& tree : r.trees) {
    const auto ann = iccc::extract_all(tree, iccc::all_concept_types());
    const auto& want = expected.at(tree.caption_ref.caption_id);
    for (iccc::ConceptType t : iccc::kAllConceptTypes) {
      const auto& got = ann.units(t);
      const auto& exp = want.at(std::string(iccc::concept_type_name(t)));
      units += exp.size();
      if (got.size() != exp.size()) {
        mismatches += std::max(got.size(), exp.size());
        continue;
      }
      for (std::size_t i = 0; i < got.size(); ++i)
        if (got[i].span.first != exp[i][0].get<int>() ||
            got[i].span.last != exp[i][1].get<int>() ||
            got[i].surface != exp[i][2].get<std::string>())
          ++mismatches;
    }
  }
  const double secs = seconds_since(start);
  const bool ok = mismatches == 0 && r.trees.size() == 20 &&
                  r.rejections.empty() && expected.size() == 20 &&
                  secs < kGoldenBudgetSeconds;
  std::ostringstream d;
  d << r.trees.size() << " sentences, " << units << " units, " << mismatches
    << " mismatches, " << std::fixed << std::setprecision(3) << secs << " s";
  return {ok, d.str()};
}

// 2. No injected surface occurs in its source caption.
Outcome replace_exclusion() {
  const auto start = Clock::now();
  iccc::ConstructConfig config;
  config.mix.p_s = 0.0;
  config.mix.seed = 17;
  config.mix.samples_per_caption = kSamplesPerCaption;
  const auto r = run(config);
  std::size_t replaces = 0, violations = 0;
  for (const auto& s : r.samples) {
    if (s.perturbation.op != iccc::PerturbOp::kReplace) continue;
    ++replaces;
    if (ascii_lower(s.original_caption)
            .find(ascii_lower(s.perturbation.injected_surface)) != std::string::npos)
      ++violations;
  }
  const double secs = seconds_since(start);
  std::ostringstream d;
  d << replaces << " replace samples of " << r.counts.attempts << " attempts, "
    << violations << " violations, " << std::fixed << std::setprecision(2)
    << secs << " s";
  return {violations == 0 && replaces >= 10000 && secs < kExclusionBudgetSeconds,
          d.str()};
}

// 3. p_s = 1 with a single type enabled at a time: every caption with fewer
// than two units of that type must give a replace sample.
Outcome swap_fallback() {
  const Fixture& f = mini();
  std::size_t checked = 0, singles = 0, bad = 0;
  for (iccc::ConceptType t : iccc::kAllConceptTypes) {
    iccc::ConstructConfig config;
    config.mix.p_s = 1.0;
    config.mix.enabled_types = {t};
    const auto r = run(config);
    std::map<std::string, std::size_t> units;
    for (std::size_t i = 0; i < f.corpus.records.size(); ++i)
      units[f.corpus.records[i].caption_id] = f.annotations[i].units(t).size();
    for (const auto& s : r.samples) {
      ++checked;
      const std::size_t n = units.at(s.caption_id);
      if (n < 2) {
        ++singles;
        if (s.perturbation.op != iccc::PerturbOp::kReplace) ++bad;
      }
    }
    // Captions with units of t that produced nothing are failures too,
    // unless the base had no replacement to offer.
    std::size_t expected = 0;
    for (const auto& [_, n] : units) expected += n > 0;
    const auto it = r.counts.skipped.find("no_replacement");
    const std::size_t no_repl = it == r.counts.skipped.end() ? 0 : it->second;
    if (r.samples.size() + no_repl != expected) ++bad;
  }
  std::ostringstream d;
  d << checked << " samples over 5 types, " << singles
    << " with a single unit, " << bad << " violations";
  return {bad == 0 && singles > 0, d.str()};
}

// 4. Swap fraction among swap-feasible samples tracks p_s.
Outcome swap_calibration() {
  bool ok = true;
  std::ostringstream d;
  d << std::fixed << std::setprecision(4);
  for (double p_s : {0.0, 0.15, 0.3}) {
    iccc::ConstructConfig config;
    config.mix.p_s = p_s;
    config.mix.seed = 2024;
    config.mix.samples_per_caption = kSamplesPerCaption;
    const auto r = run(config);
    std::size_t feasible = 0, swaps = 0;
    for (const auto& s : r.samples) {
      if (!s.swap_feasible) continue;
      ++feasible;
      swaps += s.perturbation.op == iccc::PerturbOp::kSwap;
    }
    const double frac = feasible ? double(swaps) / feasible : -1.0;
    const bool pass = r.samples.size() >= 10000 &&
                      std::fabs(frac - p_s) <= kSwapTolerance;
    ok = ok && pass;
    d << "p_s=" << p_s << ": " << frac << " over " << feasible
      << " feasible of " << r.samples.size() << "; ";
  }
  return {ok, d.str()};
}

struct Preset {
  const char* name;
  double p_c, p_s;
};
constexpr Preset kPublishedPresets[] = {{"opt2.7b", 0.3, 0.15},
                                    {"opt6.7b", 0.3, 0.0},
                                    {"flant5xl", 0.01, 0.2},
                                    {"instructblip", 0.3, 0.3}};

fs::path emit(const iccc::ConstructConfig& config, const std::string& name) {
  const auto r = run(config);
  const fs::path out = scratch() / (name + ".jsonl");
  iccc::write_jsonl(r.mix.batches, out);
  return out;
}

// 5. Every full batch of B = 64 holds exactly round(p_c * 64) ICCC records,
// judged from the file alone.
Outcome mixing() {
  bool ok = true;
  std::ostringstream d;
  for (const Preset& p : kPublishedPresets) {
    iccc::ConstructConfig config;
    config.mix.p_c = p.p_c;
    config.mix.p_s = p.p_s;
    config.mix.batch_size = 64;
    if (std::string(p.name) == "instructblip") config.mix.preset = "instructblip";
    const auto stats = iccc::compute_stats(emit(config, p.name)).emitted;
    const std::size_t want =
        static_cast<std::size_t>(std::llround(p.p_c * 64));
    std::size_t full = 0, off = 0;
    for (std::size_t b = 0; b < stats.batch_sizes.size(); ++b) {
      if (stats.batch_sizes[b] != 64) continue;
      ++full;
      off += stats.iccc_per_batch[b] != want;
    }
    ok = ok && full > 0 && off == 0 && stats.full_batch_size() == 64;
    d << p.name << " (" << p.p_c << ", " << p.p_s << "): " << full
      << " full batches, " << want << " ICCC each, " << off << " off; ";
  }
  return {ok, d.str()};
}

std::vector<fs::path> emitted_files() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(scratch()))
    if (e.path().extension() == ".jsonl") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// 6. Replaying each recorded perturbation reproduces the mismatched caption.
Outcome replay() {
  std::size_t records = 0, failures = 0;
  for (const auto& path : emitted_files()) {
    for (const auto& e : iccc::read_training_file(path)) {
      if (!e.record.sample) continue;
      ++records;
      const auto& s = *e.record.sample;
      const auto& p = s.perturbation;
      // Splice the recorded surfaces into the recorded original at the
      // recorded byte offsets, right to left.
      std::string text = s.original_caption;
      std::vector<std::pair<iccc::ByteSpan, std::string>> edits;
      if (p.op == iccc::PerturbOp::kReplace) {
        edits.push_back({p.char_spans.at(0), p.injected_surface});
      } else {
        edits.push_back({p.char_spans.at(0), p.original_surfaces.at(1)});
        edits.push_back({p.char_spans.at(1), p.original_surfaces.at(0)});
      }
      std::sort(edits.begin(), edits.end(),
                [](const auto& a, const auto& b) { return a.first.begin > b.first.begin; });
      bool ok = true;
      for (const auto& [span, surface] : edits) {
        if (span.end > text.size() || span.begin > span.end) {
          ok = false;
          break;
        }
        text.replace(span.begin, span.end - span.begin, surface);
      }
      if (!ok || text != s.mismatched_caption) ++failures;
    }
  }
  std::ostringstream d;
  d << records << " ICCC records replayed, " << failures << " failures";
  return {failures == 0 && records > 0, d.str()};
}

// 7. Identical config and seed give byte-identical files for any worker count.
Outcome determinism() {
  std::vector<std::string> digests;
  for (unsigned workers : {1u, 1u, 2u, 4u, 8u}) {
    // Each run rebuilds everything from the files on disk.
    iccc::Corpus corpus = iccc::join_corpus(
        iccc::ingest_jsonl(kData / "minicorpus.jsonl").records,
        iccc::read_conllu_file((kData / "minicorpus.conllu").string()));
    const auto annotations = iccc::annotate(corpus);
    const auto base = iccc::build_filtered_base(annotations, {});
    iccc::ConstructConfig config;
    config.mix.seed = 99;
    config.mix.p_s = 0.3;
    config.mix.samples_per_caption = 2;
    config.mix.preset = "instructblip";
    config.mix.drain_leftover = true;
    config.workers = workers;
    const auto r = iccc::construct(corpus, annotations, base, config);
    const fs::path out = scratch() / ("determinism_w" + std::to_string(workers) + ".out");
    iccc::write_jsonl(r.mix.batches, out);
    digests.push_back(sha256_file(out));
  }
  const bool same = std::all_of(digests.begin(), digests.end(),
                                [&](const auto& d) { return d == digests[0]; });
  return {same, "workers 1,1,2,4,8 -> sha256 " + digests[0].substr(0, 16) +
                    (same ? "... (all equal)" : "... (differ)")};
}

// Instruction and answer templates, typed in from the published table rather
// than taken from the library. The short preset uses only the first
// instruction.
struct Table {
  std::vector<std::string> instructions, replace_answers, swap_answers;
};

Table published_templates(const std::string& preset) {
  Table t;
  t.instructions = {R"(Check the caption: "{}")",
                    R"(Check the caption according to the image: "{}")",
                    R"(Based on the image, please correct the caption: "{}")"};
  if (preset == "blip2") t.instructions.resize(1);
  t.replace_answers = {R"("{}" should be "{}")", R"("{}" could be "{}")",
                       R"("{}" is "{}")", R"("{}" actually is "{}")"};
  t.swap_answers = {R"("{}" and "{}" are swapped)",
                    R"("{}" and "{}" need to switch)",
                    R"("{}" and "{}" should exchange positions)",
                    R"("{}" and "{}" need to be swapped)"};
  return t;
}

std::regex template_regex(const std::string& pattern) {
  static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
  std::string out;
  std::size_t start = 0;
  for (auto pos = pattern.find("{}"); pos != std::string::npos;
       pos = pattern.find("{}", start)) {
    out += std::regex_replace(pattern.substr(start, pos - start), special, R"(\$&)");
    out += "(.*)";
    start = pos + 2;
  }
  out += std::regex_replace(pattern.substr(start), special, R"(\$&)");
  return std::regex(out);
}

bool matches_one(const std::vector<std::string>& templates,
                 std::size_t recorded, const std::string& text,
                 const std::vector<std::string>& captures) {
  if (recorded >= templates.size()) return false;
  std::smatch m;
  const std::regex re = template_regex(templates[recorded]);
  if (!std::regex_match(text, m, re) || m.size() != captures.size() + 1)
    return false;
  for (std::size_t i = 0; i < captures.size(); ++i)
    if (m[i + 1].str() != captures[i]) return false;
  return true;
}

// 8. Instructions and answers match the active preset's templates with the
// recorded surfaces in the slots.
Outcome template_conformance() {
  std::size_t records = 0, bad = 0;
  std::ostringstream d;
  for (const char* preset : {"blip2", "instructblip"}) {
    iccc::ConstructConfig config;
    config.mix.preset = preset;
    config.mix.p_s = 0.3;
    config.mix.samples_per_caption = 3;
    config.mix.drain_leftover = true;
    const Table t = published_templates(preset);
    std::map<std::size_t, std::size_t> instruction_use;
    for (const auto& e : iccc::read_training_file(
             emit(config, std::string("templates_") + preset))) {
      if (!e.record.sample) continue;
      ++records;
      const auto& s = *e.record.sample;
      const auto& p = s.perturbation;
      ++instruction_use[s.instruction_template];
      const bool instr_ok = matches_one(t.instructions, s.instruction_template,
                                        e.record.instruction, {s.mismatched_caption});
      const bool answer_ok =
          p.op == iccc::PerturbOp::kReplace
              ? matches_one(t.replace_answers, s.answer_template, e.record.target,
                            {p.injected_surface, p.original_surfaces.at(0)})
              : matches_one(t.swap_answers, s.answer_template, e.record.target,
                            {p.original_surfaces.at(1), p.original_surfaces.at(0)});
      bad += !(instr_ok && answer_ok);
    }
    d << preset << ": " << instruction_use.size() << " instruction template(s) used; ";
    if (instruction_use.size() != t.instructions.size()) ++bad;
  }
  d << records << " records, " << bad << " nonconforming";
  return {bad == 0 && records > 0, d.str()};
}

// 9. The ablation configurations run and their per-type counts agree with
// the records in the file.
Outcome ablations() {
  struct Ablation {
    const char* types;
    bool random;
  };
  const Ablation kAblations[] = {{"noun,verb", false},
                                 {"ent,pred,attr", false},
                                 {"noun,ent", false},
                                 {"verb,pred,attr", false},
                                 {"noun,verb,ent,pred,attr", true}};
  bool ok = true;
  std::ostringstream d;
  int n = 0;
  for (const Ablation& a : kAblations) {
    iccc::ConstructConfig config;
    config.mix.enabled_types = iccc::parse_concept_types(a.types);
    config.random_baseline = a.random;
    const fs::path file = emit(config, "ablation_" + std::to_string(n++));
    const auto stats = iccc::compute_stats(file).emitted;
    std::map<std::string, std::size_t> recount;
    for (const auto& e : iccc::read_training_file(file)) {
      if (!e.record.sample) continue;
      const auto& type = e.record.sample->perturbation.concept_type;
      ++recount[type ? std::string(iccc::concept_type_name(*type)) : "none"];
    }
    std::set<std::string> want;
    if (a.random) {
      want = {"none"};
    } else {
      for (auto t : config.mix.enabled_types)
        want.insert(std::string(iccc::concept_type_name(t)));
    }
    std::set<std::string> got;
    for (const auto& [k, v] : recount)
      if (v > 0) got.insert(k);
    const bool pass = stats.iccc() > 0 && stats.by_concept_type == recount &&
                      got == want;
    ok = ok && pass;
    d << (a.random ? "random" : a.types) << ": " << stats.iccc() << " ICCC"
      << (pass ? "" : " (bad)") << "; ";
  }
  return {ok, d.str()};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"golden-extraction", golden_extraction},
      {"replace-exclusion", replace_exclusion},
      {"swap-fallback", swap_fallback},
      {"swap-calibration", swap_calibration},
      {"mixing-presets", mixing},
      {"replay", replay},
      {"determinism", determinism},
      {"template-conformance", template_conformance},
      {"ablations", ablations},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << std::left << std::setw(22)
              << name << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
