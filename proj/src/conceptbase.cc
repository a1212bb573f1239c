#include "iccc/conceptbase.h"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "iccc/error.h"
#include "iccc/text.h"

namespace iccc {
namespace {

constexpr std::array<std::string_view, 3> kBaseNames = {"entity", "predicate",
                                                        "attribute"};
constexpr int kRejectionAttempts = 32;

void refresh_exemplar(ConceptEntry& e) {
  const std::pair<const std::string, std::uint64_t>* best = nullptr;
  for (const auto& v : e.variants)
    if (!best || v.second > best->second ||
        (v.second == best->second && v.first > best->first))
      best = &v;
  if (best) e.surface = best->first;
}

std::vector<ConceptEntry>::iterator locate(std::vector<ConceptEntry>& table,
                                           std::string_view key) {
  return std::lower_bound(
      table.begin(), table.end(), key,
      [](const ConceptEntry& e, std::string_view k) { return e.key < k; });
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

BaseType base_type_of(ConceptType type) {
  switch (type) {
    case ConceptType::kNounWord:
    case ConceptType::kEntityPhrase:
      return BaseType::kEntity;
    case ConceptType::kVerbWord:
    case ConceptType::kPredicatePhrase:
      return BaseType::kPredicate;
    case ConceptType::kAttributePhrase:
      return BaseType::kAttribute;
  }
  return BaseType::kEntity;
}

std::string_view base_type_name(BaseType type) {
  return kBaseNames[static_cast<std::size_t>(type)];
}

std::optional<BaseType> parse_base_type(std::string_view name) {
  for (BaseType t : kAllBaseTypes)
    if (base_type_name(t) == name) return t;
  return std::nullopt;
}

void ConceptBase::add(BaseType type, std::string_view surface,
                      std::uint64_t n) {
  if (surface.empty() || n == 0) return;
  auto& table = tables_[static_cast<std::size_t>(type)];
  std::string key = text::case_fold(surface);
  auto it = locate(table, key);
  if (it == table.end() || it->key != key)
    it = table.insert(it, ConceptEntry{type, key, std::string(surface), 0, {}});
  it->count += n;
  it->variants[std::string(surface)] += n;
  refresh_exemplar(*it);
}

void ConceptBase::add(const ConceptAnnotation& annotation) {
  for (ConceptType t : kAllConceptTypes)
    for (const auto& unit : annotation.units(t))
      add(base_type_of(t), unit.surface);
}

void ConceptBase::merge(const ConceptBase& other) {
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    std::vector<ConceptEntry> merged;
    const auto& a = tables_[i];
    const auto& b = other.tables_[i];
    merged.reserve(a.size() + b.size());
    std::size_t x = 0, y = 0;
    while (x < a.size() || y < b.size()) {
      if (y == b.size() || (x < a.size() && a[x].key < b[y].key)) {
        merged.push_back(a[x++]);
      } else if (x == a.size() || b[y].key < a[x].key) {
        merged.push_back(b[y++]);
      } else {
        ConceptEntry e = a[x++];
        const ConceptEntry& o = b[y++];
        e.count += o.count;
        for (const auto& [variant, n] : o.variants) e.variants[variant] += n;
        refresh_exemplar(e);
        merged.push_back(std::move(e));
      }
    }
    tables_[i] = std::move(merged);
  }
  applied_filter_.reset();
}

const ConceptEntry* ConceptBase::find(BaseType type,
                                      std::string_view key) const {
  const auto& table = entries(type);
  auto it = std::lower_bound(
      table.begin(), table.end(), key,
      [](const ConceptEntry& e, std::string_view k) { return e.key < k; });
  return it != table.end() && it->key == key ? &*it : nullptr;
}

std::vector<const ConceptEntry*> ConceptBase::canonical_order() const {
  std::vector<const ConceptEntry*> out;
  for (BaseType t : kAllBaseTypes) {
    std::size_t start = out.size();
    for (const auto& e : entries(t)) out.push_back(&e);
    std::sort(out.begin() + start, out.end(),
              [](const ConceptEntry* a, const ConceptEntry* b) {
                if (a->count != b->count) return a->count > b->count;
                return a->surface < b->surface;
              });
  }
  return out;
}

ConceptBase build_base(std::span<const ConceptAnnotation> annotations) {
  std::array<std::map<std::string, ConceptEntry>, 3> acc;
  for (const auto& annotation : annotations) {
    for (ConceptType t : kAllConceptTypes) {
      BaseType bt = base_type_of(t);
      for (const auto& unit : annotation.units(t)) {
        std::string key = text::case_fold(unit.surface);
        auto& e = acc[static_cast<std::size_t>(bt)][key];
        if (e.count == 0) {
          e.base_type = bt;
          e.key = std::move(key);
        }
        ++e.count;
        ++e.variants[unit.surface];
      }
    }
  }
  ConceptBase base;
  for (BaseType t : kAllBaseTypes) {
    auto& table = base.tables_[static_cast<std::size_t>(t)];
    for (auto& [_, e] : acc[static_cast<std::size_t>(t)]) {
      refresh_exemplar(e);
      table.push_back(std::move(e));
    }
  }
  return base;
}

std::size_t top_drop_count(double top_quantile_drop, std::size_t n) {
  const double x = top_quantile_drop * static_cast<double>(n);
  const double nearest = std::round(x);
  // Products like 0.3 * 10 land a hair above the integer they denote.
  if (std::fabs(x - nearest) < 1e-9) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(x));
}

ConceptBase filter_base(const ConceptBase& base, const FilterConfig& config) {
  if (config.min_count < 1) throw ConfigError("min_count must be >= 1");
  if (!(config.top_quantile_drop >= 0.0 && config.top_quantile_drop < 1.0))
    throw ConfigError("top_quantile_drop must be in [0, 1)");
  if (base.applied_filter_ == config) return base;

  ConceptBase out;
  for (BaseType t : kAllBaseTypes) {
    std::vector<const ConceptEntry*> survivors;
    for (const auto& e : base.entries(t))
      if (e.count >= config.min_count) survivors.push_back(&e);
    std::size_t drop = top_drop_count(config.top_quantile_drop,
                                      survivors.size());
    std::vector<const ConceptEntry*> by_freq = survivors;
    std::sort(by_freq.begin(), by_freq.end(),
              [](const ConceptEntry* a, const ConceptEntry* b) {
                if (a->count != b->count) return a->count > b->count;
                return a->key > b->key;
              });
    by_freq.erase(by_freq.begin(), by_freq.begin() + drop);
    std::sort(by_freq.begin(), by_freq.end(),
              [](const ConceptEntry* a, const ConceptEntry* b) {
                return a->key < b->key;
              });
    auto& table = out.tables_[static_cast<std::size_t>(t)];
    for (const ConceptEntry* e : by_freq) table.push_back(*e);
    if (table.size() < 2)
      spdlog::warn("concept base: {} table has {} entries after filtering; "
                   "replacement disabled for this type",
                   base_type_name(t), table.size());
  }
  out.applied_filter_ = config;
  return out;
}

bool replacement_eligible(std::string_view key,
                          std::span<const std::string> exclude,
                          std::string_view context) {
  for (const auto& ex : exclude) {
    if (ex.empty()) continue;
    if (key.find(ex) != std::string_view::npos ||
        ex.find(key) != std::string::npos)
      return false;
  }
  return context.find(key) == std::string_view::npos;
}

const ConceptEntry& sample_replacement(const ConceptBase& base, BaseType type,
                                       std::span<const std::string> exclude,
                                       Rng& rng, std::string_view context) {
  const auto& table = base.entries(type);
  if (!base.replacement_enabled(type))
    throw NoReplacementAvailable(std::string(base_type_name(type)) +
                                 " table is replacement-disabled");
  for (int attempt = 0; attempt < kRejectionAttempts; ++attempt) {
    const ConceptEntry& e = table[rng.uniform(table.size())];
    if (replacement_eligible(e.key, exclude, context)) return e;
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (replacement_eligible(table[i].key, exclude, context))
      eligible.push_back(i);
  if (eligible.empty())
    throw NoReplacementAvailable("no eligible " +
                                 std::string(base_type_name(type)) +
                                 " concept");
  return table[eligible[rng.uniform(eligible.size())]];
}

void write_base(std::ostream& out, const ConceptBase& base) {
  if (const auto& f = base.applied_filter()) {
    out << "# filter min_count=" << f->min_count
        << " top_quantile_drop=" << format_double(f->top_quantile_drop) << '\n';
  }
  for (const ConceptEntry* e : base.canonical_order())
    out << base_type_name(e->base_type) << '\t' << e->surface << '\t'
        << e->count << '\n';
}

void write_base(const std::filesystem::path& path, const ConceptBase& base) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_base(out, base);
}

ConceptBase read_base(std::istream& in) {
  ConceptBase base;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    if (line[0] == '#') {
      FilterConfig f;
      if (std::sscanf(line.c_str(),
                      "# filter min_count=%" SCNu64 " top_quantile_drop=%lf",
                      &f.min_count, &f.top_quantile_drop) == 2)
        base.applied_filter_ = f;
      continue;
    }
    auto tab1 = line.find('\t');
    auto tab2 = line.rfind('\t');
    if (tab1 == std::string::npos || tab1 == tab2)
      throw ParseError("bad concept base line", line_start);
    auto type = parse_base_type(std::string_view(line).substr(0, tab1));
    std::uint64_t count = 0;
    const char* num = line.data() + tab2 + 1;
    auto [ptr, ec] = std::from_chars(num, line.data() + line.size(), count);
    if (!type || ec != std::errc() || ptr != line.data() + line.size() ||
        count == 0)
      throw ParseError("bad concept base line", line_start);
    base.add(*type, std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1),
             count);
  }
  return base;
}

ConceptBase read_base(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_base(in);
}

}  // namespace iccc
