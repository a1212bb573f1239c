// Global pool of concept surfaces used as replacement material.
//
// Noun words and entity phrases share the Entity table, verb words and
// predicate phrases share the Predicate table; attribute phrases have their
// own. Surfaces are keyed by their case-folded form; the most frequent
// original casing is kept as the exemplar for rendering.

#ifndef ICCC_CONCEPTBASE_H_
#define ICCC_CONCEPTBASE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iccc/extractor.h"
#include "iccc/rng.h"

namespace iccc {

enum class BaseType { kEntity, kPredicate, kAttribute };

inline constexpr std::array<BaseType, 3> kAllBaseTypes = {
    BaseType::kEntity, BaseType::kPredicate, BaseType::kAttribute};

BaseType base_type_of(ConceptType type);
std::string_view base_type_name(BaseType type);
std::optional<BaseType> parse_base_type(std::string_view name);

struct ConceptEntry {
  BaseType base_type = BaseType::kEntity;
  std::string key;      // case-folded
  std::string surface;  // exemplar casing
  std::uint64_t count = 0;
  // Occurrences per original casing; the exemplar is derived from these.
  std::map<std::string, std::uint64_t> variants;

  bool operator==(const ConceptEntry&) const = default;
};

struct FilterConfig {
  std::uint64_t min_count = 5;
  double top_quantile_drop = 0.001;

  bool operator==(const FilterConfig&) const = default;
};

class ConceptBase {
 public:
  void add(BaseType type, std::string_view surface, std::uint64_t n = 1);
  void add(const ConceptAnnotation& annotation);
  // Count-wise union; exemplars are recomputed from the merged variants.
  void merge(const ConceptBase& other);

  // Entries in key order; index positions are what sampling draws from.
  const std::vector<ConceptEntry>& entries(BaseType type) const {
    return tables_[static_cast<std::size_t>(type)];
  }
  const ConceptEntry* find(BaseType type, std::string_view key) const;
  std::size_t size(BaseType type) const { return entries(type).size(); }

  // A table needs at least two entries for replacement to be possible.
  bool replacement_enabled(BaseType type) const { return size(type) >= 2; }

  const std::optional<FilterConfig>& applied_filter() const {
    return applied_filter_;
  }

  // Entries ordered by (base type, descending count, surface); the on-disk
  // order.
  std::vector<const ConceptEntry*> canonical_order() const;

  bool operator==(const ConceptBase&) const = default;

 private:
  friend ConceptBase filter_base(const ConceptBase&, const FilterConfig&);
  friend ConceptBase read_base(std::istream&);
  friend ConceptBase build_base(std::span<const ConceptAnnotation>);

  std::array<std::vector<ConceptEntry>, 3> tables_;
  std::optional<FilterConfig> applied_filter_;
};

// Counts every unit surface of every annotation under its base type.
ConceptBase build_base(std::span<const ConceptAnnotation> annotations);

// Drops entries with count < min_count, then the ceil(top_quantile_drop * n)
// most frequent survivors per table (ties: lexicographically greater key goes
// first). Re-applying the configuration already applied is a no-op.
// Throws ConfigError on out-of-range parameters.
ConceptBase filter_base(const ConceptBase& base, const FilterConfig& config);

// Number of head entries removed from a table of `n` survivors.
std::size_t top_drop_count(double top_quantile_drop, std::size_t n);

// Uniform draw over distinct surfaces of `type` whose key is not in
// `exclude`, is not a substring or superstring of an excluded key, and does
// not occur anywhere in `context`, not even inside a word. `exclude` and
// `context` must already be case-folded.
// Throws NoReplacementAvailable.
const ConceptEntry& sample_replacement(const ConceptBase& base, BaseType type,
                                       std::span<const std::string> exclude,
                                       Rng& rng,
                                       std::string_view context = {});

bool replacement_eligible(std::string_view key,
                          std::span<const std::string> exclude,
                          std::string_view context);

// Tab-separated "base_type surface count" lines in canonical order, preceded
// by a "# filter" header when a filter has been applied.
void write_base(std::ostream& out, const ConceptBase& base);
void write_base(const std::filesystem::path& path, const ConceptBase& base);
ConceptBase read_base(std::istream& in);
ConceptBase read_base(const std::filesystem::path& path);

}  // namespace iccc

#endif  // ICCC_CONCEPTBASE_H_
