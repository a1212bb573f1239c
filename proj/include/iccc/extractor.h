// Concept extraction from dependency trees.
//
// Five concept types are recognized. Word-level units come straight from the
// UPOS tag; phrase-level units group tokens around those words using the
// dependency relations:
//
//   noun word        NOUN or PROPN token
//   verb word        VERB token (AUX excluded)
//   entity phrase    noun word plus the contiguous run of DET/ADJ/NUM tokens
//                    immediately to its left that it governs
//   predicate phrase tokens between two consecutive noun words, minus the
//                    right noun's entity phrase; kept only if it contains a
//                    VERB, ADP or AUX
//   attribute phrase amod dependent of a noun word, widened over contiguous
//                    advmod dependents of that adjective

#ifndef ICCC_EXTRACTOR_H_
#define ICCC_EXTRACTOR_H_

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "iccc/udtree.h"

namespace iccc {

enum class ConceptType {
  kEntityPhrase,
  kPredicatePhrase,
  kAttributePhrase,
  kNounWord,
  kVerbWord,
};

inline constexpr std::array<ConceptType, 5> kAllConceptTypes = {
    ConceptType::kEntityPhrase, ConceptType::kPredicatePhrase,
    ConceptType::kAttributePhrase, ConceptType::kNounWord,
    ConceptType::kVerbWord};

using ConceptTypeSet = std::set<ConceptType>;

// Short names used on the command line and in output files:
// ent, pred, attr, noun, verb.
std::string_view concept_type_name(ConceptType type);
std::optional<ConceptType> parse_concept_type(std::string_view name);

// Parses "noun,verb,ent" style lists. Throws ConfigError on unknown names or
// an empty set.
ConceptTypeSet parse_concept_types(std::string_view list);
ConceptTypeSet all_concept_types();

struct LinguisticUnit {
  ConceptType concept_type;
  TokenSpan span;
  int head_index = 0;
  std::string surface;

  bool operator==(const LinguisticUnit&) const = default;
};

class ConceptAnnotation {
 public:
  ConceptAnnotation() = default;
  explicit ConceptAnnotation(CaptionRef ref) : caption_ref_(std::move(ref)) {}

  const CaptionRef& caption_ref() const { return caption_ref_; }

  const std::vector<LinguisticUnit>& units(ConceptType type) const {
    return units_[static_cast<std::size_t>(type)];
  }
  void set_units(ConceptType type, std::vector<LinguisticUnit> units) {
    units_[static_cast<std::size_t>(type)] = std::move(units);
  }

  std::size_t total_units() const;
  std::size_t count(const ConceptTypeSet& types) const;

  bool operator==(const ConceptAnnotation&) const = default;

 private:
  CaptionRef caption_ref_;
  std::array<std::vector<LinguisticUnit>, 5> units_;
};

bool is_noun_word(const Token& t);

std::vector<LinguisticUnit> extract_noun_words(const DepTree& tree);
std::vector<LinguisticUnit> extract_verb_words(const DepTree& tree);
std::vector<LinguisticUnit> extract_entity_phrases(const DepTree& tree);
std::vector<LinguisticUnit> extract_predicate_phrases(const DepTree& tree);
std::vector<LinguisticUnit> extract_attribute_phrases(const DepTree& tree);

// Runs the extractors for `enabled`; other types stay empty.
ConceptAnnotation extract_all(const DepTree& tree,
                              const ConceptTypeSet& enabled);

}  // namespace iccc

#endif  // ICCC_EXTRACTOR_H_
