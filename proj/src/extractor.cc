#include "iccc/extractor.h"

#include <algorithm>

#include "iccc/error.h"

namespace iccc {
namespace {

constexpr std::array<std::string_view, 5> kTypeNames = {"ent", "pred", "attr",
                                                        "noun", "verb"};

LinguisticUnit make_unit(const DepTree& tree, ConceptType type, TokenSpan span,
                         int head) {
  return {type, span, head, span_text(tree, span)};
}

bool is_entity_modifier(const Token& t) {
  return t.upos == Upos::kDet || t.upos == Upos::kAdj || t.upos == Upos::kNum;
}

bool is_predicate_content(const Token& t) {
  return t.upos == Upos::kVerb || t.upos == Upos::kAdp || t.upos == Upos::kAux;
}

TokenSpan entity_span(const DepTree& tree, int noun) {
  int first = noun;
  while (first > 1) {
    const Token& left = tree.at(first - 1);
    if (!is_entity_modifier(left) || left.head != noun) break;
    --first;
  }
  return {first, noun};
}

std::vector<int> noun_heads(const DepTree& tree) {
  std::vector<int> heads;
  for (const auto& t : tree.tokens)
    if (is_noun_word(t)) heads.push_back(t.index);
  return heads;
}

}  // namespace

std::string_view concept_type_name(ConceptType type) {
  return kTypeNames[static_cast<std::size_t>(type)];
}

std::optional<ConceptType> parse_concept_type(std::string_view name) {
  for (ConceptType t : kAllConceptTypes)
    if (concept_type_name(t) == name) return t;
  return std::nullopt;
}

ConceptTypeSet parse_concept_types(std::string_view list) {
  ConceptTypeSet types;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t comma = list.find(',', start);
    if (comma == std::string_view::npos) comma = list.size();
    std::string_view name = list.substr(start, comma - start);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (!name.empty()) {
      auto type = parse_concept_type(name);
      if (!type)
        throw ConfigError("unknown concept type '" + std::string(name) +
                          "' (expected noun, verb, ent, pred, attr)");
      types.insert(*type);
    }
    start = comma + 1;
  }
  if (types.empty()) throw ConfigError("concept type set is empty");
  return types;
}

ConceptTypeSet all_concept_types() {
  return {kAllConceptTypes.begin(), kAllConceptTypes.end()};
}

std::size_t ConceptAnnotation::total_units() const {
  std::size_t n = 0;
  for (const auto& u : units_) n += u.size();
  return n;
}

std::size_t ConceptAnnotation::count(const ConceptTypeSet& types) const {
  std::size_t n = 0;
  for (ConceptType t : types) n += units(t).size();
  return n;
}

bool is_noun_word(const Token& t) {
  return t.upos == Upos::kNoun || t.upos == Upos::kPropn;
}

std::vector<LinguisticUnit> extract_noun_words(const DepTree& tree) {
  std::vector<LinguisticUnit> units;
  for (int h : noun_heads(tree))
    units.push_back(make_unit(tree, ConceptType::kNounWord, {h, h}, h));
  return units;
}

std::vector<LinguisticUnit> extract_verb_words(const DepTree& tree) {
  std::vector<LinguisticUnit> units;
  for (const auto& t : tree.tokens) {
    if (t.upos != Upos::kVerb) continue;
    units.push_back(
        make_unit(tree, ConceptType::kVerbWord, {t.index, t.index}, t.index));
  }
  return units;
}

std::vector<LinguisticUnit> extract_entity_phrases(const DepTree& tree) {
  std::vector<LinguisticUnit> units;
  for (int h : noun_heads(tree))
    units.push_back(
        make_unit(tree, ConceptType::kEntityPhrase, entity_span(tree, h), h));
  return units;
}

std::vector<LinguisticUnit> extract_predicate_phrases(const DepTree& tree) {
  std::vector<LinguisticUnit> units;
  const auto heads = noun_heads(tree);
  for (std::size_t i = 0; i + 1 < heads.size(); ++i) {
    const int first = heads[i] + 1;
    const int last = entity_span(tree, heads[i + 1]).first - 1;
    if (first > last) continue;
    bool has_content = false;
    int verb = 0;
    for (int k = first; k <= last; ++k) {
      const Token& t = tree.at(k);
      has_content = has_content || is_predicate_content(t);
      if (verb == 0 && t.upos == Upos::kVerb) verb = k;
    }
    if (!has_content) continue;
    // Head: the first verb if any, else the first content token.
    int head = verb;
    for (int k = first; head == 0 && k <= last; ++k)
      if (is_predicate_content(tree.at(k))) head = k;
    units.push_back(
        make_unit(tree, ConceptType::kPredicatePhrase, {first, last}, head));
  }
  return units;
}

std::vector<LinguisticUnit> extract_attribute_phrases(const DepTree& tree) {
  std::vector<LinguisticUnit> units;
  for (const auto& t : tree.tokens) {
    if (t.base_deprel() != "amod" || t.head == 0) continue;
    if (!is_noun_word(tree.at(t.head))) continue;
    const int adj = t.index;
    auto is_adverb_of_adj = [&](int k) {
      const Token& m = tree.at(k);
      return m.head == adj && m.base_deprel() == "advmod";
    };
    int first = adj;
    while (first > 1 && is_adverb_of_adj(first - 1)) --first;
    int last = adj;
    while (last < tree.size() && is_adverb_of_adj(last + 1)) ++last;
    units.push_back(
        make_unit(tree, ConceptType::kAttributePhrase, {first, last}, adj));
  }
  return units;
}

ConceptAnnotation extract_all(const DepTree& tree,
                              const ConceptTypeSet& enabled) {
  ConceptAnnotation annotation(tree.caption_ref);
  for (ConceptType type : enabled) {
    switch (type) {
      case ConceptType::kNounWord:
        annotation.set_units(type, extract_noun_words(tree));
        break;
      case ConceptType::kVerbWord:
        annotation.set_units(type, extract_verb_words(tree));
        break;
      case ConceptType::kEntityPhrase:
        annotation.set_units(type, extract_entity_phrases(tree));
        break;
      case ConceptType::kPredicatePhrase:
        annotation.set_units(type, extract_predicate_phrases(tree));
        break;
      case ConceptType::kAttributePhrase:
        annotation.set_units(type, extract_attribute_phrases(tree));
        break;
    }
  }
  return annotation;
}

}  // namespace iccc
