#include "iccc/perturb.h"

#include <algorithm>
#include <stdexcept>

#include "iccc/error.h"
#include "iccc/text.h"

namespace iccc {

std::string_view perturb_op_name(PerturbOp op) {
  return op == PerturbOp::kSwap ? "swap" : "replace";
}

std::optional<PerturbOp> parse_perturb_op(std::string_view name) {
  if (name == "replace") return PerturbOp::kReplace;
  if (name == "swap") return PerturbOp::kSwap;
  return std::nullopt;
}

PerturbOp choose_operation(const ConceptAnnotation& annotation,
                           ConceptType type, double p_s, Rng& rng) {
  const bool swap = rng.bernoulli(p_s);
  if (swap && annotation.units(type).size() >= 2) return PerturbOp::kSwap;
  return PerturbOp::kReplace;
}

Target select_target(const ConceptAnnotation& annotation,
                     const ConceptTypeSet& enabled, Rng& rng) {
  if (enabled.empty()) throw ConfigError("no concept types enabled");
  const std::size_t total = annotation.count(enabled);
  if (total == 0) throw CaptionSkipped("no units of the enabled types");
  std::size_t pick = rng.uniform(total);
  for (ConceptType type : enabled) {
    const std::size_t n = annotation.units(type).size();
    if (pick < n) return {type, pick};
    pick -= n;
  }
  throw std::logic_error("select_target: unit index out of range");
}

std::size_t choose_partner(const ConceptAnnotation& annotation,
                           const Target& target, Rng& rng) {
  const std::size_t n = annotation.units(target.type).size();
  if (n < 2) throw std::invalid_argument("choose_partner: single unit");
  std::size_t pick = rng.uniform(n - 1);
  return pick >= target.unit ? pick + 1 : pick;
}

std::string render_injected(std::string_view exemplar, const TokenSpan& span,
                            std::string_view replaced_text) {
  if (span.first != 1) return text::to_lower(exemplar);
  if (text::starts_with_upper(replaced_text))
    return text::capitalize_first(exemplar);
  return std::string(exemplar);
}

Perturbed apply_replace(const DepTree& tree, const LinguisticUnit& unit,
                        const ConceptBase& base, Rng& rng) {
  const BaseType bt = base_type_of(unit.concept_type);
  const ConceptAnnotation all = extract_all(tree, all_concept_types());
  std::vector<std::string> exclude;
  for (ConceptType t : kAllConceptTypes) {
    if (base_type_of(t) != bt) continue;
    for (const auto& u : all.units(t)) exclude.push_back(text::case_fold(u.surface));
  }
  exclude.push_back(text::case_fold(unit.surface));
  std::sort(exclude.begin(), exclude.end());
  exclude.erase(std::unique(exclude.begin(), exclude.end()), exclude.end());

  const std::string context = text::case_fold(detokenize(tree));
  const ConceptEntry& entry =
      sample_replacement(base, bt, exclude, rng, context);

  Perturbed out;
  const std::string injected =
      render_injected(entry.surface, unit.span, unit.surface);
  out.text = detokenize(tree, {{unit.span, injected}});
  out.record.op = PerturbOp::kReplace;
  out.record.concept_type = unit.concept_type;
  out.record.original_surfaces = {unit.surface};
  out.record.injected_surface = injected;
  out.record.spans = {unit.span};
  out.record.char_spans = {span_bytes(tree, unit.span)};
  return out;
}

Perturbed apply_swap(const DepTree& tree, const LinguisticUnit& unit_a,
                     const LinguisticUnit& unit_b) {
  if (unit_a.concept_type != unit_b.concept_type)
    throw std::invalid_argument("apply_swap: concept types differ");
  if (unit_a.span.overlaps(unit_b.span))
    throw std::invalid_argument("apply_swap: spans overlap");
  const LinguisticUnit& left =
      unit_a.span.first < unit_b.span.first ? unit_a : unit_b;
  const LinguisticUnit& right = &left == &unit_a ? unit_b : unit_a;
  if (text::case_fold(left.surface) == text::case_fold(right.surface))
    throw SwapDegenerate("identical surfaces '" + left.surface + "'");

  Perturbed out;
  out.text = detokenize(tree, {{left.span, right.surface},
                               {right.span, left.surface}});
  out.record.op = PerturbOp::kSwap;
  out.record.concept_type = left.concept_type;
  out.record.original_surfaces = {left.surface, right.surface};
  out.record.spans = {left.span, right.span};
  out.record.char_spans = {span_bytes(tree, left.span),
                           span_bytes(tree, right.span)};
  return out;
}

TokenVocabulary build_token_vocabulary(std::span<const DepTree> trees) {
  TokenVocabulary vocab;
  for (const auto& tree : trees)
    for (const auto& t : tree.tokens)
      if (t.upos != Upos::kPunct) vocab.push_back(text::case_fold(t.form));
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  return vocab;
}

Perturbed corrupt_random(const DepTree& tree, const TokenVocabulary& vocabulary,
                         Rng& rng) {
  std::vector<int> eligible;
  for (const auto& t : tree.tokens)
    if (t.upos != Upos::kPunct) eligible.push_back(t.index);
  if (eligible.empty())
    throw CaptionSkipped("caption has no non-punctuation token");
  const Token& victim = tree.at(eligible[rng.uniform(eligible.size())]);

  // Uniform over the vocabulary minus the victim's own form.
  const std::string own = text::case_fold(victim.form);
  auto own_it = std::lower_bound(vocabulary.begin(), vocabulary.end(), own);
  const bool own_present = own_it != vocabulary.end() && *own_it == own;
  const std::size_t choices = vocabulary.size() - (own_present ? 1 : 0);
  if (choices == 0)
    throw NoReplacementAvailable("vocabulary has no alternative word");
  std::size_t pick = rng.uniform(choices);
  if (own_present &&
      pick >= static_cast<std::size_t>(own_it - vocabulary.begin()))
    ++pick;

  const TokenSpan span{victim.index, victim.index};
  Perturbed out;
  const std::string injected =
      render_injected(vocabulary[pick], span, victim.form);
  out.text = detokenize(tree, {{span, injected}});
  out.record.op = PerturbOp::kReplace;
  out.record.original_surfaces = {victim.form};
  out.record.injected_surface = injected;
  out.record.spans = {span};
  out.record.char_spans = {span_bytes(tree, span)};
  return out;
}

std::vector<std::string> answer_values(const PerturbationRecord& record) {
  if (record.op == PerturbOp::kReplace)
    return {record.injected_surface, record.original_surfaces.at(0)};
  return {record.original_surfaces.at(1), record.original_surfaces.at(0)};
}

IcccSample render_sample(const ImageRef& image,
                         const std::string& original_text,
                         const std::string& mismatched_text,
                         const PerturbationRecord& record,
                         const TemplateSet& templates, Rng& rng) {
  IcccSample s;
  s.image = image;
  s.original_caption = original_text;
  s.mismatched_caption = mismatched_text;
  s.perturbation = record;
  s.instruction_template = rng.uniform(templates.instructions.size());
  s.instruction = fill_template(templates.instructions[s.instruction_template],
                                {mismatched_text});
  const auto& answers = record.op == PerturbOp::kReplace
                            ? templates.replace_answers
                            : templates.swap_answers;
  s.answer_template = rng.uniform(answers.size());
  s.answer = fill_template(answers[s.answer_template], answer_values(record));
  return s;
}

std::string replay_perturbation(std::string_view original_text,
                                const PerturbationRecord& record) {
  std::vector<std::pair<ByteSpan, std::string>> edits;
  if (record.op == PerturbOp::kReplace) {
    edits.emplace_back(record.char_spans.at(0), record.injected_surface);
  } else {
    edits.emplace_back(record.char_spans.at(0), record.original_surfaces.at(1));
    edits.emplace_back(record.char_spans.at(1), record.original_surfaces.at(0));
  }
  std::string out;
  std::size_t pos = 0;
  for (const auto& [span, replacement] : edits) {
    if (span.begin < pos || span.end < span.begin ||
        span.end > original_text.size())
      throw std::invalid_argument("replay: bad byte span");
    out.append(original_text.substr(pos, span.begin - pos));
    out += replacement;
    pos = span.end;
  }
  out.append(original_text.substr(pos));
  return out;
}

}  // namespace iccc
