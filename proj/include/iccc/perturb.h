// Replace/swap perturbations and correction-sample rendering.

#ifndef ICCC_PERTURB_H_
#define ICCC_PERTURB_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iccc/conceptbase.h"
#include "iccc/extractor.h"
#include "iccc/rng.h"
#include "iccc/templates.h"
#include "iccc/udtree.h"

namespace iccc {

enum class PerturbOp { kReplace, kSwap };

std::string_view perturb_op_name(PerturbOp op);
std::optional<PerturbOp> parse_perturb_op(std::string_view name);

struct PerturbationRecord {
  PerturbOp op = PerturbOp::kReplace;
  // Empty for the structure-blind random-word baseline.
  std::optional<ConceptType> concept_type;
  // One surface for replace, two for swap, in original surface order.
  std::vector<std::string> original_surfaces;
  std::string injected_surface;  // replace only
  std::vector<TokenSpan> spans;
  // Byte ranges of `spans` inside the unperturbed caption.
  std::vector<ByteSpan> char_spans;

  bool operator==(const PerturbationRecord&) const = default;
};

struct Perturbed {
  std::string text;
  PerturbationRecord record;
};

struct ImageRef {
  std::string dataset;
  std::string image_id;
  bool operator==(const ImageRef&) const = default;
};

struct SeedPath {
  std::uint64_t seed = 0;
  std::string caption_id;
  std::uint32_t sample_index = 0;
  bool operator==(const SeedPath&) const = default;
};

struct IcccSample {
  ImageRef image;
  std::string caption_id;
  std::string original_caption;
  std::string instruction;
  std::string mismatched_caption;
  std::string answer;
  PerturbationRecord perturbation;
  std::size_t instruction_template = 0;
  std::size_t answer_template = 0;
  SeedPath seed_path;
  // The selected concept type had at least two units in the caption.
  bool swap_feasible = false;

  bool operator==(const IcccSample&) const = default;
};

// Swap with probability p_s, falling back to replace when the caption has
// fewer than two units of `type`. Always consumes one draw.
PerturbOp choose_operation(const ConceptAnnotation& annotation,
                           ConceptType type, double p_s, Rng& rng);

struct Target {
  ConceptType type;
  std::size_t unit;  // index into annotation.units(type)
};

// Uniform over all units of the enabled types. Throws ConfigError for an
// empty `enabled` and CaptionSkipped when no unit qualifies.
Target select_target(const ConceptAnnotation& annotation,
                     const ConceptTypeSet& enabled, Rng& rng);

// Uniform over the other units of the target's type.
std::size_t choose_partner(const ConceptAnnotation& annotation,
                           const Target& target, Rng& rng);

// Casing for an injected surface: lowercase unless the span opens the
// caption, in which case the exemplar is kept and capitalized if the
// replaced text was.
std::string render_injected(std::string_view exemplar,
                            const TokenSpan& span,
                            std::string_view replaced_text);

// Replaces `unit` with a concept of the same base type that does not occur in
// the caption. Throws NoReplacementAvailable.
Perturbed apply_replace(const DepTree& tree, const LinguisticUnit& unit,
                        const ConceptBase& base, Rng& rng);

// Exchanges two same-type units. Throws SwapDegenerate when their surfaces
// fold to the same text and std::invalid_argument on a type mismatch or
// overlapping spans.
Perturbed apply_swap(const DepTree& tree, const LinguisticUnit& unit_a,
                     const LinguisticUnit& unit_b);

// Distinct case-folded forms of non-punctuation tokens, sorted.
using TokenVocabulary = std::vector<std::string>;
TokenVocabulary build_token_vocabulary(std::span<const DepTree> trees);

// Random-word baseline: one uniformly chosen non-punctuation token is
// replaced by a different vocabulary word. Throws CaptionSkipped when the
// caption has no eligible token and NoReplacementAvailable when the
// vocabulary offers no alternative.
Perturbed corrupt_random(const DepTree& tree, const TokenVocabulary& vocabulary,
                         Rng& rng);

// Fills the instruction and answer templates. image/seed fields of the
// returned sample other than those passed in are left default.
IcccSample render_sample(const ImageRef& image,
                         const std::string& original_text,
                         const std::string& mismatched_text,
                         const PerturbationRecord& record,
                         const TemplateSet& templates, Rng& rng);

// Texts filling the answer template: (injected, original) for replace and
// the post-swap order for swap.
std::vector<std::string> answer_values(const PerturbationRecord& record);

// Re-applies `record` to `original_text` using its byte spans.
std::string replay_perturbation(std::string_view original_text,
                                const PerturbationRecord& record);

}  // namespace iccc

#endif  // ICCC_PERTURB_H_
