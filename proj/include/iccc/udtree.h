// Universal Dependencies trees read from CoNLL-U.
//
// Multiword-token ranges ("3-4") and empty nodes ("5.1") are dropped on read;
// everything else, including sentence comments and the raw LEMMA/XPOS/FEATS/
// DEPS/MISC columns, is kept so a tree re-serializes byte-for-byte.

#ifndef ICCC_UDTREE_H_
#define ICCC_UDTREE_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iccc/corpus.h"

namespace iccc {

enum class Upos {
  kAdj, kAdp, kAdv, kAux, kCconj, kDet, kIntj, kNoun, kNum,
  kPart, kPron, kPropn, kPunct, kSconj, kSym, kVerb, kX,
};

std::optional<Upos> parse_upos(std::string_view tag);
std::string_view upos_name(Upos upos);

// Inclusive, 1-based token range.
struct TokenSpan {
  int first = 0;
  int last = 0;

  int size() const { return last - first + 1; }
  bool contains(int index) const { return first <= index && index <= last; }
  bool overlaps(const TokenSpan& o) const {
    return first <= o.last && o.first <= last;
  }
  auto operator<=>(const TokenSpan&) const = default;
};

// Half-open byte range into a rendered caption.
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  auto operator<=>(const ByteSpan&) const = default;
};

struct Token {
  int index = 0;
  std::string form;
  std::optional<std::string> lemma;
  Upos upos = Upos::kX;
  std::string xpos = "_";
  std::string feats = "_";
  int head = 0;
  std::string deprel;
  std::string deps = "_";
  std::string misc = "_";
  bool space_after = true;

  // deprel without the language-specific subtype ("nmod:poss" -> "nmod").
  std::string_view base_deprel() const;
};

struct DepTree {
  CaptionRef caption_ref;
  std::vector<Token> tokens;  // tokens[i].index == i + 1
  std::string original_text;
  std::vector<std::string> comments;  // raw "#" lines, in input order

  int size() const { return static_cast<int>(tokens.size()); }
  const Token& at(int index) const { return tokens.at(index - 1); }
};

// Throws ValidationError describing the first violated tree invariant.
void validate_tree(const DepTree& tree);

struct ConlluRejection {
  std::size_t line = 0;  // first line of the sentence block
  std::string caption_id;
  std::string reason;
};

// Streaming reader. Malformed sentences are rejected, logged and counted;
// they never reach the caller.
class ConlluReader {
 public:
  explicit ConlluReader(std::istream& in) : in_(in) {}

  std::optional<DepTree> next();

  std::size_t accepted() const { return accepted_; }
  const std::vector<ConlluRejection>& rejections() const { return rejections_; }

 private:
  bool read_block(std::vector<std::string>& lines, std::size_t& first_line);

  std::istream& in_;
  std::size_t line_no_ = 0;
  std::size_t accepted_ = 0;
  std::size_t ordinal_ = 0;
  std::vector<ConlluRejection> rejections_;
};

struct ConlluResult {
  std::vector<DepTree> trees;
  std::vector<ConlluRejection> rejections;
};

ConlluResult read_conllu(std::istream& in);
ConlluResult read_conllu_file(const std::string& path);
ConlluResult read_conllu_string(std::string_view text);

void write_conllu(std::ostream& out, const DepTree& tree);
std::string to_conllu(const DepTree& tree);

struct SpanOverride {
  TokenSpan span;
  std::string text;
};

// Renders the token sequence, replacing each override span by its text.
// Throws std::invalid_argument on overlapping or out-of-range spans.
std::string detokenize(const DepTree& tree,
                       const std::vector<SpanOverride>& overrides = {});

// Text of the tokens inside `span`, spaced as in the caption.
std::string span_text(const DepTree& tree, const TokenSpan& span);

// Byte offsets of `span` inside detokenize(tree).
ByteSpan span_bytes(const DepTree& tree, const TokenSpan& span);

}  // namespace iccc

#endif  // ICCC_UDTREE_H_
