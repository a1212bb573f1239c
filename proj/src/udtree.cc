#include "iccc/udtree.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "iccc/error.h"

namespace iccc {
namespace {

constexpr std::array<std::pair<std::string_view, Upos>, 17> kUposNames = {{
    {"ADJ", Upos::kAdj},     {"ADP", Upos::kAdp},     {"ADV", Upos::kAdv},
    {"AUX", Upos::kAux},     {"CCONJ", Upos::kCconj}, {"DET", Upos::kDet},
    {"INTJ", Upos::kIntj},   {"NOUN", Upos::kNoun},   {"NUM", Upos::kNum},
    {"PART", Upos::kPart},   {"PRON", Upos::kPron},   {"PROPN", Upos::kPropn},
    {"PUNCT", Upos::kPunct}, {"SCONJ", Upos::kSconj}, {"SYM", Upos::kSym},
    {"VERB", Upos::kVerb},   {"X", Upos::kX},
}};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool has_space_after_no(std::string_view misc) {
  for (auto item : split(misc, '|'))
    if (item == "SpaceAfter=No") return true;
  return false;
}

// "# key = value" -> value, if the comment carries that key.
std::optional<std::string> comment_value(std::string_view line,
                                         std::string_view key) {
  std::string_view rest = line.substr(1);
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  if (rest.substr(0, key.size()) != key) return std::nullopt;
  rest.remove_prefix(key.size());
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  if (rest.empty() || rest.front() != '=') return std::nullopt;
  rest.remove_prefix(1);
  if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  return std::string(rest);
}

struct Rejected {
  std::string reason;
};

Token parse_token(const std::vector<std::string_view>& cols, int index) {
  Token t;
  t.index = index;
  t.form = std::string(cols[1]);
  if (cols[2] != "_") t.lemma = std::string(cols[2]);
  auto upos = parse_upos(cols[3]);
  if (!upos) throw Rejected{"unknown UPOS '" + std::string(cols[3]) + "'"};
  t.upos = *upos;
  t.xpos = std::string(cols[4]);
  t.feats = std::string(cols[5]);
  auto head = parse_int(cols[6]);
  if (!head) throw Rejected{"bad HEAD '" + std::string(cols[6]) + "'"};
  t.head = *head;
  t.deprel = std::string(cols[7]);
  t.deps = std::string(cols[8]);
  t.misc = std::string(cols[9]);
  t.space_after = !has_space_after_no(t.misc);
  return t;
}

}  // namespace

std::optional<Upos> parse_upos(std::string_view tag) {
  for (const auto& [name, value] : kUposNames)
    if (name == tag) return value;
  return std::nullopt;
}

std::string_view upos_name(Upos upos) {
  for (const auto& [name, value] : kUposNames)
    if (value == upos) return name;
  return "X";
}

std::string_view Token::base_deprel() const {
  std::string_view d = deprel;
  return d.substr(0, d.find(':'));
}

void validate_tree(const DepTree& tree) {
  const int n = tree.size();
  if (n == 0) throw ValidationError("empty sentence");
  int roots = 0;
  for (int i = 1; i <= n; ++i) {
    const Token& t = tree.at(i);
    if (t.index != i) throw ValidationError("token indices not contiguous");
    if (t.form.empty()) throw ValidationError("empty FORM at token " +
                                              std::to_string(i));
    if (t.head < 0 || t.head > n)
      throw ValidationError("HEAD out of range at token " + std::to_string(i));
    if (t.head == i)
      throw ValidationError("token " + std::to_string(i) + " heads itself");
    if (t.deprel.empty() || t.deprel == "_")
      throw ValidationError("missing DEPREL at token " + std::to_string(i));
    if (t.head == 0) ++roots;
  }
  if (roots != 1)
    throw ValidationError("expected one root, found " + std::to_string(roots));
  // Each walk toward the root must terminate within n steps.
  for (int i = 1; i <= n; ++i) {
    int node = i;
    for (int steps = 0; node != 0; ++steps) {
      if (steps > n)
        throw ValidationError("cycle through token " + std::to_string(i));
      node = tree.at(node).head;
    }
  }
}

bool ConlluReader::read_block(std::vector<std::string>& lines,
                              std::size_t& first_line) {
  lines.clear();
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (lines.empty()) continue;
      return true;
    }
    if (lines.empty()) first_line = line_no_;
    lines.push_back(std::move(line));
  }
  return !lines.empty();
}

std::optional<DepTree> ConlluReader::next() {
  std::vector<std::string> lines;
  std::size_t first_line = 0;
  while (read_block(lines, first_line)) {
    ++ordinal_;
    DepTree tree;
    std::optional<std::string> sent_id, text_comment;
    try {
      for (const auto& line : lines) {
        if (line[0] == '#') {
          tree.comments.push_back(line);
          if (auto v = comment_value(line, "caption_id"))
            tree.caption_ref.caption_id = *v;
          else if (auto v = comment_value(line, "dataset"))
            tree.caption_ref.dataset = *v;
          else if (auto v = comment_value(line, "sent_id"))
            sent_id = *v;
          else if (auto v = comment_value(line, "text"))
            text_comment = *v;
          continue;
        }
        auto cols = split(line, '\t');
        if (cols.size() != 10)
          throw Rejected{"expected 10 columns, found " +
                         std::to_string(cols.size())};
        if (cols[0].find_first_of("-.") != std::string_view::npos) continue;
        auto id = parse_int(cols[0]);
        if (!id) throw Rejected{"bad ID '" + std::string(cols[0]) + "'"};
        if (*id != tree.size() + 1)
          throw Rejected{"token indices not contiguous at ID " +
                         std::string(cols[0])};
        tree.tokens.push_back(parse_token(cols, *id));
      }
      if (tree.caption_ref.caption_id.empty())
        tree.caption_ref.caption_id =
            sent_id ? *sent_id : "s" + std::to_string(ordinal_);
      if (tree.tokens.empty()) {
        // Comment-only block (file header).
        if (std::all_of(lines.begin(), lines.end(),
                        [](const auto& l) { return l[0] == '#'; }))
          continue;
      }
      validate_tree(tree);
    } catch (const Rejected& r) {
      spdlog::warn("conllu line {}: sentence {} rejected: {}", first_line,
                   tree.caption_ref.caption_id, r.reason);
      rejections_.push_back({first_line, tree.caption_ref.caption_id,
                             r.reason});
      continue;
    } catch (const ValidationError& e) {
      if (tree.caption_ref.caption_id.empty())
        tree.caption_ref.caption_id =
            sent_id ? *sent_id : "s" + std::to_string(ordinal_);
      spdlog::warn("conllu line {}: sentence {} rejected: {}", first_line,
                   tree.caption_ref.caption_id, e.what());
      rejections_.push_back({first_line, tree.caption_ref.caption_id,
                             e.what()});
      continue;
    }
    tree.original_text = text_comment ? *text_comment : detokenize(tree);
    ++accepted_;
    return tree;
  }
  return std::nullopt;
}

ConlluResult read_conllu(std::istream& in) {
  ConlluReader reader(in);
  ConlluResult result;
  while (auto tree = reader.next()) result.trees.push_back(std::move(*tree));
  result.rejections = reader.rejections();
  return result;
}

ConlluResult read_conllu_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_conllu(in);
}

ConlluResult read_conllu_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_conllu(in);
}

void write_conllu(std::ostream& out, const DepTree& tree) {
  for (const auto& c : tree.comments) out << c << '\n';
  for (const auto& t : tree.tokens) {
    out << t.index << '\t' << t.form << '\t' << (t.lemma ? *t.lemma : "_")
        << '\t' << upos_name(t.upos) << '\t' << t.xpos << '\t' << t.feats
        << '\t' << t.head << '\t' << t.deprel << '\t' << t.deps << '\t'
        << t.misc << '\n';
  }
  out << '\n';
}

std::string to_conllu(const DepTree& tree) {
  std::ostringstream out;
  write_conllu(out, tree);
  return out.str();
}

std::string detokenize(const DepTree& tree,
                       const std::vector<SpanOverride>& overrides) {
  const int n = tree.size();
  std::vector<const SpanOverride*> by_start(n + 2, nullptr);
  std::vector<TokenSpan> spans;
  for (const auto& o : overrides) {
    if (o.span.first < 1 || o.span.last > n || o.span.first > o.span.last)
      throw std::invalid_argument("override span out of range");
    spans.push_back(o.span);
    by_start[o.span.first] = &o;
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i)
    if (spans[i - 1].overlaps(spans[i]))
      throw std::invalid_argument("overlapping override spans");

  std::string out;
  for (int i = 1; i <= n;) {
    int last = i;
    if (const SpanOverride* o = by_start[i]) {
      out += o->text;
      last = o->span.last;
    } else {
      out += tree.at(i).form;
    }
    if (last < n && tree.at(last).space_after) out += ' ';
    i = last + 1;
  }
  return out;
}

std::string span_text(const DepTree& tree, const TokenSpan& span) {
  std::string out;
  for (int i = span.first; i <= span.last; ++i) {
    out += tree.at(i).form;
    if (i < span.last && tree.at(i).space_after) out += ' ';
  }
  return out;
}

ByteSpan span_bytes(const DepTree& tree, const TokenSpan& span) {
  std::size_t pos = 0;
  ByteSpan result;
  for (int i = 1; i <= span.last; ++i) {
    const Token& t = tree.at(i);
    if (i == span.first) result.begin = pos;
    pos += t.form.size();
    if (i == span.last) {
      result.end = pos;
      break;
    }
    if (t.space_after) ++pos;
  }
  return result;
}

}  // namespace iccc
