#include "iccc/udtree.h"

#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "iccc/error.h"
#include "unit/test_util.h"

namespace iccc {
namespace {

constexpr char kDog[] =
    "# caption_id = c1\n"
    "# dataset = coco\n"
    "# text = A dog, running.\n"
    "1\tA\ta\tDET\t_\t_\t2\tdet\t_\t_\n"
    "2\tdog\tdog\tNOUN\t_\t_\t0\troot\t_\tSpaceAfter=No\n"
    "3\t,\t,\tPUNCT\t_\t_\t4\tpunct\t_\t_\n"
    "4\trunning\trun\tVERB\t_\t_\t2\tacl\t_\tSpaceAfter=No\n"
    "5\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_\n"
    "\n";

TEST(ReadConllu, ParsesFieldsAndComments) {
  ConlluResult r = read_conllu_string(kDog);
  ASSERT_EQ(r.trees.size(), 1u);
  ASSERT_TRUE(r.rejections.empty());
  const DepTree& t = r.trees[0];
  EXPECT_EQ(t.caption_ref.caption_id, "c1");
  EXPECT_EQ(t.caption_ref.dataset, "coco");
  EXPECT_EQ(t.original_text, "A dog, running.");
  ASSERT_EQ(t.size(), 5);
  EXPECT_EQ(t.at(2).form, "dog");
  EXPECT_EQ(t.at(2).upos, Upos::kNoun);
  EXPECT_EQ(t.at(2).head, 0);
  EXPECT_FALSE(t.at(2).space_after);
  EXPECT_TRUE(t.at(3).space_after);
  EXPECT_EQ(t.at(4).lemma, "run");
  EXPECT_EQ(detokenize(t), "A dog, running.");
}

TEST(ReadConllu, SkipsMultiwordAndEmptyNodes) {
  const char* text =
      "# sent_id = s9\n"
      "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n"
      "2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_\n"
      "3\tgo\tgo\tVERB\t_\t_\t0\troot\t_\t_\n"
      "3.1\tgo\tgo\tVERB\t_\t_\t_\t_\t3:conj\t_\n"
      "\n";
  ConlluResult r = read_conllu_string(text);
  ASSERT_EQ(r.trees.size(), 1u);
  EXPECT_EQ(r.trees[0].size(), 3);
  EXPECT_EQ(r.trees[0].caption_ref.caption_id, "s9");
}

TEST(ReadConllu, FallsBackToOrdinalId) {
  const char* text =
      "1\tdogs\tdog\tNOUN\t_\t_\t0\troot\t_\t_\n\n"
      "1\tcats\tcat\tNOUN\t_\t_\t0\troot\t_\t_\n";
  ConlluResult r = read_conllu_string(text);
  ASSERT_EQ(r.trees.size(), 2u);
  EXPECT_NE(r.trees[0].caption_ref.caption_id, r.trees[1].caption_ref.caption_id);
  EXPECT_FALSE(r.trees[1].caption_ref.caption_id.empty());
}

TEST(ReadConllu, BrokenFixtureRejectsStructuralErrors) {
  ConlluResult r = read_conllu_file(testing::data_path("broken.conllu").string());
  std::set<std::string> accepted, rejected;
  for (const auto& t : r.trees) accepted.insert(t.caption_ref.caption_id);
  for (const auto& x : r.rejections) rejected.insert(x.caption_id);
  EXPECT_EQ(accepted, (std::set<std::string>{"b01", "b07"}));
  EXPECT_EQ(rejected, (std::set<std::string>{"b02", "b03", "b04", "b05", "b06"}));
  for (const auto& x : r.rejections) {
    EXPECT_GT(x.line, 0u);
    EXPECT_FALSE(x.reason.empty());
  }
}

TEST(ReadConllu, EmptyInput) {
  ConlluResult r = read_conllu_string("");
  EXPECT_TRUE(r.trees.empty());
  EXPECT_TRUE(r.rejections.empty());
}

TEST(ValidateTree, DetectsEachDefect) {
  DepTree t = read_conllu_string(kDog).trees.at(0);
  EXPECT_NO_THROW(validate_tree(t));
  DepTree two_roots = t;
  two_roots.tokens[3].head = 0;
  EXPECT_THROW(validate_tree(two_roots), ValidationError);
  DepTree cycle = t;
  cycle.tokens[1].head = 4;  // dog -> running -> dog
  cycle.tokens[3].head = 2;
  cycle.tokens[0].head = 0;
  EXPECT_THROW(validate_tree(cycle), ValidationError);
  DepTree out_of_range = t;
  out_of_range.tokens[4].head = 9;
  EXPECT_THROW(validate_tree(out_of_range), ValidationError);
  DepTree self = t;
  self.tokens[4].head = 5;
  EXPECT_THROW(validate_tree(self), ValidationError);
}

TEST(WriteConllu, RoundTrips) {
  const DepTree t = read_conllu_string(kDog).trees.at(0);
  const std::string text = to_conllu(t);
  const DepTree back = read_conllu_string(text).trees.at(0);
  EXPECT_EQ(to_conllu(back), text);
  EXPECT_EQ(detokenize(back), detokenize(t));
  EXPECT_EQ(back.caption_ref, t.caption_ref);
}

TEST(Detokenize, OverridesSpliceSpans) {
  const DepTree t = read_conllu_string(kDog).trees.at(0);
  EXPECT_EQ(detokenize(t, {{{2, 2}, "cat"}}), "A cat, running.");
  EXPECT_EQ(detokenize(t, {{{1, 2}, "The old cat"}}), "The old cat, running.");
  // The override inherits the spacing after the span's last token.
  EXPECT_EQ(detokenize(t, {{{4, 4}, "asleep"}}), "A dog, asleep.");
  EXPECT_EQ(detokenize(t, {{{4, 4}, "asleep"}, {{2, 2}, "cat"}}),
            "A cat, asleep.");
  EXPECT_THROW(detokenize(t, {{{1, 2}, "x"}, {{2, 3}, "y"}}),
               std::invalid_argument);
  EXPECT_THROW(detokenize(t, {{{5, 6}, "x"}}), std::invalid_argument);
}

TEST(Detokenize, SpanTextAndBytes) {
  const DepTree t = read_conllu_string(kDog).trees.at(0);
  EXPECT_EQ(span_text(t, {1, 2}), "A dog");
  EXPECT_EQ(span_text(t, {2, 4}), "dog, running");
  const std::string text = detokenize(t);
  for (TokenSpan s : {TokenSpan{1, 1}, TokenSpan{2, 4}, TokenSpan{5, 5}}) {
    const ByteSpan b = span_bytes(t, s);
    EXPECT_EQ(text.substr(b.begin, b.end - b.begin), span_text(t, s));
  }
}

TEST(Detokenize, MiniCorpusMatchesTextComments) {
  ConlluResult r =
      read_conllu_file(testing::data_path("minicorpus.conllu").string());
  ASSERT_EQ(r.trees.size(), 1000u);
  EXPECT_TRUE(r.rejections.empty());
  for (const auto& t : r.trees) ASSERT_EQ(detokenize(t), t.original_text);
}

TEST(Upos, NamesRoundTrip) {
  for (const char* tag : {"ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ",
                          "NOUN", "NUM", "PART", "PRON", "PROPN", "PUNCT",
                          "SCONJ", "SYM", "VERB", "X"}) {
    auto u = parse_upos(tag);
    ASSERT_TRUE(u.has_value()) << tag;
    EXPECT_EQ(upos_name(*u), tag);
  }
  EXPECT_FALSE(parse_upos("NN").has_value());
}

TEST(Token, BaseDeprelStripsSubtype) {
  Token t;
  t.deprel = "nmod:poss";
  EXPECT_EQ(t.base_deprel(), "nmod");
  t.deprel = "amod";
  EXPECT_EQ(t.base_deprel(), "amod");
}

}  // namespace
}  // namespace iccc
