#include "iccc/corpus.h"

#include <sstream>

#include <gtest/gtest.h>

#include "iccc/error.h"
#include "unit/test_util.h"

namespace iccc {
namespace {

TEST(IngestCoco, ReadsFixture) {
  IngestResult r = ingest_coco(testing::data_path("coco_sample.json"));
  ASSERT_EQ(r.records.size(), 25u);
  EXPECT_EQ(r.report.records, 25u);
  EXPECT_EQ(r.report.total_skipped(), 0u);
  EXPECT_EQ(r.records[0].dataset_tag, "coco");
  EXPECT_EQ(r.records[0].image_id, "5000");
  EXPECT_EQ(r.records[0].caption_id, "100000");
}

TEST(IngestCoco, SkipsBadEntriesWithReasons) {
  std::istringstream in(R"({"annotations": [
    {"image_id": 1, "id": 10, "caption": "  A dog   runs. "},
    {"image_id": 1, "caption": "no id"},
    {"image_id": 1, "id": 11, "caption": 5},
    {"image_id": 1, "id": 12, "caption": "   "},
    {"image_id": 2, "id": "13", "caption": "A cat."}
  ]})");
  IngestResult r = ingest_coco(in);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].text, "A dog runs.");
  EXPECT_EQ(r.records[1].caption_id, "13");
  EXPECT_EQ(r.report.skipped.at("missing_key"), 1u);
  EXPECT_EQ(r.report.skipped.at("bad_type"), 1u);
  EXPECT_EQ(r.report.skipped.at("empty_caption"), 1u);
}

TEST(Ingest, InvalidUtf8) {
  const std::string bad = "{\"image_id\": 1, \"id\": 1, \"caption\": \"\xff\"}";
  std::istringstream coco("{\"annotations\": [" + bad + "]}");
  EXPECT_THROW(ingest_coco(coco), ParseError);
  std::istringstream jsonl(
      "{\"image_id\": 1, \"caption_id\": 2, \"caption\": \"ok\"}\n" + bad + "\n");
  IngestResult r = ingest_jsonl(jsonl);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.report.total_skipped(), 1u);
}

TEST(IngestCoco, MalformedJsonReportsOffset) {
  std::istringstream in(R"({"annotations": [ {"image_id": 1,, } ]})");
  try {
    ingest_coco(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.byte_offset(), 0u);
  }
  std::istringstream no_array(R"({"images": []})");
  EXPECT_THROW(ingest_coco(no_array), ParseError);
}

TEST(IngestCoco, DuplicateCaptionIdIsFatal) {
  std::istringstream in(R"({"annotations": [
    {"image_id": 1, "id": 10, "caption": "a"},
    {"image_id": 2, "id": 10, "caption": "b"}]})");
  EXPECT_THROW(ingest_coco(in), DuplicateRecordError);
}

TEST(IngestJsonl, DatasetDefaultAndUnparseableLines) {
  std::istringstream in(
      "{\"image_id\": \"i1\", \"caption_id\": \"c1\", \"caption\": \"A dog.\"}\n"
      "\n"
      "not json\n"
      "{\"image_id\": \"i2\", \"caption_id\": \"c1\", \"caption\": \"x\", "
      "\"dataset\": \"vg\"}\n");
  IngestResult r = ingest_jsonl(in);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].dataset_tag, "jsonl");
  EXPECT_EQ(r.records[1].dataset_tag, "vg");
  EXPECT_EQ(r.report.skipped.at("unparseable"), 1u);
}

TEST(IngestJsonl, MiniCorpus) {
  IngestResult r = ingest_jsonl(testing::data_path("minicorpus.jsonl"));
  EXPECT_EQ(r.records.size(), 1000u);
  EXPECT_NO_THROW(validate_records(r.records));
}

TEST(Records, RoundTrip) {
  std::vector<CaptionRecord> records = {
      {"coco", "1", "10", "A dog \"quoted\" runs."},
      {"vg", "2", "10", "caf\xc3\xa9 table"}};
  std::stringstream buf;
  write_records(buf, records);
  EXPECT_EQ(read_records(buf), records);
}

TEST(Records, ValidateRejectsDuplicatesAndEmptyFields) {
  EXPECT_THROW(validate_records({{"coco", "1", "10", "a"}, {"coco", "2", "10", "b"}}),
               ValidationError);
  EXPECT_THROW(validate_records({{"coco", "1", "", "a"}}), ValidationError);
  EXPECT_THROW(validate_records({{"coco", "1", "2", ""}}), ValidationError);
  EXPECT_NO_THROW(validate_records({{"coco", "1", "10", "a"}, {"vg", "2", "10", "b"}}));
}

TEST(Records, MalformedLineIsParseError) {
  std::istringstream in("{\"dataset\": \"coco\"}\n");
  EXPECT_THROW(read_records(in), ParseError);
}

}  // namespace
}  // namespace iccc
