#include <gtest/gtest.h>

#include <json.hpp>
#include <random>

#include "test_util.hpp"
#include "wfpp/corpus_io.hpp"
#include "wfpp/error.hpp"

using namespace wfpp;
using wfpp::testing::read_file;
using wfpp::testing::TempDir;
using wfpp::testing::write_file;

TEST(CorpusIo, ParsesJsonlLine) {
  std::string reason;
  auto r = parse_manifest_line(R"({"image":"img/1.jpg","text":"a dog"})", ManifestFormat::jsonl, 0, reason);
  ASSERT_TRUE(r);
  EXPECT_EQ(*r, (PairRecord{0, "img/1.jpg", "a dog"}));
}

TEST(CorpusIo, ParsesTsvLine) {
  std::string reason;
  auto r = parse_manifest_line("img/2.jpg\ta cat", ManifestFormat::tsv, 0, reason);
  ASSERT_TRUE(r);
  EXPECT_EQ(*r, (PairRecord{0, "img/2.jpg", "a cat"}));
}

TEST(CorpusIo, MalformedLinesAreSkippedButConsumeAnIndex) {
  TempDir dir;
  write_file(dir / "m.jsonl",
             "not json\n"
             "{\"image\":\"b.jpg\",\"text\":\"second\"}\n"
             "{\"image\":\"c.jpg\",\"text\":\"third\"}\n");
  SkipReport report;
  auto records = read_manifest(dir / "m.jsonl", ManifestFormat::jsonl, &report);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0], (PairRecord{1, "b.jpg", "second"}));
  EXPECT_EQ(records[1], (PairRecord{2, "c.jpg", "third"}));
  ASSERT_EQ(report.skipped.size(), 1u);
  EXPECT_EQ(report.skipped[0].line, 1u);
  EXPECT_EQ(report.total_lines, 3u);
}

TEST(CorpusIo, JsonlFieldErrors) {
  std::string reason;
  EXPECT_FALSE(parse_manifest_line("[1,2]", ManifestFormat::jsonl, 0, reason));
  EXPECT_FALSE(parse_manifest_line(R"({"image":"a"})", ManifestFormat::jsonl, 0, reason));
  EXPECT_FALSE(parse_manifest_line(R"({"image":3,"text":"x"})", ManifestFormat::jsonl, 0, reason));
  EXPECT_FALSE(parse_manifest_line(R"({"text":5})", ManifestFormat::jsonl, 0, reason));
  auto ok = parse_manifest_line(R"({"text":"","extra":1})", ManifestFormat::jsonl, 4, reason);
  ASSERT_TRUE(ok);
  EXPECT_EQ(*ok, (PairRecord{4, "", ""}));
}

TEST(CorpusIo, TsvFieldErrors) {
  std::string reason;
  EXPECT_FALSE(parse_manifest_line("no tab here", ManifestFormat::tsv, 0, reason));
  EXPECT_FALSE(parse_manifest_line("a\tb\tc", ManifestFormat::tsv, 0, reason));
  EXPECT_TRUE(parse_manifest_line("\t", ManifestFormat::tsv, 0, reason));
}

TEST(CorpusIo, SkipReportJson) {
  SkipReport report{{{1, "invalid JSON"}}, 3};
  std::ostringstream out;
  write_skip_report(report, out);
  auto doc = nlohmann::json::parse(out.str());
  EXPECT_EQ(doc["total_lines"], 3);
  EXPECT_EQ(doc["skipped"][0]["line"], 1);
  EXPECT_EQ(doc["skipped"][0]["reason"], "invalid JSON");
}

TEST(CorpusIo, WriteCountsRecords) {
  TempDir dir;
  std::vector<PairRecord> records = {{0, "a", "x"}, {1, "b", "y"}, {2, "c", "z"}};
  EXPECT_EQ(write_manifest(records, dir / "m.tsv", ManifestFormat::tsv), 3u);
  EXPECT_EQ(read_file(dir / "m.tsv"), "a\tx\nb\ty\nc\tz\n");
  EXPECT_EQ(write_manifest({}, dir / "e.jsonl", ManifestFormat::jsonl), 0u);
  EXPECT_EQ(read_file(dir / "e.jsonl"), "");
}

TEST(CorpusIo, TsvEscapesControlCharacters) {
  EXPECT_EQ(escape_tsv("a\tb\nc\\d"), "a\\tb\\nc\\\\d");
  EXPECT_EQ(unescape_tsv("a\\tb\\nc\\\\d"), "a\tb\nc\\d");
  TempDir dir;
  std::vector<PairRecord> records = {{0, "x\ty.jpg", "tab\there\nnew\\line\\t literal"}, {1, "", "crlf\r\n"}};
  write_manifest(records, dir / "m.tsv", ManifestFormat::tsv);
  EXPECT_EQ(read_file(dir / "m.tsv"),
            "x\\ty.jpg\ttab\\there\\nnew\\\\line\\\\t literal\n\tcrlf\\r\\n\n");
  EXPECT_EQ(read_manifest(dir / "m.tsv", ManifestFormat::tsv), records);
}

TEST(CorpusIo, MissingFileIsFileNotFound) {
  try {
    ManifestReader reader("/nonexistent/wfpp.jsonl", ManifestFormat::jsonl);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::file_not_found);
  }
}

TEST(CorpusIo, UnknownFormatName) {
  EXPECT_EQ(parse_format("tsv"), ManifestFormat::tsv);
  EXPECT_THROW(parse_format("parquet"), Error);
}

TEST(CorpusIoProperty, RoundTripPreservesPairs) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> alphabet = {"a", "b", " ", "\t", "\n", "\r", "\\", "\"", "{", "}", "é",
                                            std::string(1, '\0')};
  TempDir dir;
  for (auto format : {ManifestFormat::jsonl, ManifestFormat::tsv}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<PairRecord> records(rng() % 30);
      for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].index = i;
        for (int k = rng() % 12; k > 0; --k) records[i].caption += alphabet[rng() % alphabet.size()];
        for (int k = rng() % 6; k > 0; --k) records[i].image_ref += alphabet[rng() % alphabet.size()];
      }
      auto path = dir / (std::string("rt.") + format_name(format));
      write_manifest(records, path, format);
      SkipReport report;
      EXPECT_EQ(read_manifest(path, format, &report), records);
      EXPECT_TRUE(report.skipped.empty());
    }
  }
}
