#include <gtest/gtest.h>

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "typiclass/corpus.hpp"

using namespace typiclass;

namespace {

const std::string kFixture = std::string(TYPICLASS_FIXTURE_DIR) + "/records50.tsv";

std::vector<Record> ten_with_duplicates() {
  // Seven distinct normalized texts; d08..d10 repeat d01..d03 modulo RT and spacing.
  return {
      {"d01", "one two three four five", std::nullopt},
      {"d02", "alpha beta gamma delta epsilon", std::nullopt},
      {"d03", "red green blue cyan magenta", "methods"},
      {"d04", "six seven eight nine ten", std::nullopt},
      {"d05", "north south east west up", std::nullopt},
      {"d06", "spring summer autumn winter rain", "place"},
      {"d07", "a b c d e", std::nullopt},
      {"d08", "RT one two three four five", std::nullopt},
      {"d09", "alpha  beta gamma delta   epsilon", std::nullopt},
      {"d10", "RT: red green blue cyan magenta", std::nullopt},
  };
}

}  // namespace

TEST(FilterShort, Boundaries) {
  EXPECT_TRUE(filter_short(4, 5));
  EXPECT_FALSE(filter_short(5, 5));
  EXPECT_TRUE(filter_short(0, 5));
  EXPECT_FALSE(filter_short(1, 1));
}

TEST(BuildCorpus, DropsShortDocuments) {
  const std::vector<Record> records = {
      {"a", "one two three four five", std::nullopt},
      {"b", "too short", std::nullopt},
      {"c", "six seven eight nine ten eleven", "ease"},
  };
  const Corpus c = build_corpus(records);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].id, "a");
  EXPECT_EQ(c[1].id, "c");
  EXPECT_EQ(c.labeled_ids(), std::vector<std::size_t>{1});
  EXPECT_EQ(c.unlabeled_ids(), std::vector<std::size_t>{0});
}

TEST(BuildCorpus, MinTokenFrequencyPrunes) {
  const std::vector<Record> records = {
      {"a", "x y z w v rare", std::nullopt},
      {"b", "x y z w v", std::nullopt},
  };
  CorpusOptions options;
  options.min_token_freq = 2;
  const Corpus c = build_corpus(records, options);
  EXPECT_FALSE(c.vocabulary().find("rare").has_value());
  EXPECT_EQ(c.vocabulary().size(), 5u);
  EXPECT_EQ(c[0].tokens.size(), 5u);
}

TEST(BuildCorpus, PruningBelowMinTokensDropsDocument) {
  const std::vector<Record> records = {
      {"a", "x y z w v", std::nullopt},
      {"b", "x y z w v", std::nullopt},
      {"c", "x y q r s", std::nullopt},
  };
  CorpusOptions options;
  options.min_token_freq = 2;
  const Corpus c = build_corpus(records, options);
  EXPECT_EQ(c.size(), 2u);
  for (const auto& d : c.documents()) EXPECT_GE(d.tokens.size(), 5u);
}

TEST(BuildCorpus, FixtureVocabularyMatchesScriptedCount) {
  // Frozen from tests/oracles/vocab_oracle.py.
  const auto records = read_records(kFixture);
  ASSERT_EQ(records.size(), 50u);
  const Corpus c = build_corpus(records);
  EXPECT_EQ(c.size(), 45u);
  EXPECT_EQ(c.vocabulary().size(), 232u);

  CorpusOptions options;
  options.min_token_freq = 2;
  const Corpus pruned = build_corpus(records, options);
  EXPECT_EQ(pruned.size(), 9u);
  EXPECT_EQ(pruned.vocabulary().size(), 27u);
}

TEST(BuildCorpus, Invariants) {
  const Corpus c = build_corpus(read_records(kFixture));
  std::set<std::string> ids;
  for (const auto& d : c.documents()) {
    EXPECT_TRUE(ids.insert(d.id).second);
    EXPECT_GE(d.tokens.size(), c.min_tokens());
    for (TokenId t : d.tokens) EXPECT_LT(t, c.vocabulary().size());
  }
  EXPECT_EQ(c.labeled_ids().size() + c.unlabeled_ids().size(), c.size());
  for (TokenId id = 0; id < c.vocabulary().size(); ++id) {
    EXPECT_EQ(c.vocabulary().find(c.vocabulary().token(id)), id);
    EXPECT_GE(c.vocabulary().document_frequency(id), 1u);
  }
}

TEST(BuildCorpus, DuplicateIdNamesRecord) {
  const std::vector<Record> records = {
      {"a", "one two three four five", std::nullopt},
      {"a", "six seven eight nine ten", std::nullopt},
  };
  try {
    build_corpus(records);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos);
  }
}

TEST(BuildCorpus, UnknownLabelNamesRecord) {
  const std::vector<Record> records = {
      {"a", "one two three four five", std::nullopt},
      {"b", "one two three four five", "attitude"},
  };
  try {
    build_corpus(records);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos);
  }
}

TEST(BuildCorpus, DeterministicSerialization) {
  const auto records = read_records(kFixture);
  EXPECT_EQ(build_corpus(records).serialize(), build_corpus(records).serialize());
}

TEST(CorpusFile, RoundTrip) {
  const Corpus c = build_corpus(read_records(kFixture));
  const Corpus back = Corpus::deserialize(c.serialize());
  EXPECT_EQ(back.serialize(), c.serialize());
  EXPECT_EQ(back.vocabulary(), c.vocabulary());
  EXPECT_EQ(back.labeled_ids(), c.labeled_ids());
}

TEST(CorpusFile, RejectsGarbage) {
  EXPECT_THROW(Corpus::deserialize("not json"), DataError);
  EXPECT_THROW(Corpus::deserialize(R"({"format":"other"})"), DataError);
}

TEST(SampleDistinct, DeduplicatesByNormalizedText) {
  const Corpus c = build_corpus(ten_with_duplicates());
  ASSERT_EQ(c.size(), 10u);
  const Corpus s = sample_distinct(c, 7, 42);
  ASSERT_EQ(s.size(), 7u);
  std::set<std::string> texts;
  for (const auto& d : s.documents()) EXPECT_TRUE(texts.insert(d.normalized_text).second);
}

TEST(SampleDistinct, DeterministicAndSeedSensitive) {
  const Corpus c = build_corpus(ten_with_duplicates());
  EXPECT_EQ(sample_distinct(c, 4, 9).serialize(), sample_distinct(c, 4, 9).serialize());
  bool differs = false;
  for (std::uint64_t seed = 1; seed < 20 && !differs; ++seed)
    differs = sample_distinct(c, 4, seed).serialize() != sample_distinct(c, 4, 9).serialize();
  EXPECT_TRUE(differs);
}

TEST(SampleDistinct, ZeroAndTooMany) {
  const Corpus c = build_corpus(ten_with_duplicates());
  EXPECT_EQ(sample_distinct(c, 0, 1).size(), 0u);
  EXPECT_THROW(sample_distinct(c, 8, 1), InsufficientData);
}

TEST(SampleDistinct, VocabularyRestrictedToSubset) {
  const Corpus c = build_corpus(ten_with_duplicates());
  const Corpus s = sample_distinct(c, 2, 3);
  std::set<TokenId> used;
  for (const auto& d : s.documents()) used.insert(d.tokens.begin(), d.tokens.end());
  EXPECT_EQ(used.size(), s.vocabulary().size());
}

TEST(Records, ParsesJsonLines) {
  std::istringstream in(
      "{\"id\": \"x1\", \"text\": \"hello there\", \"label\": \"ease\"}\n"
      "\n"
      "{\"id\": 7, \"text\": \"numeric id\", \"label\": null}\n");
  const auto records = parse_records(in, RecordFormat::jsonl);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].label, "ease");
  EXPECT_EQ(records[1].id, "7");
  EXPECT_FALSE(records[1].label.has_value());
}

TEST(Records, MalformedLinesReportPosition) {
  std::istringstream tsv("id\ttext\tlabel\nonly-one-field\n");
  try {
    parse_records(tsv, RecordFormat::tsv);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream jsonl("{\"id\": \"a\"}\n");
  EXPECT_THROW(parse_records(jsonl, RecordFormat::jsonl), DataError);
}
