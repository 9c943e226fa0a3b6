#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "typiclass/metrics.hpp"

using namespace typiclass;

namespace {

using Ratings = ReliabilityData<int>;
using Row = Ratings::Row;
constexpr std::nullopt_t _ = std::nullopt;

Ratings pair_from(const std::string& a, const std::string& b) {
  std::vector<int> x(a.begin(), a.end()), y(b.begin(), b.end());
  return Ratings::from_pair(std::span<const int>(x), y);
}

CategoryLabel cat(std::size_t i) { return CategoryLabel::from_index(i); }

ClassificationResult accepted(std::string id, CategoryLabel c, bool ok = true) {
  return {std::move(id), "s", c, 0.1, 0.2, ok};
}

}  // namespace

TEST(PercentAgreement, Fixtures) {
  const std::vector<char> a = {'A', 'A', 'B', 'C'}, b = {'A', 'B', 'B', 'C'};
  EXPECT_DOUBLE_EQ(percent_agreement(a, b), 0.75);
  EXPECT_DOUBLE_EQ(percent_agreement(a, a), 1.0);
  const std::vector<char> c = {'B', 'B', 'C', 'A'};
  EXPECT_DOUBLE_EQ(percent_agreement(a, c), 0.0);
  const std::vector<char> shorter = {'A'}, empty;
  EXPECT_THROW(percent_agreement(a, shorter), std::invalid_argument);
  EXPECT_THROW(percent_agreement(empty, empty), std::invalid_argument);
}

TEST(KrippendorffAlpha, PerfectAgreementIsOne) {
  EXPECT_DOUBLE_EQ(krippendorff_alpha(pair_from("ABCABCAB", "ABCABCAB")), 1.0);
  EXPECT_DOUBLE_EQ(krippendorff_alpha(pair_from("AAAA", "AAAA")), 1.0);
}

TEST(KrippendorffAlpha, TwelveUnitFixture) {
  // Frozen from tests/oracles/krippendorff_oracle.py (pairwise route, exact fractions).
  EXPECT_NEAR(krippendorff_alpha(pair_from("AABBCCABCABC", "AABBCCBBCAAC")), 73.0 / 96.0, 1e-12);
}

TEST(KrippendorffAlpha, CanonicalFourCoderExampleWithMissingValues) {
  std::vector<std::string> units;
  for (int u = 1; u <= 12; ++u) units.push_back(std::to_string(u));
  std::vector<Row> rows = {
      {1, 2, 3, 3, 2, 1, 4, 1, 2, _, _, _},
      {1, 2, 3, 3, 2, 2, 4, 1, 2, 5, _, 3},
      {_, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, _},
      {1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, _},
  };
  const Ratings data(units, rows, {1, 2, 3, 4, 5});
  const double alpha = krippendorff_alpha(data);
  EXPECT_NEAR(alpha, 113.0 / 152.0, 1e-12);
  EXPECT_NEAR(alpha, 0.743, 5e-4);

  // Coder order does not matter.
  std::swap(rows[0], rows[3]);
  std::swap(rows[1], rows[2]);
  EXPECT_NEAR(krippendorff_alpha(Ratings(units, rows, {1, 2, 3, 4, 5})), alpha, 1e-12);
}

TEST(KrippendorffAlpha, RelabelingInvariance) {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> d(0, 4);
  std::vector<int> a(300), b(300), pa(300), pb(300);
  const int perm[5] = {3, 0, 4, 1, 2};
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = d(gen);
    b[i] = d(gen) < 3 ? a[i] : d(gen);
    pa[i] = perm[a[i]];
    pb[i] = perm[b[i]];
  }
  const double x = krippendorff_alpha(Ratings::from_pair(std::span<const int>(a), b));
  const double y = krippendorff_alpha(Ratings::from_pair(std::span<const int>(pa), pb));
  EXPECT_NEAR(x, y, 1e-12);
  EXPECT_GT(x, 0.3);
}

TEST(KrippendorffAlpha, IndependentCodersNearZero) {
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<int> d(0, 12);
  std::vector<int> a(10000), b(10000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = d(gen);
    b[i] = d(gen);
  }
  EXPECT_LE(std::abs(krippendorff_alpha(Ratings::from_pair(std::span<const int>(a), b))), 0.05);
}

TEST(KrippendorffAlpha, RejectsUnusableData) {
  EXPECT_THROW(Ratings({"u"}, {Row{1}}, {1}), DataError);
  EXPECT_THROW(Ratings({"u", "v"}, {Row{1, _}, Row{_, 2}}, {1, 2}), DataError);
  EXPECT_THROW(Ratings({"u"}, {Row{1}, Row{7}}, {1, 2}), DataError);
  EXPECT_THROW(Ratings({"u"}, {Row{1}, Row{1, 2}}, {1, 2}), DataError);
}

TEST(FrequencyReport, SharesAndGroups) {
  std::vector<ClassificationResult> results;
  for (int i = 0; i < 6; ++i) results.push_back(accepted("p" + std::to_string(i), cat(0)));
  for (int i = 0; i < 3; ++i) results.push_back(accepted("d" + std::to_string(i), cat(6)));
  results.push_back(accepted("m", cat(9)));
  results.push_back(accepted("rejected", cat(9), false));
  const auto r = frequency_report(results);
  EXPECT_EQ(r.accepted_total, 10u);
  ASSERT_EQ(r.per_category.size(), kCategoryCount);
  EXPECT_DOUBLE_EQ(r.per_category[0].frequency, 0.6);
  EXPECT_DOUBLE_EQ(r.per_category[6].frequency, 0.3);
  EXPECT_EQ(r.per_category[9].accepted, 1u);
  EXPECT_DOUBLE_EQ(r.groups[0].frequency, 0.6);
  EXPECT_DOUBLE_EQ(r.groups[1].frequency, 0.3);
  EXPECT_DOUBLE_EQ(r.groups[2].frequency, 0.1);
  double sum = 0.0;
  for (const auto& row : r.per_category) sum += row.frequency;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_FALSE(r.has_accuracy);

  const std::vector<ClassificationResult> none = {accepted("x", cat(0), false)};
  EXPECT_THROW(frequency_report(none), DataError);
}

TEST(AccuracyReport, PerCategoryAndUndefinedRows) {
  std::vector<ClassificationResult> results = {
      accepted("a", cat(0)), accepted("b", cat(0)), accepted("c", cat(0)), accepted("d", cat(0)),
      accepted("e", cat(7)), accepted("f", cat(7)), accepted("g", cat(2), false)};
  const std::map<std::string, CategoryLabel> gold = {
      {"a", cat(0)}, {"b", cat(0)}, {"c", cat(0)}, {"d", cat(7)}, {"e", cat(7)}, {"f", cat(0)}};
  const auto r = accuracy_report(results, gold);
  EXPECT_TRUE(r.has_accuracy);
  EXPECT_EQ(r.evaluated, 6u);
  EXPECT_DOUBLE_EQ(*r.per_category[0].accuracy, 0.75);
  EXPECT_DOUBLE_EQ(*r.per_category[7].accuracy, 0.5);
  EXPECT_FALSE(r.per_category[2].accuracy.has_value());
  EXPECT_FALSE(r.per_category[12].accuracy.has_value());
  EXPECT_NEAR(r.overall_accuracy, 4.0 / 6.0, 1e-12);
  EXPECT_NEAR(*r.percent_agreement, 4.0 / 6.0, 1e-12);
  ASSERT_TRUE(r.krippendorff_alpha.has_value());

  std::ostringstream text, csv;
  print_report(text, r);
  write_report_csv(csv, r);
  EXPECT_NE(text.str().find("undefined"), std::string::npos);
  EXPECT_NE(csv.str().find("positive_outcomes"), std::string::npos);
}

TEST(AccuracyReport, MissingGoldIsNamed) {
  const std::vector<ClassificationResult> results = {accepted("a", cat(0)), accepted("zz9", cat(1))};
  try {
    accuracy_report(results, {{"a", cat(0)}});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("zz9"), std::string::npos);
  }
}

TEST(ValidationSample, SizeAndDeterminism) {
  std::vector<ClassificationResult> results;
  for (int i = 0; i < 40; ++i) results.push_back(accepted("d" + std::to_string(i), cat(0), i % 4 != 0));
  const auto all = validation_sample(results, 1.0, 3);
  EXPECT_EQ(all.size(), 30u);
  const auto quarter = validation_sample(results, 0.25, 3);
  EXPECT_EQ(quarter.size(), 8u);  // 7.5 rounds half away from zero
  EXPECT_EQ(quarter, validation_sample(results, 0.25, 3));
  for (const auto& r : quarter) EXPECT_TRUE(r.accepted);
  EXPECT_THROW(validation_sample(results, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(validation_sample(results, 1.5, 1), std::invalid_argument);
}

TEST(ValidationSample, LargeAcceptedSet) {
  std::vector<ClassificationResult> results(214570, accepted("x", cat(3)));
  EXPECT_EQ(validation_sample(results, 0.25, 1).size(), 53643u);
}

TEST(GoldFile, Parse) {
  std::istringstream in("doc_id\tlabel\na\tease\nb\tplace\n");
  const auto gold = parse_gold(in);
  ASSERT_EQ(gold.size(), 2u);
  EXPECT_EQ(gold.at("b"), CategoryLabel::parse("place"));
  std::istringstream bad("a\tnonsense\n");
  EXPECT_THROW(parse_gold(bad), DataError);
}
