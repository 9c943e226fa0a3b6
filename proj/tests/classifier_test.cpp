#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "test_support.hpp"
#include "typiclass/classifier.hpp"

using namespace typiclass;
using typiclass::testing::small_plant;

namespace {

ProportionVector pv(std::vector<double> v) { return ProportionVector{std::move(v)}; }

ProportionVector random_simplex(std::mt19937_64& gen, std::size_t K) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(K);
  double s = 0.0;
  for (double& x : v) s += (x = e(gen));
  for (double& x : v) x /= s;
  return pv(std::move(v));
}

CategoryLabel label(std::size_t i) { return CategoryLabel::from_index(i % kCategoryCount); }

ClassificationResult result(std::string id, double typicality, bool accepted = true) {
  return {std::move(id), "s", label(0), typicality, typicality, accepted};
}

}  // namespace

TEST(Distance, HandComputed) {
  EXPECT_DOUBLE_EQ(distance(pv({1, 0}), pv({0, 1})), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(distance(pv({0.5, 0.5}), pv({0.5, 0.5})), 0.0);
  EXPECT_NEAR(distance(pv({0.2, 0.3, 0.5}), pv({0.5, 0.3, 0.2})), std::sqrt(0.18), 1e-15);
  EXPECT_THROW(distance(pv({1, 0}), pv({1, 0, 0})), std::invalid_argument);
}

TEST(Distance, ElementwiseOracle) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_simplex(gen, 10), b = random_simplex(gen, 10);
    long double s = 0;
    for (std::size_t i = 0; i < 10; ++i) s += (long double)(a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    EXPECT_NEAR(distance(a, b), static_cast<double>(std::sqrt(s)), 1e-12);
    EXPECT_DOUBLE_EQ(distance(a, b), distance(b, a));
  }
}

TEST(NearestNeighbor, MatchesExhaustiveScan) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Seed> seeds;
    for (int s = 0; s < 12; ++s)
      seeds.push_back({"s" + std::to_string(100 + s), label(static_cast<std::size_t>(s)), random_simplex(gen, 6)});
    const auto u = random_simplex(gen, 6);
    std::size_t best = 0;
    for (std::size_t s = 1; s < seeds.size(); ++s)
      if (distance(u, seeds[s].vector) < distance(u, seeds[best].vector)) best = s;
    const Neighbor nn = nearest_neighbor(u, seeds);
    EXPECT_EQ(nn.id, seeds[best].id);
    EXPECT_EQ(nn.label, seeds[best].label);
    std::shuffle(seeds.begin(), seeds.end(), gen);
    EXPECT_EQ(nearest_neighbor(u, seeds).id, nn.id);
  }
}

TEST(NearestNeighbor, TiesResolveToSmallestId) {
  const std::vector<Seed> seeds = {{"b", label(1), pv({1, 0})}, {"a", label(2), pv({0, 1})}};
  const Neighbor nn = nearest_neighbor(pv({0.5, 0.5}), seeds);
  EXPECT_EQ(nn.id, "a");
  EXPECT_THROW(nearest_neighbor(pv({1, 0}), std::span<const Seed>{}), DataError);
}

TEST(Typicality, MeanOfDistances) {
  const std::vector<ProportionVector> line = {pv({0.1, 0.0}), pv({0.3, 0.0})};
  EXPECT_NEAR(typicality(pv({0.0, 0.0}), line), 0.2, 1e-15);
  EXPECT_THROW(typicality(pv({0, 0}), std::span<const ProportionVector>{}), UndetectableCategory);
}

TEST(Typicality, Oracle) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ProportionVector> seeds;
    for (int s = 0; s < 7; ++s) seeds.push_back(random_simplex(gen, 5));
    const auto u = random_simplex(gen, 5);
    double sum = 0.0;
    for (const auto& s : seeds) {
      double sq = 0.0;
      for (std::size_t i = 0; i < 5; ++i) sq += (u.values[i] - s.values[i]) * (u.values[i] - s.values[i]);
      sum += std::sqrt(sq);
    }
    EXPECT_NEAR(typicality(u, seeds), sum / 7.0, 1e-12);
  }
}

TEST(Classify, ThresholdBoundary) {
  // One seed per category so typicality equals the neighbor distance.
  const SeedSet seeds({{"s1", label(0), pv({0.0, 0.0})}});
  const auto at = [&](double t, double threshold) { return classify("d", pv({t, 0.0}), seeds, threshold); };
  EXPECT_TRUE(at(0.274, 0.275).accepted);
  EXPECT_FALSE(at(0.292, 0.275).accepted);
  EXPECT_TRUE(at(0.275, 0.275).accepted);
  EXPECT_EQ(at(0.1, 0.275).category, label(0));
  EXPECT_THROW(at(0.1, -1.0), std::invalid_argument);
}

TEST(Classify, LabelFromNeighborTypicalityFromItsCategory) {
  const SeedSet seeds({{"a1", label(0), pv({1, 0})},
                       {"a2", label(0), pv({0, 1})},
                       {"b1", label(1), pv({0.9, 0.1})}});
  const auto r = classify("u", pv({1, 0}), seeds, 1.0);
  EXPECT_EQ(r.neighbor_id, "a1");
  EXPECT_EQ(r.category, label(0));
  EXPECT_DOUBLE_EQ(r.nn_distance, 0.0);
  EXPECT_NEAR(r.typicality, std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(ClassifyCorpus, CoversUnlabeledDocuments) {
  const auto synth = generate(small_plant(), 200, 0.2);
  LdaParams p;
  p.topics = 5;
  p.sweeps = 50;
  const TopicModel m = train(synth.corpus, p);
  const auto results = classify_corpus(synth.corpus, m, {});
  ASSERT_EQ(results.size(), synth.corpus.unlabeled_ids().size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    EXPECT_EQ(results[i].doc_id, synth.corpus[synth.corpus.unlabeled_ids()[i]].id);
    EXPECT_GE(results[i].typicality, 0.0);
    EXPECT_LE(results[i].typicality, std::sqrt(2.0));
    EXPECT_EQ(results[i].accepted, results[i].typicality <= kDefaultThreshold);
    EXPECT_LE(results[i].nn_distance, results[i].typicality + 1e-12);
  }
  ClassifyOptions none;
  none.threshold = 0.0;
  EXPECT_EQ(accepted_count(classify_corpus(synth.corpus, m, none)), 0u);

  ClassifyOptions words;
  words.representation = Representation::word_proportion;
  EXPECT_EQ(classify_corpus(synth.corpus, m, words).size(), results.size());
}

TEST(ClassifyCorpus, RequiresMatchingModelAndSeeds) {
  const auto synth = generate(small_plant(), 60, 0.2);
  const auto other = generate(small_plant(99), 60, 0.2);
  LdaParams p;
  p.topics = 3;
  p.sweeps = 3;
  const TopicModel m = train(other.corpus, p);
  EXPECT_THROW(classify_corpus(synth.corpus, m), DataError);
  const auto unlabeled = generate(small_plant(), 60, 0.0);
  EXPECT_THROW(classify_corpus(unlabeled.corpus, train(unlabeled.corpus, p)), DataError);
}

TEST(Rethreshold, AcceptedSetIsMonotone) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  std::vector<ClassificationResult> results;
  for (int i = 0; i < 300; ++i) results.push_back(result("d" + std::to_string(i), t(gen)));
  std::size_t previous = 0;
  for (int g = 0; g <= 20; ++g) {
    const auto r = rethreshold(results, g / 20.0);
    const std::size_t n = accepted_count(r);
    EXPECT_GE(n, previous);
    previous = n;
  }
  EXPECT_EQ(previous, results.size());
}

TEST(BandTable, CountsMatchHistogram) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> t(0.0, 0.7);
  std::vector<ClassificationResult> results;
  for (int i = 0; i < 500; ++i) results.push_back(result("d" + std::to_string(i), t(gen)));
  results.push_back(result("edge", 0.2));
  const std::vector<double> edges = {0.1, 0.2, 0.275, 0.3, 0.5};
  const BandTable table = band_table(results, edges, 5, 4);
  ASSERT_EQ(table.bands.size(), edges.size() + 1);
  std::vector<std::size_t> expected(edges.size() + 1, 0);
  for (const auto& r : results) {
    std::size_t b = 0;
    while (b < edges.size() && r.typicality > edges[b]) ++b;
    ++expected[b];
  }
  std::size_t total = 0;
  for (std::size_t b = 0; b < table.bands.size(); ++b) {
    EXPECT_EQ(table.bands[b].count, expected[b]) << "band " << b;
    EXPECT_EQ(table.bands[b].exemplars.size(), std::min<std::size_t>(5, expected[b]));
    total += table.bands[b].count;
  }
  EXPECT_EQ(total, results.size());
  EXPECT_EQ(table.band_of(0.2), 1u);
  EXPECT_EQ(table.band_of(0.0), 0u);
  EXPECT_FALSE(table.bands.back().bounded);
}

TEST(BandTable, RejectsBadEdges) {
  const std::vector<ClassificationResult> none;
  const std::vector<double> unsorted = {0.3, 0.2};
  const std::vector<double> repeated = {0.2, 0.2};
  const std::vector<double> negative = {-0.1, 0.2};
  EXPECT_THROW(band_table(none, unsorted), std::invalid_argument);
  EXPECT_THROW(band_table(none, repeated), std::invalid_argument);
  EXPECT_THROW(band_table(none, negative), std::invalid_argument);
  EXPECT_THROW(band_table(none, std::vector<double>{}), std::invalid_argument);
  const std::vector<double> ok = {0.1, 0.2};
  const BandTable empty = band_table(none, ok);
  for (const auto& b : empty.bands) EXPECT_EQ(b.count, 0u);
}

TEST(RecommendThreshold, ContiguousAcceptableBands) {
  std::vector<ClassificationResult> results;
  for (int i = 0; i < 40; ++i) results.push_back(result("d" + std::to_string(i), 0.01 * i + 0.005));
  const std::vector<double> edges = {0.1, 0.2, 0.3};
  BandTable table = band_table(results, edges, 3, 1);
  EXPECT_EQ(recommend_threshold(table), std::nullopt);

  std::map<std::string, Judgment> judgments;
  const auto judge_band = [&](std::size_t b, Judgment j) {
    for (const auto& id : table.bands[b].exemplars) judgments[id] = j;
  };
  judge_band(0, Judgment::match);
  judge_band(1, Judgment::partial_match);
  judge_band(2, Judgment::mismatch);
  judge_band(3, Judgment::mismatch);
  apply_judgments(table, judgments);
  EXPECT_EQ(table.bands[1].judgment, Judgment::partial_match);
  EXPECT_EQ(recommend_threshold(table), 0.2);

  judgments[table.bands[0].exemplars.front()] = Judgment::mismatch;
  apply_judgments(table, judgments);
  EXPECT_EQ(table.bands[0].judgment, Judgment::mismatch);
  EXPECT_EQ(recommend_threshold(table), std::nullopt);
}

TEST(RecommendThreshold, EmptyBandsDoNotBlock) {
  std::vector<ClassificationResult> results = {result("a", 0.05), result("b", 0.25)};
  const std::vector<double> edges = {0.1, 0.2, 0.3};
  BandTable table = band_table(results, edges, 2, 1);
  apply_judgments(table, {{"a", Judgment::match}, {"b", Judgment::match}});
  EXPECT_EQ(recommend_threshold(table), 0.3);
}

TEST(Judgments, Parse) {
  EXPECT_EQ(try_parse_judgment("match"), Judgment::match);
  EXPECT_EQ(try_parse_judgment("p"), Judgment::partial_match);
  EXPECT_EQ(try_parse_judgment("x"), Judgment::mismatch);
  EXPECT_EQ(try_parse_judgment("maybe"), std::nullopt);
}

TEST(ResultsFile, RoundTripIsExact) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  std::vector<ClassificationResult> results;
  for (int i = 0; i < 50; ++i) {
    const double ty = t(gen);
    results.push_back({"d" + std::to_string(i), "s" + std::to_string(i % 7), label(i), ty * 0.5, ty, ty < 0.4});
  }
  std::istringstream in(results_to_string(results));
  EXPECT_EQ(parse_results(in), results);

  std::istringstream bad(std::string(kResultsHeader) + "\nd1\ts1\tnot_a_category\t0.1\t0.2\ttrue\n");
  EXPECT_THROW(parse_results(bad), DataError);
}
