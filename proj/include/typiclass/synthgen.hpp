#ifndef TYPICLASS_SYNTHGEN_HPP
#define TYPICLASS_SYNTHGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "typiclass/category.hpp"
#include "typiclass/corpus.hpp"
#include "typiclass/error.hpp"
#include "typiclass/rng.hpp"
#include "typiclass/topic_model.hpp"

namespace typiclass {

/// Generation recipe for one class.
struct ClassSpec {
  CategoryLabel label;
  double weight = 1.0;
  /// Dirichlet parameters over planted topics.
  std::vector<double> mixture_prior;
  std::vector<std::size_t> signature_topics;
};

/// Ground-truth generative model: planted topic-word rows plus a
/// class-conditional Dirichlet prior over topics for each class.
struct PlantedModel {
  std::size_t topics = 0;
  std::size_t vocab_size = 0;
  std::vector<std::vector<double>> phi;  // topics x vocab_size
  std::vector<ClassSpec> classes;
  std::size_t min_length = 20;
  std::size_t max_length = 50;
  std::uint64_t seed = 1;
  std::string word_prefix = "w";

  /// Token string of planted word w, zero-padded so ids sort as strings.
  std::string word(std::size_t w) const {
    const std::size_t width = std::to_string(vocab_size > 0 ? vocab_size - 1 : 0).size();
    std::string digits = std::to_string(w);
    return word_prefix + std::string(width - std::min(width, digits.size()), '0') + digits;
  }

  /// The n highest-mass words of planted topic k (ties by ascending id).
  std::vector<std::size_t> head_words(std::size_t k, std::size_t n) const {
    std::vector<std::size_t> idx(vocab_size);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return phi[k][a] > phi[k][b]; });
    idx.resize(std::min(n, idx.size()));
    return idx;
  }

  void validate() const {
    if (topics < 1) throw DataError("plant needs at least one topic");
    if (vocab_size < 1) throw DataError("plant needs a non-empty vocabulary");
    if (phi.size() != topics) throw DataError("phi must have one row per topic");
    for (const auto& row : phi) {
      if (row.size() != vocab_size) throw DataError("phi rows must have vocab_size entries");
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) throw DataError("phi entries must be non-negative");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw DataError("phi rows must sum to 1");
    }
    if (classes.size() < 2) throw DataError("plant needs at least two classes");
    std::set<CategoryLabel> seen;
    for (const auto& c : classes) {
      if (!seen.insert(c.label).second) throw DataError("class " + std::string(c.label.name()) + " listed twice");
      if (!(c.weight > 0.0)) throw DataError("class weights must be positive");
      if (c.mixture_prior.size() != topics) throw DataError("class prior must have one entry per topic");
      for (double a : c.mixture_prior)
        if (!(a > 0.0)) throw DataError("class prior entries must be positive");
    }
    if (min_length < 5) throw DataError("minimum document length must be at least 5");
    if (max_length < min_length) throw DataError("document length range is empty");
  }

  /// Build from a plant specification.
  ///
  /// Recognized keys: topics, vocab_size, seed, doc_length [min, max],
  /// word_prefix, and either "phi" (explicit rows) or "topic_mass" (the
  /// share of each topic's mass on its own block of vocab_size / topics
  /// words, Zipf-weighted within the block, rest spread evenly). Each class
  /// has "category", optional "weight", and either "prior" (explicit
  /// Dirichlet parameters) or "signature_topics" combined with the global
  /// "signature_mass" and "concentration".
  static PlantedModel from_json(const nlohmann::json& j) {
    try {
      PlantedModel p;
      p.topics = j.at("topics").get<std::size_t>();
      p.vocab_size = j.at("vocab_size").get<std::size_t>();
      p.seed = j.value("seed", std::uint64_t{1});
      p.word_prefix = j.value("word_prefix", std::string("w"));
      if (j.contains("doc_length")) {
        const auto range = j.at("doc_length").get<std::vector<std::size_t>>();
        if (range.size() != 2) throw DataError("doc_length must be [min, max]");
        p.min_length = range[0];
        p.max_length = range[1];
      }
      if (p.topics < 1 || p.vocab_size < p.topics) throw DataError("need 1 <= topics <= vocab_size");
      if (j.contains("phi")) {
        p.phi = j.at("phi").get<std::vector<std::vector<double>>>();
      } else {
        p.phi = block_topics(p.topics, p.vocab_size, j.value("topic_mass", 0.9));
      }
      const double signature_mass = j.value("signature_mass", 0.8);
      const double concentration = j.value("concentration", 1.0);
      for (const auto& jc : j.at("classes")) {
        ClassSpec c{CategoryLabel::parse(jc.at("category").get<std::string>()), 1.0, {}, {}};
        c.weight = jc.value("weight", 1.0);
        if (jc.contains("signature_topics")) c.signature_topics = jc.at("signature_topics").get<std::vector<std::size_t>>();
        if (jc.contains("prior")) {
          c.mixture_prior = jc.at("prior").get<std::vector<double>>();
        } else {
          c.mixture_prior = signature_prior(p.topics, c.signature_topics, signature_mass, concentration);
        }
        p.classes.push_back(std::move(c));
      }
      p.validate();
      return p;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed plant specification: ") + e.what());
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json classes_json = nlohmann::json::array();
    for (const auto& c : classes)
      classes_json.push_back({{"category", std::string(c.label.name())},
                              {"weight", c.weight},
                              {"prior", c.mixture_prior},
                              {"signature_topics", c.signature_topics}});
    return {{"topics", topics},          {"vocab_size", vocab_size}, {"phi", phi},
            {"classes", classes_json},   {"doc_length", {min_length, max_length}},
            {"seed", seed},              {"word_prefix", word_prefix}};
  }

  /// Near-orthogonal topics: topic k puts topic_mass on its own contiguous
  /// block of words, Zipf-weighted (1 / rank) inside the block.
  static std::vector<std::vector<double>> block_topics(std::size_t topics, std::size_t vocab_size, double topic_mass) {
    if (!(topic_mass > 0.0 && topic_mass <= 1.0)) throw DataError("topic_mass must lie in (0, 1]");
    std::vector<std::vector<double>> phi(topics, std::vector<double>(vocab_size, 0.0));
    const std::size_t block = vocab_size / topics;
    for (std::size_t k = 0; k < topics; ++k) {
      const std::size_t begin = k * block;
      const std::size_t end = (k + 1 == topics) ? vocab_size : begin + block;
      double harmonic = 0.0;
      for (std::size_t r = 0; r < end - begin; ++r) harmonic += 1.0 / static_cast<double>(r + 1);
      const double background = (1.0 - topic_mass) / static_cast<double>(vocab_size);
      for (std::size_t w = 0; w < vocab_size; ++w) phi[k][w] = background;
      for (std::size_t r = 0; r < end - begin; ++r)
        phi[k][begin + r] += topic_mass / (static_cast<double>(r + 1) * harmonic);
      double sum = 0.0;
      for (double v : phi[k]) sum += v;
      for (double& v : phi[k]) v /= sum;
    }
    return phi;
  }

  /// Dirichlet parameters putting signature_mass of the total concentration
  /// on the signature topics, the remainder spread over the others.
  static std::vector<double> signature_prior(std::size_t topics, std::span<const std::size_t> signature,
                                             double signature_mass, double concentration) {
    if (signature.empty()) throw DataError("class needs signature_topics or an explicit prior");
    if (!(signature_mass > 0.0 && signature_mass <= 1.0)) throw DataError("signature_mass must lie in (0, 1]");
    if (!(concentration > 0.0)) throw DataError("concentration must be positive");
    std::vector<bool> is_sig(topics, false);
    for (std::size_t k : signature) {
      if (k >= topics) throw DataError("signature topic out of range");
      is_sig[k] = true;
    }
    const auto n_sig = static_cast<std::size_t>(std::count(is_sig.begin(), is_sig.end(), true));
    const std::size_t n_rest = topics - n_sig;
    // Floor keeps every parameter strictly positive when signature_mass = 1.
    const double floor = 1e-3 * concentration / static_cast<double>(topics);
    std::vector<double> prior(topics);
    for (std::size_t k = 0; k < topics; ++k) {
      if (is_sig[k])
        prior[k] = concentration * (n_rest == 0 ? 1.0 : signature_mass) / static_cast<double>(n_sig);
      else
        prior[k] = std::max(floor, concentration * (1.0 - signature_mass) / static_cast<double>(n_rest));
    }
    return prior;
  }
};

struct SyntheticCorpus {
  std::vector<Record> records;
  Corpus corpus;
  /// True class of every generated document, labeled or not.
  std::map<std::string, CategoryLabel> truth;
  /// Planted topic with the largest share of each document's mixture.
  std::map<std::string, std::size_t> dominant_topic;
};

/// Sample documents from the planted model.
///
/// Stream layout: the master generator (seeded with plant.seed) draws every
/// document's class in order and then the labeled subset; document i's
/// mixture, length and tokens come from its own substream
/// derive_seed(plant.seed, i), so documents can be generated independently.
///
/// round(labeled_fraction * n_docs) documents keep their class as a gold
/// label. The labeled quota is apportioned across classes by weight
/// (largest remainder), so equal weights give equal seed counts.
inline SyntheticCorpus generate(const PlantedModel& plant, std::size_t n_docs, double labeled_fraction) {
  plant.validate();
  if (n_docs < 1) throw DataError("n_docs must be at least 1");
  if (!(labeled_fraction >= 0.0 && labeled_fraction <= 1.0)) throw DataError("labeled_fraction must lie in [0, 1]");

  Rng master(plant.seed);
  std::vector<double> weights;
  for (const auto& c : plant.classes) weights.push_back(c.weight);
  std::vector<std::size_t> doc_class(n_docs);
  std::vector<std::vector<std::size_t>> members(plant.classes.size());
  for (std::size_t i = 0; i < n_docs; ++i) {
    doc_class[i] = master.categorical(weights);
    members[doc_class[i]].push_back(i);
  }

  // Largest-remainder apportionment of the labeled quota, capped by class size.
  const auto labeled_total = static_cast<std::size_t>(std::llround(labeled_fraction * static_cast<double>(n_docs)));
  const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> quota(plant.classes.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < quota.size(); ++c) {
    const double exact = static_cast<double>(labeled_total) * weights[c] / weight_sum;
    quota[c] = std::min(static_cast<std::size_t>(std::floor(exact)), members[c].size());
    assigned += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  while (assigned < labeled_total) {
    bool progressed = false;
    for (const auto& [rem, c] : remainders) {
      if (assigned == labeled_total) break;
      if (quota[c] < members[c].size()) {
        ++quota[c];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  std::vector<bool> labeled(n_docs, false);
  for (std::size_t c = 0; c < quota.size(); ++c)
    for (std::size_t p : master.sample_without_replacement(members[c].size(), quota[c])) labeled[members[c][p]] = true;

  SyntheticCorpus out;
  out.records.reserve(n_docs);
  const std::size_t id_width = std::max<std::size_t>(6, std::to_string(n_docs).size());
  for (std::size_t i = 0; i < n_docs; ++i) {
    Rng rng(derive_seed(plant.seed, i));
    const ClassSpec& cls = plant.classes[doc_class[i]];
    const std::vector<double> theta = rng.dirichlet(cls.mixture_prior);
    const std::size_t length = plant.min_length + rng.below(plant.max_length - plant.min_length + 1);
    std::string text;
    for (std::size_t t = 0; t < length; ++t) {
      const std::size_t k = rng.categorical(theta);
      const std::size_t w = rng.categorical(plant.phi[k]);
      if (t) text.push_back(' ');
      text += plant.word(w);
    }
    std::string digits = std::to_string(i + 1);
    std::string id = "doc" + std::string(id_width - digits.size(), '0') + digits;
    Record r{id, std::move(text), std::nullopt};
    if (labeled[i]) r.label = std::string(cls.label.name());
    out.truth.emplace(id, cls.label);
    out.dominant_topic.emplace(
        id, static_cast<std::size_t>(std::max_element(theta.begin(), theta.end()) - theta.begin()));
    out.records.push_back(std::move(r));
  }
  CorpusOptions options;
  options.min_tokens = std::min<std::size_t>(5, plant.min_length);
  out.corpus = build_corpus(out.records, options);
  if (out.corpus.size() != n_docs) throw InvariantViolation("generated documents were dropped by the corpus filter");
  return out;
}

/// Records as an "id<TAB>text<TAB>label" file, unlabeled rows with an empty label.
inline std::string records_tsv(const SyntheticCorpus& synth) {
  std::string out = "id\ttext\tlabel\n";
  for (const auto& r : synth.records) out += r.id + "\t" + r.text + "\t" + r.label.value_or("") + "\n";
  return out;
}

/// Truth map as a gold-label file.
inline std::string truth_tsv(const SyntheticCorpus& synth) {
  std::string out = "doc_id\tcategory\n";
  for (const auto& r : synth.records) out += r.id + "\t" + std::string(synth.truth.at(r.id).name()) + "\n";
  return out;
}

struct TopicMatch {
  std::size_t planted;
  std::size_t recovered;
  double cosine;
};

struct TopicMatching {
  std::vector<TopicMatch> pairs;  // ordered by planted topic
  double mean_cosine = 0.0;
};

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

/// Greedy matching: repeatedly take the highest-cosine (planted, recovered)
/// pair among topics not yet matched. Planted topics left over when there
/// are fewer recovered rows get cosine 0 and recovered index SIZE_MAX.
inline TopicMatching match_topics(std::span<const std::vector<double>> recovered,
                                  std::span<const std::vector<double>> planted) {
  for (const auto& r : recovered)
    for (const auto& p : planted)
      if (r.size() != p.size()) throw std::invalid_argument("match_topics: vocabulary dimensions differ");
  struct Candidate {
    double cosine;
    std::size_t planted, recovered;
  };
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p < planted.size(); ++p)
    for (std::size_t r = 0; r < recovered.size(); ++r)
      candidates.push_back({cosine_similarity(recovered[r], planted[p]), p, r});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.cosine > b.cosine; });
  std::vector<bool> planted_used(planted.size(), false), recovered_used(recovered.size(), false);
  TopicMatching m;
  m.pairs.resize(planted.size());
  for (std::size_t p = 0; p < planted.size(); ++p) m.pairs[p] = {p, SIZE_MAX, 0.0};
  for (const auto& c : candidates) {
    if (planted_used[c.planted] || recovered_used[c.recovered]) continue;
    planted_used[c.planted] = recovered_used[c.recovered] = true;
    m.pairs[c.planted] = {c.planted, c.recovered, c.cosine};
  }
  double sum = 0.0;
  for (const auto& p : m.pairs) sum += p.cosine;
  m.mean_cosine = planted.empty() ? 0.0 : sum / static_cast<double>(planted.size());
  return m;
}

/// Recovered topic-word rows re-indexed onto the planted word ids, so they
/// can be compared with the planted rows. Planted words missing from the
/// corpus vocabulary get 0.
inline std::vector<std::vector<double>> aligned_topic_rows(const TopicModel& model, const Vocabulary& vocabulary,
                                                           const PlantedModel& plant) {
  model.check_vocabulary(vocabulary);
  std::vector<std::optional<TokenId>> ids(plant.vocab_size);
  for (std::size_t w = 0; w < plant.vocab_size; ++w) ids[w] = vocabulary.find(plant.word(w));
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < model.topics(); ++k) {
    const auto phi = model.topic_word_distribution(k);
    std::vector<double> row(plant.vocab_size, 0.0);
    for (std::size_t w = 0; w < plant.vocab_size; ++w)
      if (ids[w]) row[w] = phi[*ids[w]];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace typiclass

#endif  // TYPICLASS_SYNTHGEN_HPP
