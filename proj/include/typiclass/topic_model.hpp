#ifndef TYPICLASS_TOPIC_MODEL_HPP
#define TYPICLASS_TOPIC_MODEL_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "typiclass/checksum.hpp"
#include "typiclass/corpus.hpp"
#include "typiclass/error.hpp"
#include "typiclass/rng.hpp"

namespace typiclass {

/// A point on the probability simplex: a document's topic (or word)
/// proportions.
struct ProportionVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<const double> span() const { return values; }

  friend bool operator==(const ProportionVector&, const ProportionVector&) = default;
};

struct LdaParams {
  std::size_t topics = 100;
  /// Non-positive means "use 50 / topics".
  double alpha = 0.0;
  double beta = 0.01;
  std::size_t sweeps = 1000;
  std::uint64_t seed = 1;

  double resolved_alpha() const { return alpha > 0.0 ? alpha : 50.0 / static_cast<double>(topics); }
};

class TopicModel;

/// Called after every completed sweep with the zero-based sweep index.
using SweepObserver = std::function<void(const TopicModel&, std::size_t)>;

/// Trained collapsed-Gibbs LDA state.
///
/// Counts are held word-major (V x K) so the per-token conditional touches
/// one contiguous row; the public accessors present the K x V view.
class TopicModel {
 public:
  static constexpr int kFormatVersion = 1;

  std::size_t topics() const { return topics_; }
  std::size_t vocabulary_size() const { return vocab_size_; }
  std::size_t documents() const { return docs_.size(); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t sweeps() const { return sweeps_; }
  const std::string& vocabulary_hash() const { return vocabulary_hash_; }
  /// Token strings of the training vocabulary, indexed by token id.
  const std::vector<std::string>& vocabulary_tokens() const { return vocabulary_tokens_; }

  std::int64_t topic_word_count(std::size_t k, TokenId w) const { return word_topic_[w * topics_ + k]; }
  std::int64_t topic_total(std::size_t k) const { return topic_totals_[k]; }
  std::int64_t doc_topic_count(std::size_t d, std::size_t k) const { return doc_topic_[d * topics_ + k]; }
  std::span<const TokenId> doc_tokens(std::size_t d) const { return docs_.at(d).tokens; }
  std::span<const std::uint32_t> assignments(std::size_t d) const { return docs_.at(d).topics; }

  /// Smoothed topic-word distribution of topic k over the whole vocabulary.
  std::vector<double> topic_word_distribution(std::size_t k) const {
    check_topic(k);
    const double denom = static_cast<double>(topic_totals_[k]) + static_cast<double>(vocab_size_) * beta_;
    std::vector<double> out(vocab_size_);
    for (std::size_t w = 0; w < vocab_size_; ++w)
      out[w] = (static_cast<double>(word_topic_[w * topics_ + k]) + beta_) / denom;
    return out;
  }

  /// Words whose probability in topic k is strictly above threshold, most
  /// probable first, ties by ascending id.
  std::vector<std::pair<TokenId, double>> top_words(std::size_t k, double threshold = 0.01) const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in [0, 1]");
    const auto phi = topic_word_distribution(k);
    std::vector<std::pair<TokenId, double>> out;
    for (std::size_t w = 0; w < phi.size(); ++w)
      if (phi[w] > threshold) out.emplace_back(static_cast<TokenId>(w), phi[w]);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return out;
  }

  /// Proportions of training document d read from the stored counts.
  ProportionVector document_proportions(std::size_t d) const {
    if (d >= docs_.size()) throw std::out_of_range("document index " + std::to_string(d) + " out of range");
    const double denom = static_cast<double>(docs_[d].tokens.size()) + static_cast<double>(topics_) * alpha_;
    ProportionVector p{std::vector<double>(topics_)};
    for (std::size_t k = 0; k < topics_; ++k)
      p.values[k] = (static_cast<double>(doc_topic_[d * topics_ + k]) + alpha_) / denom;
    return p;
  }

  /// Fold-in Gibbs inference for a document outside the training set.
  /// Token ids at or above the model's vocabulary size are skipped; throws
  /// UnembeddableDocument when nothing remains.
  ProportionVector infer_proportions(std::span<const TokenId> tokens, std::size_t sweeps, std::uint64_t seed) const {
    std::vector<TokenId> known;
    for (TokenId t : tokens)
      if (t < vocab_size_) known.push_back(t);
    if (known.empty()) throw UnembeddableDocument("document has no in-vocabulary tokens");
    Rng rng(seed);
    std::vector<std::int64_t> counts(topics_, 0);
    std::vector<std::uint32_t> z(known.size());
    for (std::size_t i = 0; i < known.size(); ++i) {
      z[i] = static_cast<std::uint32_t>(rng.below(topics_));
      ++counts[z[i]];
    }
    std::vector<double> cumulative(topics_);
    const double vbeta = static_cast<double>(vocab_size_) * beta_;
    for (std::size_t s = 0; s < sweeps; ++s) {
      for (std::size_t i = 0; i < known.size(); ++i) {
        --counts[z[i]];
        const std::int32_t* row = &word_topic_[static_cast<std::size_t>(known[i]) * topics_];
        double total = 0.0;
        for (std::size_t k = 0; k < topics_; ++k) {
          total += (static_cast<double>(counts[k]) + alpha_) * (row[k] + beta_) / (topic_totals_[k] + vbeta);
          cumulative[k] = total;
        }
        z[i] = static_cast<std::uint32_t>(draw(cumulative, rng.uniform() * total));
        ++counts[z[i]];
      }
    }
    const double denom = static_cast<double>(known.size()) + static_cast<double>(topics_) * alpha_;
    ProportionVector p{std::vector<double>(topics_)};
    for (std::size_t k = 0; k < topics_; ++k) p.values[k] = (static_cast<double>(counts[k]) + alpha_) / denom;
    return p;
  }

  /// Fold-in for raw token strings against the vocabulary the model was
  /// trained on.
  ProportionVector infer_proportions(const Vocabulary& vocabulary, std::span<const std::string> tokens,
                                     std::size_t sweeps, std::uint64_t seed) const {
    check_vocabulary(vocabulary);
    std::vector<TokenId> ids;
    for (const auto& t : tokens)
      if (auto id = vocabulary.find(t)) ids.push_back(*id);
    return infer_proportions(ids, sweeps, seed);
  }

  /// Throws DataError unless the vocabulary matches the training one.
  void check_vocabulary(const Vocabulary& vocabulary) const {
    if (vocabulary.size() != vocab_size_ || vocabulary.hash() != vocabulary_hash_)
      throw DataError("corpus vocabulary does not match the model (hash mismatch)");
  }

  /// Recount every table from the assignments and compare. Throws
  /// InvariantViolation on any difference.
  void check_invariants() const {
    if (topics_ < 1 || !(alpha_ > 0.0) || !(beta_ > 0.0)) throw InvariantViolation("invalid hyperparameters");
    std::vector<std::int64_t> wt(vocab_size_ * topics_, 0), kt(topics_, 0);
    std::int64_t total_tokens = 0;
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      const auto& doc = docs_[d];
      if (doc.tokens.size() != doc.topics.size()) throw InvariantViolation("assignment length mismatch");
      std::vector<std::int64_t> dt(topics_, 0);
      for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        if (doc.tokens[i] >= vocab_size_ || doc.topics[i] >= topics_) throw InvariantViolation("id out of range");
        ++wt[doc.tokens[i] * topics_ + doc.topics[i]];
        ++kt[doc.topics[i]];
        ++dt[doc.topics[i]];
      }
      std::int64_t row_sum = 0;
      for (std::size_t k = 0; k < topics_; ++k) {
        if (dt[k] != doc_topic_[d * topics_ + k]) throw InvariantViolation("doc_topic_counts disagree with assignments");
        row_sum += doc_topic_[d * topics_ + k];
      }
      if (row_sum != static_cast<std::int64_t>(doc.tokens.size()))
        throw InvariantViolation("doc_topic_counts row does not sum to document length");
      total_tokens += static_cast<std::int64_t>(doc.tokens.size());
    }
    std::int64_t totals_sum = 0;
    for (std::size_t k = 0; k < topics_; ++k) {
      std::int64_t column = 0;
      for (std::size_t w = 0; w < vocab_size_; ++w) {
        if (wt[w * topics_ + k] != word_topic_[w * topics_ + k])
          throw InvariantViolation("topic_word_counts disagree with assignments");
        column += word_topic_[w * topics_ + k];
      }
      if (column != topic_totals_[k] || kt[k] != topic_totals_[k])
        throw InvariantViolation("topic_totals disagree with topic_word_counts");
      totals_sum += topic_totals_[k];
    }
    if (totals_sum != total_tokens) throw InvariantViolation("topic_totals do not sum to corpus token count");
  }

  nlohmann::json to_json() const {
    nlohmann::json topic_word = nlohmann::json::array();
    for (std::size_t k = 0; k < topics_; ++k) {
      std::vector<std::int32_t> row(vocab_size_);
      for (std::size_t w = 0; w < vocab_size_; ++w) row[w] = word_topic_[w * topics_ + k];
      topic_word.push_back(std::move(row));
    }
    nlohmann::json doc_topic = nlohmann::json::array();
    nlohmann::json docs = nlohmann::json::array();
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      doc_topic.push_back(std::vector<std::int32_t>(doc_topic_.begin() + static_cast<std::ptrdiff_t>(d * topics_),
                                                    doc_topic_.begin() + static_cast<std::ptrdiff_t>((d + 1) * topics_)));
      docs.push_back({{"tokens", docs_[d].tokens}, {"topics", docs_[d].topics}});
    }
    return {{"format", "typiclass.model"},
            {"version", kFormatVersion},
            {"topics", topics_},
            {"vocabulary_size", vocab_size_},
            {"alpha", alpha_},
            {"beta", beta_},
            {"seed", seed_},
            {"sweeps", sweeps_},
            {"vocabulary_hash", vocabulary_hash_},
            {"vocabulary", vocabulary_tokens_},
            {"topic_word_counts", std::move(topic_word)},
            {"topic_totals", topic_totals_},
            {"doc_topic_counts", std::move(doc_topic)},
            {"assignments", std::move(docs)}};
  }

  std::string serialize() const { return to_json().dump(); }

  static TopicModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format") != "typiclass.model") throw DataError("not a model file");
      if (j.at("version").get<int>() != kFormatVersion) throw DataError("unsupported model version");
      TopicModel m;
      m.topics_ = j.at("topics").get<std::size_t>();
      m.vocab_size_ = j.at("vocabulary_size").get<std::size_t>();
      m.alpha_ = j.at("alpha").get<double>();
      m.beta_ = j.at("beta").get<double>();
      m.seed_ = j.at("seed").get<std::uint64_t>();
      m.sweeps_ = j.at("sweeps").get<std::size_t>();
      m.vocabulary_hash_ = j.at("vocabulary_hash").get<std::string>();
      m.vocabulary_tokens_ = j.at("vocabulary").get<std::vector<std::string>>();
      {
        Vocabulary check;
        for (const auto& t : m.vocabulary_tokens_) check.insert(t);
        if (check.size() != m.vocab_size_ || check.hash() != m.vocabulary_hash_)
          throw DataError("model vocabulary does not match its recorded hash");
      }
      if (m.topics_ < 1) throw DataError("model has no topics");
      const auto& tw = j.at("topic_word_counts");
      if (tw.size() != m.topics_) throw DataError("topic_word_counts has wrong row count");
      m.word_topic_.assign(m.vocab_size_ * m.topics_, 0);
      for (std::size_t k = 0; k < m.topics_; ++k) {
        const auto row = tw[k].get<std::vector<std::int32_t>>();
        if (row.size() != m.vocab_size_) throw DataError("topic_word_counts has wrong row length");
        for (std::size_t w = 0; w < m.vocab_size_; ++w) m.word_topic_[w * m.topics_ + k] = row[w];
      }
      m.topic_totals_ = j.at("topic_totals").get<std::vector<std::int64_t>>();
      if (m.topic_totals_.size() != m.topics_) throw DataError("topic_totals has wrong length");
      for (const auto& row : j.at("doc_topic_counts")) {
        const auto r = row.get<std::vector<std::int32_t>>();
        if (r.size() != m.topics_) throw DataError("doc_topic_counts has wrong row length");
        m.doc_topic_.insert(m.doc_topic_.end(), r.begin(), r.end());
      }
      for (const auto& jd : j.at("assignments"))
        m.docs_.push_back({jd.at("tokens").get<std::vector<TokenId>>(), jd.at("topics").get<std::vector<std::uint32_t>>()});
      if (m.doc_topic_.size() != m.docs_.size() * m.topics_) throw DataError("doc_topic_counts has wrong row count");
      try {
        m.check_invariants();
      } catch (const InvariantViolation& e) {
        throw DataError(std::string("inconsistent model file: ") + e.what());
      }
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed model file: ") + e.what());
    }
  }

  static TopicModel deserialize(std::string_view bytes) {
    try {
      return from_json(nlohmann::json::parse(bytes));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
  }

  void save(const std::filesystem::path& path) const { write_file(path, serialize()); }
  static TopicModel load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

  friend TopicModel train(const Corpus& corpus, const LdaParams& params, const SweepObserver& observer);

 private:
  struct DocState {
    std::vector<TokenId> tokens;
    std::vector<std::uint32_t> topics;
  };

  void check_topic(std::size_t k) const {
    if (k >= topics_) throw std::out_of_range("topic " + std::to_string(k) + " out of range");
  }

  static std::size_t draw(std::span<const double> cumulative, double u) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return it == cumulative.end() ? cumulative.size() - 1 : static_cast<std::size_t>(it - cumulative.begin());
  }

  std::size_t topics_ = 0;
  std::size_t vocab_size_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::uint64_t seed_ = 0;
  std::size_t sweeps_ = 0;
  std::string vocabulary_hash_;
  std::vector<std::string> vocabulary_tokens_;
  std::vector<std::int32_t> word_topic_;   // V x K
  std::vector<std::int64_t> topic_totals_; // K
  std::vector<std::int32_t> doc_topic_;    // D x K
  std::vector<DocState> docs_;
};

/// Collapsed Gibbs sampling over every document of the corpus, labeled and
/// unlabeled alike. Deterministic given params.seed.
inline TopicModel train(const Corpus& corpus, const LdaParams& params, const SweepObserver& observer = {}) {
  if (corpus.empty() || corpus.total_tokens() == 0) throw DataError("cannot train on an empty corpus");
  if (params.topics < 1) throw DataError("topic count must be at least 1");
  if (params.sweeps < 1) throw DataError("sweep count must be at least 1");
  if (!(params.beta > 0.0)) throw DataError("beta must be positive");

  TopicModel m;
  const std::size_t K = params.topics;
  m.topics_ = K;
  m.vocab_size_ = corpus.vocabulary().size();
  m.alpha_ = params.resolved_alpha();
  m.beta_ = params.beta;
  m.seed_ = params.seed;
  m.sweeps_ = params.sweeps;
  m.vocabulary_hash_ = corpus.vocabulary().hash();
  m.vocabulary_tokens_.assign(corpus.vocabulary().tokens().begin(), corpus.vocabulary().tokens().end());
  m.word_topic_.assign(m.vocab_size_ * K, 0);
  m.topic_totals_.assign(K, 0);
  m.doc_topic_.assign(corpus.size() * K, 0);
  m.docs_.reserve(corpus.size());

  Rng rng(params.seed);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& tokens = corpus[d].tokens;
    TopicModel::DocState state{tokens, std::vector<std::uint32_t>(tokens.size())};
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto k = static_cast<std::uint32_t>(rng.below(K));
      state.topics[i] = k;
      ++m.word_topic_[tokens[i] * K + k];
      ++m.topic_totals_[k];
      ++m.doc_topic_[d * K + k];
    }
    m.docs_.push_back(std::move(state));
  }

  const double alpha = m.alpha_;
  const double beta = m.beta_;
  const double vbeta = static_cast<double>(m.vocab_size_) * beta;
  std::vector<double> cumulative(K);
  for (std::size_t sweep = 0; sweep < params.sweeps; ++sweep) {
    for (std::size_t d = 0; d < m.docs_.size(); ++d) {
      auto& doc = m.docs_[d];
      std::int32_t* doc_row = &m.doc_topic_[d * K];
      for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        const TokenId w = doc.tokens[i];
        std::int32_t* word_row = &m.word_topic_[static_cast<std::size_t>(w) * K];
        std::uint32_t k = doc.topics[i];
        --word_row[k];
        --m.topic_totals_[k];
        --doc_row[k];
        double total = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          total += (doc_row[t] + alpha) * (word_row[t] + beta) / (static_cast<double>(m.topic_totals_[t]) + vbeta);
          cumulative[t] = total;
        }
        k = static_cast<std::uint32_t>(TopicModel::draw(cumulative, rng.uniform() * total));
        doc.topics[i] = k;
        ++word_row[k];
        ++m.topic_totals_[k];
        ++doc_row[k];
      }
    }
    if (observer) observer(m, sweep);
  }
  return m;
}

}  // namespace typiclass

#endif  // TYPICLASS_TOPIC_MODEL_HPP
