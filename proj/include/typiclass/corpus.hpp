#ifndef TYPICLASS_CORPUS_HPP
#define TYPICLASS_CORPUS_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "typiclass/category.hpp"
#include "typiclass/checksum.hpp"
#include "typiclass/error.hpp"
#include "typiclass/rng.hpp"
#include "typiclass/text.hpp"

namespace typiclass {

using TokenId = std::uint32_t;

/// One input row before any processing.
struct Record {
  std::string id;
  std::string text;
  std::optional<std::string> label;
};

struct Document {
  std::string id;
  std::string raw_text;
  std::string normalized_text;
  std::vector<TokenId> tokens;
  std::optional<CategoryLabel> gold_label;

  bool labeled() const { return gold_label.has_value(); }
};

/// Bidirectional token/id map. Ids are dense in [0, size()) and assigned in
/// first-occurrence order.
class Vocabulary {
 public:
  std::size_t size() const { return id_to_token_.size(); }

  std::optional<TokenId> find(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    if (it == token_to_id_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token(TokenId id) const { return id_to_token_.at(id); }
  std::uint32_t document_frequency(TokenId id) const { return document_frequency_.at(id); }
  std::span<const std::string> tokens() const { return id_to_token_; }

  /// SHA-256 over the newline-joined token list; identifies the id mapping.
  std::string hash() const {
    std::string joined;
    for (const auto& t : id_to_token_) {
      joined += t;
      joined.push_back('\n');
    }
    return sha256_hex(joined);
  }

  TokenId insert(const std::string& token) {
    auto [it, fresh] = token_to_id_.try_emplace(token, static_cast<TokenId>(id_to_token_.size()));
    if (fresh) {
      id_to_token_.push_back(token);
      document_frequency_.push_back(0);
    }
    return it->second;
  }

  void count_document(std::span<const TokenId> tokens) {
    std::unordered_set<TokenId> seen(tokens.begin(), tokens.end());
    for (TokenId id : seen) ++document_frequency_.at(id);
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_token_ == b.id_to_token_ && a.document_frequency_ == b.document_frequency_;
  }

 private:
  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
  std::vector<std::uint32_t> document_frequency_;

  friend class Corpus;
};

struct CorpusOptions {
  std::size_t min_tokens = 5;
  std::size_t min_token_freq = 1;
  NormalizeRules rules{};
};

/// Drop decision of the short-document filter.
inline bool filter_short(std::size_t token_count, std::size_t min_tokens = 5) { return token_count < min_tokens; }

inline bool filter_short(const Document& doc, std::size_t min_tokens = 5) {
  return filter_short(doc.tokens.size(), min_tokens);
}

/// Immutable, encoded document collection.
class Corpus {
 public:
  static constexpr int kFormatVersion = 1;

  Corpus() = default;

  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }
  const std::vector<Document>& documents() const { return documents_; }
  const Document& operator[](std::size_t i) const { return documents_.at(i); }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  std::size_t min_tokens() const { return min_tokens_; }

  const std::vector<std::size_t>& labeled_ids() const { return labeled_; }
  const std::vector<std::size_t>& unlabeled_ids() const { return unlabeled_; }

  std::size_t total_tokens() const {
    std::size_t n = 0;
    for (const auto& d : documents_) n += d.tokens.size();
    return n;
  }

  std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < documents_.size(); ++i)
      if (documents_[i].id == id) return i;
    return std::nullopt;
  }

  /// Token strings of one document.
  std::vector<std::string> token_strings(std::size_t i) const {
    std::vector<std::string> out;
    for (TokenId t : documents_.at(i).tokens) out.push_back(vocabulary_.token(t));
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& d : documents_) {
      docs.push_back({{"id", d.id},
                      {"raw_text", d.raw_text},
                      {"normalized_text", d.normalized_text},
                      {"tokens", d.tokens},
                      {"label", d.gold_label ? nlohmann::json(std::string(d.gold_label->name())) : nlohmann::json()}});
    }
    return {{"format", "typiclass.corpus"},
            {"version", kFormatVersion},
            {"min_tokens", min_tokens_},
            {"vocabulary", {{"tokens", vocabulary_.id_to_token_}, {"document_frequency", vocabulary_.document_frequency_}}},
            {"documents", std::move(docs)}};
  }

  std::string serialize() const { return to_json().dump(); }

  static Corpus from_json(const nlohmann::json& j) {
    try {
      if (j.at("format") != "typiclass.corpus") throw DataError("not a corpus file");
      if (j.at("version").get<int>() != kFormatVersion)
        throw DataError("unsupported corpus version " + j.at("version").dump());
      Corpus c;
      c.min_tokens_ = j.at("min_tokens").get<std::size_t>();
      const auto tokens = j.at("vocabulary").at("tokens").get<std::vector<std::string>>();
      const auto df = j.at("vocabulary").at("document_frequency").get<std::vector<std::uint32_t>>();
      if (tokens.size() != df.size()) throw DataError("vocabulary arrays differ in length");
      for (const auto& t : tokens) {
        if (c.vocabulary_.insert(t) != c.vocabulary_.size() - 1) throw DataError("duplicate vocabulary token '" + t + "'");
      }
      c.vocabulary_.document_frequency_ = df;
      for (const auto& jd : j.at("documents")) {
        Document d;
        d.id = jd.at("id").get<std::string>();
        d.raw_text = jd.at("raw_text").get<std::string>();
        d.normalized_text = jd.at("normalized_text").get<std::string>();
        d.tokens = jd.at("tokens").get<std::vector<TokenId>>();
        for (TokenId t : d.tokens)
          if (t >= tokens.size()) throw DataError("document " + d.id + " has out-of-range token id");
        if (!jd.at("label").is_null()) d.gold_label = CategoryLabel::parse(jd.at("label").get<std::string>());
        c.documents_.push_back(std::move(d));
      }
      c.index();
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed corpus file: ") + e.what());
    }
  }

  static Corpus deserialize(std::string_view bytes) {
    try {
      return from_json(nlohmann::json::parse(bytes));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(std::string("corpus file is not valid JSON: ") + e.what());
    }
  }

  void save(const std::filesystem::path& path) const { write_file(path, serialize()); }
  static Corpus load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

  /// Tokenized document awaiting vocabulary encoding.
  struct Pending {
    std::string id;
    std::string raw_text;
    std::string normalized_text;
    std::vector<std::string> tokens;
    std::optional<CategoryLabel> gold_label;
  };

  /// Encode tokenized documents: prune tokens whose corpus frequency is
  /// below min_token_freq, then drop documents left shorter than min_tokens.
  static Corpus assemble(std::vector<Pending> pending, std::size_t min_tokens, std::size_t min_token_freq) {
    if (min_token_freq > 1) {
      std::unordered_map<std::string, std::size_t> freq;
      for (const auto& p : pending)
        for (const auto& t : p.tokens) ++freq[t];
      for (auto& p : pending)
        std::erase_if(p.tokens, [&](const std::string& t) { return freq[t] < min_token_freq; });
    }
    Corpus c;
    c.min_tokens_ = min_tokens;
    for (auto& p : pending) {
      if (p.tokens.empty() || filter_short(p.tokens.size(), min_tokens)) continue;
      Document d{std::move(p.id), std::move(p.raw_text), std::move(p.normalized_text), {}, p.gold_label};
      d.tokens.reserve(p.tokens.size());
      for (const auto& t : p.tokens) d.tokens.push_back(c.vocabulary_.insert(t));
      c.vocabulary_.count_document(d.tokens);
      c.documents_.push_back(std::move(d));
    }
    c.index();
    return c;
  }

  /// Re-encode a subset of this corpus (by document index) with a fresh
  /// vocabulary restricted to the tokens the subset uses.
  Corpus subset(std::span<const std::size_t> indices) const {
    std::vector<Pending> pending;
    pending.reserve(indices.size());
    for (std::size_t i : indices) {
      const auto& d = documents_.at(i);
      pending.push_back({d.id, d.raw_text, d.normalized_text, token_strings(i), d.gold_label});
    }
    return assemble(std::move(pending), min_tokens_, 1);
  }

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.serialize() == b.serialize(); }

 private:
  void index() {
    labeled_.clear();
    unlabeled_.clear();
    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < documents_.size(); ++i) {
      if (!ids.insert(documents_[i].id).second) throw DataError("duplicate document id '" + documents_[i].id + "'");
      (documents_[i].labeled() ? labeled_ : unlabeled_).push_back(i);
    }
  }

  std::vector<Document> documents_;
  Vocabulary vocabulary_;
  std::vector<std::size_t> labeled_;
  std::vector<std::size_t> unlabeled_;
  std::size_t min_tokens_ = 5;
};

/// Normalize, tokenize, filter and encode a record stream.
/// Throws DataError on duplicate ids and on malformed records (empty id or
/// unknown label), naming the zero-based record index.
inline Corpus build_corpus(std::span<const Record> records, const CorpusOptions& options = {}) {
  const Normalizer normalizer(options.rules);
  std::unordered_set<std::string> ids;
  std::vector<Corpus::Pending> pending;
  pending.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    const std::string where = "record " + std::to_string(i);
    if (r.id.empty()) throw DataError(where + ": empty id");
    if (!ids.insert(r.id).second) throw DataError(where + ": duplicate id '" + r.id + "'");
    std::optional<CategoryLabel> label;
    if (r.label && !r.label->empty()) {
      label = CategoryLabel::try_parse(*r.label);
      if (!label) throw DataError(where + ": unknown category label '" + *r.label + "'");
    }
    std::string normalized = normalizer(r.text);
    std::vector<std::string> tokens = tokenize(normalized);
    if (filter_short(tokens.size(), options.min_tokens)) continue;
    pending.push_back({r.id, r.text, std::move(normalized), std::move(tokens), label});
  }
  return Corpus::assemble(std::move(pending), options.min_tokens, options.min_token_freq);
}

/// Uniform sample of n documents, without replacement, from the documents
/// with distinct normalized text (first occurrence wins). Sampled documents
/// keep their original relative order.
inline Corpus sample_distinct(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> distinct;
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (seen.insert(corpus[i].normalized_text).second) distinct.push_back(i);
  if (n > distinct.size())
    throw InsufficientData("requested " + std::to_string(n) + " distinct documents but only " +
                           std::to_string(distinct.size()) + " exist");
  Rng rng(seed);
  std::vector<std::size_t> picks = rng.sample_without_replacement(distinct.size(), n);
  std::sort(picks.begin(), picks.end());
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  for (std::size_t p : picks) chosen.push_back(distinct[p]);
  return corpus.subset(chosen);
}

// ---------------------------------------------------------------------------
// Record input: tab-separated (id, text, optional label; optional header
// line starting with "id\ttext") or JSON lines with the same field names.

enum class RecordFormat { tsv, jsonl };

inline RecordFormat guess_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") ? RecordFormat::jsonl : RecordFormat::tsv;
}

inline std::vector<Record> parse_records(std::istream& in, RecordFormat format) {
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + " (record " + std::to_string(out.size()) + ")";
    if (format == RecordFormat::tsv) {
      if (out.empty() && line.rfind("id\ttext", 0) == 0) continue;
      std::vector<std::string> fields;
      std::size_t start = 0;
      for (;;) {
        const std::size_t tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
      }
      if (fields.size() < 2 || fields.size() > 3) throw DataError(where + ": expected 2 or 3 tab-separated fields");
      Record r{fields[0], fields[1], std::nullopt};
      if (fields.size() == 3 && !fields[2].empty()) r.label = fields[2];
      out.push_back(std::move(r));
    } else {
      try {
        const auto j = nlohmann::json::parse(line);
        Record r;
        const auto& id = j.at("id");
        r.id = id.is_string() ? id.get<std::string>() : id.dump();
        r.text = j.at("text").get<std::string>();
        if (j.contains("label") && !j["label"].is_null()) r.label = j["label"].get<std::string>();
        out.push_back(std::move(r));
      } catch (const nlohmann::json::exception& e) {
        throw DataError(where + ": " + e.what());
      }
    }
  }
  return out;
}

inline std::vector<Record> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_records(in, guess_format(path));
}

}  // namespace typiclass

#endif  // TYPICLASS_CORPUS_HPP
