#ifndef TYPICLASS_CLASSIFIER_HPP
#define TYPICLASS_CLASSIFIER_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "typiclass/category.hpp"
#include "typiclass/corpus.hpp"
#include "typiclass/error.hpp"
#include "typiclass/rng.hpp"
#include "typiclass/topic_model.hpp"

namespace typiclass {

inline constexpr double kDefaultThreshold = 0.275;

/// Euclidean distance between two proportion vectors.
inline double distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("dimension mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = y[i] - x[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

inline double distance(const ProportionVector& x, const ProportionVector& y) { return distance(x.span(), y.span()); }

/// A human-annotated document placed in proportion space.
struct Seed {
  std::string id;
  CategoryLabel label;
  ProportionVector vector;
};

struct Neighbor {
  std::string id;
  CategoryLabel label;
  double distance;
};

/// Closest seed; equal distances resolve to the smallest id, so the answer
/// does not depend on seed order.
inline Neighbor nearest_neighbor(const ProportionVector& u, std::span<const Seed> seeds) {
  if (seeds.empty()) throw DataError("nearest neighbor needs at least one seed");
  const Seed* best = nullptr;
  double best_distance = 0.0;
  for (const auto& s : seeds) {
    const double d = distance(u, s.vector);
    if (!best || d < best_distance || (d == best_distance && s.id < best->id)) {
      best = &s;
      best_distance = d;
    }
  }
  return {best->id, best->label, best_distance};
}

/// Mean distance from u to every seed of one category.
inline double typicality(const ProportionVector& u, std::span<const ProportionVector> category_seeds) {
  if (category_seeds.empty()) throw UndetectableCategory("category has no seeds; typicality is undefined");
  double sum = 0.0;
  for (const auto& s : category_seeds) sum += distance(u, s);
  return sum / static_cast<double>(category_seeds.size());
}

struct ClassificationResult {
  std::string doc_id;
  std::string neighbor_id;
  CategoryLabel category;
  double nn_distance;
  double typicality;
  bool accepted;

  friend bool operator==(const ClassificationResult&, const ClassificationResult&) = default;
};

/// Seeds indexed by category for repeated classification.
class SeedSet {
 public:
  explicit SeedSet(std::vector<Seed> seeds) : seeds_(std::move(seeds)) {
    if (seeds_.empty()) throw DataError("seed set is empty");
    for (const auto& s : seeds_) by_category_[s.label.index()].push_back(s.vector);
  }

  std::span<const Seed> seeds() const { return seeds_; }

  std::span<const ProportionVector> category(CategoryLabel label) const { return by_category_[label.index()]; }

  std::size_t count(CategoryLabel label) const { return by_category_[label.index()].size(); }

 private:
  std::vector<Seed> seeds_;
  std::array<std::vector<ProportionVector>, kCategoryCount> by_category_;
};

/// Label u with its nearest seed's category, then accept iff its typicality
/// against that category's seeds is at most threshold.
inline ClassificationResult classify(const std::string& id, const ProportionVector& u, const SeedSet& seeds,
                                     double threshold = kDefaultThreshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
  const Neighbor nn = nearest_neighbor(u, seeds.seeds());
  const double t = typicality(u, seeds.category(nn.label));
  return {id, nn.id, nn.label, nn.distance, t, t <= threshold};
}

enum class Representation { topic_proportion, word_proportion };

inline std::string_view representation_name(Representation r) {
  return r == Representation::topic_proportion ? "topic-proportion" : "word-proportion";
}

inline Representation parse_representation(std::string_view s) {
  if (s == "topic-proportion" || s == "topic") return Representation::topic_proportion;
  if (s == "word-proportion" || s == "word") return Representation::word_proportion;
  throw DataError("unknown representation '" + std::string(s) + "'");
}

/// Normalized bag of words over the corpus vocabulary.
inline ProportionVector word_proportions(const Document& doc, std::size_t vocabulary_size) {
  if (doc.tokens.empty()) throw UnembeddableDocument("document " + doc.id + " has no tokens");
  ProportionVector p{std::vector<double>(vocabulary_size, 0.0)};
  for (TokenId t : doc.tokens) p.values.at(t) += 1.0;
  for (double& v : p.values) v /= static_cast<double>(doc.tokens.size());
  return p;
}

/// Embed document i of the training corpus. Topic mode reads the model's
/// stored counts for that document.
inline ProportionVector embed(const Corpus& corpus, const TopicModel& model, std::size_t i, Representation mode) {
  if (mode == Representation::word_proportion) return word_proportions(corpus[i], corpus.vocabulary().size());
  return model.document_proportions(i);
}

struct ClassifyOptions {
  double threshold = kDefaultThreshold;
  Representation representation = Representation::topic_proportion;
};

/// Classify every unlabeled document of a jointly trained corpus against its
/// labeled documents. Output follows corpus order; rejected documents are
/// kept with accepted = false.
inline std::vector<ClassificationResult> classify_corpus(const Corpus& corpus, const TopicModel& model,
                                                         const ClassifyOptions& options = {}) {
  model.check_vocabulary(corpus.vocabulary());
  if (model.documents() != corpus.size()) throw DataError("model was trained on a different corpus (document count)");
  if (corpus.labeled_ids().empty()) throw DataError("corpus has no labeled documents");
  std::vector<Seed> seeds;
  for (std::size_t i : corpus.labeled_ids())
    seeds.push_back({corpus[i].id, *corpus[i].gold_label, embed(corpus, model, i, options.representation)});
  const SeedSet seed_set(std::move(seeds));
  std::vector<ClassificationResult> out;
  out.reserve(corpus.unlabeled_ids().size());
  for (std::size_t i : corpus.unlabeled_ids())
    out.push_back(classify(corpus[i].id, embed(corpus, model, i, options.representation), seed_set, options.threshold));
  return out;
}

/// Number of accepted results.
inline std::size_t accepted_count(std::span<const ClassificationResult> results) {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const auto& r) { return r.accepted; }));
}

/// Re-apply a threshold to existing results without recomputing distances.
inline std::vector<ClassificationResult> rethreshold(std::vector<ClassificationResult> results, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
  for (auto& r : results) r.accepted = r.typicality <= threshold;
  return results;
}

// ---------------------------------------------------------------------------
// Results file: tab-separated with a header row.

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError(where + ": invalid number '" + std::string(s) + "'");
  return v;
}

inline constexpr std::string_view kResultsHeader = "doc_id\tneighbor_id\tcategory\tnn_distance\ttypicality\taccepted";

inline void write_results(std::ostream& out, std::span<const ClassificationResult> results) {
  out << kResultsHeader << '\n';
  for (const auto& r : results)
    out << r.doc_id << '\t' << r.neighbor_id << '\t' << r.category.name() << '\t' << format_double(r.nn_distance)
        << '\t' << format_double(r.typicality) << '\t' << (r.accepted ? "true" : "false") << '\n';
}

inline std::string results_to_string(std::span<const ClassificationResult> results) {
  std::ostringstream ss;
  write_results(ss, results);
  return ss.str();
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

inline std::vector<ClassificationResult> parse_results(std::istream& in) {
  std::vector<ClassificationResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == kResultsHeader) continue;
    const std::string where = "results line " + std::to_string(line_no);
    const auto f = split_tabs(line);
    if (f.size() != 6) throw DataError(where + ": expected 6 fields");
    bool accepted;
    if (f[5] == "true")
      accepted = true;
    else if (f[5] == "false")
      accepted = false;
    else
      throw DataError(where + ": accepted must be true or false");
    out.push_back({f[0], f[1], CategoryLabel::parse(f[2]), parse_double(f[3], where), parse_double(f[4], where),
                   accepted});
  }
  return out;
}

inline std::vector<ClassificationResult> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_results(in);
}

// ---------------------------------------------------------------------------
// Threshold calibration.

enum class Judgment { match, partial_match, mismatch };

inline std::string_view judgment_name(Judgment j) {
  switch (j) {
    case Judgment::match: return "match";
    case Judgment::partial_match: return "partial_match";
    case Judgment::mismatch: return "mismatch";
  }
  return "?";
}

inline std::optional<Judgment> try_parse_judgment(std::string_view s) {
  if (s == "match" || s == "m") return Judgment::match;
  if (s == "partial_match" || s == "partial" || s == "p") return Judgment::partial_match;
  if (s == "mismatch" || s == "x") return Judgment::mismatch;
  return std::nullopt;
}

/// One typicality band. The first band is the closed interval [0, upper];
/// later bands are half-open (lower, upper], so a band edge belongs to the
/// band below it, agreeing with the accept rule typicality <= threshold.
struct Band {
  double lower;
  double upper;
  bool bounded;  // false for the open-ended band above the last edge
  std::size_t count = 0;
  std::vector<std::string> exemplars;
  std::optional<Judgment> judgment;
};

struct BandTable {
  std::vector<Band> bands;

  /// Index of the band holding a typicality value.
  std::size_t band_of(double t) const {
    for (std::size_t b = 0; b + 1 < bands.size(); ++b)
      if (t <= bands[b].upper) return b;
    return bands.size() - 1;
  }
};

/// Partition results by typicality at the given edges and sample up to
/// exemplars_per_band document ids per band for review.
inline BandTable band_table(std::span<const ClassificationResult> results, std::span<const double> edges,
                            std::size_t exemplars_per_band = 5, std::uint64_t seed = 1) {
  if (edges.empty()) throw std::invalid_argument("at least one band edge is required");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!(edges[i] >= 0.0)) throw std::invalid_argument("band edges must be non-negative");
    if (i > 0 && !(edges[i] > edges[i - 1])) throw std::invalid_argument("band edges must be strictly increasing");
  }
  double max_seen = edges.back();
  for (const auto& r : results) max_seen = std::max(max_seen, r.typicality);

  BandTable table;
  double lower = 0.0;
  for (double e : edges) {
    table.bands.push_back({lower, e, true, 0, {}, std::nullopt});
    lower = e;
  }
  table.bands.push_back({lower, max_seen, false, 0, {}, std::nullopt});

  std::vector<std::vector<std::size_t>> members(table.bands.size());
  for (std::size_t i = 0; i < results.size(); ++i) members[table.band_of(results[i].typicality)].push_back(i);

  Rng rng(seed);
  for (std::size_t b = 0; b < table.bands.size(); ++b) {
    auto& band = table.bands[b];
    band.count = members[b].size();
    auto picks = rng.sample_without_replacement(members[b].size(), exemplars_per_band);
    std::sort(picks.begin(), picks.end());
    for (std::size_t p : picks) band.exemplars.push_back(results[members[b][p]].doc_id);
  }
  return table;
}

/// Record per-exemplar judgments. A band's judgment is the worst judgment
/// among its exemplars; bands with no judged exemplar stay unjudged.
inline void apply_judgments(BandTable& table, const std::map<std::string, Judgment>& judgments) {
  for (auto& band : table.bands) {
    band.judgment.reset();
    for (const auto& id : band.exemplars) {
      auto it = judgments.find(id);
      if (it == judgments.end()) continue;
      if (!band.judgment || static_cast<int>(it->second) > static_cast<int>(*band.judgment)) band.judgment = it->second;
    }
  }
}

/// Largest band edge such that every band at or below it was judged at
/// least a partial match. Bands without exemplars do not block. Returns
/// nothing when even the first band fails.
inline std::optional<double> recommend_threshold(const BandTable& table) {
  std::optional<double> best;
  for (const auto& band : table.bands) {
    if (!band.bounded) break;
    if (band.judgment == Judgment::mismatch) break;
    if (!band.exemplars.empty() && !band.judgment) break;
    best = band.upper;
  }
  return best;
}

inline void print_band_table(std::ostream& out, const BandTable& table) {
  out << "band\tcount\tjudgment\texemplars\n";
  for (const auto& b : table.bands) {
    std::ostringstream range;
    range << (&b == &table.bands.front() ? "[" : "(") << format_double(b.lower) << ", "
          << (b.bounded ? format_double(b.upper) : "max " + format_double(b.upper)) << "]";
    out << range.str() << '\t' << b.count << '\t' << (b.judgment ? judgment_name(*b.judgment) : "-") << '\t';
    for (std::size_t i = 0; i < b.exemplars.size(); ++i) out << (i ? "," : "") << b.exemplars[i];
    out << '\n';
  }
}

}  // namespace typiclass

#endif  // TYPICLASS_CLASSIFIER_HPP
