#ifndef TYPICLASS_METRICS_HPP
#define TYPICLASS_METRICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "typiclass/category.hpp"
#include "typiclass/classifier.hpp"
#include "typiclass/error.hpp"
#include "typiclass/rng.hpp"

namespace typiclass {

/// Fraction of positions where two codings agree.
template <typename Label>
double percent_agreement(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw std::invalid_argument("label lists differ in length");
  if (a.empty()) throw std::invalid_argument("label lists are empty");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += (a[i] == b[i]) ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

template <typename Label>
double percent_agreement(const std::vector<Label>& a, const std::vector<Label>& b) {
  return percent_agreement(std::span<const Label>(a), std::span<const Label>(b));
}

/// Coders-by-units rating matrix; a missing rating is std::nullopt.
template <typename Label>
class ReliabilityData {
 public:
  using Row = std::vector<std::optional<Label>>;

  ReliabilityData(std::vector<std::string> units, std::vector<Row> ratings, std::set<Label> label_domain)
      : units_(std::move(units)), ratings_(std::move(ratings)), domain_(std::move(label_domain)) {
    if (ratings_.size() < 2) throw DataError("reliability data needs at least two coders");
    bool pairable = false;
    for (const auto& row : ratings_) {
      if (row.size() != units_.size()) throw DataError("every coder must have one slot per unit");
      for (const auto& v : row)
        if (v && !domain_.count(*v)) throw DataError("rating outside the label domain");
    }
    for (std::size_t u = 0; u < units_.size() && !pairable; ++u) pairable = rated_by(u) >= 2;
    if (!pairable) throw DataError("no unit is rated by two or more coders");
  }

  /// Two complete codings of the same units.
  static ReliabilityData from_pair(std::span<const Label> a, std::span<const Label> b) {
    if (a.size() != b.size()) throw DataError("codings differ in length");
    std::vector<std::string> units;
    Row ra, rb;
    std::set<Label> domain;
    for (std::size_t i = 0; i < a.size(); ++i) {
      units.push_back(std::to_string(i));
      ra.push_back(a[i]);
      rb.push_back(b[i]);
      domain.insert(a[i]);
      domain.insert(b[i]);
    }
    return ReliabilityData(std::move(units), {std::move(ra), std::move(rb)}, std::move(domain));
  }

  std::size_t unit_count() const { return units_.size(); }
  std::size_t coder_count() const { return ratings_.size(); }
  const std::set<Label>& label_domain() const { return domain_; }
  const std::optional<Label>& rating(std::size_t coder, std::size_t unit) const { return ratings_[coder][unit]; }

  std::size_t rated_by(std::size_t unit) const {
    std::size_t n = 0;
    for (const auto& row : ratings_) n += row[unit] ? 1 : 0;
    return n;
  }

 private:
  std::vector<std::string> units_;
  std::vector<Row> ratings_;
  std::set<Label> domain_;
};

/// Krippendorff's alpha with the nominal difference function, computed from
/// the coincidence matrix of pairable values.
template <typename Label>
double krippendorff_alpha(const ReliabilityData<Label>& data) {
  std::map<Label, std::size_t> index;
  for (const auto& l : data.label_domain()) index.emplace(l, index.size());
  const std::size_t L = index.size();

  // coincidence[c][k]: pairs of values (c, k) from different coders within
  // a unit, each unit weighted by 1 / (m_u - 1).
  std::vector<double> coincidence(L * L, 0.0);
  std::vector<double> unit_counts(L);
  for (std::size_t u = 0; u < data.unit_count(); ++u) {
    std::fill(unit_counts.begin(), unit_counts.end(), 0.0);
    std::size_t m = 0;
    for (std::size_t c = 0; c < data.coder_count(); ++c) {
      if (const auto& v = data.rating(c, u)) {
        unit_counts[index.at(*v)] += 1.0;
        ++m;
      }
    }
    if (m < 2) continue;
    const double weight = 1.0 / static_cast<double>(m - 1);
    for (std::size_t c = 0; c < L; ++c) {
      if (unit_counts[c] == 0.0) continue;
      for (std::size_t k = 0; k < L; ++k) {
        const double pairs = unit_counts[c] * (unit_counts[k] - (c == k ? 1.0 : 0.0));
        coincidence[c * L + k] += pairs * weight;
      }
    }
  }

  std::vector<double> marginal(L, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < L; ++c)
    for (std::size_t k = 0; k < L; ++k) marginal[c] += coincidence[c * L + k];
  for (double v : marginal) n += v;
  if (n <= 0.0) throw DataError("no pairable values");

  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t c = 0; c < L; ++c) {
    for (std::size_t k = 0; k < L; ++k) {
      if (c == k) continue;
      observed += coincidence[c * L + k];
      expected += marginal[c] * marginal[k];
    }
  }
  if (expected == 0.0) return 1.0;  // a single value throughout: perfect agreement
  return 1.0 - (n - 1.0) * observed / expected;
}

// ---------------------------------------------------------------------------
// Frequency and accuracy reports.

struct CategoryRow {
  CategoryLabel category;
  std::size_t accepted = 0;
  double frequency = 0.0;
  std::size_t correct = 0;
  /// Empty when the category has no accepted documents to evaluate.
  std::optional<double> accuracy;
};

struct GroupRow {
  Group group;
  std::size_t accepted = 0;
  double frequency = 0.0;
};

struct AgreementReport {
  std::size_t accepted_total = 0;
  std::vector<CategoryRow> per_category;  // all 13, table order
  std::array<GroupRow, 3> groups{{{Group::attitude, 0, 0.0}, {Group::subjective_norm, 0, 0.0}, {Group::pbc, 0, 0.0}}};
  bool has_accuracy = false;
  std::size_t evaluated = 0;
  double overall_accuracy = 0.0;
  std::optional<double> percent_agreement;
  std::optional<double> krippendorff_alpha;
};

/// All-zero report, used by the pipeline when nothing was accepted.
inline AgreementReport empty_report() {
  AgreementReport report;
  for (auto c : all_categories()) report.per_category.push_back({c, 0, 0.0, 0, std::nullopt});
  return report;
}

/// Per-category and per-group share of the accepted documents.
inline AgreementReport frequency_report(std::span<const ClassificationResult> results) {
  AgreementReport report = empty_report();
  for (const auto& r : results) {
    if (!r.accepted) continue;
    ++report.per_category[r.category.index()].accepted;
    ++report.groups[static_cast<std::size_t>(r.category.group())].accepted;
    ++report.accepted_total;
  }
  if (report.accepted_total == 0) throw DataError("no accepted documents to report on");
  const double total = static_cast<double>(report.accepted_total);
  for (auto& row : report.per_category) row.frequency = static_cast<double>(row.accepted) / total;
  for (auto& g : report.groups) g.frequency = static_cast<double>(g.accepted) / total;
  return report;
}

/// Frequencies plus accuracy of accepted documents against gold labels.
/// Throws DataError naming every accepted document without a gold label.
inline AgreementReport accuracy_report(std::span<const ClassificationResult> results,
                                       const std::map<std::string, CategoryLabel>& gold) {
  AgreementReport report = frequency_report(results);
  std::vector<std::string> missing;
  std::vector<CategoryLabel> machine, human;
  for (const auto& r : results) {
    if (!r.accepted) continue;
    auto it = gold.find(r.doc_id);
    if (it == gold.end()) {
      missing.push_back(r.doc_id);
      continue;
    }
    machine.push_back(r.category);
    human.push_back(it->second);
    if (it->second == r.category) ++report.per_category[r.category.index()].correct;
  }
  if (!missing.empty()) {
    std::string msg = "gold labels missing for " + std::to_string(missing.size()) + " accepted documents:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw DataError(msg);
  }
  std::size_t correct = 0;
  for (auto& row : report.per_category) {
    if (row.accepted > 0) row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.accepted);
    correct += row.correct;
  }
  report.has_accuracy = true;
  report.evaluated = report.accepted_total;
  report.overall_accuracy = static_cast<double>(correct) / static_cast<double>(report.accepted_total);
  report.percent_agreement = typiclass::percent_agreement(machine, human);
  report.krippendorff_alpha = krippendorff_alpha(
      ReliabilityData<CategoryLabel>::from_pair(std::span<const CategoryLabel>(machine), human));
  return report;
}

/// Uniform sample, without replacement, of round(fraction * accepted)
/// accepted results, kept in input order.
inline std::vector<ClassificationResult> validation_sample(std::span<const ClassificationResult> results,
                                                           double fraction = 0.25, std::uint64_t seed = 1) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must lie in (0, 1]");
  std::vector<const ClassificationResult*> accepted;
  for (const auto& r : results)
    if (r.accepted) accepted.push_back(&r);
  if (accepted.empty()) throw DataError("no accepted documents to sample");
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(accepted.size())));
  Rng rng(seed);
  auto picks = rng.sample_without_replacement(accepted.size(), n);
  std::sort(picks.begin(), picks.end());
  std::vector<ClassificationResult> out;
  out.reserve(picks.size());
  for (std::size_t p : picks) out.push_back(*accepted[p]);
  return out;
}

// ---------------------------------------------------------------------------
// Report rendering.

inline std::string percent(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * p);
  return buf;
}

/// Three group blocks with subtotals, then one line per category.
inline void print_report(std::ostream& out, const AgreementReport& r) {
  char line[160];
  std::snprintf(line, sizeof line, "%-40s %12s %10s %10s\n", "Label", "Accepted", "Proportion",
                r.has_accuracy ? "Accuracy" : "");
  out << line;
  for (const auto& g : r.groups) {
    std::snprintf(line, sizeof line, "%-40s %12zu %10s\n",
                  std::string(kGroupTitles[static_cast<std::size_t>(g.group)]).c_str(), g.accepted,
                  percent(g.frequency).c_str());
    out << line;
    for (const auto& row : r.per_category) {
      if (row.category.group() != g.group) continue;
      std::string acc;
      if (r.has_accuracy) acc = row.accuracy ? percent(*row.accuracy) : "undefined";
      std::snprintf(line, sizeof line, "  %-38s %12zu %10s %10s\n", std::string(row.category.title()).c_str(),
                    row.accepted, percent(row.frequency).c_str(), acc.c_str());
      out << line;
    }
  }
  std::snprintf(line, sizeof line, "%-40s %12zu %10s %10s\n", "Total", r.accepted_total,
                percent(r.accepted_total > 0 ? 1.0 : 0.0).c_str(),
                r.has_accuracy ? percent(r.overall_accuracy).c_str() : "");
  out << line;
  if (r.percent_agreement) out << "Percent agreement (machine vs gold): " << percent(*r.percent_agreement) << '\n';
  if (r.krippendorff_alpha) {
    std::snprintf(line, sizeof line, "Krippendorff's alpha (nominal): %.4f\n", *r.krippendorff_alpha);
    out << line;
  }
}

/// Machine-readable form: one row per group and per category.
inline void write_report_csv(std::ostream& out, const AgreementReport& r) {
  out << "level,name,group,accepted,proportion,correct,accuracy,accuracy_defined\n";
  for (const auto& g : r.groups)
    out << "group," << kGroupNames[static_cast<std::size_t>(g.group)] << ','
        << kGroupNames[static_cast<std::size_t>(g.group)] << ',' << g.accepted << ',' << format_double(g.frequency)
        << ",,,\n";
  for (const auto& row : r.per_category) {
    out << "category," << row.category.name() << ',' << row.category.group_name() << ',' << row.accepted << ','
        << format_double(row.frequency) << ',';
    if (r.has_accuracy)
      out << row.correct << ',' << (row.accuracy ? format_double(*row.accuracy) : "") << ','
          << (row.accuracy ? "true" : "false");
    else
      out << ",,";
    out << '\n';
  }
  out << "total,all,," << r.accepted_total << ",1,";
  if (r.has_accuracy) out << "," << format_double(r.overall_accuracy) << ",true";
  else out << ",,";
  out << '\n';
}

/// Gold labels from a "doc_id<TAB>category" file (header row optional).
inline std::map<std::string, CategoryLabel> parse_gold(std::istream& in) {
  std::map<std::string, CategoryLabel> gold;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (line_no == 1 && f.size() >= 2 && f[0] == "doc_id") continue;
    if (f.size() != 2) throw DataError("gold line " + std::to_string(line_no) + ": expected 2 fields");
    gold.insert_or_assign(f[0], CategoryLabel::parse(f[1]));
  }
  return gold;
}

inline std::map<std::string, CategoryLabel> read_gold(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_gold(in);
}

}  // namespace typiclass

#endif  // TYPICLASS_METRICS_HPP
