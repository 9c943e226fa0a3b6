#ifndef TYPICLASS_PIPELINE_HPP
#define TYPICLASS_PIPELINE_HPP

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "typiclass/checksum.hpp"
#include "typiclass/classifier.hpp"
#include "typiclass/corpus.hpp"
#include "typiclass/error.hpp"
#include "typiclass/metrics.hpp"
#include "typiclass/topic_model.hpp"

namespace typiclass {

/// Everything a pipeline run depends on. Defaults follow the published
/// procedure where it states a value: 5-token minimum, 100 topics,
/// threshold 0.275, 25% validation sample.
struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path output_dir = "run";
  std::optional<std::filesystem::path> gold;
  std::optional<std::filesystem::path> judgments;

  std::size_t min_tokens = 5;
  std::size_t min_token_freq = 1;
  std::size_t sample_size = 0;  // 0 keeps every document
  std::uint64_t sample_seed = 1;

  std::size_t topics = 100;
  double alpha = 0.0;  // 0 selects 50 / topics
  double beta = 0.01;
  std::size_t sweeps = 1000;
  std::uint64_t seed = 1;

  Representation representation = Representation::topic_proportion;
  double threshold = kDefaultThreshold;

  std::vector<double> band_edges = {0.1, 0.2, 0.275, 0.3, 0.5};
  std::size_t exemplars_per_band = 5;
  std::uint64_t calibration_seed = 1;

  double validation_fraction = 0.25;
  std::uint64_t validation_seed = 1;

  LdaParams lda_params() const { return {topics, alpha, beta, sweeps, seed}; }

  nlohmann::json to_json() const {
    nlohmann::json j = {
        {"input", input.string()},
        {"output_dir", output_dir.string()},
        {"min_tokens", min_tokens},
        {"min_token_freq", min_token_freq},
        {"sample_size", sample_size},
        {"sample_seed", sample_seed},
        {"topics", topics},
        {"alpha", alpha},
        {"beta", beta},
        {"sweeps", sweeps},
        {"seed", seed},
        {"representation", std::string(representation_name(representation))},
        {"threshold", threshold},
        {"band_edges", band_edges},
        {"exemplars_per_band", exemplars_per_band},
        {"calibration_seed", calibration_seed},
        {"validation_fraction", validation_fraction},
        {"validation_seed", validation_seed},
    };
    j["gold"] = gold ? nlohmann::json(gold->string()) : nlohmann::json();
    j["judgments"] = judgments ? nlohmann::json(judgments->string()) : nlohmann::json();
    return j;
  }

  /// Parse and validate. Unknown keys are rejected so typos surface.
  static PipelineConfig from_json(const nlohmann::json& j) {
    static const std::set<std::string> kKeys = {
        "input",      "output_dir",     "gold",       "judgments",          "min_tokens",
        "min_token_freq", "sample_size", "sample_seed", "topics",           "alpha",
        "beta",       "sweeps",         "seed",       "representation",     "threshold",
        "band_edges", "exemplars_per_band", "calibration_seed", "validation_fraction", "validation_seed"};
    if (!j.is_object()) throw DataError("config must be a JSON object");
    for (const auto& [key, value] : j.items())
      if (!kKeys.count(key)) throw DataError("unknown config key '" + key + "'");
    PipelineConfig c;
    try {
      c.input = j.at("input").get<std::string>();
      if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
      if (j.contains("gold") && !j["gold"].is_null()) c.gold = j["gold"].get<std::string>();
      if (j.contains("judgments") && !j["judgments"].is_null()) c.judgments = j["judgments"].get<std::string>();
      auto take = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j[key].get<std::remove_reference_t<decltype(field)>>();
      };
      take("min_tokens", c.min_tokens);
      take("min_token_freq", c.min_token_freq);
      take("sample_size", c.sample_size);
      take("sample_seed", c.sample_seed);
      take("topics", c.topics);
      take("alpha", c.alpha);
      take("beta", c.beta);
      take("sweeps", c.sweeps);
      take("seed", c.seed);
      take("threshold", c.threshold);
      take("band_edges", c.band_edges);
      take("exemplars_per_band", c.exemplars_per_band);
      take("calibration_seed", c.calibration_seed);
      take("validation_fraction", c.validation_fraction);
      take("validation_seed", c.validation_seed);
      if (j.contains("representation")) c.representation = parse_representation(j["representation"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("invalid config: ") + e.what());
    }
    c.validate();
    return c;
  }

  static PipelineConfig load(const std::filesystem::path& path) {
    try {
      return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("config " + path.string() + " is not valid JSON: " + e.what());
    }
  }

  void validate() const {
    if (input.empty()) throw DataError("config: input is required");
    if (min_tokens < 1) throw DataError("config: min_tokens must be at least 1");
    if (min_token_freq < 1) throw DataError("config: min_token_freq must be at least 1");
    if (topics < 1) throw DataError("config: topics must be at least 1");
    if (alpha < 0.0) throw DataError("config: alpha must be positive (or 0 for the default)");
    if (!(beta > 0.0)) throw DataError("config: beta must be positive");
    if (sweeps < 1) throw DataError("config: sweeps must be at least 1");
    if (!(threshold >= 0.0)) throw DataError("config: threshold must be non-negative");
    if (band_edges.empty()) throw DataError("config: band_edges must not be empty");
    for (std::size_t i = 0; i < band_edges.size(); ++i)
      if (!(band_edges[i] >= 0.0) || (i > 0 && !(band_edges[i] > band_edges[i - 1])))
        throw DataError("config: band_edges must be non-negative and strictly increasing");
    if (!(validation_fraction > 0.0 && validation_fraction <= 1.0))
      throw DataError("config: validation_fraction must lie in (0, 1]");
  }
};

enum class Stage { ingest, train, classify, calibrate, report };

inline constexpr std::array<Stage, 5> kStages = {Stage::ingest, Stage::train, Stage::classify, Stage::calibrate,
                                                 Stage::report};

inline std::string_view stage_name(Stage s) {
  static constexpr std::array<std::string_view, 5> kNames = {"ingest", "train", "classify", "calibrate", "report"};
  return kNames[static_cast<std::size_t>(s)];
}

inline Stage parse_stage(std::string_view name) {
  for (Stage s : kStages)
    if (stage_name(s) == name) return s;
  throw DataError("unknown stage '" + std::string(name) + "'");
}

/// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* kCorpus = "corpus.json";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kResults = "results.tsv";
inline constexpr const char* kBands = "bands.tsv";
inline constexpr const char* kCalibration = "calibration.json";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kReportCsv = "report.csv";
inline constexpr const char* kValidation = "validation_sample.tsv";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace artifact

struct StageRecord {
  Stage stage;
  /// Hash of the config fields this stage reads plus its input checksums.
  std::string fingerprint;
  std::map<std::string, std::string> artifacts;  // file name -> sha256
  double seconds = 0.0;
};

struct RunManifest {
  static constexpr int kFormatVersion = 1;

  PipelineConfig config;
  std::string config_hash;
  std::vector<StageRecord> stages;

  const StageRecord* find(Stage s) const {
    for (const auto& r : stages)
      if (r.stage == s) return &r;
    return nullptr;
  }

  /// Checksums of every artifact, keyed by file name.
  std::map<std::string, std::string> artifact_checksums() const {
    std::map<std::string, std::string> out;
    for (const auto& r : stages) out.insert(r.artifacts.begin(), r.artifacts.end());
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json stages_json = nlohmann::json::array();
    for (const auto& r : stages)
      stages_json.push_back({{"stage", std::string(stage_name(r.stage))},
                             {"fingerprint", r.fingerprint},
                             {"artifacts", r.artifacts},
                             {"seconds", r.seconds}});
    return {{"format", "typiclass.manifest"},
            {"version", kFormatVersion},
            {"config", config.to_json()},
            {"config_hash", config_hash},
            {"stages", stages_json}};
  }

  static RunManifest from_json(const nlohmann::json& j) {
    try {
      if (j.at("format") != "typiclass.manifest") throw DataError("not a run manifest");
      if (j.at("version").get<int>() != kFormatVersion) throw DataError("unsupported manifest version");
      RunManifest m;
      m.config = PipelineConfig::from_json(j.at("config"));
      m.config_hash = j.at("config_hash").get<std::string>();
      for (const auto& s : j.at("stages"))
        m.stages.push_back({parse_stage(s.at("stage").get<std::string>()), s.at("fingerprint").get<std::string>(),
                            s.at("artifacts").get<std::map<std::string, std::string>>(), s.at("seconds").get<double>()});
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed manifest: ") + e.what());
    }
  }

  static RunManifest load(const std::filesystem::path& path) {
    try {
      return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
  }
};

/// Runs the ingest, train, classify, calibrate, report sequence, persisting
/// every artifact and rewriting the manifest after each stage.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config) : config_(std::move(config)) { config_.validate(); }

  const PipelineConfig& config() const { return config_; }

  std::filesystem::path path(const char* name) const { return config_.output_dir / name; }

  /// Full run from the first stage.
  RunManifest run() {
    manifest_ = RunManifest{config_, config_hash(), {}};
    return execute_from(Stage::ingest);
  }

  /// Re-execute from one stage onward, reusing earlier artifacts from a
  /// previous manifest. Throws StaleArtifact when an earlier artifact was
  /// modified or the config fields it depends on have changed.
  RunManifest resume(const RunManifest& previous, Stage from) {
    manifest_ = RunManifest{config_, config_hash(), {}};
    for (Stage s : kStages) {
      if (s == from) break;
      const StageRecord* rec = previous.find(s);
      if (!rec) throw StaleArtifact("cannot resume: stage " + std::string(stage_name(s)) + " never completed");
      for (const auto& [name, sum] : rec->artifacts) {
        const auto p = config_.output_dir / name;
        if (!std::filesystem::exists(p))
          throw StaleArtifact("cannot resume: artifact " + p.string() + " is missing");
        if (sha256_file(p) != sum)
          throw StaleArtifact("cannot resume: checksum mismatch for " + p.string());
      }
      if (fingerprint(s) != rec->fingerprint)
        throw StaleArtifact("cannot resume: inputs of stage " + std::string(stage_name(s)) + " changed since the run");
      manifest_.stages.push_back(*rec);
    }
    return execute_from(from);
  }

  /// Hash of the config fields and input files that one stage reads.
  std::string fingerprint(Stage s) const {
    nlohmann::json j = {{"stage", std::string(stage_name(s))}};
    auto upstream = [&](Stage u, const char* name) {
      const StageRecord* rec = manifest_.find(u);
      j["upstream"][name] = rec ? rec->artifacts.at(name) : std::string();
    };
    switch (s) {
      case Stage::ingest:
        j["input"] = sha256_file(config_.input);
        j["min_tokens"] = config_.min_tokens;
        j["min_token_freq"] = config_.min_token_freq;
        j["sample_size"] = config_.sample_size;
        j["sample_seed"] = config_.sample_seed;
        break;
      case Stage::train:
        upstream(Stage::ingest, artifact::kCorpus);
        j["topics"] = config_.topics;
        j["alpha"] = config_.alpha;
        j["beta"] = config_.beta;
        j["sweeps"] = config_.sweeps;
        j["seed"] = config_.seed;
        break;
      case Stage::classify:
        upstream(Stage::ingest, artifact::kCorpus);
        upstream(Stage::train, artifact::kModel);
        j["representation"] = std::string(representation_name(config_.representation));
        j["threshold"] = config_.threshold;
        break;
      case Stage::calibrate:
        upstream(Stage::classify, artifact::kResults);
        j["band_edges"] = config_.band_edges;
        j["exemplars_per_band"] = config_.exemplars_per_band;
        j["calibration_seed"] = config_.calibration_seed;
        j["judgments"] = config_.judgments ? sha256_file(*config_.judgments) : std::string();
        break;
      case Stage::report:
        upstream(Stage::classify, artifact::kResults);
        j["gold"] = config_.gold ? sha256_file(*config_.gold) : std::string();
        j["validation_fraction"] = config_.validation_fraction;
        j["validation_seed"] = config_.validation_seed;
        break;
    }
    return sha256_hex(j.dump());
  }

 private:
  std::string config_hash() const { return sha256_hex(config_.to_json().dump()); }

  RunManifest execute_from(Stage from) {
    std::filesystem::create_directories(config_.output_dir);
    bool started = false;
    for (Stage s : kStages) {
      if (s == from) started = true;
      if (!started) continue;
      const auto t0 = std::chrono::steady_clock::now();
      StageRecord rec{s, {}, {}, 0.0};
      try {
        rec.fingerprint = fingerprint(s);
        run_stage(s, rec);
      } catch (const InvariantViolation& e) {
        throw InvariantViolation("stage " + std::string(stage_name(s)) + ": " + e.what());
      } catch (const DataError& e) {
        throw DataError("stage " + std::string(stage_name(s)) + ": " + e.what());
      } catch (const std::invalid_argument& e) {
        throw DataError("stage " + std::string(stage_name(s)) + ": " + e.what());
      } catch (const std::filesystem::filesystem_error& e) {
        throw DataError("stage " + std::string(stage_name(s)) + ": " + e.what());
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      manifest_.stages.push_back(std::move(rec));
      write_file(path(artifact::kManifest), manifest_.to_json().dump(2) + "\n");
    }
    return manifest_;
  }

  void emit(StageRecord& rec, const char* name, const std::string& bytes) {
    write_file(path(name), bytes);
    rec.artifacts[name] = sha256_hex(bytes);
  }

  void run_stage(Stage s, StageRecord& rec) {
    switch (s) {
      case Stage::ingest: {
        CorpusOptions options;
        options.min_tokens = config_.min_tokens;
        options.min_token_freq = config_.min_token_freq;
        Corpus corpus = build_corpus(read_records(config_.input), options);
        if (config_.sample_size > 0) corpus = sample_distinct(corpus, config_.sample_size, config_.sample_seed);
        emit(rec, artifact::kCorpus, corpus.serialize());
        break;
      }
      case Stage::train: {
        const Corpus corpus = Corpus::load(path(artifact::kCorpus));
        const TopicModel model = train(corpus, config_.lda_params());
        model.check_invariants();
        emit(rec, artifact::kModel, model.serialize());
        break;
      }
      case Stage::classify: {
        const Corpus corpus = Corpus::load(path(artifact::kCorpus));
        const TopicModel model = TopicModel::load(path(artifact::kModel));
        const auto results = classify_corpus(corpus, model, {config_.threshold, config_.representation});
        emit(rec, artifact::kResults, results_to_string(results));
        break;
      }
      case Stage::calibrate: {
        const auto results = read_results(path(artifact::kResults));
        BandTable table =
            band_table(results, config_.band_edges, config_.exemplars_per_band, config_.calibration_seed);
        nlohmann::json summary = {{"threshold", config_.threshold}, {"recommended_threshold", nullptr}};
        if (config_.judgments) {
          apply_judgments(table, read_judgments(*config_.judgments));
          if (auto t = recommend_threshold(table)) summary["recommended_threshold"] = *t;
        }
        std::ostringstream bands;
        print_band_table(bands, table);
        emit(rec, artifact::kBands, bands.str());
        emit(rec, artifact::kCalibration, summary.dump(2) + "\n");
        break;
      }
      case Stage::report: {
        const auto results = read_results(path(artifact::kResults));
        // An empty accepted set still gets a (zero) report so threshold
        // sweeps down to 0 run through.
        const bool none = accepted_count(results) == 0;
        const AgreementReport report = none          ? empty_report()
                                       : config_.gold ? accuracy_report(results, read_gold(*config_.gold))
                                                      : frequency_report(results);
        std::ostringstream text, csv;
        print_report(text, report);
        write_report_csv(csv, report);
        emit(rec, artifact::kReportText, text.str());
        emit(rec, artifact::kReportCsv, csv.str());
        const std::vector<ClassificationResult> sample =
            none ? std::vector<ClassificationResult>{}
                 : validation_sample(results, config_.validation_fraction, config_.validation_seed);
        emit(rec, artifact::kValidation, results_to_string(sample));
        break;
      }
    }
  }

 public:
  /// Judgments file: "doc_id<TAB>match|partial_match|mismatch" per line.
  static std::map<std::string, Judgment> read_judgments(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open " + p.string());
    std::map<std::string, Judgment> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto f = split_tabs(line);
      if (line_no == 1 && f[0] == "doc_id") continue;
      const auto j = f.size() == 2 ? try_parse_judgment(f[1]) : std::nullopt;
      if (!j) throw DataError("judgments line " + std::to_string(line_no) + ": expected doc_id and a judgment");
      out[f[0]] = *j;
    }
    return out;
  }

 private:
  PipelineConfig config_;
  RunManifest manifest_;
};

inline RunManifest run_pipeline(const PipelineConfig& config) { return Pipeline(config).run(); }

/// Resume the run recorded in a manifest. With no config override the
/// manifest's own config is used.
inline RunManifest resume(const RunManifest& manifest, Stage from, const std::optional<PipelineConfig>& config = {}) {
  return Pipeline(config.value_or(manifest.config)).resume(manifest, from);
}

}  // namespace typiclass

#endif  // TYPICLASS_PIPELINE_HPP
