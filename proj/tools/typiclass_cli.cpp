// Command-line front end: one subcommand per pipeline stage plus synthgen,
// run and resume.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
// violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "typiclass/typiclass.hpp"

namespace fs = std::filesystem;
using namespace typiclass;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::vector<double> parse_edges(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string field = s.substr(start, comma - start);
    if (!field.empty()) out.push_back(parse_double(field, "--edges"));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void print_topics(const TopicModel& model, double threshold) {
  const auto& vocab = model.vocabulary_tokens();
  for (std::size_t k = 0; k < model.topics(); ++k) {
    std::cout << "Topic " << (k + 1) << '\t';
    const auto words = model.top_words(k, threshold);
    for (std::size_t i = 0; i < words.size(); ++i) {
      char prob[32];
      std::snprintf(prob, sizeof prob, "%.4f", words[i].second);
      std::cout << (i ? ", " : "") << vocab.at(words[i].first) << " (" << prob << ")";
    }
    std::cout << '\n';
  }
}

/// Prompt for a judgment on each exemplar; empty input or EOF skips.
std::map<std::string, Judgment> interactive_judgments(const BandTable& table, const Corpus* corpus) {
  std::map<std::string, Judgment> out;
  for (const auto& band : table.bands) {
    for (const auto& id : band.exemplars) {
      std::cout << "\n[" << format_double(band.lower) << ", " << format_double(band.upper) << "] " << id;
      if (corpus)
        if (auto i = corpus->index_of(id)) std::cout << ": " << (*corpus)[*i].raw_text;
      for (;;) {
        std::cout << "\n  judgment [m]atch / [p]artial / [x] mismatch / [enter] skip: " << std::flush;
        std::string answer;
        if (!std::getline(std::cin, answer)) return out;
        if (answer.empty()) break;
        if (auto j = try_parse_judgment(answer)) {
          out[id] = *j;
          break;
        }
      }
    }
  }
  std::cout << '\n';
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Typicality-filtered nearest-neighbor classification over LDA topic space"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_input, ingest_out;
  std::size_t ingest_min_tokens = 5, ingest_min_freq = 1, ingest_sample = 0;
  std::uint64_t ingest_seed = 1;
  auto* ingest = app.add_subcommand("ingest", "Normalize, filter and encode a record file into a corpus file");
  ingest->add_option("--input", ingest_input, "TSV (id, text, label) or JSON-lines records")->required();
  ingest->add_option("--min-tokens", ingest_min_tokens, "Drop documents shorter than this")->capture_default_str();
  ingest->add_option("--min-token-freq", ingest_min_freq, "Drop tokens rarer than this")->capture_default_str();
  ingest->add_option("--sample", ingest_sample, "Sample this many distinct documents (0 keeps all)")
      ->capture_default_str();
  ingest->add_option("--seed", ingest_seed, "Sampling seed")->capture_default_str();
  ingest->add_option("--out", ingest_out, "Corpus file to write")->required();

  // train
  std::string train_corpus, train_out;
  LdaParams lda;
  auto* train_cmd = app.add_subcommand("train", "Fit LDA by collapsed Gibbs sampling");
  train_cmd->add_option("--corpus", train_corpus)->required();
  train_cmd->add_option("--topics", lda.topics)->capture_default_str();
  train_cmd->add_option("--alpha", lda.alpha, "Document-topic prior (0 means 50/topics)")->capture_default_str();
  train_cmd->add_option("--beta", lda.beta)->capture_default_str();
  train_cmd->add_option("--sweeps", lda.sweeps)->capture_default_str();
  train_cmd->add_option("--seed", lda.seed)->capture_default_str();
  train_cmd->add_option("--out", train_out)->required();

  // topics
  std::string topics_model;
  double topics_threshold = 0.01;
  auto* topics = app.add_subcommand("topics", "List each topic's words above a probability threshold");
  topics->add_option("--model", topics_model)->required();
  topics->add_option("--threshold", topics_threshold)->capture_default_str();

  // classify
  std::string classify_corpus_path, classify_model, classify_out, classify_repr = "topic-proportion";
  double classify_threshold = kDefaultThreshold;
  auto* classify_cmd = app.add_subcommand("classify", "Label unlabeled documents and apply the typicality threshold");
  classify_cmd->add_option("--corpus", classify_corpus_path)->required();
  classify_cmd->add_option("--model", classify_model)->required();
  classify_cmd->add_option("--threshold", classify_threshold)->capture_default_str();
  classify_cmd->add_option("--representation", classify_repr, "topic-proportion or word-proportion")
      ->capture_default_str();
  classify_cmd->add_option("--out", classify_out)->required();

  // calibrate
  std::string calibrate_results, calibrate_edges = "0.1,0.2,0.275,0.3,0.5", calibrate_corpus, calibrate_judgments,
                                 calibrate_record;
  std::size_t calibrate_exemplars = 5;
  std::uint64_t calibrate_seed = 1;
  auto* calibrate = app.add_subcommand("calibrate", "Band table of typicality with exemplar review");
  calibrate->add_option("--results", calibrate_results)->required();
  calibrate->add_option("--edges", calibrate_edges, "Comma-separated increasing band edges")->capture_default_str();
  calibrate->add_option("--exemplars", calibrate_exemplars, "Exemplars sampled per band")->capture_default_str();
  calibrate->add_option("--seed", calibrate_seed)->capture_default_str();
  calibrate->add_option("--corpus", calibrate_corpus, "Corpus file, to show exemplar text");
  calibrate->add_option("--judgments", calibrate_judgments, "Read judgments from a file instead of prompting");
  calibrate->add_option("--record", calibrate_record, "Write the collected judgments to this file");

  // report
  std::string report_results, report_gold, report_out;
  double report_fraction = 0.25;
  std::uint64_t report_seed = 1;
  auto* report = app.add_subcommand("report", "Frequency and accuracy tables plus a validation sample");
  report->add_option("--results", report_results)->required();
  report->add_option("--gold", report_gold, "doc_id<TAB>category gold labels");
  report->add_option("--validation-fraction", report_fraction)->capture_default_str();
  report->add_option("--seed", report_seed)->capture_default_str();
  report->add_option("--out", report_out)->required();

  // synthgen
  std::string synth_spec, synth_out;
  std::size_t synth_docs = 5000;
  double synth_labeled = 0.1;
  auto* synthgen = app.add_subcommand("synthgen", "Generate a labeled corpus from a planted topic model");
  synthgen->add_option("--spec", synth_spec, "Plant specification (JSON)")->required();
  synthgen->add_option("--docs", synth_docs)->capture_default_str();
  synthgen->add_option("--labeled", synth_labeled, "Fraction of documents carrying a gold label")
      ->capture_default_str();
  synthgen->add_option("--out", synth_out)->required();

  // run / resume
  std::string run_config;
  auto* run = app.add_subcommand("run", "Run every stage from a config file");
  run->add_option("--config", run_config)->required();

  std::string resume_manifest, resume_from, resume_config;
  auto* resume_cmd = app.add_subcommand("resume", "Re-run from a stage, reusing verified earlier artifacts");
  resume_cmd->add_option("--manifest", resume_manifest)->required();
  resume_cmd->add_option("--from", resume_from, "ingest, train, classify, calibrate or report")->required();
  resume_cmd->add_option("--config", resume_config, "Edited config (defaults to the manifest's)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*ingest) {
      CorpusOptions options;
      options.min_tokens = ingest_min_tokens;
      options.min_token_freq = ingest_min_freq;
      Corpus corpus = build_corpus(read_records(ingest_input), options);
      if (ingest_sample > 0) corpus = sample_distinct(corpus, ingest_sample, ingest_seed);
      corpus.save(ingest_out);
      std::cout << "documents " << corpus.size() << " (labeled " << corpus.labeled_ids().size() << "), vocabulary "
                << corpus.vocabulary().size() << "\n";
    } else if (*train_cmd) {
      const Corpus corpus = Corpus::load(train_corpus);
      const TopicModel model = train(corpus, lda);
      model.check_invariants();
      model.save(train_out);
      std::cout << "trained " << model.topics() << " topics over " << corpus.total_tokens() << " tokens\n";
    } else if (*topics) {
      print_topics(TopicModel::load(topics_model), topics_threshold);
    } else if (*classify_cmd) {
      const Corpus corpus = Corpus::load(classify_corpus_path);
      const TopicModel model = TopicModel::load(classify_model);
      const auto results =
          classify_corpus(corpus, model, {classify_threshold, parse_representation(classify_repr)});
      write_file(classify_out, results_to_string(results));
      std::cout << "classified " << results.size() << ", accepted " << accepted_count(results) << "\n";
    } else if (*calibrate) {
      const auto results = read_results(calibrate_results);
      BandTable table = band_table(results, parse_edges(calibrate_edges), calibrate_exemplars, calibrate_seed);
      std::optional<Corpus> corpus;
      if (!calibrate_corpus.empty()) corpus = Corpus::load(calibrate_corpus);
      print_band_table(std::cout, table);
      const auto judgments = calibrate_judgments.empty()
                                 ? interactive_judgments(table, corpus ? &*corpus : nullptr)
                                 : Pipeline::read_judgments(calibrate_judgments);
      if (!calibrate_record.empty()) {
        std::string bytes = "doc_id\tjudgment\n";
        for (const auto& [id, j] : judgments) bytes += id + "\t" + std::string(judgment_name(j)) + "\n";
        write_file(calibrate_record, bytes);
      }
      apply_judgments(table, judgments);
      std::cout << "\n";
      print_band_table(std::cout, table);
      if (auto t = recommend_threshold(table))
        std::cout << "recommended threshold " << format_double(*t) << "\n";
      else
        std::cout << "no band edge qualifies; lower the edges or review more exemplars\n";
    } else if (*report) {
      const auto results = read_results(report_results);
      const AgreementReport r =
          report_gold.empty() ? frequency_report(results) : accuracy_report(results, read_gold(report_gold));
      std::ostringstream text, csv;
      print_report(text, r);
      write_report_csv(csv, r);
      const fs::path dir(report_out);
      write_file(dir / artifact::kReportText, text.str());
      write_file(dir / artifact::kReportCsv, csv.str());
      write_file(dir / artifact::kValidation,
                 results_to_string(validation_sample(results, report_fraction, report_seed)));
      std::cout << text.str();
    } else if (*synthgen) {
      const PlantedModel plant = PlantedModel::from_json(nlohmann::json::parse(read_file(synth_spec)));
      const SyntheticCorpus synth = generate(plant, synth_docs, synth_labeled);
      const fs::path dir(synth_out);
      write_file(dir / "records.tsv", records_tsv(synth));
      write_file(dir / "truth.tsv", truth_tsv(synth));
      write_file(dir / artifact::kCorpus, synth.corpus.serialize());
      write_file(dir / "plant.json", plant.to_json().dump(2) + "\n");
      std::cout << "generated " << synth.corpus.size() << " documents (" << synth.corpus.labeled_ids().size()
                << " labeled) in " << dir.string() << "\n";
    } else if (*run) {
      const RunManifest m = run_pipeline(PipelineConfig::load(run_config));
      for (const auto& s : m.stages) std::cout << stage_name(s.stage) << "\tok\t" << s.seconds << "s\n";
    } else if (*resume_cmd) {
      const RunManifest previous = RunManifest::load(resume_manifest);
      std::optional<PipelineConfig> config;
      if (!resume_config.empty()) config = PipelineConfig::load(resume_config);
      const RunManifest m = resume(previous, parse_stage(resume_from), config);
      for (const auto& s : m.stages) std::cout << stage_name(s.stage) << "\tok\t" << s.seconds << "s\n";
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
