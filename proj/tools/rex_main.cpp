#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "rex/chemmask.hpp"
#include "rex/config.hpp"
#include "rex/corpus.hpp"
#include "rex/decode.hpp"
#include "rex/eval.hpp"
#include "rex/labeling.hpp"
#include "rex/synth.hpp"

namespace fs = std::filesystem;

using namespace rex;

namespace {

void require_corpus_dir(const RunConfig& cfg) {
  if (cfg.paths.corpus_dir.empty()) {
    throw ConfigError("paths.corpus_dir is required");
  }
  if (!fs::is_directory(cfg.paths.corpus_dir)) {
    throw DataError("corpus directory does not exist: " + cfg.paths.corpus_dir);
  }
}

void prepare_output_dir(const RunConfig& cfg) {
  if (cfg.paths.output_dir.empty()) {
    throw ConfigError("paths.output_dir is required");
  }
  fs::create_directories(cfg.paths.output_dir);
  write_file(cfg.paths.output_dir + "/resolved_config.kv", render_config(cfg));
}

std::vector<fs::path> list_txt_files(const std::string& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_ingest(const RunConfig& cfg) {
  require_corpus_dir(cfg);
  prepare_output_dir(cfg);

  std::vector<TagSequence> seqs;
  std::vector<std::string> errors;
  std::ostringstream report;
  for (const fs::path& txt : list_txt_files(cfg.paths.corpus_dir)) {
    fs::path ann = txt;
    ann.replace_extension(".ann");
    std::string stem = txt.stem().string();
    try {
      Document doc = load_document_pair(
          txt.string(),
          fs::exists(ann) ? std::optional<std::string>(ann.string())
                          : std::nullopt,
          cfg.paragraph_mode);
      TagSequence seq = spans_to_tags(doc, cfg.granularity);
      std::size_t tokens = 0;
      for (const auto& p : doc.paragraphs) tokens += p.tokens.size();
      report << doc.doc_id << "\tunits=" << seq.tags.size()
             << "\treactions=" << merged_gold_spans(doc).size()
             << "\ttokens=" << tokens << "\n";
      seqs.push_back(std::move(seq));
    } catch (const DataError& e) {
      errors.push_back(stem + ": " + e.what());
    }
  }
  for (const auto& e : errors) report << "ERROR\t" << e << "\n";

  {
    std::ofstream out(cfg.paths.output_dir + "/tags.tsv");
    write_tag_file(out, seqs);
  }
  write_file(cfg.paths.output_dir + "/ingest_report.txt", report.str());

  std::cout << "ingested " << seqs.size() << " documents, " << errors.size()
            << " errors\n";
  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
  return errors.empty() ? 0 : 1;
}

int cmd_stats(const RunConfig& cfg) {
  require_corpus_dir(cfg);
  Corpus corpus = load_corpus_dir(cfg.paths.corpus_dir, cfg.paragraph_mode);
  CorpusStats stats = corpus_stats(corpus);

  std::size_t noise_units = 0;
  std::size_t noise_above = 0;
  for (const Document& doc : corpus.documents) {
    BoundaryNoiseReport r = boundary_noise_report(doc, cfg.granularity);
    noise_units += r.units.size();
    noise_above += r.units_above_threshold;
  }
  double noise_share =
      noise_units == 0
          ? 0.0
          : static_cast<double>(noise_above) / static_cast<double>(noise_units);

  std::ostringstream kv;
  kv << "files = " << stats.file_count << "\n";
  kv << "paragraphs = " << stats.paragraph_count << "\n";
  kv << "words = " << stats.word_count << "\n";
  kv << "reactions = " << stats.reaction_count << "\n";
  kv << std::fixed << std::setprecision(4);
  kv << "avg_tokens_per_paragraph = " << stats.avg_tokens_per_paragraph << "\n";
  kv << "avg_paragraphs_per_document = " << stats.avg_paragraphs_per_document
     << "\n";
  kv << "boundary_noise_threshold = 0.4\n";
  kv << "boundary_noise_share = " << noise_share << "\n";

  std::cout << kv.str();
  if (!cfg.paths.output_dir.empty()) {
    prepare_output_dir(cfg);
    write_file(cfg.paths.output_dir + "/stats.kv", kv.str());
  }
  return 0;
}

int cmd_mask(const RunConfig& cfg) {
  require_corpus_dir(cfg);
  prepare_output_dir(cfg);
  if (cfg.paths.lexicon.empty()) {
    throw ConfigError("paths.lexicon is required for masking");
  }
  ChemLexicon lexicon = load_lexicon(cfg.paths.lexicon);
  lexicon.patterns_version = cfg.patterns_version;

  Corpus corpus = load_corpus_dir(cfg.paths.corpus_dir, cfg.paragraph_mode);
  std::size_t masked_total = 0;
  for (const Document& doc : corpus.documents) {
    MaskResult result = mask_chems(doc, lexicon);
    masked_total += result.masked_token_count;
    write_file(cfg.paths.output_dir + "/" + doc.doc_id + ".txt",
               result.document.text);
    if (!result.document.annotations.empty() ||
        fs::exists(fs::path(cfg.paths.corpus_dir) / (doc.doc_id + ".ann"))) {
      write_file(cfg.paths.output_dir + "/" + doc.doc_id + ".ann",
                 write_ann(result.document.annotations));
    }
  }
  std::cout << "masked " << masked_total << " tokens across "
            << corpus.documents.size() << " documents\n";
  return 0;
}

Corpus load_and_maybe_mask(const RunConfig& cfg, ParagraphMode mode,
                           bool masked, const std::string& lexicon_path) {
  Corpus corpus = load_corpus_dir(cfg.paths.corpus_dir, mode);
  if (!masked) return corpus;
  if (lexicon_path.empty()) {
    throw ConfigError("paths.lexicon is required when chemmask.enabled = true");
  }
  ChemLexicon lexicon = load_lexicon(lexicon_path);
  for (Document& doc : corpus.documents) {
    doc = mask_chems(doc, lexicon).document;
  }
  return corpus;
}

int cmd_train(const RunConfig& cfg) {
  require_corpus_dir(cfg);
  prepare_output_dir(cfg);
  Corpus corpus = load_and_maybe_mask(cfg, cfg.paragraph_mode,
                                      cfg.chemmask_enabled, cfg.paths.lexicon);
  assign_splits(corpus, cfg.validation_fraction, cfg.seed);

  TrainResult result = train(corpus, cfg);

  std::string model_path = cfg.paths.output_dir + "/model.rex";
  save_model(result.model, model_path);

  std::ostringstream log;
  log << "epoch\tloss\tval_strict_f1\timproved\n";
  log << std::fixed << std::setprecision(6);
  for (const auto& entry : result.log) {
    log << entry.epoch << "\t" << entry.train_loss << "\t"
        << entry.val_strict_f1 << "\t" << (entry.improved ? 1 : 0) << "\n";
  }
  write_file(cfg.paths.output_dir + "/training_log.tsv", log.str());

  std::cout << "trained " << result.model.meta.epochs_run << " epochs, best epoch "
            << result.model.meta.best_epoch << ", val strict F1 "
            << std::fixed << std::setprecision(4)
            << result.model.meta.best_val_f1 << "\n";
  std::cout << "checkpoint " << model_path << " checksum " << std::hex
            << fnv1a64_file(model_path) << std::dec << "\n";
  return 0;
}

int cmd_predict(const RunConfig& cfg, const std::string& model_path) {
  require_corpus_dir(cfg);
  prepare_output_dir(cfg);
  Model model = load_model(model_path);
  check_predict_compatibility(model, cfg);

  std::string lexicon_path = cfg.paths.lexicon.empty()
                                 ? model.config.paths.lexicon
                                 : cfg.paths.lexicon;
  Corpus corpus =
      load_and_maybe_mask(cfg, model.config.paragraph_mode,
                          model.config.chemmask_enabled, lexicon_path);
  if (model.has_contextual) {
    attach_contextual(model, cfg.paths.contextual_file);
  }

  std::ostringstream out;
  std::size_t span_count = 0;
  for (const Document& doc : corpus.documents) {
    for (const ExtractedSpan& s : predict(model, doc)) {
      out << doc.doc_id << "\t" << s.begin << "\t" << s.end << "\t"
          << granularity_name(model.config.granularity) << "\n";
      ++span_count;
    }
  }
  write_file(cfg.paths.output_dir + "/predictions.tsv", out.str());
  std::cout << "predicted " << span_count << " spans across "
            << corpus.documents.size() << " documents\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& gold_path,
                 const std::string& pred_path) {
  prepare_output_dir(cfg);

  std::ifstream gold_in(gold_path);
  if (!gold_in) throw DataError("cannot open gold tag file: " + gold_path);
  std::vector<TagSequence> gold = read_tag_file(gold_in);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < gold.size(); ++i) index[gold[i].doc_id] = i;

  std::vector<std::vector<ExtractedSpan>> preds(gold.size());
  std::ifstream pred_in(pred_path);
  if (!pred_in) throw DataError("cannot open predictions file: " + pred_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(pred_in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError("predictions line " + std::to_string(line_no) +
                       ": expected doc_id<TAB>begin<TAB>end<TAB>granularity");
    }
    auto it = index.find(fields[0]);
    if (it == index.end()) {
      throw DataError("predictions name unknown document: " + fields[0]);
    }
    const TagSequence& g = gold[it->second];
    if (granularity_from_string(fields[3]) != g.granularity) {
      throw DataError("predictions granularity does not match gold for doc " +
                      fields[0]);
    }
    ExtractedSpan s;
    s.begin = std::stoull(fields[1]);
    s.end = std::stoull(fields[2]);
    if (s.end < s.begin || s.end >= g.tags.size()) {
      throw DataError("prediction span (" + fields[1] + "," + fields[2] +
                      ") out of range for doc " + fields[0]);
    }
    preds[it->second].push_back(s);
  }

  std::vector<DocPrediction> docs;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    DocPrediction d;
    d.doc_id = gold[i].doc_id;
    d.gold_tags = gold[i].tags;
    d.gold = tags_to_spans(gold[i].tags, cfg.repair);
    std::sort(preds[i].begin(), preds[i].end());
    d.pred = preds[i];
    d.pred_tags.assign(gold[i].tags.size(), Tag::O);
    for (const auto& s : d.pred) {
      d.pred_tags[s.begin] = Tag::B;
      for (std::size_t u = s.begin + 1; u <= s.end; ++u) d.pred_tags[u] = Tag::I;
    }
    docs.push_back(std::move(d));
  }

  MatchReport report = evaluate(docs, cfg.fuzzy_tolerance);
  std::string table = render_report_table(report);
  write_file(cfg.paths.output_dir + "/report.txt", table);
  write_file(cfg.paths.output_dir + "/report.kv", render_report_kv(report));
  std::cout << table;
  return 0;
}

int cmd_synth(const RunConfig& cfg, const SynthProfile& profile) {
  prepare_output_dir(cfg);
  SynthSummary sum = generate_corpus(profile, cfg.seed, cfg.paths.output_dir);
  std::cout << "generated " << sum.doc_count << " documents, "
            << sum.paragraph_count << " paragraphs, " << sum.reaction_count
            << " reactions\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reaction span extraction toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string model_path;
  std::string gold_path;
  std::string pred_path;
  SynthProfile profile;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "run configuration file")
        ->required();
  };

  CLI::App* ingest = app.add_subcommand(
      "ingest", "load txt/ann pairs and write gold tag sequences");
  add_config(ingest);
  CLI::App* stats =
      app.add_subcommand("stats", "corpus statistics and boundary-noise report");
  add_config(stats);
  CLI::App* mask =
      app.add_subcommand("mask", "write a [CHEM]-masked copy of the corpus");
  add_config(mask);
  CLI::App* train_cmd =
      app.add_subcommand("train", "train a tagger and save its checkpoint");
  add_config(train_cmd);
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "extract spans with a trained model");
  add_config(predict_cmd);
  predict_cmd->add_option("-m,--model", model_path, "model checkpoint")
      ->required();
  CLI::App* evaluate_cmd = app.add_subcommand(
      "evaluate", "score predictions against gold tag sequences");
  add_config(evaluate_cmd);
  evaluate_cmd->add_option("-g,--gold", gold_path, "gold tag file")->required();
  evaluate_cmd->add_option("-p,--pred", pred_path, "predictions file")
      ->required();
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic patent corpus");
  add_config(synth_cmd);
  synth_cmd->add_option("--docs", profile.doc_count, "number of documents");
  synth_cmd->add_option("--paragraphs", profile.paragraphs_per_doc,
                        "approximate paragraphs per document");
  synth_cmd->add_option("--reactions", profile.reactions_per_doc,
                        "reactions per document");
  synth_cmd->add_option("--tail-rate", profile.property_tail_rate,
                        "property-tail probability per reaction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg = parse_config_file(config_path);
    if (ingest->parsed()) return cmd_ingest(cfg);
    if (stats->parsed()) return cmd_stats(cfg);
    if (mask->parsed()) return cmd_mask(cfg);
    if (train_cmd->parsed()) return cmd_train(cfg);
    if (predict_cmd->parsed()) return cmd_predict(cfg, model_path);
    if (evaluate_cmd->parsed()) return cmd_evaluate(cfg, gold_path, pred_path);
    if (synth_cmd->parsed()) return cmd_synth(cfg, profile);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
