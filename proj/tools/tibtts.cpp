// tibtts: command-line front end for the corpus pipeline, tokenizers,
// evaluation report and review server.
//
// Every subcommand accepts --config <pipeline.json>. Failures print
// {"category": ..., "message": ...} on stderr and exit with status 2.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tibtts/eval.hpp"
#include "tibtts/json_util.hpp"
#include "tibtts/manifest.hpp"
#include "tibtts/pipeline.hpp"
#include "tibtts/review.hpp"
#include "tibtts/review_server.hpp"
#include "tibtts/script.hpp"
#include "tibtts/tokenizer.hpp"

namespace fs = std::filesystem;
using namespace tibtts;

namespace {

manifest::PipelineConfig load_config(const std::string& path) {
  return path.empty() ? manifest::PipelineConfig{} : manifest::PipelineConfig::load(path);
}

// Corpus lines for tokenizer training and statistics. A `.jsonl` manifest
// contributes the normalized text of its Accepted records; any other file is
// read as one raw utterance per line and normalized with the config.
std::vector<std::string> load_corpus(const fs::path& path, const manifest::PipelineConfig& cfg) {
  std::vector<std::string> out;
  if (path.extension() == ".jsonl") {
    for (const auto& r : manifest::read_manifest(path)) {
      if (r.status == manifest::Status::Accepted) out.push_back(r.text_normalized);
    }
    return out;
  }
  const auto normalizer = cfg.make_normalizer();
  std::istringstream in(json_util::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto text = normalizer(line).normalized;
    if (!text.empty()) out.push_back(std::move(text));
  }
  return out;
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tibetan speech corpus toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Read a transcript index into a raw manifest");
  std::string ingest_index, ingest_source, ingest_out;
  ingest->add_option("--index", ingest_index, "Index file (JSONL or TSV)")->required();
  ingest->add_option("--source-dir", ingest_source, "Directory audio paths are relative to");
  ingest->add_option("--out", ingest_out, "Raw manifest to write")->required();

  // run
  auto* run = app.add_subcommand("run", "Run every stage and write the governed manifest");
  std::string run_in, run_out;
  unsigned run_workers = 0;
  run->add_option("--input", run_in, "Raw manifest from `ingest`")->required();
  run->add_option("--out-dir", run_out, "Output directory")->required();
  run->add_option("--workers", run_workers, "Worker threads (0: config or hardware)");

  // train-bpe
  auto* train = app.add_subcommand("train-bpe", "Train a syllable-scoped BPE model");
  std::string train_corpus, train_out;
  std::optional<std::size_t> train_vocab;
  train->add_option("--corpus", train_corpus, "Text (one utterance per line) or manifest .jsonl")->required();
  train->add_option("--vocab-size", train_vocab, "Target vocabulary size");
  train->add_option("--out", train_out, "Model file")->required();

  // build-syllable-vocab
  auto* sylv = app.add_subcommand("build-syllable-vocab", "Build a syllable vocabulary");
  std::string sylv_corpus, sylv_out;
  std::optional<std::size_t> sylv_min;
  sylv->add_option("--corpus", sylv_corpus, "Text (one utterance per line) or manifest .jsonl")->required();
  sylv->add_option("--min-count", sylv_min, "Minimum syllable frequency");
  sylv->add_option("--out", sylv_out, "Model file")->required();

  // tokenize
  auto* tok = app.add_subcommand("tokenize", "Encode a corpus; optionally report sequence statistics");
  std::vector<std::string> tok_models;
  std::string tok_input, tok_out, tok_stats;
  tok->add_option("--model", tok_models, "Model file; repeat to compare strategies")->required();
  tok->add_option("--input", tok_input, "Text (one utterance per line) or manifest .jsonl")->required();
  tok->add_option("--out", tok_out, "Token ids from the first model, one line per utterance");
  tok->add_option("--stats", tok_stats, "Statistics JSON (codepoint baseline plus each model)");

  // export-finetune
  auto* exp = app.add_subcommand("export-finetune", "Write token dump and manifest of Accepted records");
  std::string exp_manifest, exp_model, exp_tokens, exp_manifest_out;
  exp->add_option("--manifest", exp_manifest, "Governed manifest")->required();
  exp->add_option("--model", exp_model, "Tokenizer model")->required();
  exp->add_option("--tokens-out", exp_tokens, "Token dump")->required();
  exp->add_option("--manifest-out", exp_manifest_out, "Filtered manifest")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Build the MOS / syllable accuracy report");
  std::string ev_ratings, ev_pairs, ev_json, ev_table, ev_from;
  ev->add_option("--ratings", ev_ratings, "Ratings table: system, rater, utterance_id, score");
  ev->add_option("--transcripts", ev_pairs, "Transcription pairs: utterance_id, ref_text, hyp_text, system");
  ev->add_option("--from-report", ev_from, "Re-render an existing report JSON");
  ev->add_option("--out-json", ev_json, "Structured report");
  ev->add_option("--out-table", ev_table, "Text table (stdout if omitted)");

  // review
  auto* rv = app.add_subcommand("review", "Serve the review queue over HTTP");
  std::string rv_manifest, rv_ui, rv_host = "127.0.0.1";
  int rv_port = 8080;
  bool rv_compact = false;
  rv->add_option("--manifest", rv_manifest, "Governed manifest")->required();
  rv->add_option("--ui-dir", rv_ui, "Static UI directory served at /");
  rv->add_option("--host", rv_host, "Bind address");
  rv->add_option("--port", rv_port, "Port (0: any free port)");
  rv->add_flag("--compact", rv_compact, "Fold the decision journal into the manifest on clean shutdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << Json{{"category", "Usage"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }

  try {
    const auto cfg = load_config(config_path);

    if (*ingest) {
      const fs::path source = ingest_source.empty() ? fs::path(ingest_index).parent_path() : fs::path(ingest_source);
      const auto result = pipeline::ingest(ingest_index, source);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      manifest::write_manifest(ingest_out, result.records);
      print_json({{"records", result.records.size()}, {"warnings", result.warnings.size()}});
    } else if (*run) {
      auto records = manifest::read_manifest(run_in);
      const auto result = pipeline::run_pipeline(std::move(records), cfg, run_out, run_workers);
      print_json(result.summary.to_json());
    } else if (*train) {
      const auto corpus = load_corpus(train_corpus, cfg);
      const auto model = tokenizer::BpeModel::train(corpus, train_vocab.value_or(cfg.bpe_vocab_size));
      tokenizer::Tokenizer(model).save(train_out);
      print_json({{"vocab_size", model.size()}, {"merges", model.merges().size()}, {"utterances", corpus.size()}});
    } else if (*sylv) {
      const auto corpus = load_corpus(sylv_corpus, cfg);
      const auto vocab = tokenizer::SyllableVocab::build(corpus, sylv_min.value_or(cfg.syllable_min_count));
      tokenizer::Tokenizer(vocab).save(sylv_out);
      print_json({{"vocab_size", vocab.size()}, {"utterances", corpus.size()}});
    } else if (*tok) {
      const auto corpus = load_corpus(tok_input, cfg);
      std::vector<tokenizer::Tokenizer> models;
      for (const auto& m : tok_models) models.push_back(tokenizer::Tokenizer::load(m));
      if (!tok_out.empty()) {
        std::string dump;
        for (const auto& text : corpus) dump += tokenizer::format_ids(models.front().encode(text).ids) + "\n";
        json_util::write_file_atomic(tok_out, dump);
      }
      std::vector<const tokenizer::Tokenizer*> ptrs;
      for (const auto& m : models) ptrs.push_back(&m);
      Json stats = Json::array();
      for (const auto& s : tokenizer::corpus_token_report(corpus, ptrs)) stats.push_back(s.to_json());
      if (!tok_stats.empty()) json_util::write_file_atomic(tok_stats, stats.dump(2) + "\n");
      print_json(stats);
    } else if (*exp) {
      const auto records = manifest::read_manifest(exp_manifest);
      const auto model = tokenizer::Tokenizer::load(exp_model);
      const auto r = pipeline::export_finetune(records, model, fs::path(exp_manifest).parent_path(), exp_tokens,
                                               exp_manifest_out);
      print_json({{"exported", r.exported}, {"skipped", r.skipped}});
    } else if (*ev) {
      eval::EvalReport report;
      if (!ev_from.empty()) {
        report = eval::report_from_json(json_util::parse_file(ev_from, ErrorCategory::UnreadableFile));
      } else {
        if (ev_ratings.empty()) throw Error(ErrorCategory::InvalidConfig, "eval needs --ratings or --from-report");
        const auto ratings = eval::parse_ratings(json_util::read_file(ev_ratings));
        const auto mos = eval::aggregate_mos_by_system(ratings);
        std::vector<std::pair<std::string, eval::CorpusAccuracy>> acc;
        if (!ev_pairs.empty()) {
          const auto pairs = eval::parse_transcription_pairs(json_util::read_file(ev_pairs));
          acc = eval::score_transcriptions(pairs, cfg.make_normalizer());
        }
        report = eval::build_report(mos, acc);
      }
      const auto rendered = eval::render_report(report);
      if (!ev_json.empty()) json_util::write_file_atomic(ev_json, rendered.structured.dump(2) + "\n");
      if (ev_table.empty()) {
        std::cout << rendered.table;
      } else {
        json_util::write_file_atomic(ev_table, rendered.table);
      }
    } else if (*rv) {
      review::ReviewStore store(rv_manifest, cfg.make_normalizer());
      review::ServerOptions opts;
      opts.host = rv_host;
      opts.port = rv_port;
      if (!rv_ui.empty()) opts.ui_dir = rv_ui;
      auto server = review::make_server(store, opts);
      const int port = opts.port == 0 ? server->bind_to_any_port(opts.host) : (server->bind_to_port(opts.host, opts.port) ? opts.port : -1);
      if (port < 0) throw Error(ErrorCategory::UnwritableOutput, "cannot bind " + opts.host + ":" + std::to_string(opts.port));
      g_server = server.get();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << Json{{"listening", "http://" + opts.host + ":" + std::to_string(port)},
                        {"port", port},
                        {"queue", store.queue(0, 0).total},
                        {"ignored_journal_lines", store.ignored_journal_lines()}}
                       .dump()
                << std::endl;
      server->listen_after_bind();
      g_server = nullptr;
      if (rv_compact) store.compact();
      std::cerr << "applied " << store.applied() << " decisions\n";
    }
  } catch (const Error& e) {
    std::cerr << Json{{"category", std::string(category_name(e.category()))}, {"message", e.detail()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << Json{{"category", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
  return 0;
}
