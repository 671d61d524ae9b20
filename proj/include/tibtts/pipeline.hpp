#pragma once

// End-to-end corpus governance: ingest an index of audio + transcripts, clean
// and measure the audio, normalize the text, check speech-text consistency,
// and emit a manifest where every record carries a status and, if rejected,
// a reason. Accepted records can then be exported as token dumps.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tibtts/audio.hpp"
#include "tibtts/consistency.hpp"
#include "tibtts/error.hpp"
#include "tibtts/json_util.hpp"
#include "tibtts/manifest.hpp"
#include "tibtts/normalize.hpp"
#include "tibtts/script.hpp"
#include "tibtts/tokenizer.hpp"

namespace tibtts::pipeline {

using manifest::CorpusRecord;
using manifest::PipelineConfig;
using manifest::RejectReason;
using manifest::Status;

struct IngestResult {
  std::vector<CorpusRecord> records;
  std::vector<std::string> warnings;
};

// Index lines are either JSON objects {"id", "audio", "text", "speaker"?} or
// tab-separated `id<TAB>audio<TAB>text[<TAB>speaker]`. Relative audio paths
// resolve against `source_dir`. Missing audio yields a Rejected record;
// a repeated id keeps the first occurrence and records a warning.
inline IngestResult ingest(const std::filesystem::path& index_path, const std::filesystem::path& source_dir) {
  std::string text;
  try {
    text = json_util::read_file(index_path);
  } catch (const Error& e) {
    throw Error(ErrorCategory::UnreadableIndex, e.detail());
  }
  IngestResult result;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    CorpusRecord r;
    std::string audio;
    if (line[0] == '{') {
      try {
        const auto j = Json::parse(line);
        json_util::require_known_keys(j, {"id", "audio", "text", "speaker"}, "index line");
        r.id = j.at("id").get<std::string>();
        audio = j.at("audio").get<std::string>();
        r.text_raw = j.at("text").get<std::string>();
        if (j.contains("speaker") && !j["speaker"].is_null()) r.speaker = j["speaker"].get<std::string>();
      } catch (const std::exception& e) {
        throw Error(ErrorCategory::UnreadableIndex, "line " + std::to_string(lineno) + ": " + e.what(), lineno);
      }
    } else {
      std::vector<std::string> fields;
      std::size_t start = 0;
      while (true) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
      }
      if (lineno == 1 && fields.size() >= 3 && fields[0] == "id" && fields[1] == "audio") continue;
      if (fields.size() < 3 || fields.size() > 4) {
        throw Error(ErrorCategory::UnreadableIndex, "line " + std::to_string(lineno) + ": expected 3 or 4 tab-separated fields",
                    lineno);
      }
      r.id = fields[0];
      audio = fields[1];
      r.text_raw = fields[2];
      if (fields.size() == 4 && !fields[3].empty()) r.speaker = fields[3];
    }
    if (r.id.empty()) throw Error(ErrorCategory::UnreadableIndex, "line " + std::to_string(lineno) + ": empty id", lineno);
    try {
      utf8::validate(r.text_raw);
    } catch (const Error& e) {
      throw Error(ErrorCategory::UnreadableIndex, "line " + std::to_string(lineno) + ": " + e.detail(), lineno);
    }
    if (!seen.insert(r.id).second) {
      result.warnings.push_back("line " + std::to_string(lineno) + ": duplicate id '" + r.id + "' skipped");
      continue;
    }
    std::filesystem::path p(audio);
    if (p.is_relative()) p = source_dir / p;
    r.audio_path = p.string();
    if (!std::filesystem::is_regular_file(p)) {
      r.reject(RejectReason::AudioUnreadable);
      r.notes.push_back("missing audio file");
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

struct QualitySummary {
  std::size_t total = 0;
  std::map<std::string, std::size_t> by_status;
  std::map<std::string, std::size_t> by_reason;
  std::size_t normalization_fallbacks = 0;
  std::size_t unknown_symbols = 0;
  std::size_t loudness_capped = 0;

  std::size_t count(Status s) const {
    auto it = by_status.find(manifest::status_name(s));
    return it == by_status.end() ? 0 : it->second;
  }
  std::size_t count(RejectReason r) const {
    auto it = by_reason.find(manifest::reason_name(r));
    return it == by_reason.end() ? 0 : it->second;
  }

  Json to_json() const {
    return Json{{"total", total},
                {"by_status", by_status},
                {"by_reason", by_reason},
                {"normalization_fallbacks", normalization_fallbacks},
                {"unknown_symbols", unknown_symbols},
                {"loudness_capped", loudness_capped}};
  }
};

inline QualitySummary summarize(const std::vector<CorpusRecord>& records) {
  QualitySummary s;
  s.total = records.size();
  for (auto st : {Status::Accepted, Status::Rejected, Status::NeedsReview}) s.by_status[manifest::status_name(st)] = 0;
  for (const auto& r : records) {
    ++s.by_status[manifest::status_name(r.status)];
    if (r.reject_reason) ++s.by_reason[manifest::reason_name(*r.reject_reason)];
    for (const auto& n : r.notes) {
      if (n.starts_with("number read digit by digit")) ++s.normalization_fallbacks;
      if (n.starts_with("unknown symbols: ")) s.unknown_symbols += std::stoul(n.substr(17));
      if (n == "loudness gain capped at peak ceiling") ++s.loudness_capped;
    }
  }
  return s;
}

struct RunResult {
  std::vector<CorpusRecord> records;
  QualitySummary summary;
};

namespace detail {

// Audio and text stages for one record. Consistency needs the whole corpus
// and runs afterwards.
inline void process_record(CorpusRecord& r, const PipelineConfig& cfg, const normalize::Normalizer& normalizer,
                           const std::filesystem::path& out_dir) {
  const auto text = normalizer(r.text_raw);
  r.text_normalized = text.normalized;
  r.syllable_count = script::count_syllables(text.normalized);
  for (const auto& f : text.flags) r.notes.push_back("number read digit by digit: " + f.digits);
  if (text.unknown_symbols) r.notes.push_back("unknown symbols: " + std::to_string(text.unknown_symbols));

  if (r.status == Status::Rejected) return;

  audio::AudioBuffer buf;
  try {
    buf = audio::read_wav(r.audio_path);
  } catch (const Error& e) {
    r.reject(RejectReason::AudioUnreadable);
    r.notes.push_back(std::string(category_name(e.category())) + ": " + e.detail());
    return;
  }
  r.sample_rate = cfg.target_sample_rate;
  if (buf.samples.empty()) {
    r.reject(RejectReason::FullySilent);
    return;
  }
  buf = audio::resample(buf, cfg.target_sample_rate);
  audio::ConditionedAudio conditioned;
  try {
    conditioned = audio::trim_and_normalize(buf, cfg.target_rms_dbfs, cfg.trim_threshold_dbfs, cfg.trim_pad_ms);
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::FullySilent && e.category() != ErrorCategory::AllZeroInput) throw;
    r.duration_s = buf.duration_s();
    r.reject(RejectReason::FullySilent);
    return;
  }
  buf = std::move(conditioned.buffer);
  r.clipping_ratio = conditioned.clipping_ratio;
  if (conditioned.capped) r.notes.push_back("loudness gain capped at peak ceiling");
  const auto q = audio::measure_quality(buf, cfg.trim_threshold_dbfs);
  r.duration_s = q.duration_s;
  r.rms_dbfs = q.rms_dbfs;
  r.snr_db = q.snr_db;
  audio::write_wav(out_dir / manifest::processed_audio_relpath(r.id), buf);

  if (r.duration_s < cfg.min_duration_s) {
    r.reject(RejectReason::TooShort);
  } else if (r.duration_s > cfg.max_duration_s) {
    r.reject(RejectReason::TooLong);
  } else if (r.clipping_ratio > cfg.max_clipping_ratio) {
    r.reject(RejectReason::Clipped);
  } else if (r.snr_db < cfg.min_snr_db) {
    r.reject(RejectReason::LowSnr);
  } else if (r.syllable_count == 0) {
    r.reject(RejectReason::EmptyText);
  }
}

}  // namespace detail

// Runs every stage and writes `out_dir/audio/*.wav`, `out_dir/manifest.jsonl`
// and `out_dir/summary.json`. Output is identical for any worker count.
inline RunResult run_pipeline(std::vector<CorpusRecord> records, const PipelineConfig& cfg,
                              const std::filesystem::path& out_dir, unsigned workers = 0) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "audio", ec);
  if (ec || !std::filesystem::is_directory(out_dir / "audio")) {
    throw Error(ErrorCategory::UnwritableOutput, "cannot create " + (out_dir / "audio").string());
  }
  const auto normalizer = cfg.make_normalizer();
  if (workers == 0) workers = cfg.workers;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());

  for (auto& r : records) {
    // A rerun starts each record from its ingest state.
    const bool missing = std::find(r.notes.begin(), r.notes.end(), "missing audio file") != r.notes.end();
    if (!missing) {
      r.status = Status::Pending;
      r.reject_reason.reset();
    }
    r.consistency_z.reset();
    r.review.reset();
    std::erase_if(r.notes, [](const std::string& n) { return n != "missing audio file"; });
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(workers);
  auto worker = [&](unsigned w) {
    try {
      for (std::size_t i = next++; i < records.size(); i = next++) {
        try {
          detail::process_record(records[i], cfg, normalizer, out_dir);
        } catch (const Error& e) {
          if (e.category() == ErrorCategory::UnwritableOutput) throw;
          records[i].reject(RejectReason::AudioUnreadable);
          records[i].notes.push_back(std::string(category_name(e.category())) + ": " + e.detail());
        }
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker, w);
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::vector<std::size_t> pending;
  std::vector<consistency::RateSample> rates;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].status != Status::Pending) continue;
    pending.push_back(i);
    rates.push_back({consistency::speaking_rate(records[i].duration_s, records[i].syllable_count), records[i].speaker});
  }
  const auto verdicts = consistency::verify_corpus(rates, cfg.consistency);
  for (std::size_t k = 0; k < pending.size(); ++k) {
    auto& r = records[pending[k]];
    const auto& v = verdicts[k];
    r.consistency_z = v.z_robust;
    switch (v.decision) {
      case consistency::Decision::Accept: r.status = Status::Accepted; break;
      case consistency::Decision::Review:
        r.status = Status::NeedsReview;
        if (std::fabs(v.z_robust) <= cfg.consistency.review_z) {
          r.notes.push_back("speaker group too small for rate statistics");
        } else {
          r.notes.push_back(v.z_robust > 0 ? "speaking rate unusually fast" : "speaking rate unusually slow");
        }
        break;
      case consistency::Decision::Reject: r.reject(RejectReason::RateOutlier); break;
    }
  }

  RunResult result{std::move(records), {}};
  result.summary = summarize(result.records);
  manifest::write_manifest(out_dir / "manifest.jsonl", result.records);
  json_util::write_file_atomic(out_dir / "summary.json", result.summary.to_json().dump(2) + "\n");
  return result;
}

struct ExportResult {
  std::size_t exported = 0;
  std::size_t skipped = 0;
};

// Writes `tokens_path` (id TAB processed-audio-path TAB space-separated ids,
// one Accepted record per line) and `manifest_out` (the Accepted records).
inline ExportResult export_finetune(const std::vector<CorpusRecord>& records, const tokenizer::Tokenizer& tok,
                                    const std::filesystem::path& manifest_dir, const std::filesystem::path& tokens_path,
                                    const std::filesystem::path& manifest_out) {
  std::vector<CorpusRecord> accepted;
  for (const auto& r : records) {
    if (r.status == Status::Accepted) accepted.push_back(r);
  }
  if (accepted.empty()) throw Error(ErrorCategory::NoAcceptedRecords, "manifest has no Accepted records");
  std::string dump;
  for (const auto& r : accepted) {
    const auto seq = tok.encode(r.text_normalized);
    dump += r.id + "\t" + (manifest_dir / manifest::processed_audio_relpath(r.id)).string() + "\t" +
            tokenizer::format_ids(seq.ids) + "\n";
  }
  json_util::write_file_atomic(tokens_path, dump);
  manifest::write_manifest(manifest_out, accepted);
  return {accepted.size(), records.size() - accepted.size()};
}

}  // namespace tibtts::pipeline
