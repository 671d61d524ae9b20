#pragma once

// Corpus records, review decisions and the pipeline configuration, with
// their line-delimited JSON forms.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tibtts/consistency.hpp"
#include "tibtts/error.hpp"
#include "tibtts/json_util.hpp"
#include "tibtts/normalize.hpp"

namespace tibtts::manifest {

enum class Status { Pending, Accepted, Rejected, NeedsReview };

enum class RejectReason {
  FullySilent,
  TooShort,
  TooLong,
  Clipped,
  LowSnr,
  EmptyText,
  RateOutlier,
  ReviewerRejected,
  AudioUnreadable,
};

enum class ReviewAction { Accept, Reject, EditText };

NLOHMANN_JSON_SERIALIZE_ENUM(Status, {{Status::Pending, "Pending"},
                                      {Status::Accepted, "Accepted"},
                                      {Status::Rejected, "Rejected"},
                                      {Status::NeedsReview, "NeedsReview"}})

NLOHMANN_JSON_SERIALIZE_ENUM(RejectReason, {{RejectReason::FullySilent, "FullySilent"},
                                            {RejectReason::TooShort, "TooShort"},
                                            {RejectReason::TooLong, "TooLong"},
                                            {RejectReason::Clipped, "Clipped"},
                                            {RejectReason::LowSnr, "LowSnr"},
                                            {RejectReason::EmptyText, "EmptyText"},
                                            {RejectReason::RateOutlier, "RateOutlier"},
                                            {RejectReason::ReviewerRejected, "ReviewerRejected"},
                                            {RejectReason::AudioUnreadable, "AudioUnreadable"}})

NLOHMANN_JSON_SERIALIZE_ENUM(ReviewAction, {{ReviewAction::Accept, "Accept"},
                                            {ReviewAction::Reject, "Reject"},
                                            {ReviewAction::EditText, "EditText"}})

inline std::string status_name(Status s) { return Json(s).get<std::string>(); }
inline std::string reason_name(RejectReason r) { return Json(r).get<std::string>(); }

inline std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct ReviewDecision {
  std::string record_id;
  ReviewAction action = ReviewAction::Accept;
  std::optional<std::string> edited_text;
  std::string reviewer;
  std::string timestamp;  // UTC, ISO 8601

  // Same effect; reviewer and timestamp do not matter for idempotence.
  bool same_effect(const ReviewDecision& o) const {
    return record_id == o.record_id && action == o.action && edited_text == o.edited_text;
  }

  void validate() const {
    if (record_id.empty()) throw Error(ErrorCategory::BadRequest, "decision without record_id");
    if (action == ReviewAction::EditText && (!edited_text || edited_text->empty())) {
      throw Error(ErrorCategory::InvalidEdit, "EditText needs non-empty edited_text");
    }
  }

  Json to_json() const {
    Json j{{"record_id", record_id}, {"action", action}, {"reviewer", reviewer}, {"timestamp", timestamp}};
    j["edited_text"] = edited_text ? Json(*edited_text) : Json(nullptr);
    return j;
  }

  static ReviewDecision from_json(const Json& j) {
    try {
      json_util::require_known_keys(j, {"record_id", "action", "edited_text", "reviewer", "timestamp"}, "decision");
      ReviewDecision d;
      d.record_id = j.at("record_id").get<std::string>();
      const auto action = j.at("action").get<std::string>();
      if (action == "Accept") {
        d.action = ReviewAction::Accept;
      } else if (action == "Reject") {
        d.action = ReviewAction::Reject;
      } else if (action == "EditText") {
        d.action = ReviewAction::EditText;
      } else {
        throw Error(ErrorCategory::BadRequest, "unknown action '" + action + "'");
      }
      if (j.contains("edited_text") && !j["edited_text"].is_null()) d.edited_text = j["edited_text"].get<std::string>();
      d.reviewer = j.value("reviewer", std::string{});
      d.timestamp = j.value("timestamp", std::string{});
      return d;
    } catch (const Json::exception& e) {
      throw Error(ErrorCategory::BadRequest, std::string("decision: ") + e.what());
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::InvalidConfig) throw Error(ErrorCategory::BadRequest, e.detail());
      throw;
    }
  }
};

struct CorpusRecord {
  std::string id;
  std::string audio_path;  // source audio as given by the index
  std::optional<std::string> speaker;
  std::string text_raw;
  std::string text_normalized;
  std::size_t syllable_count = 0;
  double duration_s = 0;
  int sample_rate = 0;
  double rms_dbfs = 0;
  double snr_db = 0;
  double clipping_ratio = 0;
  std::optional<double> consistency_z;
  Status status = Status::Pending;
  std::optional<RejectReason> reject_reason;
  std::optional<ReviewDecision> review;
  std::vector<std::string> notes;  // pipeline observations shown to reviewers

  void reject(RejectReason r) {
    status = Status::Rejected;
    reject_reason = r;
  }

  Json to_json() const {
    Json j;
    j["id"] = id;
    j["audio_path"] = audio_path;
    j["speaker"] = speaker ? Json(*speaker) : Json(nullptr);
    j["text_raw"] = text_raw;
    j["text_normalized"] = text_normalized;
    j["syllable_count"] = syllable_count;
    j["duration_s"] = duration_s;
    j["sample_rate"] = sample_rate;
    j["rms_dbfs"] = rms_dbfs;
    j["snr_db"] = snr_db;
    j["clipping_ratio"] = clipping_ratio;
    j["consistency_z"] = consistency_z ? Json(*consistency_z) : Json(nullptr);
    j["status"] = status;
    j["reject_reason"] = reject_reason ? Json(*reject_reason) : Json(nullptr);
    j["review"] = review ? review->to_json() : Json(nullptr);
    j["notes"] = notes;
    return j;
  }

  static CorpusRecord from_json(const Json& j) {
    CorpusRecord r;
    r.id = j.at("id").get<std::string>();
    r.audio_path = j.at("audio_path").get<std::string>();
    if (j.contains("speaker") && !j["speaker"].is_null()) r.speaker = j["speaker"].get<std::string>();
    r.text_raw = j.at("text_raw").get<std::string>();
    r.text_normalized = j.value("text_normalized", std::string{});
    r.syllable_count = j.value("syllable_count", std::size_t{0});
    r.duration_s = j.value("duration_s", 0.0);
    r.sample_rate = j.value("sample_rate", 0);
    r.rms_dbfs = j.value("rms_dbfs", 0.0);
    r.snr_db = j.value("snr_db", 0.0);
    r.clipping_ratio = j.value("clipping_ratio", 0.0);
    if (j.contains("consistency_z") && !j["consistency_z"].is_null()) r.consistency_z = j["consistency_z"].get<double>();
    r.status = j.at("status").get<Status>();
    if (j.contains("reject_reason") && !j["reject_reason"].is_null()) r.reject_reason = j["reject_reason"].get<RejectReason>();
    if (j.contains("review") && !j["review"].is_null()) r.review = ReviewDecision::from_json(j["review"]);
    r.notes = j.value("notes", std::vector<std::string>{});
    if (r.status == Status::Rejected && !r.reject_reason) {
      throw Error(ErrorCategory::UnreadableFile, "record " + r.id + " is Rejected without a reason");
    }
    return r;
  }
};

inline std::string serialize_manifest(const std::vector<CorpusRecord>& records) {
  std::string out;
  for (const auto& r : records) out += r.to_json().dump() + "\n";
  return out;
}

inline std::vector<CorpusRecord> parse_manifest(std::string_view text) {
  std::vector<CorpusRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(CorpusRecord::from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw Error(ErrorCategory::UnreadableFile, "manifest line " + std::to_string(lineno) + ": " + e.what(), lineno);
    } catch (const Error& e) {
      throw Error(ErrorCategory::UnreadableFile, "manifest line " + std::to_string(lineno) + ": " + e.detail(), lineno);
    }
  }
  return out;
}

inline std::vector<CorpusRecord> read_manifest(const std::filesystem::path& path) {
  return parse_manifest(json_util::read_file(path));
}

inline void write_manifest(const std::filesystem::path& path, const std::vector<CorpusRecord>& records) {
  json_util::write_file_atomic(path, serialize_manifest(records));
}

// Processed audio of a record lives at <manifest dir>/audio/<safe id>.wav.
inline std::string safe_file_stem(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out[0] == '.') out.insert(out.begin(), '_');
  return out;
}

inline std::filesystem::path processed_audio_relpath(std::string_view id) {
  return std::filesystem::path("audio") / (safe_file_stem(id) + ".wav");
}

// ---------------------------------------------------------------------------
// Pipeline configuration

struct PipelineConfig {
  int target_sample_rate = 24000;
  double target_rms_dbfs = -23.0;
  double trim_threshold_dbfs = -45.0;
  double trim_pad_ms = 100.0;

  double min_duration_s = 0.5;
  double max_duration_s = 20.0;
  double max_clipping_ratio = 0.001;
  double min_snr_db = 15.0;

  consistency::Thresholds consistency;

  normalize::NormalizationConfig normalization = normalize::NormalizationConfig::corpus_default();
  std::optional<std::filesystem::path> lexicon_path;

  std::string tokenizer_strategy = "bpe";
  std::size_t bpe_vocab_size = 512;
  std::size_t syllable_min_count = 1;

  unsigned workers = 0;  // 0: hardware concurrency

  void validate() const {
    auto finite = [](double v, const char* name) {
      if (!std::isfinite(v)) throw Error(ErrorCategory::InvalidConfig, std::string(name) + " must be finite");
    };
    finite(target_rms_dbfs, "target_rms_dbfs");
    finite(trim_threshold_dbfs, "trim_threshold_dbfs");
    finite(trim_pad_ms, "trim_pad_ms");
    finite(min_duration_s, "min_duration_s");
    finite(max_duration_s, "max_duration_s");
    finite(max_clipping_ratio, "max_clipping_ratio");
    finite(min_snr_db, "min_snr_db");
    finite(consistency.review_z, "review_z");
    finite(consistency.reject_z, "reject_z");
    if (target_sample_rate <= 0) throw Error(ErrorCategory::InvalidConfig, "target_sample_rate must be positive");
    if (!(trim_threshold_dbfs < 0)) throw Error(ErrorCategory::InvalidConfig, "trim_threshold_dbfs must be negative");
    if (trim_pad_ms < 0) throw Error(ErrorCategory::InvalidConfig, "trim_pad_ms must be >= 0");
    if (!(min_duration_s < max_duration_s)) throw Error(ErrorCategory::InvalidConfig, "min_duration_s must be below max_duration_s");
    if (!(consistency.review_z < consistency.reject_z)) throw Error(ErrorCategory::InvalidConfig, "review_z must be below reject_z");
    if (tokenizer_strategy != "bpe" && tokenizer_strategy != "syllable") {
      throw Error(ErrorCategory::InvalidConfig, "tokenizer strategy must be 'bpe' or 'syllable'");
    }
  }

  // `base_dir` resolves relative paths inside the file.
  static PipelineConfig from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
    using json_util::get_or;
    using json_util::require_known_keys;
    require_known_keys(j, {"audio", "gates", "consistency", "normalization", "lexicon", "tokenizer", "workers"}, "config");
    PipelineConfig c;
    if (j.contains("audio")) {
      const auto& a = j["audio"];
      require_known_keys(a, {"target_sample_rate", "target_rms_dbfs", "trim_threshold_dbfs", "trim_pad_ms"}, "audio");
      c.target_sample_rate = get_or(a, "target_sample_rate", c.target_sample_rate);
      c.target_rms_dbfs = get_or(a, "target_rms_dbfs", c.target_rms_dbfs);
      c.trim_threshold_dbfs = get_or(a, "trim_threshold_dbfs", c.trim_threshold_dbfs);
      c.trim_pad_ms = get_or(a, "trim_pad_ms", c.trim_pad_ms);
    }
    if (j.contains("gates")) {
      const auto& g = j["gates"];
      require_known_keys(g, {"min_duration_s", "max_duration_s", "max_clipping_ratio", "min_snr_db"}, "gates");
      c.min_duration_s = get_or(g, "min_duration_s", c.min_duration_s);
      c.max_duration_s = get_or(g, "max_duration_s", c.max_duration_s);
      c.max_clipping_ratio = get_or(g, "max_clipping_ratio", c.max_clipping_ratio);
      c.min_snr_db = get_or(g, "min_snr_db", c.min_snr_db);
    }
    if (j.contains("consistency")) {
      const auto& k = j["consistency"];
      require_known_keys(k, {"review_z", "reject_z", "min_group_size", "degenerate_scale_fraction"}, "consistency");
      c.consistency.review_z = get_or(k, "review_z", c.consistency.review_z);
      c.consistency.reject_z = get_or(k, "reject_z", c.consistency.reject_z);
      c.consistency.min_group_size = get_or(k, "min_group_size", c.consistency.min_group_size);
      c.consistency.degenerate_scale_fraction =
          get_or(k, "degenerate_scale_fraction", c.consistency.degenerate_scale_fraction);
    }
    if (j.contains("normalization")) {
      const auto& n = j["normalization"];
      if (n.is_string()) {
        auto path = std::filesystem::path(n.get<std::string>());
        if (path.is_relative()) path = base_dir / path;
        c.normalization = normalize::NormalizationConfig::from_json(json_util::parse_file(path, ErrorCategory::InvalidConfig));
      } else {
        c.normalization = normalize::NormalizationConfig::from_json(n);
      }
    }
    if (j.contains("lexicon")) {
      auto path = std::filesystem::path(get_or<std::string>(j, "lexicon", ""));
      if (path.is_relative()) path = base_dir / path;
      c.lexicon_path = path;
    }
    if (j.contains("tokenizer")) {
      const auto& t = j["tokenizer"];
      require_known_keys(t, {"strategy", "vocab_size", "min_count"}, "tokenizer");
      c.tokenizer_strategy = get_or(t, "strategy", c.tokenizer_strategy);
      c.bpe_vocab_size = get_or(t, "vocab_size", c.bpe_vocab_size);
      c.syllable_min_count = get_or(t, "min_count", c.syllable_min_count);
    }
    c.workers = get_or(j, "workers", c.workers);
    c.validate();
    return c;
  }

  static PipelineConfig load(const std::filesystem::path& path) {
    return from_json(json_util::parse_file(path, ErrorCategory::InvalidConfig), path.parent_path());
  }

  normalize::Normalizer make_normalizer() const {
    std::optional<normalize::NumberLexicon> lex;
    if (lexicon_path) lex = normalize::NumberLexicon::load(*lexicon_path);
    return normalize::Normalizer(normalization, std::move(lex));
  }
};

}  // namespace tibtts::manifest
