#pragma once

// Evaluation metrics: syllable accuracy from edit alignment, MOS aggregation
// and the System / MOS / Syllable Accuracy report.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tibtts/error.hpp"
#include "tibtts/json_util.hpp"
#include "tibtts/normalize.hpp"
#include "tibtts/script.hpp"
#include "tibtts/tokenizer.hpp"

namespace tibtts::eval {

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }

  EditCounts& operator+=(const EditCounts& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    reference_length += o.reference_length;
    return *this;
  }
  bool operator==(const EditCounts&) const = default;
};

// Minimum-edit-distance alignment (unit costs) with backtrace. Among
// equal-cost paths the backtrace prefers match/substitution, then deletion.
template <typename T>
EditCounts align(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return cost[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  EditCounts c;
  c.reference_length = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      c.substitutions += ref[i - 1] == hyp[j - 1] ? 0 : 1;
      --i, --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

// 100 * max(0, 1 - (S + D + I) / N).
inline double accuracy_pct(const EditCounts& c) {
  if (c.reference_length == 0) throw Error(ErrorCategory::EmptyReference, "reference has no syllables");
  const double rate = static_cast<double>(c.errors()) / static_cast<double>(c.reference_length);
  return 100.0 * std::max(0.0, 1.0 - rate);
}

inline double syllable_accuracy(std::span<const std::string> ref, std::span<const std::string> hyp) {
  if (ref.empty()) throw Error(ErrorCategory::EmptyReference, "reference has no syllables");
  return accuracy_pct(align(ref, hyp));
}

// Pools S, D, I and N over utterances; each utterance is aligned on its own.
struct CorpusAccuracy {
  EditCounts totals;
  std::size_t utterances = 0;

  void add(std::span<const std::string> ref, std::span<const std::string> hyp) {
    if (ref.empty()) throw Error(ErrorCategory::EmptyReference, "reference has no syllables", utterances);
    totals += align(ref, hyp);
    ++utterances;
  }
  double accuracy_pct() const { return eval::accuracy_pct(totals); }
};

// ---------------------------------------------------------------------------
// MOS

struct Rating {
  std::string system;
  std::string rater;
  std::string utterance_id;
  double score;
};

struct MosSummary {
  double mean = 0;
  double ci95 = 0;  // 1.96 * sample stddev / sqrt(n); 0 when n == 1
  std::size_t n = 0;
  std::size_t n_raters = 0;
  std::size_t n_utterances = 0;
};

inline MosSummary aggregate_mos(std::span<const Rating> ratings) {
  if (ratings.empty()) throw Error(ErrorCategory::EmptyCorpus, "no ratings");
  MosSummary s;
  std::set<std::string> raters, utts;
  double sum = 0;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    const auto& r = ratings[i];
    if (!(r.score >= 1.0 && r.score <= 5.0)) {
      throw Error(ErrorCategory::OutOfRangeScore,
                  "score " + std::to_string(r.score) + " from rater " + r.rater + " on " + r.utterance_id, i);
    }
    sum += r.score;
    raters.insert(r.rater);
    utts.insert(r.utterance_id);
  }
  s.n = ratings.size();
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (const auto& r : ratings) ss += (r.score - s.mean) * (r.score - s.mean);
    s.ci95 = 1.96 * std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  s.n_raters = raters.size();
  s.n_utterances = utts.size();
  return s;
}

// Per-system summaries in first-appearance order.
inline std::vector<std::pair<std::string, MosSummary>> aggregate_mos_by_system(std::span<const Rating> ratings) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<Rating>> by;
  for (const auto& r : ratings) {
    if (!by.count(r.system)) order.push_back(r.system);
    by[r.system].push_back(r);
  }
  std::vector<std::pair<std::string, MosSummary>> out;
  for (const auto& name : order) out.emplace_back(name, aggregate_mos(by[name]));
  return out;
}

// ---------------------------------------------------------------------------
// Delimited input files. Tab-separated when the header has a tab, otherwise
// comma-separated. The first line is a header naming the columns.

namespace detail {

inline std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorCategory::UnreadableFile, "missing column '" + std::string(name) + "'");
  }
};

inline Table parse_table(std::string_view text) {
  Table t;
  std::istringstream in{std::string(text)};
  std::string line;
  char delim = ',';
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty()) {
      delim = line.find('\t') != std::string::npos ? '\t' : ',';
      t.header = split(line, delim);
      continue;
    }
    auto fields = split(line, delim);
    if (fields.size() != t.header.size()) {
      throw Error(ErrorCategory::UnreadableFile,
                  "line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) + " fields", lineno);
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (t.header.empty()) throw Error(ErrorCategory::UnreadableFile, "missing header line");
  return t;
}

}  // namespace detail

// Columns: system, rater, utterance_id, score.
inline std::vector<Rating> parse_ratings(std::string_view text) {
  const auto t = detail::parse_table(text);
  const auto cs = t.column("system"), cr = t.column("rater"), cu = t.column("utterance_id"), cv = t.column("score");
  std::vector<Rating> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    double score = 0;
    std::size_t used = 0;
    try {
      score = std::stod(row[cv], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != row[cv].size()) {
      throw Error(ErrorCategory::OutOfRangeScore, "line " + std::to_string(t.line_numbers[i]) + ": score '" + row[cv] + "'",
                  t.line_numbers[i]);
    }
    if (!(score >= 1.0 && score <= 5.0)) {
      throw Error(ErrorCategory::OutOfRangeScore,
                  "line " + std::to_string(t.line_numbers[i]) + ": score " + row[cv] + " outside [1, 5]", t.line_numbers[i]);
    }
    out.push_back({row[cs], row[cr], row[cu], score});
  }
  return out;
}

struct TranscriptionPair {
  std::string utterance_id;
  std::string ref_text;
  std::string hyp_text;
  std::string system;  // optional column; empty when absent
};

// Columns: utterance_id, ref_text, hyp_text, optionally system.
inline std::vector<TranscriptionPair> parse_transcription_pairs(std::string_view text) {
  const auto t = detail::parse_table(text);
  const auto cu = t.column("utterance_id"), cr = t.column("ref_text"), ch = t.column("hyp_text");
  std::optional<std::size_t> csys;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == "system") csys = i;
  }
  std::vector<TranscriptionPair> out;
  for (const auto& row : t.rows) out.push_back({row[cu], row[cr], row[ch], csys ? row[*csys] : std::string{}});
  return out;
}

// Pooled syllable accuracy per system; texts are normalized then segmented.
inline std::vector<std::pair<std::string, CorpusAccuracy>> score_transcriptions(
    std::span<const TranscriptionPair> pairs, const normalize::Normalizer& normalizer) {
  std::vector<std::string> order;
  std::map<std::string, CorpusAccuracy> by;
  for (const auto& p : pairs) {
    if (!by.count(p.system)) order.push_back(p.system);
    const auto ref = script::segment_syllables(normalizer(p.ref_text).normalized);
    const auto hyp = script::segment_syllables(normalizer(p.hyp_text).normalized);
    try {
      by[p.system].add(ref, hyp);
    } catch (const Error& e) {
      throw Error(e.category(), "utterance " + p.utterance_id + ": " + e.detail());
    }
  }
  std::vector<std::pair<std::string, CorpusAccuracy>> out;
  for (const auto& name : order) out.emplace_back(name, by[name]);
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct ReportRow {
  std::string name;
  double mos_mean = 0;
  double mos_ci95 = 0;
  double syllable_accuracy_pct = 0;
  std::size_t n_raters = 0;
  std::size_t n_utterances = 0;

  bool operator==(const ReportRow&) const = default;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::vector<tokenizer::StrategyStats> token_stats;

  void validate() const {
    for (const auto& r : rows) {
      if (!(r.mos_mean >= 1.0 && r.mos_mean <= 5.0)) {
        throw Error(ErrorCategory::OutOfRangeScore, "MOS of " + r.name + " outside [1, 5]");
      }
      if (!(r.syllable_accuracy_pct >= 0.0 && r.syllable_accuracy_pct <= 100.0)) {
        throw Error(ErrorCategory::OutOfRangeScore, "accuracy of " + r.name + " outside [0, 100]");
      }
    }
  }
};

inline constexpr std::string_view kColumnSystem = "System";
inline constexpr std::string_view kColumnMos = "MOS";
inline constexpr std::string_view kColumnAccuracy = "Syllable Accuracy (%)";

// Fixed-width text table: MOS with two decimals, accuracy with one.
inline std::string render_table(std::span<const ReportRow> rows) {
  std::size_t w0 = kColumnSystem.size();
  for (const auto& r : rows) w0 = std::max(w0, r.name.size());
  const std::size_t w1 = std::string_view("5.00").size(), w2 = kColumnAccuracy.size();
  auto pad = [](std::string s, std::size_t w, bool right) {
    if (s.size() < w) s = right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
    return s;
  };
  auto fmt = [](double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return std::string(buf);
  };
  std::string out;
  out += "| " + pad(std::string(kColumnSystem), w0, false) + " | " + pad(std::string(kColumnMos), w1, true) + " | " +
         pad(std::string(kColumnAccuracy), w2, true) + " |\n";
  out += "|" + std::string(w0 + 2, '-') + "|" + std::string(w1 + 1, '-') + ":|" + std::string(w2 + 1, '-') + ":|\n";
  for (const auto& r : rows) {
    out += "| " + pad(r.name, w0, false) + " | " + pad(fmt(r.mos_mean, 2), w1, true) + " | " +
           pad(fmt(r.syllable_accuracy_pct, 1), w2, true) + " |\n";
  }
  return out;
}

inline Json report_to_json(const EvalReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"system", r.name},
                    {"mos", r.mos_mean},
                    {"mos_ci95", r.mos_ci95},
                    {"syllable_accuracy_pct", r.syllable_accuracy_pct},
                    {"n_raters", r.n_raters},
                    {"n_utterances", r.n_utterances}});
  }
  Json j{{"columns", {kColumnSystem, kColumnMos, kColumnAccuracy}}, {"rows", rows}};
  if (!report.token_stats.empty()) {
    Json stats = Json::array();
    for (const auto& s : report.token_stats) stats.push_back(s.to_json());
    j["token_stats"] = stats;
  }
  return j;
}

inline EvalReport report_from_json(const Json& j) {
  EvalReport report;
  try {
    for (const auto& r : j.at("rows")) {
      report.rows.push_back({r.at("system").get<std::string>(), r.at("mos").get<double>(),
                             r.value("mos_ci95", 0.0), r.at("syllable_accuracy_pct").get<double>(),
                             r.value("n_raters", std::size_t{0}), r.value("n_utterances", std::size_t{0})});
    }
    if (j.contains("token_stats")) {
      for (const auto& s : j.at("token_stats")) {
        tokenizer::StrategyStats st;
        st.strategy = s.at("strategy").get<std::string>();
        st.utterances = s.at("utterances").get<std::size_t>();
        st.total_tokens = s.at("total_tokens").get<std::size_t>();
        st.content_tokens = s.at("content_tokens").get<std::size_t>();
        st.syllables = s.at("syllables").get<std::size_t>();
        st.mean_tokens_per_utterance = s.at("mean_tokens_per_utterance").get<double>();
        st.tokens_per_syllable = s.at("tokens_per_syllable").get<double>();
        st.oov_rate = s.at("oov_rate").get<double>();
        st.vocab_coverage = s.at("vocab_coverage").get<double>();
        report.token_stats.push_back(st);
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCategory::UnreadableFile, std::string("report: ") + e.what());
  }
  return report;
}

// Text table plus lossless structured form.
struct RenderedReport {
  std::string table;
  Json structured;
};

inline RenderedReport render_report(const EvalReport& report) {
  if (report.rows.empty()) throw Error(ErrorCategory::EmptyCorpus, "report needs at least one row");
  report.validate();
  return {render_table(report.rows), report_to_json(report)};
}

// Joins MOS summaries and accuracies by system name, MOS order first.
inline EvalReport build_report(std::span<const std::pair<std::string, MosSummary>> mos,
                               std::span<const std::pair<std::string, CorpusAccuracy>> accuracy) {
  EvalReport report;
  for (const auto& [name, m] : mos) {
    ReportRow row{name, m.mean, m.ci95, 0.0, m.n_raters, m.n_utterances};
    for (const auto& [aname, a] : accuracy) {
      if (aname == name) row.syllable_accuracy_pct = a.accuracy_pct();
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace tibtts::eval
