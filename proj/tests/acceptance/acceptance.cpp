// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage:
//   tibtts_acceptance --cli <path to tibtts> [--alignment-exhaustive-max N]

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "support/align_oracle.hpp"
#include "support/bpe_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/spectrum.hpp"
#include "tibtts/audio.hpp"
#include "tibtts/consistency.hpp"
#include "tibtts/eval.hpp"
#include "tibtts/pipeline.hpp"
#include "tibtts/review.hpp"
#include "tibtts/tokenizer.hpp"

using namespace tibtts;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int g_failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const Error& e) {
    o = {false, std::string("error ") + std::string(category_name(e.category())) + ": " + e.detail()};
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++g_failures;
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

std::vector<std::string> random_corpus(std::mt19937& rng, std::size_t utterances) {
  std::vector<std::string> corpus;
  for (std::size_t u = 0; u < utterances; ++u) {
    std::vector<std::string> words;
    const std::size_t n = 1 + rng() % 10;
    for (std::size_t k = 0; k < n; ++k) words.push_back(fixtures::random_syllable(rng));
    corpus.push_back(fixtures::join_syllables(words) + (rng() % 2 ? "།" : ""));
  }
  return corpus;
}

std::vector<std::pair<std::string, std::string>> merge_strings(const tokenizer::BpeModel& m) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& merge : m.merges()) out.emplace_back(m.token(merge.left), m.token(merge.right));
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizer

Outcome bpe_oracle_equivalence() {
  std::mt19937 rng(1001);
  const auto t0 = Clock::now();
  std::size_t compared = 0, mismatched = 0;
  while (compared < 120) {
    const auto corpus = random_corpus(rng, 1 + rng() % 50);
    const std::size_t target = 60 + rng() % 453;  // up to 512
    std::optional<tokenizer::BpeModel> model;
    try {
      model = tokenizer::BpeModel::train(corpus, target);
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::TargetTooSmall) throw;
      continue;
    }
    ++compared;
    if (merge_strings(*model) != oracle::train_bpe(corpus, target)) ++mismatched;
  }
  const double elapsed = seconds_since(t0);
  return {mismatched == 0 && elapsed < 60.0, std::to_string(compared) + " corpora, " + std::to_string(mismatched) +
                                                  " mismatches, " + fmt(elapsed, 1) + " s (limit 60 s)"};
}

Outcome tokenizer_round_trips() {
  std::mt19937 rng(1002);
  static const std::vector<std::string> separators = {"་", "་", "་", "།", "། ", " ", "་།", "༎"};
  // Training text uses every separator so each generated codepoint is in the
  // base alphabet.
  auto corpus = random_corpus(rng, 200);
  for (auto& line : corpus) line += separators[rng() % separators.size()] + fixtures::random_syllable(rng);
  const tokenizer::Tokenizer syllable(tokenizer::SyllableVocab::build(corpus, 1));
  const tokenizer::Tokenizer bpe(tokenizer::BpeModel::train(corpus, 512));
  std::vector<std::string> inventory;
  for (const auto& t : corpus) {
    for (auto& s : script::segment_syllables(t)) inventory.push_back(s);
  }
  std::size_t syllable_fail = 0, bpe_fail = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::string> words;
    const std::size_t n = 1 + rng() % 12;
    for (std::size_t k = 0; k < n; ++k) words.push_back(inventory[rng() % inventory.size()]);
    // Syllable strategy: syllables joined by tsheg.
    const auto plain = fixtures::join_syllables(words);
    syllable_fail += syllable.decode(syllable.encode(plain).ids) != plain;
    // BPE: any mix of tsheg, shad and space between and after syllables.
    std::string mixed;
    for (std::size_t k = 0; k < n; ++k) {
      mixed += words[k];
      if (k + 1 < n || rng() % 2) mixed += separators[rng() % separators.size()];
    }
    bpe_fail += bpe.decode(bpe.encode(mixed).ids) != mixed;
  }
  return {syllable_fail == 0 && bpe_fail == 0, "10000 strings each; failures syllable=" + std::to_string(syllable_fail) +
                                                   " bpe=" + std::to_string(bpe_fail)};
}

Outcome sequence_length_claim() {
  const auto cfg = manifest::PipelineConfig{};
  const auto normalizer = cfg.make_normalizer();
  std::vector<std::string> corpus;
  std::istringstream in(json_util::read_file(std::string(TIBTTS_DATA_DIR) + "/corpus/sample.txt"));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) corpus.push_back(normalizer(line).normalized);
  }
  const tokenizer::Tokenizer syllable(tokenizer::SyllableVocab::build(corpus, 1));
  const tokenizer::Tokenizer bpe(tokenizer::BpeModel::train(corpus, 512));
  const std::vector<const tokenizer::Tokenizer*> toks = {&syllable, &bpe};
  const auto report = tokenizer::corpus_token_report(corpus, toks);
  const double cp = report[0].mean_tokens_per_utterance;
  const double syl = report[1].mean_tokens_per_utterance;
  const double b = report[2].mean_tokens_per_utterance;
  return {cp > b && cp > syl, std::to_string(corpus.size()) + " utterances; mean tokens/utterance codepoint=" + fmt(cp, 2) +
                                  " bpe=" + fmt(b, 2) + " syllable=" + fmt(syl, 2)};
}

// ---------------------------------------------------------------------------
// Alignment

// Forward DP over a prefix trie of hypotheses: one column per trie node, so
// every hypothesis up to `max_len` costs one column update. Each cell keeps
// the cost and the (S, D, I) counts of the path the backtrace would take.
struct Cell {
  std::size_t cost;
  oracle::Counts counts;
};

class TrieAlignOracle {
 public:
  TrieAlignOracle(const std::vector<int>& ref, std::size_t max_len, int alphabet)
      : ref_(ref), max_len_(max_len), alphabet_(alphabet) {}

  // Calls visit(hyp, cell) for every hypothesis, including the empty one.
  template <class Visit>
  void run(Visit&& visit) {
    std::vector<Cell> col(ref_.size() + 1);
    for (std::size_t i = 0; i <= ref_.size(); ++i) col[i] = {i, {0, i, 0}};
    std::vector<int> hyp;
    descend(col, hyp, visit);
  }

 private:
  template <class Visit>
  void descend(const std::vector<Cell>& prev, std::vector<int>& hyp, Visit& visit) {
    visit(hyp, prev.back());
    if (hyp.size() == max_len_) return;
    std::vector<Cell> col(prev.size());
    for (int c = 0; c < alphabet_; ++c) {
      col[0] = {hyp.size() + 1, {0, 0, hyp.size() + 1}};
      for (std::size_t i = 1; i < col.size(); ++i) {
        const bool same = ref_[i - 1] == c;
        const std::size_t diag = prev[i - 1].cost + (same ? 0 : 1);
        const std::size_t del = col[i - 1].cost + 1;
        const std::size_t ins = prev[i].cost + 1;
        const std::size_t best = std::min({diag, del, ins});
        if (diag == best) {
          col[i] = {best, prev[i - 1].counts};
          col[i].counts.s += same ? 0 : 1;
        } else if (del == best) {
          col[i] = {best, col[i - 1].counts};
          ++col[i].counts.d;
        } else {
          col[i] = {best, prev[i].counts};
          ++col[i].counts.i;
        }
      }
      hyp.push_back(c);
      descend(col, hyp, visit);
      hyp.pop_back();
    }
  }

  const std::vector<int>& ref_;
  std::size_t max_len_;
  int alphabet_;
};

std::vector<std::vector<int>> all_sequences(int k, std::size_t max_len) {
  std::vector<std::vector<int>> out{{}};
  for (std::size_t at = 0; at < out.size(); ++at) {
    if (out[at].size() == max_len) continue;
    for (int c = 0; c < k; ++c) {
      auto s = out[at];
      s.push_back(c);
      out.push_back(std::move(s));
    }
  }
  return out;
}

Outcome alignment_oracle(std::size_t exhaustive_max) {
  const auto t0 = Clock::now();
  std::size_t pairs = 0, mismatched = 0;
  for (const auto& ref : all_sequences(3, exhaustive_max)) {
    TrieAlignOracle(ref, exhaustive_max, 3).run([&](const std::vector<int>& hyp, const Cell& cell) {
      const auto got = eval::align(std::span<const int>(ref), std::span<const int>(hyp));
      const oracle::Counts counts{got.substitutions, got.deletions, got.insertions};
      if (got.errors() != cell.cost || !(counts == cell.counts) || got.reference_length != ref.size()) ++mismatched;
      ++pairs;
    });
  }
  // Longer pairs up to length 12, sampled, against the memoized recursion.
  std::mt19937 rng(1004);
  std::size_t sampled = 0;
  for (; sampled < 100000; ++sampled) {
    std::vector<int> a(rng() % 13), b(rng() % 13);
    if (a.size() <= exhaustive_max && b.size() <= exhaustive_max) a.resize(exhaustive_max + 1);
    for (auto& x : a) x = static_cast<int>(rng() % 3);
    for (auto& x : b) x = static_cast<int>(rng() % 3);
    const auto got = eval::align(std::span<const int>(a), std::span<const int>(b));
    mismatched += !(oracle::Counts{got.substitutions, got.deletions, got.insertions} ==
                    oracle::RecursiveAligner<int>(a, b).counts());
  }

  std::vector<std::string> ref;
  for (int i = 0; i < 10; ++i) ref.push_back("s" + std::to_string(i));
  auto hyp = ref;
  hyp[3] = "x";
  const bool worked = eval::syllable_accuracy(ref, ref) == 100.0 && eval::syllable_accuracy(ref, hyp) == 90.0 &&
                      eval::syllable_accuracy(ref, std::vector<std::string>{}) == 0.0;
  return {mismatched == 0 && worked,
          "all " + std::to_string(pairs) + " pairs with |ref|,|hyp| <= " + std::to_string(exhaustive_max) +
              " exhaustive + " + std::to_string(sampled) + " sampled pairs up to length 12, " +
              std::to_string(mismatched) + " mismatches; 100/90/0 cases " + (worked ? "exact" : "WRONG") + "; " +
              fmt(seconds_since(t0), 1) + " s"};
}

// ---------------------------------------------------------------------------
// Report

Outcome report_fixture() {
  eval::EvalReport report;
  report.rows = {{"X-API", 3.74, 0.0, 93.8, 10, 0},
                 {"Syllable-based", 4.28, 0.0, 97.6, 10, 0},
                 {"BPE-based", 4.35, 0.0, 96.6, 10, 0}};
  const auto rendered = eval::render_report(report);
  fixtures::TempDir dir("tibtts-accept");
  json_util::write_file_atomic(dir / "report.json", rendered.structured.dump(2));
  json_util::write_file_atomic(dir / "report.md", rendered.table);
  const auto from_json = eval::report_from_json(json_util::parse_file(dir / "report.json", ErrorCategory::UnreadableFile));
  // Markdown rows: "| name | mos | accuracy |"; header and rule lines skipped.
  std::vector<std::vector<std::string>> table;
  std::istringstream lines(json_util::read_file(dir / "report.md"));
  for (std::string line; std::getline(lines, line);) {
    auto cells = eval::detail::split(line, '|');
    if (cells.size() != 5 || cells[1] == "System" || cells[1].starts_with("-")) continue;
    table.push_back({cells[1], cells[2], cells[3]});
  }
  bool table_ok = table.size() == 3;
  for (std::size_t i = 0; table_ok && i < 3; ++i) {
    const auto& r = report.rows[i];
    table_ok = table[i][0] == r.name && std::stod(table[i][1]) == r.mos_mean &&
               std::stod(table[i][2]) == r.syllable_accuracy_pct;
  }
  const bool json_ok = from_json.rows == report.rows;
  return {json_ok && table_ok, std::string("structured round trip ") + (json_ok ? "lossless" : "LOSSY") +
                                   ", table round trip " + (table_ok ? "lossless" : "LOSSY") +
                                   " for {3.74, 93.8; 4.28, 97.6; 4.35, 96.6}"};
}

// ---------------------------------------------------------------------------
// Audio

double max_abs_diff(const audio::AudioBuffer& a, const audio::AudioBuffer& b) {
  if (a.samples.size() != b.samples.size()) return std::numeric_limits<double>::infinity();
  double d = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) d = std::max(d, std::fabs(double(a.samples[i]) - b.samples[i]));
  return d;
}

Outcome audio_dsp() {
  std::ostringstream detail;
  bool ok = true;
  // Loudness on closed-form tones: RMS of a sine is a / sqrt(2).
  double worst_db = 0, worst_idem = 0;
  for (double start_db : {-40.0, -30.0, -23.0, -13.0, -6.0}) {
    for (double f : {110.0, 440.0, 1000.0}) {
      const auto tone = fixtures::sine(f, std::sqrt(2.0) * audio::from_db(start_db), 24000, 1.0);
      const auto once = audio::normalize_loudness(tone, -23.0).buffer;
      worst_db = std::max(worst_db, std::fabs(audio::to_db(audio::rms(once.samples)) + 23.0));
      worst_idem = std::max(worst_idem, max_abs_diff(once, audio::normalize_loudness(once, -23.0).buffer));
    }
  }
  ok &= worst_db <= 0.1 && worst_idem <= 1e-6;
  detail << "loudness max error " << fmt(worst_db, 4) << " dB, idempotence " << worst_idem;

  const int rate = 16000;
  const auto sts = fixtures::concat({fixtures::silence(rate, 0.5), fixtures::sine(440, 0.5, rate, 1.0), fixtures::silence(rate, 0.5)});
  const auto trimmed = audio::trim_silence(sts, -45.0, 50.0);
  const double trim_error = std::fabs(trimmed.duration_s() - 1.1);
  const double trim_idem = max_abs_diff(trimmed, audio::trim_silence(trimmed, -45.0, 50.0));
  ok &= trim_error <= audio::kHopSeconds && trim_idem <= 1e-6;
  detail << "; trim " << fmt(trimmed.duration_s(), 4) << " s (1.1 +- " << audio::kHopSeconds << "), idempotence "
         << trim_idem;

  double worst_pitch = 0;
  for (int from : {16000, 22050, 44100, 48000}) {
    const auto out = audio::resample(fixtures::sine(440, 0.5, from, 1.0), 24000);
    worst_pitch = std::max(worst_pitch, std::fabs(oracle::dominant_frequency(out.samples, 24000) - 440.0) / 440.0);
  }
  ok &= worst_pitch <= 1e-3;
  detail << "; resampled 440 Hz peak max deviation " << fmt(worst_pitch * 100, 4) << "%";
  return {ok, detail.str()};
}

// ---------------------------------------------------------------------------
// Pipeline

Outcome pipeline_conservation() {
  using manifest::RejectReason;
  using manifest::Status;
  fixtures::TempDir dir("tibtts-accept");
  const auto corpus = fixtures::make_synthetic_corpus(dir.path());
  const auto ingested = pipeline::ingest(corpus.index, corpus.source_dir).records;
  std::map<std::string, std::size_t> reference;
  std::string reference_manifest;
  bool reproducible = true, conserved = true;
  std::ostringstream detail;
  const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
  std::vector<pipeline::RunResult> runs;
  for (unsigned workers : {1u, hw, 1u, hw}) {
    const auto out = dir / ("out" + std::to_string(runs.size()));
    runs.push_back(pipeline::run_pipeline(ingested, {}, out, workers));
    std::map<std::string, std::size_t> counts;
    for (auto s : {Status::Accepted, Status::Rejected, Status::NeedsReview}) {
      counts[std::string(manifest::status_name(s))] = runs.back().summary.count(s);
    }
    std::size_t total = 0;
    for (const auto& [_, n] : counts) total += n;
    conserved &= total == corpus.size;
    const auto bytes = json_util::read_file(out / "manifest.jsonl");
    if (reference.empty()) {
      reference = counts;
      reference_manifest = bytes;
    } else {
      reproducible &= counts == reference && bytes == reference_manifest;
    }
  }
  const auto& recs = runs.front().records;
  auto reason = [&](const std::string& id) -> std::optional<RejectReason> {
    for (const auto& r : recs) {
      if (r.id == id) return r.reject_reason;
    }
    return std::nullopt;
  };
  const bool buckets = reason(corpus.silent_id) == RejectReason::FullySilent &&
                       reason(corpus.clipped_id) == RejectReason::Clipped &&
                       reason(corpus.empty_text_id) == RejectReason::EmptyText &&
                       reason(corpus.rate_outlier_id) == RejectReason::RateOutlier;
  detail << "4 runs (workers 1/" << hw << "/1/" << hw << ") counts";
  for (const auto& [k, n] : reference) detail << " " << k << "=" << n;
  detail << "; reproducible " << (reproducible ? "yes" : "NO") << ", sum = " << corpus.size << " "
         << (conserved ? "yes" : "NO") << ", defect buckets " << (buckets ? "as expected" : "WRONG");
  return {reproducible && conserved && buckets, detail.str()};
}

// ---------------------------------------------------------------------------
// Consistency

int severity(consistency::Decision d) { return static_cast<int>(d); }

Outcome consistency_invariance() {
  using consistency::RateSample;
  std::mt19937 rng(1008);
  std::uniform_real_distribution<double> factor(0.3, 3.0);
  std::lognormal_distribution<double> seconds(std::log(3.0), 0.3);
  const consistency::Thresholds t;
  std::size_t scale_trials = 0, scale_fail = 0, skipped_on_threshold = 0;
  std::size_t mono_trials = 0, mono_fail = 0;
  for (int trial = 0; trial < 1200; ++trial) {
    const std::size_t n = 8 + rng() % 60;
    std::vector<double> durations(n);
    std::vector<std::size_t> syllables(n);
    for (std::size_t i = 0; i < n; ++i) {
      durations[i] = seconds(rng);
      syllables[i] = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(durations[i] * 4.0 * (0.9 + 0.2 * (rng() % 100) / 100.0))));
    }
    if (rng() % 4 == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        if (rng() % 3) durations[i] = 0.25 * static_cast<double>(syllables[i]);  // rate exactly 4: zero MAD
      }
    }
    auto verdicts = [&](double c) {
      std::vector<RateSample> samples;
      for (std::size_t i = 0; i < n; ++i) samples.push_back({consistency::speaking_rate(durations[i] * c, syllables[i]), std::nullopt});
      return consistency::verify_corpus(samples, t);
    };
    // Duration rescaling: every duration times c leaves every decision as is.
    const auto base = verdicts(1.0);
    ++scale_trials;
    bool trial_ok = true;
    for (double c : {0.5, 2.0, factor(rng)}) {
      const auto scaled = verdicts(c);
      for (std::size_t i = 0; i < n; ++i) {
        const double a = std::fabs(base[i].z_robust);
        if (std::fabs(a - t.review_z) < 1e-9 || std::fabs(a - t.reject_z) < 1e-9) {
          ++skipped_on_threshold;
          continue;
        }
        trial_ok &= scaled[i].decision == base[i].decision;
      }
    }
    scale_fail += !trial_ok;

    // Monotonicity: pushing one record away from the median never relaxes it.
    std::vector<double> rates;
    for (std::size_t i = 0; i < n; ++i) rates.push_back(consistency::speaking_rate(durations[i], syllables[i]));
    const std::size_t k = rng() % n;
    const double direction = rates[k] >= consistency::median(rates) ? 1.0 : -1.0;
    auto decide_k = [&] {
      std::vector<RateSample> samples;
      for (double r : rates) samples.push_back({r, std::nullopt});
      return severity(consistency::verify_corpus(samples, t)[k].decision);
    };
    ++mono_trials;
    int previous = decide_k();
    bool mono_ok = true;
    for (int step = 0; step < 20; ++step) {
      rates[k] += direction * 0.05 * rates[k];
      const int now = decide_k();
      mono_ok &= now >= previous;
      previous = now;
    }
    mono_fail += !mono_ok;
  }
  return {scale_fail == 0 && mono_fail == 0,
          "rescaling " + std::to_string(scale_trials) + " trials, " + std::to_string(scale_fail) + " failures (" +
              std::to_string(skipped_on_threshold) + " records within 1e-9 of a threshold skipped); monotonicity " +
              std::to_string(mono_trials) + " trials, " + std::to_string(mono_fail) + " failures"};
}

// ---------------------------------------------------------------------------
// Crash safety

fs::path write_review_manifest(const fs::path& dir, std::size_t pending) {
  std::vector<manifest::CorpusRecord> records;
  for (std::size_t i = 0; i < pending; ++i) {
    manifest::CorpusRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "rev_%03zu", i);
    r.id = id;
    r.audio_path = std::string(id) + ".wav";
    r.text_raw = r.text_normalized = "བཀྲ་ཤིས་བདེ་ལེགས།";
    r.syllable_count = 4;
    r.duration_s = 1.0;
    r.status = manifest::Status::NeedsReview;
    records.push_back(std::move(r));
  }
  const auto path = dir / "manifest.jsonl";
  manifest::write_manifest(path, records);
  return path;
}

struct Child {
  pid_t pid = -1;
  int stdout_fd = -1;
};

Child spawn_review(const std::string& cli, const fs::path& manifest_path) {
  int fds[2];
  if (::pipe(fds) != 0) throw std::runtime_error("pipe failed");
  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    ::dup2(fds[1], STDOUT_FILENO);
    ::close(fds[0]);
    ::close(fds[1]);
    const std::string m = manifest_path.string();
    ::execl(cli.c_str(), cli.c_str(), "review", "--manifest", m.c_str(), "--port", "0", static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  return {pid, fds[0]};
}

std::string read_line(int fd) {
  std::string line;
  char c;
  while (::read(fd, &c, 1) == 1 && c != '\n') line += c;
  return line;
}

Outcome crash_safety(const std::string& cli) {
  if (cli.empty()) return {false, "no --cli given"};
  constexpr std::size_t kPending = 200, kAcknowledgedBeforeKill = 60;
  fixtures::TempDir dir("tibtts-accept");
  const auto path = write_review_manifest(dir.path(), kPending);
  const Child child = spawn_review(cli, path);
  const auto banner = Json::parse(read_line(child.stdout_fd));
  const int port = banner.at("port").get<int>();

  // Two clients post decisions as fast as acknowledgements come back; the
  // server is killed once enough are acknowledged, with requests in flight.
  std::mutex mu;
  std::vector<std::string> acknowledged;
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> next{0};
  auto poster = [&] {
    httplib::Client c("127.0.0.1", port);
    while (!stop) {
      const std::size_t i = next++;
      if (i >= kPending) break;
      char id[32];
      std::snprintf(id, sizeof id, "rev_%03zu", i);
      const Json body{{"record_id", id}, {"action", i % 3 == 0 ? "Reject" : "Accept"}, {"reviewer", "acceptance"}};
      auto res = c.Post("/decisions", body.dump(), "application/json");
      if (res && res->status == 200) {
        std::lock_guard lock(mu);
        acknowledged.emplace_back(id);
      }
    }
  };
  std::thread a(poster), b(poster);
  while (true) {
    {
      std::lock_guard lock(mu);
      if (acknowledged.size() >= kAcknowledgedBeforeKill) break;
    }
    if (next >= kPending) break;
    std::this_thread::sleep_for(std::chrono::microseconds(200));
  }
  ::kill(child.pid, SIGKILL);
  int status = 0;
  ::waitpid(child.pid, &status, 0);
  stop = true;
  a.join();
  b.join();
  ::close(child.stdout_fd);

  const auto records = manifest::read_manifest(path);  // must still parse
  review::ReviewStore reloaded(path, manifest::PipelineConfig{}.make_normalizer());
  std::size_t missing = 0;
  for (const auto& id : acknowledged) {
    const auto r = reloaded.record(id);
    const auto want = (std::stoul(id.substr(4)) % 3 == 0) ? manifest::Status::Rejected : manifest::Status::Accepted;
    missing += r.status != want;
  }
  const bool killed = WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL;
  return {killed && missing == 0 && records.size() == kPending,
          std::to_string(acknowledged.size()) + " decisions acknowledged before SIGKILL, " + std::to_string(missing) +
              " missing after reload; manifest parses (" + std::to_string(records.size()) + " records); " +
              std::to_string(reloaded.ignored_journal_lines()) + " torn journal lines ignored"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli;
  std::size_t exhaustive_max = 9;
  app.add_option("--cli", cli, "Path to the tibtts executable (crash-safety check)");
  app.add_option("--alignment-exhaustive-max", exhaustive_max,
                 "Longest ref/hyp length checked exhaustively against the alignment oracle (12 is the full "
                 "criterion; each step multiplies the work by about 9)");
  CLI11_PARSE(app, argc, argv);

  criterion("bpe-oracle-equivalence", bpe_oracle_equivalence);
  criterion("tokenizer-round-trip", tokenizer_round_trips);
  criterion("sequence-length", sequence_length_claim);
  criterion("syllable-accuracy-oracle", [&] { return alignment_oracle(exhaustive_max); });
  criterion("report-fixture", report_fixture);
  criterion("audio-dsp", audio_dsp);
  criterion("pipeline-conservation-determinism", pipeline_conservation);
  criterion("consistency-invariance", consistency_invariance);
  criterion("crash-safety", [&] { return crash_safety(cli); });
  std::cout << (g_failures ? "FAILED " + std::to_string(g_failures) + " criteria" : std::string("ALL PASS")) << std::endl;
  return g_failures ? 1 : 0;
}
