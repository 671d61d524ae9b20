#pragma once

// Test fixtures: scratch directories, closed-form signals, random Tibetan
// text, and the synthetic 50-record corpus with injected defects.

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tibtts/audio.hpp"
#include "tibtts/json_util.hpp"
#include "tibtts/utf8.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using tibtts::audio::AudioBuffer;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "tibtts") {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
             std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline AudioBuffer sine(double freq, double amplitude, int rate, double seconds, double phase = 0.0) {
  AudioBuffer b;
  b.sample_rate = rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  b.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    b.samples[i] = static_cast<float>(amplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase));
  }
  return b;
}

inline AudioBuffer silence(int rate, double seconds) {
  AudioBuffer b;
  b.sample_rate = rate;
  b.samples.assign(static_cast<std::size_t>(std::llround(seconds * rate)), 0.0f);
  return b;
}

inline AudioBuffer square(double freq, int rate, double seconds) {
  AudioBuffer b = sine(freq, 1.0, rate, seconds, 0.25);
  for (auto& s : b.samples) s = s >= 0 ? 1.0f : -1.0f;
  return b;
}

inline AudioBuffer concat(std::initializer_list<AudioBuffer> parts) {
  AudioBuffer out;
  for (const auto& p : parts) {
    out.sample_rate = p.sample_rate;
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  }
  return out;
}

// Consonants, subjoined letters and vowel signs with no decomposition, so
// any sequence of them is already canonical-order stable per syllable.
inline const std::vector<char32_t>& tibetan_alphabet() {
  static const std::vector<char32_t> alphabet = {
      0x0F40, 0x0F41, 0x0F42, 0x0F44, 0x0F45, 0x0F46, 0x0F47, 0x0F49, 0x0F4F, 0x0F50, 0x0F51, 0x0F53,
      0x0F54, 0x0F55, 0x0F56, 0x0F58, 0x0F59, 0x0F5A, 0x0F5B, 0x0F5D, 0x0F5E, 0x0F5F, 0x0F60, 0x0F61,
      0x0F62, 0x0F63, 0x0F64, 0x0F66, 0x0F67, 0x0F68, 0x0F90, 0x0F92, 0x0FB1, 0x0FB2, 0x0FB3, 0x0F72,
      0x0F74, 0x0F7A, 0x0F7C};
  return alphabet;
}

// A base consonant, then optionally a subjoined letter and a vowel sign,
// then optionally a suffix consonant: the shape of common syllables.
inline std::string random_syllable(std::mt19937& rng) {
  static const std::vector<char32_t> base = {0x0F40, 0x0F41, 0x0F42, 0x0F44, 0x0F45, 0x0F46, 0x0F47, 0x0F49,
                                             0x0F4F, 0x0F50, 0x0F51, 0x0F53, 0x0F54, 0x0F55, 0x0F56, 0x0F58,
                                             0x0F59, 0x0F5A, 0x0F5B, 0x0F5D, 0x0F5E, 0x0F5F, 0x0F60, 0x0F61,
                                             0x0F62, 0x0F63, 0x0F64, 0x0F66, 0x0F67, 0x0F68};
  static const std::vector<char32_t> sub = {0x0F90, 0x0F92, 0x0FB1, 0x0FB2, 0x0FB3};
  static const std::vector<char32_t> vowel = {0x0F72, 0x0F74, 0x0F7A, 0x0F7C};
  static const std::vector<char32_t> suffix = {0x0F42, 0x0F44, 0x0F51, 0x0F53, 0x0F56, 0x0F58, 0x0F60, 0x0F62,
                                               0x0F63, 0x0F66};
  auto pick = [&](const std::vector<char32_t>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
  std::u32string s{pick(base)};
  if (rng() % 4 == 0) s += pick(sub);
  if (rng() % 2 == 0) s += pick(vowel);
  if (rng() % 2 == 0) s += pick(suffix);
  return tibtts::utf8::encode(s);
}

inline std::string join_syllables(const std::vector<std::string>& syllables) {
  std::string out;
  for (std::size_t i = 0; i < syllables.size(); ++i) {
    if (i) out += "་";
    out += syllables[i];
  }
  return out;
}

// Speech-like clip: `syllables` Hann-shaped voiced bursts separated by
// low-level noise gaps, with quiet lead-in and tail. `tempo` scales every
// segment length.
inline AudioBuffer speech_like(std::size_t syllables, double tempo, double amplitude, int rate, std::mt19937& rng) {
  std::normal_distribution<double> noise(0.0, 3e-4);
  std::uniform_real_distribution<double> pitch(110.0, 220.0);
  AudioBuffer b;
  b.sample_rate = rate;
  auto add_gap = [&](double seconds) {
    const auto n = static_cast<std::size_t>(seconds * rate);
    for (std::size_t i = 0; i < n; ++i) b.samples.push_back(static_cast<float>(noise(rng)));
  };
  add_gap(0.3 * tempo);
  for (std::size_t k = 0; k < syllables; ++k) {
    const double f0 = pitch(rng);
    const auto n = static_cast<std::size_t>(0.15 * tempo * rate);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
      const double v = std::sin(2 * std::numbers::pi * f0 * t) + 0.5 * std::sin(4 * std::numbers::pi * f0 * t) +
                       0.25 * std::sin(6 * std::numbers::pi * f0 * t);
      b.samples.push_back(static_cast<float>(std::clamp(amplitude * env * v / 1.75 + noise(rng), -1.0, 1.0)));
    }
    add_gap(0.10 * tempo);
  }
  add_gap(0.2 * tempo);
  return b;
}

struct SyntheticCorpus {
  fs::path index;
  fs::path source_dir;
  std::string silent_id, clipped_id, empty_text_id, rate_outlier_id;
  std::size_t size = 0;
};

// 50 records at 16 kHz: 46 clean, plus one each of silent audio, hard
// clipping, empty transcript, and a transcript five times too long for its
// audio.
inline SyntheticCorpus make_synthetic_corpus(const fs::path& dir, std::size_t n = 50, std::uint32_t seed = 7) {
  SyntheticCorpus c;
  c.source_dir = dir / "raw";
  fs::create_directories(c.source_dir);
  c.index = dir / "index.tsv";
  c.silent_id = "utt_011";
  c.clipped_id = "utt_023";
  c.empty_text_id = "utt_034";
  c.rate_outlier_id = "utt_045";
  c.size = n;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> tempo(0.97, 1.03);
  std::string index = "id\taudio\ttext\n";
  for (std::size_t i = 0; i < n; ++i) {
    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "utt_%03zu", i);
    const std::string id = id_buf;
    const std::size_t syllables = 6 + rng() % 5;
    std::vector<std::string> words;
    for (std::size_t k = 0; k < syllables; ++k) words.push_back(random_syllable(rng));
    std::string text = join_syllables(words) + "།";
    AudioBuffer audio;
    if (id == c.silent_id) {
      audio = silence(16000, 2.0);
    } else if (id == c.clipped_id) {
      audio = speech_like(syllables, tempo(rng), 4.0, 16000, rng);
    } else {
      audio = speech_like(syllables, tempo(rng), 0.5, 16000, rng);
    }
    if (id == c.empty_text_id) text.clear();
    if (id == c.rate_outlier_id) {
      std::vector<std::string> many;
      for (std::size_t k = 0; k < syllables * 5; ++k) many.push_back(random_syllable(rng));
      text = join_syllables(many) + "།";
    }
    tibtts::audio::write_wav(c.source_dir / (id + ".wav"), audio);
    index += id + "\t" + id + ".wav\t" + text + "\n";
  }
  tibtts::json_util::write_file_atomic(c.index, index);
  return c;
}

}  // namespace fixtures
