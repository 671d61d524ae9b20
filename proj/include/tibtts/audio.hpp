#pragma once

// Audio-side corpus cleaning: WAV I/O, resampling, loudness normalization,
// silence trimming and quality measurement. All frame-based operations share
// one geometry: 25 ms windows, 10 ms hop.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tibtts/error.hpp"
#include "tibtts/json_util.hpp"

namespace tibtts::audio {

inline constexpr double kWindowSeconds = 0.025;
inline constexpr double kHopSeconds = 0.010;
inline constexpr double kClipLevel = 0.999;
inline constexpr double kPeakCeilingDbfs = -0.1;
// Reported instead of -inf / +inf so reports stay finite and serializable.
inline constexpr double kFloorDbfs = -120.0;
inline constexpr double kMaxSnrDb = 120.0;

struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 0;

  double duration_s() const { return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
  bool operator==(const AudioBuffer&) const = default;
};

inline double to_db(double amplitude) {
  return amplitude > 0 ? std::max(kFloorDbfs, 20.0 * std::log10(amplitude)) : kFloorDbfs;
}

inline double from_db(double db) { return std::pow(10.0, db / 20.0); }

inline double rms(std::span<const float> x) {
  if (x.empty()) return 0.0;
  double acc = 0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

inline double peak(std::span<const float> x) {
  double p = 0;
  for (float v : x) p = std::max(p, std::fabs(static_cast<double>(v)));
  return p;
}

inline float clamp_unit(double v) { return static_cast<float>(std::clamp(v, -1.0, 1.0)); }

// ---------------------------------------------------------------------------
// WAV

namespace detail {

inline std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}
inline std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}
inline void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

// Same 1/32768 scale as decode_wav, so a decoded buffer re-encodes to the
// same bytes; +1.0 saturates at 32767.
inline std::int16_t to_pcm16(float s) {
  return static_cast<std::int16_t>(std::clamp<long>(std::lround(static_cast<double>(s) * 32768.0), -32768, 32767));
}

}  // namespace detail

// Rounds every sample to the 16-bit grid used by encode_wav.
inline void quantize_pcm16(AudioBuffer& buf) {
  for (auto& s : buf.samples) s = static_cast<float>(detail::to_pcm16(s) / 32768.0);
}

// RIFF/WAVE, PCM 16-bit or IEEE float 32-bit, 1-2 channels; stereo is
// averaged to mono.
inline AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  using detail::le16;
  using detail::le32;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCategory::MalformedHeader, "not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = le32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      // Tolerate a data chunk whose declared size overruns the file (common
      // after interrupted recordings); anything else is malformed.
      if (std::memcmp(bytes.data() + pos, "data", 4) != 0) {
        throw Error(ErrorCategory::MalformedHeader, "chunk overruns file", pos);
      }
    }
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (avail < 16) throw Error(ErrorCategory::MalformedHeader, "fmt chunk too short", pos);
      format = le16(bytes, body);
      channels = le16(bytes, body + 2);
      rate = le32(bytes, body + 4);
      bits = le16(bytes, body + 14);
      if (format == 0xFFFE) {
        if (avail < 40) throw Error(ErrorCategory::MalformedHeader, "extensible fmt chunk too short", pos);
        format = le16(bytes, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      data = bytes.subspan(body, avail);
      have_data = true;
    }
    pos = body + avail + (avail & 1);
  }
  if (!have_fmt || !have_data) throw Error(ErrorCategory::MalformedHeader, "missing fmt or data chunk");
  if (rate == 0) throw Error(ErrorCategory::MalformedHeader, "zero sample rate");
  if (channels < 1 || channels > 2) {
    throw Error(ErrorCategory::UnsupportedEncoding, std::to_string(channels) + " channels");
  }
  const bool pcm16 = format == 1 && bits == 16;
  const bool float32 = format == 3 && bits == 32;
  if (!pcm16 && !float32) {
    throw Error(ErrorCategory::UnsupportedEncoding,
                "format tag " + std::to_string(format) + " with " + std::to_string(bits) + " bits");
  }
  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t frames = data.size() / frame_bytes;
  AudioBuffer buf;
  buf.sample_rate = static_cast<int>(rate);
  buf.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = f * frame_bytes + c * (bits / 8);
      if (pcm16) {
        acc += static_cast<std::int16_t>(le16(data, at)) / 32768.0;
      } else {
        const std::uint32_t raw = le32(data, at);
        float v;
        std::memcpy(&v, &raw, sizeof v);
        acc += std::isfinite(v) ? v : 0.0f;
      }
    }
    buf.samples[f] = clamp_unit(acc / channels);
  }
  return buf;
}

// Mono PCM 16-bit little endian.
inline std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf) {
  if (buf.sample_rate <= 0) throw Error(ErrorCategory::InvalidRate, "sample rate must be positive");
  std::vector<std::uint8_t> out;
  const auto data_bytes = static_cast<std::uint32_t>(buf.samples.size() * 2);
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put32(out, 16);
  detail::put16(out, 1);
  detail::put16(out, 1);
  detail::put32(out, static_cast<std::uint32_t>(buf.sample_rate));
  detail::put32(out, static_cast<std::uint32_t>(buf.sample_rate) * 2);
  detail::put16(out, 2);
  detail::put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put32(out, data_bytes);
  for (float s : buf.samples) {
    detail::put16(out, static_cast<std::uint16_t>(detail::to_pcm16(s)));
  }
  return out;
}

inline AudioBuffer read_wav(const std::filesystem::path& path) {
  const std::string bytes = json_util::read_file(path);
  return decode_wav({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
}

inline void write_wav(const std::filesystem::path& path, const AudioBuffer& buf) {
  const auto bytes = encode_wav(buf);
  json_util::write_file_atomic(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

// ---------------------------------------------------------------------------
// Resampling

namespace detail {

inline double bessel_i0(double x) {
  double sum = 1, term = 1;
  for (int k = 1; k < 50; ++k) {
    term *= (x / (2 * k)) * (x / (2 * k));
    sum += term;
    if (term < 1e-12 * sum) break;
  }
  return sum;
}

}  // namespace detail

// Kaiser-windowed sinc interpolation with the cutoff at 0.45 x min(rates)
// and 32 zero crossings per side; the passband reaches past 0.4 x min(rates).
// Output sample j sits at input position j * in_rate / target_rate. When the
// rate ratio has few distinct fractional phases, taps are tabulated per phase.
inline AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
  if (target_rate <= 0 || buf.sample_rate <= 0) throw Error(ErrorCategory::InvalidRate, "sample rates must be positive");
  if (target_rate == buf.sample_rate) return buf;
  constexpr double kZeroCrossings = 32;
  constexpr double kBeta = 8.6;
  constexpr std::int64_t kMaxTabulatedPhases = 4096;
  const double in_rate = buf.sample_rate;
  const double cutoff = 0.45 * std::min(in_rate, static_cast<double>(target_rate));  // Hz
  const double fc = cutoff / in_rate;                                                  // cycles per input sample
  const double half_width = kZeroCrossings / (2.0 * fc);                               // input samples
  const double i0_beta = detail::bessel_i0(kBeta);
  const auto tap = [&](double t) {
    const double r = t / half_width;
    const double window = detail::bessel_i0(kBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    const double arg = 2.0 * fc * t;
    const double sinc = std::fabs(arg) < 1e-12 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    return 2.0 * fc * sinc * window;
  };

  const auto n_in = static_cast<std::int64_t>(buf.samples.size());
  const auto n_out = static_cast<std::int64_t>(std::llround(static_cast<double>(n_in) * target_rate / in_rate));
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(n_out));

  const std::int64_t g = std::gcd<std::int64_t>(buf.sample_rate, target_rate);
  const std::int64_t phases = target_rate / g;  // output j has phase (j * step_num) mod phases
  const std::int64_t step_num = buf.sample_rate / g;

  // Taps for input offsets d in [first, first + weights.size()) relative to
  // floor(position).
  struct Phase {
    std::int64_t first;
    std::vector<double> weights;
  };
  const auto make_phase = [&](double frac) {
    Phase ph;
    ph.first = static_cast<std::int64_t>(std::ceil(frac - half_width));
    const auto last = static_cast<std::int64_t>(std::floor(frac + half_width));
    for (std::int64_t d = ph.first; d <= last; ++d) ph.weights.push_back(tap(frac - static_cast<double>(d)));
    return ph;
  };
  std::vector<Phase> table;
  if (phases <= kMaxTabulatedPhases) {
    for (std::int64_t p = 0; p < phases; ++p) table.push_back(make_phase(static_cast<double>(p) / static_cast<double>(phases)));
  }

  for (std::int64_t j = 0; j < n_out; ++j) {
    const std::int64_t num = j * step_num;
    const std::int64_t base = num / phases;
    const std::int64_t p = num % phases;
    const Phase computed = table.empty() ? make_phase(static_cast<double>(p) / static_cast<double>(phases)) : Phase{};
    const Phase& ph = table.empty() ? computed : table[static_cast<std::size_t>(p)];
    double acc = 0;
    for (std::size_t w = 0; w < ph.weights.size(); ++w) {
      const std::int64_t k = base + ph.first + static_cast<std::int64_t>(w);
      if (k < 0 || k >= n_in) continue;
      acc += buf.samples[static_cast<std::size_t>(k)] * ph.weights[w];
    }
    out.samples[static_cast<std::size_t>(j)] = clamp_unit(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loudness

struct LoudnessResult {
  AudioBuffer buffer;
  double gain_db = 0;
  bool capped = false;  // gain limited so the peak stays at -0.1 dBFS
};

// Uniform gain bringing the RMS to `target_rms_dbfs`. Gains below 0.001 dB
// are skipped so a second pass leaves the audio bit-identical.
inline LoudnessResult normalize_loudness(const AudioBuffer& buf, double target_rms_dbfs) {
  const double level = rms(buf.samples);
  if (level <= 0) throw Error(ErrorCategory::AllZeroInput, "cannot normalize an all-zero buffer");
  double gain_db = target_rms_dbfs - 20.0 * std::log10(level);
  const double pk = peak(buf.samples);
  bool capped = false;
  const double max_gain_db = kPeakCeilingDbfs - 20.0 * std::log10(pk);
  if (gain_db > max_gain_db) {
    gain_db = std::max(0.0, max_gain_db);
    capped = true;
  }
  LoudnessResult r{buf, 0.0, capped};
  if (std::fabs(gain_db) < 1e-3) return r;
  r.gain_db = gain_db;
  const double g = from_db(gain_db);
  for (auto& s : r.buffer.samples) s = clamp_unit(s * g);
  return r;
}

// ---------------------------------------------------------------------------
// Framing, trimming, measurement

struct FrameGeometry {
  std::size_t window;
  std::size_t hop;

  static FrameGeometry for_rate(int sample_rate) {
    return {static_cast<std::size_t>(std::lround(kWindowSeconds * sample_rate)),
            static_cast<std::size_t>(std::lround(kHopSeconds * sample_rate))};
  }
};

// Mean-square energy of every full frame; a buffer shorter than one window
// is a single frame.
inline std::vector<double> frame_energies(std::span<const float> x, FrameGeometry g) {
  std::vector<double> e;
  if (x.empty()) return e;
  if (x.size() <= g.window) {
    const double r = rms(x);
    e.push_back(r * r);
    return e;
  }
  for (std::size_t start = 0; start + g.window <= x.size(); start += g.hop) {
    const double r = rms(x.subspan(start, g.window));
    e.push_back(r * r);
  }
  return e;
}

// Half-open sample range [begin, end) kept by trim_silence.
struct TrimRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// The 25 ms window slides one sample at a time, so the cut does not depend on
// where a hop grid happens to fall. The first and last windows whose RMS
// reaches `threshold_dbfs` are found; the cut is refined to the first/last
// sample inside them whose amplitude reaches the threshold, `pad_ms` of
// context is added, and the voiced windows themselves are always kept. Every
// window examined on a second pass is one the first pass already examined
// and rejected, which makes the op idempotent.
inline TrimRange trim_range(const AudioBuffer& buf, double threshold_dbfs, double pad_ms) {
  if (!(threshold_dbfs < 0)) throw Error(ErrorCategory::InvalidConfig, "trim threshold must be below 0 dBFS");
  if (!(pad_ms >= 0)) throw Error(ErrorCategory::InvalidConfig, "trim pad must be >= 0");
  if (buf.samples.empty()) throw Error(ErrorCategory::FullySilent, "empty buffer");
  const std::span<const float> x = buf.samples;
  const std::size_t win = std::min(FrameGeometry::for_rate(buf.sample_rate).window, x.size());
  const double amp = from_db(threshold_dbfs);
  const double threshold_sum = amp * amp * static_cast<double>(win);

  // Window sums from a running total, recomputed exactly every `win` steps so
  // rounding drift stays bounded.
  const std::size_t n_windows = x.size() - win + 1;
  std::size_t first = n_windows, last = 0;
  double sum = 0;
  for (std::size_t i = 0; i < n_windows; ++i) {
    if (i % win == 0) {
      sum = 0;
      for (std::size_t k = i; k < i + win; ++k) sum += static_cast<double>(x[k]) * x[k];
    } else {
      sum += static_cast<double>(x[i + win - 1]) * x[i + win - 1] - static_cast<double>(x[i - 1]) * x[i - 1];
    }
    if (sum >= threshold_sum) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == n_windows) throw Error(ErrorCategory::FullySilent, "no window reaches the silence threshold");

  std::size_t lo = first;
  while (lo + 1 < first + win && std::fabs(x[lo]) < amp) ++lo;
  std::size_t hi = last + win - 1;
  while (hi > last && std::fabs(x[hi]) < amp) --hi;

  const auto pad = static_cast<std::size_t>(std::lround(pad_ms * 1e-3 * buf.sample_rate));
  TrimRange r;
  r.begin = std::min(first, lo > pad ? lo - pad : 0);
  r.end = std::max(last + win, std::min(x.size(), hi + 1 + pad));
  return r;
}

inline AudioBuffer slice(const AudioBuffer& buf, TrimRange r) {
  AudioBuffer out;
  out.sample_rate = buf.sample_rate;
  out.samples.assign(buf.samples.begin() + static_cast<std::ptrdiff_t>(r.begin),
                     buf.samples.begin() + static_cast<std::ptrdiff_t>(r.end));
  return out;
}

// Removes leading and trailing silence; see trim_range.
inline AudioBuffer trim_silence(const AudioBuffer& buf, double threshold_dbfs, double pad_ms) {
  return slice(buf, trim_range(buf, threshold_dbfs, pad_ms));
}

struct AudioQualityReport {
  double duration_s = 0;
  double rms_dbfs = kFloorDbfs;
  double peak_dbfs = kFloorDbfs;
  double clipping_ratio = 0;
  double snr_db = 0;
  double leading_silence_s = 0;
  double trailing_silence_s = 0;
};

// Linear-interpolated percentile of an already sorted sample.
inline double percentile(std::span<const double> sorted, double p) {
  if (sorted.empty()) return 0;
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(sorted.size() - 1, lo + 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// SNR contrasts the mean energy of frames at or above the 80th energy
// percentile with frames at or below the 20th. Silence measurements use the
// default -45 dBFS threshold.
inline AudioQualityReport measure_quality(const AudioBuffer& buf, double silence_threshold_dbfs = -45.0) {
  if (buf.samples.empty()) throw Error(ErrorCategory::EmptyBuffer, "cannot measure an empty buffer");
  if (buf.sample_rate <= 0) throw Error(ErrorCategory::InvalidRate, "sample rate must be positive");
  const std::span<const float> x = buf.samples;
  AudioQualityReport r;
  r.duration_s = buf.duration_s();
  r.rms_dbfs = to_db(rms(x));
  r.peak_dbfs = to_db(peak(x));
  std::size_t clipped = 0;
  for (float v : x) clipped += std::fabs(v) >= kClipLevel;
  r.clipping_ratio = static_cast<double>(clipped) / static_cast<double>(x.size());

  const auto g = FrameGeometry::for_rate(buf.sample_rate);
  auto energies = frame_energies(x, g);
  auto sorted = energies;
  std::sort(sorted.begin(), sorted.end());
  const double p80 = percentile(sorted, 80), p20 = percentile(sorted, 20);
  double hi_sum = 0, lo_sum = 0;
  std::size_t hi_n = 0, lo_n = 0;
  for (double e : energies) {
    if (e >= p80) hi_sum += e, ++hi_n;
    if (e <= p20) lo_sum += e, ++lo_n;
  }
  const double signal = hi_sum / static_cast<double>(hi_n);
  const double noise = lo_sum / static_cast<double>(lo_n);
  if (signal <= 0) {
    r.snr_db = 0;
  } else if (noise <= 0) {
    r.snr_db = kMaxSnrDb;
  } else {
    r.snr_db = std::min(kMaxSnrDb, 10.0 * std::log10(signal / noise));
  }

  const double threshold_energy = from_db(silence_threshold_dbfs) * from_db(silence_threshold_dbfs);
  std::size_t lead = 0;
  while (lead < energies.size() && energies[lead] < threshold_energy) ++lead;
  std::size_t trail = 0;
  while (trail < energies.size() - lead && energies[energies.size() - 1 - trail] < threshold_energy) ++trail;
  if (lead == energies.size()) {
    r.leading_silence_s = r.trailing_silence_s = r.duration_s;
  } else {
    r.leading_silence_s = static_cast<double>(lead * g.hop) / buf.sample_rate;
    r.trailing_silence_s = static_cast<double>(trail * g.hop) / buf.sample_rate;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Trim + loudness as one stage

struct ConditionedAudio {
  AudioBuffer buffer;
  double gain_db = 0;
  bool capped = false;
  double clipping_ratio = 0;  // of the kept region, before gain
};

// Trims and normalizes so that running the stage again on its own 16-bit
// output is a no-op. Trimming against an absolute threshold is not scale
// invariant, so the gain g and the kept region R are solved together: R is
// the trim of g*x and g brings R to the target RMS. R grows with g, so the
// iteration is monotone and settles after a few rounds. The final cut is
// taken on the quantized signal that will be written.
inline ConditionedAudio trim_and_normalize(const AudioBuffer& buf, double target_rms_dbfs, double threshold_dbfs,
                                           double pad_ms) {
  constexpr int kMaxRounds = 32;
  const auto scaled = [&](double g) {
    AudioBuffer y = buf;
    if (g != 1.0) {
      for (auto& s : y.samples) s = clamp_unit(s * g);
    }
    return y;
  };
  ConditionedAudio out;
  double g = 1.0;
  std::optional<TrimRange> previous;
  for (int round = 0; round < kMaxRounds; ++round) {
    const auto region = trim_range(scaled(g), threshold_dbfs, pad_ms);
    if (previous && previous->begin == region.begin && previous->end == region.end) break;
    previous = region;
    const std::span<const float> kept(buf.samples.data() + region.begin, region.end - region.begin);
    const double level = rms(kept);
    if (level <= 0) throw Error(ErrorCategory::AllZeroInput, "kept region is all zero");
    double gain_db = target_rms_dbfs - to_db(level);
    const double max_gain_db = kPeakCeilingDbfs - to_db(peak(kept));
    out.capped = gain_db > max_gain_db;
    if (out.capped) gain_db = max_gain_db;
    g = std::fabs(gain_db) < 1e-3 ? 1.0 : from_db(gain_db);
  }
  auto y = scaled(g);
  quantize_pcm16(y);
  const auto region = trim_range(y, threshold_dbfs, pad_ms);
  // Clipping is a property of the recording, so it is measured before gain.
  std::size_t clipped = 0;
  for (std::size_t i = region.begin; i < region.end; ++i) clipped += std::fabs(buf.samples[i]) >= kClipLevel;
  out.clipping_ratio = static_cast<double>(clipped) / static_cast<double>(region.end - region.begin);
  out.buffer = slice(y, region);
  out.gain_db = g == 1.0 ? 0.0 : to_db(g);
  return out;
}

}  // namespace tibtts::audio
