#pragma once

// Speech-text pairing check: a record whose speaking rate (syllables per
// second) is far from its group's median is flagged. Spread is measured by
// the median absolute deviation so a few bad pairs cannot mask themselves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tibtts/error.hpp"

namespace tibtts::consistency {

inline constexpr double kMadToSigma = 1.4826;
inline constexpr double kRelativeTie = 1e-9;

enum class Decision { Accept, Review, Reject };

constexpr const char* decision_name(Decision d) {
  switch (d) {
    case Decision::Accept: return "Accept";
    case Decision::Review: return "Review";
    case Decision::Reject: return "Reject";
  }
  return "?";
}

struct Thresholds {
  double review_z = 2.5;  // |z| above this: Review
  double reject_z = 4.0;  // |z| above this: Reject
  std::size_t min_group_size = 8;
  // Used only when MAD is zero: the spread floor, as a fraction of the
  // median rate, that decides whether a deviation is gross enough to reject.
  double degenerate_scale_fraction = 0.05;
};

struct RateSample {
  double rate_syl_per_s;
  std::optional<std::string> group;  // speaker id; absent = global pool
};

struct ConsistencyVerdict {
  double rate_syl_per_s = 0;
  double corpus_median = 0;
  double corpus_mad = 0;
  double z_robust = 0;
  Decision decision = Decision::Review;
};

inline double speaking_rate(double duration_s, std::size_t syllable_count) {
  if (syllable_count == 0) throw Error(ErrorCategory::ZeroSyllables, "transcript has no syllables");
  if (!(duration_s > 0)) throw Error(ErrorCategory::ZeroDuration, "duration must be positive");
  return static_cast<double>(syllable_count) / duration_s;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline Decision decide(double z, const Thresholds& t) {
  const double a = std::fabs(z);
  if (a > t.reject_z) return Decision::Reject;
  if (a > t.review_z) return Decision::Review;
  return Decision::Accept;
}

// Robust z-scores within each group. Groups smaller than min_group_size are
// all sent to Review. When MAD is zero, a rate equal to the median is
// accepted, any other rate goes to Review, and only deviations beyond the
// reject threshold against the degenerate scale floor are rejected.
inline std::vector<ConsistencyVerdict> verify_corpus(std::span<const RateSample> samples, const Thresholds& t = {}) {
  std::map<std::optional<std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) groups[samples[i].group].push_back(i);

  std::vector<ConsistencyVerdict> out(samples.size());
  for (const auto& [_, members] : groups) {
    std::vector<double> rates;
    rates.reserve(members.size());
    for (std::size_t i : members) rates.push_back(samples[i].rate_syl_per_s);
    const double med = median(rates);
    std::vector<double> dev;
    dev.reserve(rates.size());
    for (double r : rates) dev.push_back(std::fabs(r - med));
    // Rates are quotients, so values equal in exact arithmetic can differ in
    // the last bits; deviations within `tie` of the median count as zero.
    const double tie = kRelativeTie * std::fabs(med);
    const double raw_mad = median(dev);
    const double mad = raw_mad > tie ? raw_mad : 0.0;
    const bool small = members.size() < t.min_group_size;
    for (std::size_t i : members) {
      auto& v = out[i];
      v.rate_syl_per_s = samples[i].rate_syl_per_s;
      v.corpus_median = med;
      v.corpus_mad = mad;
      if (mad > 0) {
        v.z_robust = (v.rate_syl_per_s - med) / (kMadToSigma * mad);
        v.decision = decide(v.z_robust, t);
      } else {
        const double floor_scale = t.degenerate_scale_fraction * std::fabs(med);
        const double diff = v.rate_syl_per_s - med;
        v.z_robust = floor_scale > 0 ? diff / floor_scale : 0.0;
        if (std::fabs(diff) <= tie) {
          v.decision = Decision::Accept;
        } else {
          v.decision = std::fabs(v.z_robust) > t.reject_z ? Decision::Reject : Decision::Review;
        }
      }
      if (small) v.decision = Decision::Review;
    }
  }
  return out;
}

}  // namespace tibtts::consistency
