#pragma once

// Tibetan script handling: canonical normalization and syllable segmentation.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "tibtts/error.hpp"
#include "tibtts/utf8.hpp"

namespace tibtts::script {

inline constexpr char32_t kTsheg = 0x0F0B;
inline constexpr char32_t kShad = 0x0F0D;
inline constexpr char32_t kNyisShad = 0x0F0E;
inline constexpr char32_t kBlockFirst = 0x0F00;
inline constexpr char32_t kBlockLast = 0x0FFF;

inline constexpr bool is_tibetan(char32_t cp) { return cp >= kBlockFirst && cp <= kBlockLast; }

inline bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

// Tsheg, shad, nyis shad and whitespace end a syllable.
inline bool is_syllable_boundary(char32_t cp) {
  return cp == kTsheg || cp == kShad || cp == kNyisShad || is_whitespace(cp);
}

// Letters, marks and digits of the Tibetan block build syllables. Every other
// Tibetan codepoint (head marks, shad variants, symbols, unassigned) is
// punctuation.
inline bool is_syllable_material(char32_t cp) {
  if (!is_tibetan(cp) || is_syllable_boundary(cp)) return false;
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(cp));
  return (mask & (U_GC_L_MASK | U_GC_M_MASK | U_GC_N_MASK)) != 0;
}

// Canonical composition (NFC). Invalid UTF-8 is rejected with the byte
// offset of the first offender.
inline std::string unicode_normalize(std::string_view text) {
  utf8::validate(text);
  if (text.empty()) return {};
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCategory::InvalidUtf8, u_errorName(status));
  }
  const auto src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (nfc->isNormalized(src, status) && U_SUCCESS(status)) return std::string(text);
  status = U_ZERO_ERROR;
  icu::UnicodeString dst = nfc->normalize(src, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCategory::InvalidUtf8, u_errorName(status));
  }
  std::string out;
  dst.toUTF8String(out);
  return out;
}

enum class RunKind { TibetanSyllable, TibetanPunct, NonTibetan, Whitespace };

constexpr std::string_view run_kind_name(RunKind k) {
  switch (k) {
    case RunKind::TibetanSyllable: return "TibetanSyllable";
    case RunKind::TibetanPunct: return "TibetanPunct";
    case RunKind::NonTibetan: return "NonTibetan";
    case RunKind::Whitespace: return "Whitespace";
  }
  return "?";
}

struct ScriptRun {
  RunKind kind;
  std::string text;
  std::size_t begin;  // byte offsets into the source
  std::size_t end;

  bool operator==(const ScriptRun&) const = default;
};

inline RunKind classify(char32_t cp) {
  if (is_whitespace(cp)) return RunKind::Whitespace;
  if (!is_tibetan(cp)) return RunKind::NonTibetan;
  return is_syllable_material(cp) ? RunKind::TibetanSyllable : RunKind::TibetanPunct;
}

// Partitions `text` into maximal runs of one kind. Syllables are split at
// every tsheg/shad/whitespace/non-Tibetan codepoint; the separators themselves
// become TibetanPunct or Whitespace runs so the partition is lossless.
inline std::vector<ScriptRun> segment_runs(std::string_view text) {
  std::vector<ScriptRun> runs;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const RunKind kind = classify(utf8::decode_one(text, pos));
    if (!runs.empty() && runs.back().kind == kind) {
      runs.back().end = pos;
    } else {
      runs.push_back({kind, {}, start, pos});
    }
  }
  for (auto& r : runs) r.text.assign(text.substr(r.begin, r.end - r.begin));
  return runs;
}

inline std::vector<std::string> segment_syllables(std::string_view text) {
  std::vector<std::string> out;
  for (auto& run : segment_runs(text)) {
    if (run.kind == RunKind::TibetanSyllable) out.push_back(std::move(run.text));
  }
  return out;
}

inline std::size_t count_syllables(std::string_view text) {
  std::size_t n = 0;
  for (const auto& run : segment_runs(text)) n += run.kind == RunKind::TibetanSyllable;
  return n;
}

}  // namespace tibtts::script
