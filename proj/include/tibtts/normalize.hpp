#pragma once

// Text normalization for Tibetan corpus cleaning and synthesis input:
// symbol stripping and mapping, digit rewriting, number verbalization and
// whitespace collapsing, with an audit trail of every rewrite.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>

#include "tibtts/error.hpp"
#include "tibtts/json_util.hpp"
#include "tibtts/script.hpp"
#include "tibtts/utf8.hpp"

namespace tibtts::normalize {

inline constexpr std::uint64_t kMaxVerbalized = 999'999;

// Table-driven cardinal reader. The composition rule is: scale terms from the
// largest scale down (multiplier + scale word), then the connector, then the
// sub-hundred remainder (unit, teen, round ten, or tens-prefix + unit), all
// joined by the separator.
class NumberLexicon {
 public:
  static NumberLexicon from_json(const Json& j) {
    json_util::require_known_keys(j, {"format_version", "separator", "zero", "units", "teens", "tens",
                                      "tens_prefix", "scales", "multipliers", "remainder_connector"},
                                  "number lexicon");
    NumberLexicon lex;
    try {
      if (j.at("format_version").get<int>() != 1) {
        throw Error(ErrorCategory::InvalidConfig, "unsupported lexicon format_version");
      }
      lex.separator_ = j.at("separator").get<std::string>();
      lex.zero_ = j.at("zero").get<std::string>();
      lex.connector_ = j.value("remainder_connector", std::string{});
      for (int d = 1; d <= 9; ++d) {
        const auto k = std::to_string(d);
        lex.units_[d] = j.at("units").at(k).get<std::string>();
        lex.multipliers_[d] = j.at("multipliers").at(k).get<std::string>();
        if (d >= 2) {
          lex.tens_[d] = j.at("tens").at(k).get<std::string>();
          lex.tens_prefix_[d] = j.at("tens_prefix").at(k).get<std::string>();
        }
      }
      for (int t = 10; t <= 19; ++t) lex.teens_[t - 10] = j.at("teens").at(std::to_string(t)).get<std::string>();
      for (auto [value, i] : {std::pair{100, 0}, {1000, 1}, {10000, 2}, {100000, 3}}) {
        lex.scales_[i] = j.at("scales").at(std::to_string(value)).get<std::string>();
      }
    } catch (const Json::exception& e) {
      throw Error(ErrorCategory::InvalidConfig, std::string("number lexicon: ") + e.what());
    }
    lex.validate();
    return lex;
  }

  static NumberLexicon load(const std::filesystem::path& path) {
    return from_json(json_util::parse_file(path, ErrorCategory::InvalidConfig));
  }

  static std::filesystem::path default_path() {
    return std::filesystem::path(TIBTTS_DATA_DIR) / "lexicon" / "tibetan_numbers.json";
  }

  // Reads a non-empty digit string (ASCII or Tibetan digits). Values above
  // 999,999 throw UnsupportedMagnitude.
  std::string verbalize(std::string_view digits) const {
    const auto cps = utf8::decode(digits);
    if (cps.empty()) throw Error(ErrorCategory::InvalidConfig, "empty digit string");
    std::uint64_t value = 0;
    for (char32_t cp : cps) {
      const int d = digit_value(cp);
      if (d < 0) throw Error(ErrorCategory::InvalidConfig, "not a digit string: " + std::string(digits));
      value = value * 10 + static_cast<std::uint64_t>(d);
      if (value > kMaxVerbalized) {
        throw Error(ErrorCategory::UnsupportedMagnitude,
                    "value " + std::string(digits) + " exceeds " + std::to_string(kMaxVerbalized));
      }
    }
    return verbalize(value);
  }

  std::string verbalize(std::uint64_t n) const {
    if (n > kMaxVerbalized) {
      throw Error(ErrorCategory::UnsupportedMagnitude, std::to_string(n) + " exceeds " + std::to_string(kMaxVerbalized));
    }
    if (n == 0) return zero_;
    std::vector<std::string> terms;
    constexpr std::uint64_t kScaleValues[] = {100, 1000, 10000, 100000};
    for (int i = 3; i >= 0; --i) {
      const auto d = static_cast<int>((n / kScaleValues[i]) % 10);
      if (d == 0) continue;
      terms.push_back(join(multipliers_[d], scales_[i]));
    }
    const auto rem = static_cast<int>(n % 100);
    if (rem != 0) {
      if (!terms.empty() && !connector_.empty()) terms.push_back(connector_);
      if (rem < 10) {
        terms.push_back(units_[rem]);
      } else if (rem < 20) {
        terms.push_back(teens_[rem - 10]);
      } else if (rem % 10 == 0) {
        terms.push_back(tens_[rem / 10]);
      } else {
        terms.push_back(join(tens_prefix_[rem / 10], units_[rem % 10]));
      }
    }
    std::string out;
    for (const auto& t : terms) out = join(out, t);
    return out;
  }

  // Digit-by-digit reading, the fallback for values the cardinal reader
  // does not cover.
  std::string read_digits(std::string_view digits) const {
    std::string out;
    for (char32_t cp : utf8::decode(digits)) {
      const int d = digit_value(cp);
      out = join(out, d == 0 ? zero_ : units_[d]);
    }
    return out;
  }

  const std::string& separator() const { return separator_; }

  static int digit_value(char32_t cp) {
    if (cp >= U'0' && cp <= U'9') return static_cast<int>(cp - U'0');
    if (cp >= 0x0F20 && cp <= 0x0F29) return static_cast<int>(cp - 0x0F20);
    return -1;
  }

 private:
  std::string join(const std::string& a, const std::string& b) const {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return a + separator_ + b;
  }

  void validate() const {
    auto check = [](const std::string& word, bool allow_empty) {
      if (word.empty() && !allow_empty) throw Error(ErrorCategory::InvalidConfig, "empty lexicon entry");
      for (char32_t cp : utf8::decode(word)) {
        if (!script::is_tibetan(cp) || NumberLexicon::digit_value(cp) >= 0) {
          throw Error(ErrorCategory::InvalidConfig, "lexicon entry is not Tibetan text: " + word);
        }
      }
    };
    check(separator_, false);
    check(zero_, false);
    check(connector_, true);
    for (int d = 1; d <= 9; ++d) {
      check(units_[d], false);
      check(multipliers_[d], d == 1);
      if (d >= 2) {
        check(tens_[d], false);
        check(tens_prefix_[d], false);
      }
    }
    for (const auto& t : teens_) check(t, false);
    for (const auto& s : scales_) check(s, false);
  }

  std::string separator_;
  std::string zero_;
  std::string connector_;
  std::string units_[10];
  std::string multipliers_[10];
  std::string tens_[10];
  std::string tens_prefix_[10];
  std::string teens_[10];
  std::string scales_[4];  // 100, 1000, 10000, 100000
};

enum class DigitPolicy { ToTibetanDigits, VerbalizeCardinal };

struct NormalizationConfig {
  DigitPolicy digit_policy = DigitPolicy::ToTibetanDigits;
  std::map<std::string, std::string> symbol_map;
  std::set<char32_t> strip_set;
  bool collapse_whitespace = false;

  // Keys and replacements are brought to canonical form, then the
  // structural constraints are checked. Throws InvalidConfig.
  void validate_and_canonicalize() {
    std::map<std::string, std::string> canon;
    for (const auto& [key, value] : symbol_map) {
      const auto k = script::unicode_normalize(key);
      const auto v = script::unicode_normalize(value);
      if (k.empty()) throw Error(ErrorCategory::InvalidConfig, "empty symbol_map key");
      canon[k] = v;
    }
    symbol_map = std::move(canon);
    for (const auto& [key, value] : symbol_map) {
      const auto kcp = utf8::decode(key);
      if (kcp.size() == 1 && strip_set.count(kcp[0])) {
        throw Error(ErrorCategory::InvalidConfig, "symbol_map key also in strip_set: " + key);
      }
      for (char32_t cp : utf8::decode(value)) {
        const bool ok = (script::is_tibetan(cp) && NumberLexicon::digit_value(cp) < 0) ||
                        script::is_whitespace(cp);
        if (!ok) throw Error(ErrorCategory::InvalidConfig, "replacement for '" + key + "' is not Tibetan text");
        if (strip_set.count(cp)) {
          throw Error(ErrorCategory::InvalidConfig, "replacement for '" + key + "' contains a stripped codepoint");
        }
      }
      for (const auto& [other, _] : symbol_map) {
        if (value.find(other) != std::string::npos) {
          throw Error(ErrorCategory::InvalidConfig, "replacement for '" + key + "' contains key '" + other + "'");
        }
      }
    }
  }

  static NormalizationConfig from_json(const Json& j) {
    json_util::require_known_keys(j, {"digit_policy", "symbol_map", "strip_set", "collapse_whitespace"},
                                  "normalization");
    NormalizationConfig c;
    const auto policy = json_util::get_or<std::string>(j, "digit_policy", "to_tibetan_digits");
    if (policy == "to_tibetan_digits") {
      c.digit_policy = DigitPolicy::ToTibetanDigits;
    } else if (policy == "verbalize_cardinal") {
      c.digit_policy = DigitPolicy::VerbalizeCardinal;
    } else {
      throw Error(ErrorCategory::InvalidConfig, "unknown digit_policy '" + policy + "'");
    }
    c.symbol_map = json_util::get_or<std::map<std::string, std::string>>(j, "symbol_map", {});
    for (const auto& s : json_util::get_or<std::vector<std::string>>(j, "strip_set", {})) {
      const auto cps = utf8::decode(s);
      if (cps.size() != 1) throw Error(ErrorCategory::InvalidConfig, "strip_set entries must be single codepoints: " + s);
      c.strip_set.insert(cps[0]);
    }
    c.collapse_whitespace = json_util::get_or<bool>(j, "collapse_whitespace", false);
    c.validate_and_canonicalize();
    return c;
  }

  Json to_json() const {
    Json strip = Json::array();
    for (char32_t cp : strip_set) strip.push_back(utf8::encode(cp));
    return Json{{"digit_policy", digit_policy == DigitPolicy::ToTibetanDigits ? "to_tibetan_digits" : "verbalize_cardinal"},
                {"symbol_map", symbol_map},
                {"strip_set", strip},
                {"collapse_whitespace", collapse_whitespace}};
  }

  // Corpus cleaning: reversible digit mapping, common stray symbols removed.
  static NormalizationConfig corpus_default() {
    NormalizationConfig c;
    c.digit_policy = DigitPolicy::ToTibetanDigits;
    c.collapse_whitespace = true;
    for (char32_t cp : std::u32string(U"@#*_~^`<>{}[]\\\u200B\u200C\u200D\uFEFF")) c.strip_set.insert(cp);
    c.symbol_map = {{"|", "།"}, {"%", "བརྒྱ་ཆ"}};
    c.validate_and_canonicalize();
    return c;
  }

  // Synthesis input: every number is read out.
  static NormalizationConfig synthesis_default() {
    auto c = corpus_default();
    c.digit_policy = DigitPolicy::VerbalizeCardinal;
    return c;
  }
};

enum class EditKind { Canonicalize, Strip, SymbolMap, DigitMap, Verbalize, DigitFallback, Whitespace };

constexpr std::string_view edit_kind_name(EditKind k) {
  switch (k) {
    case EditKind::Canonicalize: return "Canonicalize";
    case EditKind::Strip: return "Strip";
    case EditKind::SymbolMap: return "SymbolMap";
    case EditKind::DigitMap: return "DigitMap";
    case EditKind::Verbalize: return "Verbalize";
    case EditKind::DigitFallback: return "DigitFallback";
    case EditKind::Whitespace: return "Whitespace";
  }
  return "?";
}

// One rewrite. Edits are applied in order; `begin`/`end` are byte offsets into
// the text as it stands after all preceding edits.
struct Edit {
  std::size_t begin;
  std::size_t end;
  std::string replacement;
  EditKind kind;

  bool operator==(const Edit&) const = default;
};

// A number the cardinal reader could not handle; it was read digit by digit.
struct NormalizationFlag {
  std::string digits;
  std::size_t position;  // byte offset in the canonicalized input
};

struct NormalizedText {
  std::string raw;
  std::string normalized;
  std::vector<Edit> edits;
  std::vector<NormalizationFlag> flags;
  std::size_t unknown_symbols = 0;
};

inline std::string apply_edits(std::string text, const std::vector<Edit>& edits) {
  for (const auto& e : edits) text.replace(e.begin, e.end - e.begin, e.replacement);
  return text;
}

namespace detail {

inline bool is_unknown_symbol(char32_t cp) {
  if (script::is_tibetan(cp)) return false;
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(cp));
  return (mask & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

// Single edit covering the differing middle of `from` vs `to`, or nothing.
inline void diff_edit(const std::string& from, const std::string& to, EditKind kind, std::vector<Edit>& edits) {
  if (from == to) return;
  std::size_t prefix = 0;
  while (prefix < from.size() && prefix < to.size() && from[prefix] == to[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < from.size() - prefix && suffix < to.size() - prefix &&
         from[from.size() - 1 - suffix] == to[to.size() - 1 - suffix]) {
    ++suffix;
  }
  edits.push_back({prefix, from.size() - suffix, to.substr(prefix, to.size() - prefix - suffix), kind});
}

inline char32_t last_codepoint(const std::string& s) {
  if (s.empty()) return 0;
  std::size_t i = s.size() - 1;
  while (i > 0 && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) --i;
  std::size_t pos = i;
  return utf8::decode_one(s, pos);
}

}  // namespace detail

// Normalizes one text. `lexicon` is required when the digit policy is
// VerbalizeCardinal.
inline NormalizedText normalize_text(std::string_view text, const NormalizationConfig& config,
                                     const NumberLexicon* lexicon = nullptr) {
  if (config.digit_policy == DigitPolicy::VerbalizeCardinal && lexicon == nullptr) {
    throw Error(ErrorCategory::InvalidConfig, "VerbalizeCardinal requires a number lexicon");
  }
  NormalizedText result;
  result.raw = std::string(text);

  // Canonical form first; everything below works on NFC text.
  std::string current = script::unicode_normalize(text);
  detail::diff_edit(result.raw, current, EditKind::Canonicalize, result.edits);

  // Stripping or recomposition can expose a fresh symbol_map match, so the
  // stages repeat until a pass changes nothing. Digits are all consumed by
  // the first pass.
  constexpr int kMaxPasses = 8;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    const std::string before = current;
    result.unknown_symbols = 0;

    // Left-to-right rewrite pass. The output prefix is final and the input
    // suffix untouched, so each edit begins at the current output length.
    std::string out;
    out.reserve(current.size());
    const auto cps = utf8::decode(current);
    std::vector<std::size_t> offsets(cps.size() + 1);
    {
      std::size_t pos = 0;
      for (std::size_t i = 0; i < cps.size(); ++i) {
        offsets[i] = pos;
        utf8::decode_one(current, pos);
      }
      offsets[cps.size()] = pos;
    }
    const auto source = [&](std::size_t i, std::size_t j) {
      return std::string_view(current).substr(offsets[i], offsets[j] - offsets[i]);
    };
    auto emit_edit = [&](std::size_t i, std::size_t j, std::string replacement, EditKind kind) {
      result.edits.push_back({out.size(), out.size() + (offsets[j] - offsets[i]), replacement, kind});
      out += replacement;
    };

    std::size_t i = 0;
    while (i < cps.size()) {
      // Longest symbol_map key at this position.
      std::size_t best_len = 0;
      const std::string* best_value = nullptr;
      for (const auto& [key, value] : config.symbol_map) {
        if (key.size() > best_len && current.compare(offsets[i], key.size(), key) == 0) {
          best_len = key.size();
          best_value = &value;
        }
      }
      if (best_value != nullptr) {
        std::size_t j = i;
        while (offsets[j] < offsets[i] + best_len) ++j;
        emit_edit(i, j, *best_value, EditKind::SymbolMap);
        i = j;
        continue;
      }
      const char32_t cp = cps[i];
      if (config.strip_set.count(cp)) {
        emit_edit(i, i + 1, {}, EditKind::Strip);
        ++i;
        continue;
      }
      const bool ascii_digit = cp >= U'0' && cp <= U'9';
      const bool verbalize = config.digit_policy == DigitPolicy::VerbalizeCardinal;
      if (ascii_digit || (verbalize && NumberLexicon::digit_value(cp) >= 0)) {
        std::size_t j = i;
        if (verbalize) {
          while (j < cps.size() && NumberLexicon::digit_value(cps[j]) >= 0) ++j;
        } else {
          while (j < cps.size() && cps[j] >= U'0' && cps[j] <= U'9') ++j;
        }
        const auto digits = source(i, j);
        if (!verbalize) {
          std::string mapped;
          for (char c : digits) utf8::append(mapped, 0x0F20 + static_cast<char32_t>(c - '0'));
          emit_edit(i, j, mapped, EditKind::DigitMap);
        } else {
          std::string words;
          EditKind kind = EditKind::Verbalize;
          try {
            words = lexicon->verbalize(digits);
          } catch (const Error& e) {
            if (e.category() != ErrorCategory::UnsupportedMagnitude) throw;
            result.flags.push_back({std::string(digits), offsets[i]});
            words = lexicon->read_digits(digits);
            kind = EditKind::DigitFallback;
          }
          // Keep the words from fusing with neighbouring syllables.
          if (script::is_syllable_material(detail::last_codepoint(out))) words = lexicon->separator() + words;
          if (j < cps.size() && script::is_syllable_material(cps[j])) words += lexicon->separator();
          emit_edit(i, j, words, kind);
        }
        i = j;
        continue;
      }
      if (detail::is_unknown_symbol(cp)) ++result.unknown_symbols;
      out.append(source(i, i + 1));
      ++i;
    }
    current = std::move(out);

    // Deleting a codepoint can leave a non-canonical neighbourhood behind.
    {
      auto recanon = script::unicode_normalize(current);
      detail::diff_edit(current, recanon, EditKind::Canonicalize, result.edits);
      current = std::move(recanon);
    }

    if (config.collapse_whitespace) {
      std::string collapsed;
      collapsed.reserve(current.size());
      std::size_t pos = 0;
      while (pos < current.size()) {
        std::size_t start = pos;
        const char32_t cp = utf8::decode_one(current, pos);
        if (!script::is_whitespace(cp)) {
          collapsed.append(current, start, pos - start);
          continue;
        }
        std::size_t end = pos;
        while (end < current.size()) {
          std::size_t probe = end;
          if (!script::is_whitespace(utf8::decode_one(current, probe))) break;
          end = probe;
        }
        const bool edge = collapsed.empty() || end == current.size();
        const std::string replacement = edge ? "" : " ";
        const auto run = std::string_view(current).substr(start, end - start);
        if (run != replacement) {
          result.edits.push_back({collapsed.size(), collapsed.size() + run.size(), replacement, EditKind::Whitespace});
        }
        collapsed += replacement;
        pos = end;
      }
      current = std::move(collapsed);
    }
    if (current == before) break;
  }

  result.normalized = std::move(current);
  return result;
}

// Config plus lexicon bundled for repeated use.
class Normalizer {
 public:
  Normalizer() : Normalizer(NormalizationConfig::corpus_default()) {}
  explicit Normalizer(NormalizationConfig config, std::optional<NumberLexicon> lexicon = std::nullopt)
      : config_(std::move(config)), lexicon_(std::move(lexicon)) {
    if (config_.digit_policy == DigitPolicy::VerbalizeCardinal && !lexicon_) {
      lexicon_ = NumberLexicon::load(NumberLexicon::default_path());
    }
  }

  NormalizedText operator()(std::string_view text) const {
    return normalize_text(text, config_, lexicon_ ? &*lexicon_ : nullptr);
  }

  const NormalizationConfig& config() const { return config_; }

 private:
  NormalizationConfig config_;
  std::optional<NumberLexicon> lexicon_;
};

}  // namespace tibtts::normalize
