#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "tibtts/normalize.hpp"
#include "tibtts/script.hpp"

using namespace tibtts;
using namespace tibtts::normalize;

namespace {

std::string u8(std::u32string s) { return utf8::encode(s); }

const NumberLexicon& lexicon() {
  static const NumberLexicon lex = NumberLexicon::load(NumberLexicon::default_path());
  return lex;
}

template <class F>
ErrorCategory category_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  return ErrorCategory::BadRequest;
}

}  // namespace

TEST(NormalizeText, EmptyConfigIsNoOp) {
  const auto r = normalize_text("བོད", NormalizationConfig{});
  EXPECT_EQ(r.normalized, "བོད");
  EXPECT_TRUE(r.edits.empty());
}

// U+0030 + d maps to U+0F20 + d.
TEST(NormalizeText, ArabicDigitsMapOntoTibetanDigits) {
  NormalizationConfig c;
  c.digit_policy = DigitPolicy::ToTibetanDigits;
  const auto r = normalize_text("ལོ 2024", c);
  EXPECT_EQ(r.normalized, u8(U"ལོ ༢༠༢༤"));
  ASSERT_EQ(r.edits.size(), 1u);
  EXPECT_EQ(r.edits[0].kind, EditKind::DigitMap);
}

TEST(NormalizeText, StripRecordsOneEdit) {
  NormalizationConfig c;
  c.strip_set = {U'@'};
  const auto r = normalize_text("བོད@ཡིག", c);
  EXPECT_EQ(r.normalized, "བོདཡིག");
  ASSERT_EQ(r.edits.size(), 1u);
  EXPECT_EQ(r.edits[0].kind, EditKind::Strip);
  EXPECT_EQ(r.edits[0].replacement, "");
}

TEST(NormalizeText, UnknownSymbolsArePreservedAndCounted) {
  const auto r = normalize_text("ཀ?ཁ&", NormalizationConfig{});
  EXPECT_EQ(r.normalized, "ཀ?ཁ&");
  EXPECT_EQ(r.unknown_symbols, 2u);
}

TEST(NormalizeText, SymbolMapUsesLongestKey) {
  NormalizationConfig c;
  c.symbol_map = {{"%", "བརྒྱ་ཆ"}, {"%%", "།"}};
  c.validate_and_canonicalize();
  EXPECT_EQ(normalize_text("ཀ%%ཁ%", c).normalized, "ཀ།ཁབརྒྱ་ཆ");
}

TEST(NormalizeText, VerbalizesNumbersWithSyllableSeparators) {
  NormalizationConfig c;
  c.digit_policy = DigitPolicy::VerbalizeCardinal;
  const auto r = normalize_text("ལོ་2024་ལ", c, &lexicon());
  EXPECT_EQ(r.normalized, "ལོ་ཉིས་སྟོང་དང་ཉེར་བཞི་ལ");
  const auto fused = normalize_text("ཀ15ཁ", c, &lexicon());
  EXPECT_EQ(fused.normalized, "ཀ་བཅོ་ལྔ་ཁ");
}

TEST(NormalizeText, TibetanDigitsAreVerbalizedToo) {
  NormalizationConfig c;
  c.digit_policy = DigitPolicy::VerbalizeCardinal;
  EXPECT_EQ(normalize_text(u8(U"༡༥"), c, &lexicon()).normalized, "བཅོ་ལྔ");
}

TEST(NormalizeText, OversizedNumberIsFlaggedAndReadDigitByDigit) {
  NormalizationConfig c;
  c.digit_policy = DigitPolicy::VerbalizeCardinal;
  const auto r = normalize_text("1000000", c, &lexicon());
  ASSERT_EQ(r.flags.size(), 1u);
  EXPECT_EQ(r.flags[0].digits, "1000000");
  EXPECT_EQ(r.normalized, "གཅིག་ཀླད་ཀོར་ཀླད་ཀོར་ཀླད་ཀོར་ཀླད་ཀོར་ཀླད་ཀོར་ཀླད་ཀོར");
  ASSERT_EQ(r.edits.size(), 1u);
  EXPECT_EQ(r.edits[0].kind, EditKind::DigitFallback);
}

TEST(NormalizeText, VerbalizeWithoutLexiconIsAConfigError) {
  NormalizationConfig c;
  c.digit_policy = DigitPolicy::VerbalizeCardinal;
  EXPECT_EQ(category_of([&] { normalize_text("1", c); }), ErrorCategory::InvalidConfig);
}

TEST(NormalizeText, WhitespaceCollapsesAndTrims) {
  NormalizationConfig c;
  c.collapse_whitespace = true;
  EXPECT_EQ(normalize_text("  ཀ \t\n ཁ  ", c).normalized, "ཀ ཁ");
}

TEST(NormalizeText, StripExposingAKeyIsRewrittenInTheSameCall) {
  NormalizationConfig c;
  c.strip_set = {U'@'};
  c.symbol_map = {{"ab", "ཀ"}};
  c.validate_and_canonicalize();
  const auto r = normalize_text("a@b", c);
  EXPECT_EQ(r.normalized, "ཀ");
  EXPECT_EQ(normalize_text(r.normalized, c).normalized, r.normalized);
  EXPECT_EQ(apply_edits(r.raw, r.edits), r.normalized);
}

TEST(NormalizeText, InvalidUtf8IsRejected) {
  EXPECT_EQ(category_of([] { normalize_text("\xFF", NormalizationConfig{}); }), ErrorCategory::InvalidUtf8);
}

// Readings composed by hand from data/lexicon/tibetan_numbers.json.
TEST(NumberLexicon, HandComposedReadings) {
  const auto& lex = lexicon();
  EXPECT_EQ(lex.verbalize("0"), "ཀླད་ཀོར");
  EXPECT_EQ(lex.verbalize("7"), "བདུན");
  EXPECT_EQ(lex.verbalize("10"), "བཅུ");
  EXPECT_EQ(lex.verbalize("15"), "བཅོ་ལྔ");
  EXPECT_EQ(lex.verbalize("20"), "ཉི་ཤུ");
  EXPECT_EQ(lex.verbalize("24"), "ཉེར་བཞི");
  EXPECT_EQ(lex.verbalize("99"), "གོ་དགུ");
  EXPECT_EQ(lex.verbalize("100"), "བརྒྱ");
  EXPECT_EQ(lex.verbalize("105"), "བརྒྱ་དང་ལྔ");
  EXPECT_EQ(lex.verbalize("300"), "སུམ་བརྒྱ");
  EXPECT_EQ(lex.verbalize("2024"), "ཉིས་སྟོང་དང་ཉེར་བཞི");
  EXPECT_EQ(lex.verbalize("1100"), "སྟོང་བརྒྱ");
  EXPECT_EQ(lex.verbalize("50000"), "ལྔ་ཁྲི");
  EXPECT_EQ(lex.verbalize("999999"), "དགུ་འབུམ་དགུ་ཁྲི་དགུ་སྟོང་དགུ་བརྒྱ་དང་གོ་དགུ");
  EXPECT_EQ(lex.verbalize("007"), "བདུན");
}

TEST(NumberLexicon, MagnitudeLimit) {
  EXPECT_EQ(category_of([] { lexicon().verbalize("1000000"); }), ErrorCategory::UnsupportedMagnitude);
  EXPECT_EQ(category_of([] { lexicon().verbalize(std::uint64_t{1'000'000}); }), ErrorCategory::UnsupportedMagnitude);
  EXPECT_NO_THROW(lexicon().verbalize("999999"));
}

TEST(NumberLexicon, RejectsMalformedFiles) {
  auto j = json_util::parse_file(NumberLexicon::default_path(), ErrorCategory::InvalidConfig);
  auto missing = j;
  missing["units"].erase("3");
  EXPECT_EQ(category_of([&] { NumberLexicon::from_json(missing); }), ErrorCategory::InvalidConfig);
  auto latin = j;
  latin["zero"] = "zero";
  EXPECT_EQ(category_of([&] { NumberLexicon::from_json(latin); }), ErrorCategory::InvalidConfig);
  auto extra = j;
  extra["millions"] = Json::object();
  EXPECT_EQ(category_of([&] { NumberLexicon::from_json(extra); }), ErrorCategory::InvalidConfig);
}

TEST(NormalizationConfigFile, RoundTripsAndRejectsBadConfigs) {
  const auto c = NormalizationConfig::corpus_default();
  const auto back = NormalizationConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());

  const auto shipped = NormalizationConfig::from_json(
      json_util::parse_file(std::string(TIBTTS_DATA_DIR) + "/config/normalization.example.json", ErrorCategory::InvalidConfig));
  EXPECT_EQ(shipped.to_json(), c.to_json());

  EXPECT_EQ(category_of([] { NormalizationConfig::from_json(Json{{"digit_polcy", "to_tibetan_digits"}}); }),
            ErrorCategory::InvalidConfig);
  EXPECT_EQ(category_of([] {
              NormalizationConfig::from_json(Json{{"strip_set", {"%"}}, {"symbol_map", {{"%", "ཀ"}}}});
            }),
            ErrorCategory::InvalidConfig);
  EXPECT_EQ(category_of([] { NormalizationConfig::from_json(Json{{"symbol_map", {{"&", "and"}}}}); }),
            ErrorCategory::InvalidConfig);
  EXPECT_EQ(category_of([] { NormalizationConfig::from_json(Json{{"digit_policy", "roman"}}); }),
            ErrorCategory::InvalidConfig);
}

// Property suite over noisy mixed text, for both shipped configurations.
class NormalizeProperties : public ::testing::TestWithParam<bool> {
 protected:
  NormalizationConfig config() const {
    return GetParam() ? NormalizationConfig::synthesis_default() : NormalizationConfig::corpus_default();
  }
  static std::string random_text(std::mt19937& rng) {
    static const std::u32string pool =
        U"\u0F40\u0F42\u0F56\u0F62\u0F66\u0F90\u0FB1\u0F71\u0F72\u0F73\u0F7A\u0F74\u0F75\u0F43"
        U"\u0F0B\u0F0D\u0F20\u0F25\u0F29"
        U"0123456789 \t\n@#%|*<>?&!.\u200B\uFEFFab";
    std::u32string s;
    const auto len = rng() % 40;
    for (std::size_t i = 0; i < len; ++i) s += pool[rng() % pool.size()];
    return utf8::encode(s);
  }
};

TEST_P(NormalizeProperties, IdempotentDigitFreeAuditedDeterministic) {
  const auto cfg = config();
  const NumberLexicon* lex = cfg.digit_policy == DigitPolicy::VerbalizeCardinal ? &lexicon() : nullptr;
  std::mt19937 rng(GetParam() ? 11 : 12);
  const std::regex ascii_digit("[0-9]");
  for (int trial = 0; trial < 3000; ++trial) {
    const auto text = random_text(rng);
    const auto r = normalize_text(text, cfg, lex);
    ASSERT_EQ(normalize_text(r.normalized, cfg, lex).normalized, r.normalized) << text;
    ASSERT_FALSE(std::regex_search(r.normalized, ascii_digit)) << r.normalized;
    ASSERT_EQ(apply_edits(r.raw, r.edits), r.normalized) << text;
    for (char32_t cp : utf8::decode(r.normalized)) ASSERT_EQ(cfg.strip_set.count(cp), 0u);
    ASSERT_EQ(script::unicode_normalize(r.normalized), r.normalized);
    const auto again = normalize_text(text, cfg, lex);
    ASSERT_EQ(again.normalized, r.normalized);
    ASSERT_EQ(again.edits, r.edits);
    if (cfg.digit_policy == DigitPolicy::VerbalizeCardinal) {
      for (char32_t cp : utf8::decode(r.normalized)) ASSERT_LT(NumberLexicon::digit_value(cp), 0);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Configs, NormalizeProperties, ::testing::Values(false, true),
                         [](const auto& info) { return info.param ? "Synthesis" : "Corpus"; });

TEST(Normalizer, LoadsDefaultLexiconForSynthesis) {
  const Normalizer n(NormalizationConfig::synthesis_default());
  EXPECT_EQ(n("ལོ 15").normalized, "ལོ བཅོ་ལྔ");
}
