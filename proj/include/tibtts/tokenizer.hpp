#pragma once

// Two Tibetan tokenization strategies behind one interface:
//   - syllable level: one id per tsheg-delimited syllable, SEP between them;
//   - syllable-scoped BPE: merges learned inside syllables only.
//
// Inside the BPE model every syllable is spelled as its codepoints followed
// by a tsheg unit. The trailing tsheg marks the syllable end, so merges can
// never cross a boundary and decoding can restore the boundaries exactly.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "tibtts/error.hpp"
#include "tibtts/json_util.hpp"
#include "tibtts/script.hpp"
#include "tibtts/utf8.hpp"

namespace tibtts::tokenizer {

using TokenId = std::uint32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kBos = 2;
inline constexpr TokenId kEos = 3;
inline constexpr TokenId kSep = 4;
inline constexpr TokenId kNumSpecials = 5;
inline constexpr std::string_view kSpecialTokens[kNumSpecials] = {"<pad>", "<unk>", "<s>", "</s>", "<sep>"};
inline constexpr int kFormatVersion = 1;

// Rendered in place of UNK on decode.
inline const std::string kReplacementMark = "\xEF\xBF\xBD";  // U+FFFD
inline const std::string kTshegUtf8 = "\xE0\xBC\x8B";        // U+0F0B

enum class Strategy { Syllable, Bpe };

constexpr std::string_view strategy_name(Strategy s) { return s == Strategy::Syllable ? "syllable" : "bpe"; }

struct TokenSequence {
  std::vector<TokenId> ids;
  Strategy strategy;

  bool operator==(const TokenSequence&) const = default;
};

inline bool is_special(TokenId id) { return id < kNumSpecials; }

// One utterance per line, ids separated by single spaces.
inline std::string format_ids(std::span<const TokenId> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(ids[i]);
  }
  return out;
}

inline std::vector<TokenId> parse_ids(std::string_view line) {
  std::vector<TokenId> ids;
  std::istringstream in{std::string(line)};
  std::string word;
  std::size_t index = 0;
  while (in >> word) {
    std::size_t used = 0;
    unsigned long value = 0;
    try {
      value = std::stoul(word, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != word.size() || value > UINT32_MAX) {
      throw Error(ErrorCategory::InvalidTokenId, "not a token id: '" + word + "'", index);
    }
    ids.push_back(static_cast<TokenId>(value));
    ++index;
  }
  return ids;
}

namespace detail {

inline void check_specials(const Json& j) {
  const auto& specials = j.at("specials");
  if (!specials.is_array() || specials.size() != kNumSpecials) {
    throw Error(ErrorCategory::InvalidModel, "specials must list the 5 reserved tokens");
  }
  for (TokenId i = 0; i < kNumSpecials; ++i) {
    if (specials[i].get<std::string>() != kSpecialTokens[i]) {
      throw Error(ErrorCategory::InvalidModel, "special token " + std::to_string(i) + " mismatch");
    }
  }
}

inline Json specials_json() {
  Json a = Json::array();
  for (auto s : kSpecialTokens) a.push_back(std::string(s));
  return a;
}

inline void check_ids(std::span<const TokenId> ids, std::size_t vocab_size) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab_size) {
      throw Error(ErrorCategory::InvalidTokenId,
                  "token id " + std::to_string(ids[i]) + " outside vocabulary of " + std::to_string(vocab_size), i);
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Syllable strategy

class SyllableVocab {
 public:
  // Syllables with corpus frequency >= min_count, ordered by descending
  // frequency then codepoint order, after the 5 reserved ids.
  static SyllableVocab build(std::span<const std::string> corpus, std::size_t min_count) {
    if (corpus.empty()) throw Error(ErrorCategory::EmptyCorpus, "syllable vocabulary needs at least one utterance");
    if (min_count < 1) throw Error(ErrorCategory::InvalidConfig, "min_count must be >= 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& text : corpus) {
      for (auto& s : script::segment_syllables(text)) ++counts[std::move(s)];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [syl, n] : counts) {
      if (n >= min_count) kept.emplace_back(syl, n);
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> tokens;
    for (auto s : kSpecialTokens) tokens.emplace_back(s);
    for (auto& [syl, _] : kept) tokens.push_back(syl);
    return SyllableVocab(std::move(tokens));
  }

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenId id_of(std::string_view syllable) const {
    auto it = index_.find(std::string(syllable));
    return it == index_.end() ? kUnk : it->second;
  }

  // [BOS, s1, SEP, s2, ..., sn, EOS]. Out-of-vocabulary syllables and every
  // non-Tibetan run become UNK; punctuation and whitespace carry no token.
  TokenSequence encode(std::string_view text) const {
    TokenSequence seq{{kBos}, Strategy::Syllable};
    bool first = true;
    for (const auto& run : script::segment_runs(text)) {
      TokenId id;
      if (run.kind == script::RunKind::TibetanSyllable) {
        id = id_of(run.text);
      } else if (run.kind == script::RunKind::NonTibetan) {
        id = kUnk;
      } else {
        continue;
      }
      if (!first) seq.ids.push_back(kSep);
      seq.ids.push_back(id);
      first = false;
    }
    seq.ids.push_back(kEos);
    return seq;
  }

  std::string decode(std::span<const TokenId> ids) const {
    detail::check_ids(ids, size());
    std::string out;
    for (TokenId id : ids) {
      if (id == kSep) {
        out += kTshegUtf8;
      } else if (id == kUnk) {
        out += kReplacementMark;
      } else if (!is_special(id)) {
        out += tokens_[id];
      }
    }
    return out;
  }

  Json to_json() const {
    return Json{{"format_version", kFormatVersion},
                {"kind", "syllable"},
                {"specials", detail::specials_json()},
                {"vocab", std::vector<std::string>(tokens_.begin() + kNumSpecials, tokens_.end())}};
  }

  static SyllableVocab from_json(const Json& j) {
    try {
      json_util::require_known_keys(j, {"format_version", "kind", "specials", "vocab"}, "syllable vocab");
      if (j.at("format_version").get<int>() != kFormatVersion) {
        throw Error(ErrorCategory::InvalidModel, "unsupported format_version");
      }
      if (j.at("kind").get<std::string>() != "syllable") throw Error(ErrorCategory::InvalidModel, "not a syllable vocab");
      detail::check_specials(j);
      std::vector<std::string> tokens;
      for (auto s : kSpecialTokens) tokens.emplace_back(s);
      for (const auto& s : j.at("vocab")) tokens.push_back(s.get<std::string>());
      return SyllableVocab(std::move(tokens));
    } catch (const Json::exception& e) {
      throw Error(ErrorCategory::InvalidModel, e.what());
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::InvalidConfig) throw Error(ErrorCategory::InvalidModel, e.detail());
      throw;
    }
  }

 private:
  explicit SyllableVocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (TokenId i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], i).second) {
        throw Error(ErrorCategory::InvalidModel, "duplicate vocabulary entry '" + tokens_[i] + "'");
      }
    }
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// ---------------------------------------------------------------------------
// Syllable-scoped BPE

struct Merge {
  TokenId left;
  TokenId right;
  TokenId result;

  bool operator==(const Merge&) const = default;
};

inline bool is_literal_run(script::RunKind k) {
  return k == script::RunKind::TibetanPunct || k == script::RunKind::Whitespace;
}

// Units of one syllable as they enter BPE: its codepoints, then a tsheg.
inline std::vector<std::string> syllable_units(std::string_view syllable) {
  std::vector<std::string> units;
  for (char32_t cp : utf8::decode(syllable)) units.push_back(utf8::encode(cp));
  units.push_back(kTshegUtf8);
  return units;
}

class BpeModel {
 public:
  // Greedy BPE over syllable frequencies. Each step merges the most frequent
  // adjacent pair (ties: lexicographically smallest (left, right) strings)
  // until the vocabulary reaches `target_vocab_size` or no pair occurs twice.
  static BpeModel train(std::span<const std::string> corpus, std::size_t target_vocab_size) {
    if (corpus.empty()) throw Error(ErrorCategory::EmptyCorpus, "BPE training needs at least one utterance");
    std::map<std::string, std::uint64_t> syllable_freq;
    for (const auto& text : corpus) {
      for (auto& s : script::segment_syllables(text)) ++syllable_freq[std::move(s)];
    }
    if (syllable_freq.empty()) throw Error(ErrorCategory::EmptyCorpus, "corpus contains no Tibetan syllables");

    std::set<std::string> base;
    for (const auto& [syl, _] : syllable_freq) {
      for (auto& u : syllable_units(syl)) base.insert(std::move(u));
    }
    // Punctuation and whitespace join the base alphabet as single codepoints
    // so that normalized text survives a round trip; they never merge.
    for (const auto& text : corpus) {
      for (const auto& run : script::segment_runs(text)) {
        if (!is_literal_run(run.kind)) continue;
        for (char32_t cp : utf8::decode(run.text)) base.insert(utf8::encode(cp));
      }
    }
    if (target_vocab_size <= base.size() + kNumSpecials) {
      throw Error(ErrorCategory::TargetTooSmall,
                  "target " + std::to_string(target_vocab_size) + " must exceed " +
                      std::to_string(base.size()) + " base units + " + std::to_string(kNumSpecials) + " specials");
    }

    BpeModel model;
    for (auto s : kSpecialTokens) model.add_token(std::string(s));
    for (const auto& u : base) model.add_token(u);
    Trainer(model, syllable_freq).run(target_vocab_size);
    model.build_rank_index();
    return model;
  }

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<Merge>& merges() const { return merges_; }

  std::optional<TokenId> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Ids for one syllable (including its closing tsheg unit). Merges apply in
  // recorded order; codepoints outside the base vocabulary become UNK.
  std::vector<TokenId> encode_syllable(std::string_view syllable) const {
    std::vector<TokenId> units;
    for (const auto& u : syllable_units(syllable)) units.push_back(find(u).value_or(kUnk));
    // Jump straight to the next applicable merge rank instead of scanning the
    // whole merge list; equivalent to applying merges one by one.
    std::size_t next_rank = 0;
    while (units.size() > 1) {
      std::size_t best = SIZE_MAX;
      for (std::size_t i = 0; i + 1 < units.size(); ++i) {
        auto it = ranks_.find(pair_key(units[i], units[i + 1]));
        if (it == ranks_.end()) continue;
        auto r = std::lower_bound(it->second.begin(), it->second.end(), next_rank);
        if (r != it->second.end()) best = std::min<std::size_t>(best, *r);
      }
      if (best == SIZE_MAX) break;
      const Merge& m = merges_[best];
      std::vector<TokenId> merged;
      merged.reserve(units.size());
      for (std::size_t i = 0; i < units.size(); ++i) {
        if (i + 1 < units.size() && units[i] == m.left && units[i + 1] == m.right) {
          merged.push_back(m.result);
          ++i;
        } else {
          merged.push_back(units[i]);
        }
      }
      units = std::move(merged);
      next_rank = best + 1;
    }
    return units;
  }

  // [BOS, subwords..., EOS]; no SEP, the closing tsheg inside each
  // syllable's last token marks the boundary. A lone tsheg between two
  // syllables is carried by that closing unit; every other punctuation or
  // whitespace codepoint is emitted as its own token. Non-Tibetan runs and
  // codepoints outside the base vocabulary become UNK.
  TokenSequence encode(std::string_view text) const {
    TokenSequence seq{{kBos}, Strategy::Bpe};
    const auto runs = script::segment_runs(text);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& run = runs[i];
      if (run.kind == script::RunKind::TibetanSyllable) {
        const auto ids = encode_syllable(run.text);
        seq.ids.insert(seq.ids.end(), ids.begin(), ids.end());
      } else if (run.kind == script::RunKind::NonTibetan) {
        seq.ids.push_back(kUnk);
      } else {
        const bool implied = run.text == kTshegUtf8 && i > 0 && i + 1 < runs.size() &&
                             runs[i - 1].kind == script::RunKind::TibetanSyllable &&
                             runs[i + 1].kind == script::RunKind::TibetanSyllable;
        if (implied) continue;
        for (char32_t cp : utf8::decode(run.text)) seq.ids.push_back(find(utf8::encode(cp)).value_or(kUnk));
      }
    }
    seq.ids.push_back(kEos);
    return seq;
  }

  // Concatenates token strings (specials dropped, UNK as U+FFFD). A
  // syllable's closing tsheg is written only when another syllable follows
  // directly; a tsheg token that does not close an open syllable is literal.
  std::string decode(std::span<const TokenId> ids) const {
    detail::check_ids(ids, size());
    std::string out;
    bool open = false;     // inside a syllable whose closing unit has not appeared
    bool pending = false;  // a syllable just closed
    for (TokenId id : ids) {
      if (id == kUnk) {
        out += kReplacementMark;
        pending = false;
        continue;
      }
      if (is_special(id)) continue;
      const std::string& tok = tokens_[id];
      if (tok == kTshegUtf8) {
        if (open) {
          pending = true;
        } else {
          out += tok;
          pending = false;
        }
        open = false;
        continue;
      }
      if (!script::is_syllable_material(utf8::decode(tok).front())) {
        out += tok;
        open = pending = false;
        continue;
      }
      if (pending) out += kTshegUtf8;
      pending = tok.ends_with(kTshegUtf8);
      open = !pending;
      out.append(tok, 0, pending ? tok.size() - kTshegUtf8.size() : tok.size());
    }
    return out;
  }

  Json to_json() const {
    Json merges = Json::array();
    for (const auto& m : merges_) merges.push_back(Json::array({tokens_[m.left], tokens_[m.right]}));
    return Json{{"format_version", kFormatVersion},
                {"kind", "bpe"},
                {"specials", detail::specials_json()},
                {"vocab", std::vector<std::string>(tokens_.begin() + kNumSpecials, tokens_.end())},
                {"merges", merges}};
  }

  static BpeModel from_json(const Json& j) {
    try {
      json_util::require_known_keys(j, {"format_version", "kind", "specials", "vocab", "merges"}, "bpe model");
      if (j.at("format_version").get<int>() != kFormatVersion) {
        throw Error(ErrorCategory::InvalidModel, "unsupported format_version");
      }
      if (j.at("kind").get<std::string>() != "bpe") throw Error(ErrorCategory::InvalidModel, "not a BPE model");
      detail::check_specials(j);
      BpeModel model;
      for (auto s : kSpecialTokens) model.add_token(std::string(s));
      for (const auto& s : j.at("vocab")) {
        if (!model.add_token(s.get<std::string>())) {
          throw Error(ErrorCategory::InvalidModel, "duplicate vocabulary entry '" + s.get<std::string>() + "'");
        }
      }
      for (const auto& pair : j.at("merges")) {
        const auto left = pair.at(0).get<std::string>();
        const auto right = pair.at(1).get<std::string>();
        auto l = model.find(left);
        auto r = model.find(right);
        auto res = model.find(left + right);
        if (!l || !r || !res || is_special(*l) || is_special(*r)) {
          throw Error(ErrorCategory::InvalidModel, "merge (" + left + ", " + right + ") not backed by vocabulary");
        }
        model.merges_.push_back({*l, *r, *res});
      }
      model.build_rank_index();
      return model;
    } catch (const Json::exception& e) {
      throw Error(ErrorCategory::InvalidModel, e.what());
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::InvalidConfig) throw Error(ErrorCategory::InvalidModel, e.detail());
      throw;
    }
  }

 private:
  static std::uint64_t pair_key(TokenId l, TokenId r) { return (static_cast<std::uint64_t>(l) << 32) | r; }

  bool add_token(std::string s) {
    if (index_.count(s)) return false;
    index_.emplace(s, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(std::move(s));
    return true;
  }

  TokenId intern(const std::string& s) {
    if (auto id = find(s)) return *id;
    add_token(s);
    return static_cast<TokenId>(tokens_.size() - 1);
  }

  void build_rank_index() {
    ranks_.clear();
    for (std::size_t i = 0; i < merges_.size(); ++i) ranks_[pair_key(merges_[i].left, merges_[i].right)].push_back(i);
  }

  // Incremental pair statistics: counts are adjusted only for the words that
  // contain the merged pair.
  class Trainer {
   public:
    Trainer(BpeModel& model, const std::map<std::string, std::uint64_t>& syllable_freq)
        : model_(model), queue_(QueueOrder{&model.tokens_}) {
      for (const auto& [syl, freq] : syllable_freq) {
        Word w{{}, freq};
        for (const auto& u : syllable_units(syl)) w.units.push_back(*model_.find(u));
        words_.push_back(std::move(w));
      }
      for (std::uint32_t wi = 0; wi < words_.size(); ++wi) {
        const auto& units = words_[wi].units;
        for (std::size_t i = 0; i + 1 < units.size(); ++i) {
          const auto key = pair_key(units[i], units[i + 1]);
          counts_[key] += words_[wi].freq;
          occurrences_[key].push_back(wi);
        }
      }
      for (const auto& [key, count] : counts_) queue_.insert({count, key});
    }

    void run(std::size_t target_vocab_size) {
      while (model_.size() < target_vocab_size && !queue_.empty()) {
        const auto top = *queue_.begin();
        if (top.count < 2) break;
        const auto left = static_cast<TokenId>(top.key >> 32);
        const auto right = static_cast<TokenId>(top.key & 0xFFFFFFFFu);
        const TokenId result = model_.intern(model_.tokens_[left] + model_.tokens_[right]);
        model_.merges_.push_back({left, right, result});
        apply(top.key, left, right, result);
      }
    }

   private:
    struct Word {
      std::vector<TokenId> units;
      std::uint64_t freq;
    };
    struct Entry {
      std::uint64_t count;
      std::uint64_t key;
    };
    struct QueueOrder {
      const std::vector<std::string>* tokens;
      bool operator()(const Entry& a, const Entry& b) const {
        if (a.count != b.count) return a.count > b.count;
        const auto& al = (*tokens)[a.key >> 32];
        const auto& bl = (*tokens)[b.key >> 32];
        if (al != bl) return al < bl;
        const auto& ar = (*tokens)[a.key & 0xFFFFFFFFu];
        const auto& br = (*tokens)[b.key & 0xFFFFFFFFu];
        if (ar != br) return ar < br;
        return a.key < b.key;
      }
    };

    void adjust(std::uint64_t key, std::int64_t delta) {
      auto& count = counts_[key];
      if (count > 0) queue_.erase({count, key});
      count = static_cast<std::uint64_t>(static_cast<std::int64_t>(count) + delta);
      if (count > 0) queue_.insert({count, key});
    }

    void apply(std::uint64_t key, TokenId left, TokenId right, TokenId result) {
      auto candidates = std::move(occurrences_[key]);
      occurrences_.erase(key);
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
      for (std::uint32_t wi : candidates) {
        auto& w = words_[wi];
        bool present = false;
        for (std::size_t i = 0; i + 1 < w.units.size() && !present; ++i) {
          present = w.units[i] == left && w.units[i + 1] == right;
        }
        if (!present) continue;
        const auto delta = static_cast<std::int64_t>(w.freq);
        for (std::size_t i = 0; i + 1 < w.units.size(); ++i) adjust(pair_key(w.units[i], w.units[i + 1]), -delta);
        std::vector<TokenId> merged;
        merged.reserve(w.units.size());
        for (std::size_t i = 0; i < w.units.size(); ++i) {
          if (i + 1 < w.units.size() && w.units[i] == left && w.units[i + 1] == right) {
            merged.push_back(result);
            ++i;
          } else {
            merged.push_back(w.units[i]);
          }
        }
        w.units = std::move(merged);
        for (std::size_t i = 0; i + 1 < w.units.size(); ++i) {
          const auto k = pair_key(w.units[i], w.units[i + 1]);
          adjust(k, delta);
          occurrences_[k].push_back(wi);
        }
      }
    }

    BpeModel& model_;
    std::vector<Word> words_;
    std::unordered_map<std::uint64_t, std::uint64_t> counts_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> occurrences_;
    std::set<Entry, QueueOrder> queue_;
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::vector<Merge> merges_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> ranks_;
};

// ---------------------------------------------------------------------------
// Either strategy, loaded from a model file.

class Tokenizer {
 public:
  explicit Tokenizer(SyllableVocab v) : impl_(std::move(v)) {}
  explicit Tokenizer(BpeModel m) : impl_(std::move(m)) {}

  static Tokenizer from_json(const Json& j) {
    const auto kind = j.is_object() ? j.value("kind", std::string{}) : std::string{};
    if (kind == "syllable") return Tokenizer(SyllableVocab::from_json(j));
    if (kind == "bpe") return Tokenizer(BpeModel::from_json(j));
    throw Error(ErrorCategory::InvalidModel, "unknown tokenizer kind '" + kind + "'");
  }

  static Tokenizer load(const std::filesystem::path& path) {
    return from_json(json_util::parse_file(path, ErrorCategory::InvalidModel));
  }

  void save(const std::filesystem::path& path) const { json_util::write_file_atomic(path, to_json().dump(1) + "\n"); }

  Json to_json() const {
    return std::visit([](const auto& t) { return t.to_json(); }, impl_);
  }

  Strategy strategy() const { return std::holds_alternative<SyllableVocab>(impl_) ? Strategy::Syllable : Strategy::Bpe; }
  std::size_t vocab_size() const {
    return std::visit([](const auto& t) { return t.size(); }, impl_);
  }
  TokenSequence encode(std::string_view text) const {
    return std::visit([&](const auto& t) { return t.encode(text); }, impl_);
  }
  std::string decode(std::span<const TokenId> ids) const {
    return std::visit([&](const auto& t) { return t.decode(ids); }, impl_);
  }

 private:
  std::variant<SyllableVocab, BpeModel> impl_;
};

// ---------------------------------------------------------------------------
// Corpus statistics

struct StrategyStats {
  std::string strategy;
  std::size_t utterances = 0;
  std::size_t total_tokens = 0;     // including BOS/EOS/SEP framing
  std::size_t content_tokens = 0;   // non-special ids plus UNK
  std::size_t syllables = 0;
  double mean_tokens_per_utterance = 0;
  double tokens_per_syllable = 0;   // content tokens per syllable
  double oov_rate = 0;              // UNK share of content tokens
  double vocab_coverage = 0;        // share of non-special vocab used

  Json to_json() const {
    return Json{{"strategy", strategy},
                {"utterances", utterances},
                {"total_tokens", total_tokens},
                {"content_tokens", content_tokens},
                {"syllables", syllables},
                {"mean_tokens_per_utterance", mean_tokens_per_utterance},
                {"tokens_per_syllable", tokens_per_syllable},
                {"oov_rate", oov_rate},
                {"vocab_coverage", vocab_coverage}};
  }
};

inline StrategyStats token_stats(std::string name, std::span<const TokenSequence> encoded,
                                 std::span<const std::size_t> syllable_counts, std::size_t vocab_size) {
  if (encoded.empty()) throw Error(ErrorCategory::EmptyCorpus, "no utterances to summarize");
  if (encoded.size() != syllable_counts.size()) {
    throw Error(ErrorCategory::InvalidConfig, "syllable counts must match utterances");
  }
  StrategyStats s;
  s.strategy = std::move(name);
  s.utterances = encoded.size();
  std::size_t unk = 0;
  std::unordered_set<TokenId> used;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    s.total_tokens += encoded[i].ids.size();
    s.syllables += syllable_counts[i];
    for (TokenId id : encoded[i].ids) {
      if (id == kUnk) {
        ++unk;
        ++s.content_tokens;
      } else if (!is_special(id)) {
        ++s.content_tokens;
        used.insert(id);
      }
    }
  }
  s.mean_tokens_per_utterance = static_cast<double>(s.total_tokens) / static_cast<double>(s.utterances);
  s.tokens_per_syllable = s.syllables ? static_cast<double>(s.content_tokens) / static_cast<double>(s.syllables) : 0.0;
  s.oov_rate = s.content_tokens ? static_cast<double>(unk) / static_cast<double>(s.content_tokens) : 0.0;
  const std::size_t regular = vocab_size > kNumSpecials ? vocab_size - kNumSpecials : 0;
  s.vocab_coverage = regular ? static_cast<double>(used.size()) / static_cast<double>(regular) : 0.0;
  return s;
}

// Codepoint-level baseline: BOS, one token per codepoint, EOS.
inline StrategyStats codepoint_baseline_stats(std::span<const std::string> corpus) {
  if (corpus.empty()) throw Error(ErrorCategory::EmptyCorpus, "no utterances to summarize");
  StrategyStats s;
  s.strategy = "codepoint";
  s.utterances = corpus.size();
  std::set<char32_t> distinct;
  for (const auto& text : corpus) {
    const auto cps = utf8::decode(text);
    s.total_tokens += cps.size() + 2;
    s.content_tokens += cps.size();
    s.syllables += script::count_syllables(text);
    distinct.insert(cps.begin(), cps.end());
  }
  s.mean_tokens_per_utterance = static_cast<double>(s.total_tokens) / static_cast<double>(s.utterances);
  s.tokens_per_syllable = s.syllables ? static_cast<double>(s.content_tokens) / static_cast<double>(s.syllables) : 0.0;
  s.vocab_coverage = distinct.empty() ? 0.0 : 1.0;
  return s;
}

// Baseline plus every given tokenizer over the same corpus.
inline std::vector<StrategyStats> corpus_token_report(std::span<const std::string> corpus,
                                                     std::span<const Tokenizer* const> tokenizers) {
  std::vector<StrategyStats> out{codepoint_baseline_stats(corpus)};
  std::vector<std::size_t> syllables;
  for (const auto& t : corpus) syllables.push_back(script::count_syllables(t));
  for (const Tokenizer* tok : tokenizers) {
    std::vector<TokenSequence> seqs;
    for (const auto& t : corpus) seqs.push_back(tok->encode(t));
    out.push_back(token_stats(std::string(strategy_name(tok->strategy())), seqs, syllables, tok->vocab_size()));
  }
  return out;
}

}  // namespace tibtts::tokenizer
