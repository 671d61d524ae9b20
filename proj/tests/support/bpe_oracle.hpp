#pragma once

// Reference BPE trainer: recounts every pair from scratch on each iteration.
// Slow on purpose; shares no code with the production trainer. Syllables are
// split on tsheg, shad and ASCII space, which covers the generated corpora.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<std::string> codepoint_strings(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    const std::size_t len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

inline std::vector<std::string> split_syllables(const std::string& text) {
  static const std::set<std::string> kBreaks = {"་", "།", "༎", " "};
  std::vector<std::string> out;
  std::string cur;
  for (const auto& cp : codepoint_strings(text)) {
    if (kBreaks.count(cp)) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += cp;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

using MergeList = std::vector<std::pair<std::string, std::string>>;

// Same contract as the production trainer: units are a syllable's codepoints
// plus a closing tsheg, and break codepoints count toward the base alphabet;
// most frequent pair wins, ties go to the smallest (left, right); stop at the
// target size or when no pair occurs twice.
inline MergeList train_bpe(const std::vector<std::string>& corpus, std::size_t target_vocab_size) {
  std::vector<std::vector<std::string>> words;
  std::set<std::string> vocab;
  for (const auto& text : corpus) {
    for (const auto& cp : codepoint_strings(text)) {
      if (cp == "།" || cp == "༎" || cp == " ") vocab.insert(cp);
    }
    for (const auto& syl : split_syllables(text)) {
      auto units = codepoint_strings(syl);
      units.push_back("་");
      vocab.insert(units.begin(), units.end());
      words.push_back(std::move(units));
    }
  }
  const std::size_t specials = 5;
  MergeList merges;
  while (vocab.size() + specials < target_vocab_size) {
    std::map<std::pair<std::string, std::string>, long> counts;
    for (const auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.size(); ++i) ++counts[{w[i], w[i + 1]}];
    }
    long best_count = 0;
    std::pair<std::string, std::string> best;
    for (const auto& [pair, count] : counts) {  // map order = lexicographic
      if (count > best_count) {
        best_count = count;
        best = pair;
      }
    }
    if (best_count < 2) break;
    merges.push_back(best);
    const std::string joined = best.first + best.second;
    vocab.insert(joined);
    for (auto& w : words) {
      std::vector<std::string> next;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (i + 1 < w.size() && w[i] == best.first && w[i + 1] == best.second) {
          next.push_back(joined);
          ++i;
        } else {
          next.push_back(w[i]);
        }
      }
      w = std::move(next);
    }
  }
  return merges;
}

}  // namespace oracle
