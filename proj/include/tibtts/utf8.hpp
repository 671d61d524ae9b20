#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "tibtts/error.hpp"

namespace tibtts::utf8 {

// Decodes one codepoint starting at `pos`. Returns the codepoint and advances
// `pos`. Throws InvalidUtf8 (position = offending byte offset) on overlong
// forms, surrogates, truncated sequences and values above U+10FFFF.
inline char32_t decode_one(std::string_view s, std::size_t& pos) {
  const auto at = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const std::size_t start = pos;
  const unsigned char b0 = at(pos);
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if (b0 < 0x80) {
    ++pos;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2; cp = b0 & 0x1F; min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3; cp = b0 & 0x0F; min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4; cp = b0 & 0x07; min = 0x10000;
  } else {
    throw Error(ErrorCategory::InvalidUtf8, "invalid lead byte", start);
  }
  if (start + len > s.size()) {
    throw Error(ErrorCategory::InvalidUtf8, "truncated sequence", start);
  }
  for (std::size_t i = 1; i < len; ++i) {
    const unsigned char b = at(start + i);
    if ((b & 0xC0) != 0x80) {
      throw Error(ErrorCategory::InvalidUtf8, "invalid continuation byte", start);
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min) throw Error(ErrorCategory::InvalidUtf8, "overlong encoding", start);
  if (cp >= 0xD800 && cp <= 0xDFFF) throw Error(ErrorCategory::InvalidUtf8, "surrogate codepoint", start);
  if (cp > 0x10FFFF) throw Error(ErrorCategory::InvalidUtf8, "codepoint above U+10FFFF", start);
  pos = start + len;
  return cp;
}

inline std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) out.push_back(decode_one(s, pos));
  return out;
}

// Throws InvalidUtf8 with the byte offset of the first offender.
inline void validate(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) decode_one(s, pos);
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size() * 3);
  for (char32_t cp : cps) append(out, cp);
  return out;
}

inline std::string encode(char32_t cp) {
  std::string out;
  append(out, cp);
  return out;
}

}  // namespace tibtts::utf8
