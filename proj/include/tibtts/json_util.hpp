#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tibtts/error.hpp"

namespace tibtts {

using Json = nlohmann::json;

namespace json_util {

// Rejects keys outside `allowed` so typos in config files fail loudly.
inline void require_known_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                               std::string_view where) {
  if (!obj.is_object()) {
    throw Error(ErrorCategory::InvalidConfig, std::string(where) + ": expected an object");
  }
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) {
      throw Error(ErrorCategory::InvalidConfig,
                  std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
T get_or(const Json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->template get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCategory::InvalidConfig, std::string("key '") + key + "': " + e.what());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::UnreadableFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_file(const std::filesystem::path& path, ErrorCategory on_error) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(on_error, path.string() + ": " + e.what());
  }
}

// Writes via a temporary sibling and rename so readers never see a torn file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::UnwritableOutput, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCategory::UnwritableOutput, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCategory::UnwritableOutput, "rename to " + path.string() + ": " + ec.message());
}

}  // namespace json_util
}  // namespace tibtts
