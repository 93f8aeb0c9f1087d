#pragma once

// Line-oriented tokenizing shared by the model, options and config readers.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "macdec/error.hpp"

namespace macdec::text {

struct Line {
  std::size_t number;
  std::string_view content;  // comment stripped, trimmed
};

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// Non-empty lines with `#` comments removed.
inline std::vector<Line> lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (!raw.empty()) out.push_back({number, raw});
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError(line, "expected a number, got '" + std::string(tok) + "'");
  return v;
}

inline long to_int(std::string_view tok, std::size_t line) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw ParseError(line, "expected an integer, got '" + std::string(tok) + "'");
  return v;
}

/// Splits "key: rest" at the first colon. Returns false when there is none.
inline bool key_value(std::string_view line, std::string_view& key, std::string_view& value) {
  auto c = line.find(':');
  if (c == std::string_view::npos) return false;
  key = trim(line.substr(0, c));
  value = trim(line.substr(c + 1));
  return true;
}

/// Parses "name[i]" into name and i.
inline bool indexed_key(std::string_view key, std::string_view& name, std::size_t& index, std::size_t line) {
  auto lb = key.find('[');
  if (lb == std::string_view::npos || key.back() != ']') return false;
  name = key.substr(0, lb);
  index = static_cast<std::size_t>(to_int(key.substr(lb + 1, key.size() - lb - 2), line));
  return true;
}

}  // namespace macdec::text
