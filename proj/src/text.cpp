#include "fallacyscope/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>

namespace fallacyscope::text {
namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Length in bytes of the whitespace sequence starting at s[i], or 0.
std::size_t space_at(std::string_view s, std::size_t i) {
  auto c = static_cast<unsigned char>(s[i]);
  if (is_ascii_space(c)) return 1;
  if (c == 0xC2 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0xA0) return 2;
  return 0;
}

}  // namespace

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size()) {
    auto n = space_at(s, b);
    if (n == 0) break;
    b += n;
  }
  std::size_t e = s.size();
  while (e > b) {
    auto c = static_cast<unsigned char>(s[e - 1]);
    if (is_ascii_space(c)) {
      --e;
    } else if (c == 0xA0 && e >= b + 2 && static_cast<unsigned char>(s[e - 2]) == 0xC2) {
      e -= 2;
    } else {
      break;
    }
  }
  return s.substr(b, e - b);
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

NormalizedText normalize_whitespace(std::string_view s) {
  NormalizedText out;
  out.text.reserve(s.size());
  out.starts.reserve(s.size());
  out.ends.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t run = i;
    while (run < s.size()) {
      auto n = space_at(s, run);
      if (n == 0) break;
      run += n;
    }
    if (run > i) {
      if (!out.text.empty() && run < s.size()) {
        out.text.push_back(' ');
        out.starts.push_back(i);
        out.ends.push_back(run);
      }
      i = run;
      continue;
    }
    out.text.push_back(s[i]);
    out.starts.push_back(i);
    out.ends.push_back(i + 1);
    ++i;
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) { return normalize_whitespace(s).text; }

std::size_t count_words(std::string_view s) {
  std::size_t words = 0;
  bool in_word = false;
  std::size_t i = 0;
  while (i < s.size()) {
    auto n = space_at(s, i);
    if (n > 0) {
      in_word = false;
      i += n;
      continue;
    }
    if (!in_word) ++words;
    in_word = true;
    ++i;
  }
  return words;
}

std::string_view truncate_words(std::string_view s, std::size_t max_words) {
  std::size_t words = 0;
  bool in_word = false;
  std::size_t i = 0;
  while (i < s.size()) {
    auto n = space_at(s, i);
    if (n > 0) {
      if (in_word && words == max_words) return s.substr(0, i);
      in_word = false;
      i += n;
      continue;
    }
    if (!in_word) {
      if (words == max_words) return s.substr(0, i);
      ++words;
    }
    in_word = true;
    ++i;
  }
  return s;
}

std::size_t utf16_offset(std::string_view s, std::size_t byte_offset) {
  byte_offset = std::min(byte_offset, s.size());
  std::size_t units = 0;
  for (std::size_t i = 0; i < byte_offset; ++i) {
    auto c = static_cast<unsigned char>(s[i]);
    if ((c & 0xC0) == 0x80) continue;  // continuation byte
    units += (c >= 0xF0) ? 2 : 1;
  }
  return units;
}

std::string sanitize_utf8(std::string_view s) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t min = 0;
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      min = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      min = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      min = 0x10000;
    }
    bool ok = len > 0 && i + len <= s.size();
    std::uint32_t cp = ok ? (c & (0xFF >> (len + 1))) : 0;
    for (std::size_t k = 1; ok && k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (ok && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (ok) {
      out.append(s.substr(i, len));
      i += len;
    } else {
      out.append(kReplacement);
      ++i;
    }
  }
  return out;
}

}  // namespace fallacyscope::text
