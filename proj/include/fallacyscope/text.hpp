#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fallacyscope::text {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool is_blank(std::string_view s);

/// Whitespace-collapsed view of a string. Normalized byte i was produced by
/// the original bytes [starts[i], ends[i]); a collapsed run maps to the whole
/// run.
struct NormalizedText {
  std::string text;
  std::vector<std::size_t> starts;
  std::vector<std::size_t> ends;
};

/// Collapses every run of whitespace (ASCII plus U+00A0) into one space and
/// trims both ends.
NormalizedText normalize_whitespace(std::string_view s);
std::string collapse_whitespace(std::string_view s);

std::size_t count_words(std::string_view s);

/// Longest prefix of `s` holding at most `max_words` whitespace-delimited
/// words. Never splits a word; trailing whitespace after the last kept word
/// is dropped only when truncation happens.
std::string_view truncate_words(std::string_view s, std::size_t max_words);

/// Number of UTF-16 code units in the UTF-8 prefix s[0, byte_offset).
std::size_t utf16_offset(std::string_view s, std::size_t byte_offset);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view s);

}  // namespace fallacyscope::text
