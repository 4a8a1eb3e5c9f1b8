#include "fallacyscope/output_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "fallacyscope/error.hpp"
#include "fallacyscope/prompt_engine.hpp"
#include "fallacyscope/text.hpp"

namespace fallacyscope {
namespace {

using json = nlohmann::json;

constexpr std::size_t kMaxNesting = 8;

constexpr std::array<std::string_view, 4> kDetectionKeys{"part", "fallacy", "explain_short",
                                                         "explain_long"};
constexpr std::array<std::string_view, 6> kListKeys{"critical_questions", "critical_queries",
                                                    "revised_queries",    "extracts",
                                                    "summary",            "search_query"};

[[noreturn]] void unparseable(std::string_view what, std::string_view raw) {
  throw Error(ErrorCode::Unparseable, std::string(what), std::string(raw));
}

bool is_ident(char c) {
  auto uc = static_cast<unsigned char>(c);
  return std::isalnum(uc) || c == '_';
}

bool is_quote(char c) { return c == '"' || c == '\''; }

std::size_t skip_space(std::string_view s, std::size_t i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return i;
}

// Top-level brace-balanced regions. Braces inside strings are counted too;
// completions routinely carry unescaped quotes, which would derail a
// string-aware scan, while braces inside values are rare. An unclosed region
// (truncated output) runs to the end.
std::vector<std::string_view> find_blocks(std::string_view raw) {
  std::vector<std::string_view> blocks;
  std::size_t depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '{') {
      if (depth == 0) start = i;
      ++depth;
    } else if (raw[i] == '}' && depth > 0) {
      if (--depth == 0) blocks.push_back(raw.substr(start, i - start + 1));
    }
  }
  if (depth > 0) blocks.push_back(raw.substr(start));
  return blocks;
}

// Removes commas that directly precede a closing brace or bracket, outside
// string literals.
std::string strip_trailing_commas(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < s.size()) {
        out.push_back(s[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') in_string = true;
    if (c == ',') {
      auto j = skip_space(s, i + 1);
      if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

std::optional<json> parse_strict(std::string_view s) {
  auto j = json::parse(s.begin(), s.end(), nullptr, false);
  if (!j.is_discarded()) return j;
  auto repaired = strip_trailing_commas(s);
  j = json::parse(repaired, nullptr, false);
  if (!j.is_discarded()) return j;
  return std::nullopt;
}

std::string as_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump(-1, ' ', false, json::error_handler_t::replace);
}

void append_utf8(std::string& out, std::uint32_t cp) {
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

std::optional<std::uint32_t> hex4(std::string_view s, std::size_t at) {
  if (at + 4 > s.size()) return std::nullopt;
  std::uint32_t v = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    char c = s[at + k];
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint32_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint32_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint32_t>(c - 'A' + 10);
    else return std::nullopt;
  }
  return v;
}

// JSON-style unescaping; unknown escapes are kept verbatim.
std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 >= s.size()) {
      out.push_back(s[i]);
      continue;
    }
    char e = s[i + 1];
    switch (e) {
      case '"': out.push_back('"'); ++i; break;
      case '\\': out.push_back('\\'); ++i; break;
      case '/': out.push_back('/'); ++i; break;
      case 'n': out.push_back('\n'); ++i; break;
      case 't': out.push_back('\t'); ++i; break;
      case 'r': out.push_back('\r'); ++i; break;
      case 'b': out.push_back('\b'); ++i; break;
      case 'f': out.push_back('\f'); ++i; break;
      case 'u': {
        auto cp = hex4(s, i + 2);
        if (!cp) {
          out.push_back('\\');
          break;
        }
        std::size_t consumed = 5;
        std::uint32_t value = *cp;
        if (value >= 0xD800 && value <= 0xDBFF && i + 7 < s.size() && s[i + 6] == '\\' &&
            s[i + 7] == 'u') {
          if (auto lo = hex4(s, i + 8); lo && *lo >= 0xDC00 && *lo <= 0xDFFF) {
            value = 0x10000 + ((value - 0xD800) << 10) + (*lo - 0xDC00);
            consumed = 11;
          }
        }
        if (value >= 0xD800 && value <= 0xDFFF) value = 0xFFFD;
        append_utf8(out, value);
        i += consumed;
        break;
      }
      default: out.push_back('\\'); break;
    }
  }
  return out;
}

struct KeyHit {
  std::size_t key_pos;    // first byte of the key, opening quote included
  std::size_t value_pos;  // first non-space byte after the colon
};

// Locates `key` followed by a colon in `lowered`. With `quoted`, the key must
// be wrapped in quotes; otherwise a bare identifier is accepted as well.
std::optional<KeyHit> find_key(std::string_view lowered, std::string_view key, std::size_t from,
                               bool quoted) {
  std::size_t pos = from;
  while (pos < lowered.size()) {
    pos = lowered.find(key, pos);
    if (pos == std::string_view::npos) return std::nullopt;
    std::size_t next = pos + 1;
    bool open_quote = pos > 0 && is_quote(lowered[pos - 1]);
    bool bare_ok = !quoted && (pos == 0 || !is_ident(lowered[pos - 1]));
    std::size_t j = pos + key.size();
    bool close_quote = j < lowered.size() && is_quote(lowered[j]);
    if ((open_quote && close_quote) || (bare_ok && !open_quote && (j >= lowered.size() || !is_ident(lowered[j])))) {
      if (close_quote) ++j;
      j = skip_space(lowered, j);
      if (j < lowered.size() && lowered[j] == ':') {
        return KeyHit{open_quote ? pos - 1 : pos, skip_space(lowered, j + 1)};
      }
    }
    pos = next;
  }
  return std::nullopt;
}

std::optional<KeyHit> find_key_any(std::string_view lowered, std::string_view key) {
  if (auto hit = find_key(lowered, key, 0, true)) return hit;
  return find_key(lowered, key, 0, false);
}

// End of the value that starts at `from`: the next quoted sibling key, the
// block's closing brace, or `limit`.
template <std::size_t N>
std::size_t value_end(std::string_view lowered, std::size_t from, std::size_t limit,
                      const std::array<std::string_view, N>& keys) {
  std::size_t end = limit;
  for (auto k : keys) {
    if (auto hit = find_key(lowered, k, from, true); hit && hit->key_pos < end) end = hit->key_pos;
  }
  return end;
}

std::string_view strip_value_tail(std::string_view v) {
  v = text::trim(v);
  while (!v.empty() && (v.back() == ',' || v.back() == '}')) v = text::trim(v.substr(0, v.size() - 1));
  return v;
}

std::string unquote(std::string_view v) {
  v = strip_value_tail(v);
  if (!v.empty() && is_quote(v.front())) v.remove_prefix(1);
  if (!v.empty() && is_quote(v.back())) v.remove_suffix(1);
  return std::string(text::trim(unescape(v)));
}

std::size_t block_limit(std::string_view block) {
  auto close = block.rfind('}');
  return close == std::string_view::npos ? block.size() : close;
}

template <std::size_t N>
std::optional<std::string> lenient_string(std::string_view block, std::string_view lowered,
                                          std::string_view key,
                                          const std::array<std::string_view, N>& keys) {
  auto hit = find_key_any(lowered, key);
  if (!hit) return std::nullopt;
  auto limit = block_limit(lowered);
  if (limit < hit->value_pos) limit = block.size();
  auto end = value_end(lowered, hit->value_pos, limit, keys);
  if (end < hit->value_pos) end = hit->value_pos;
  return unquote(block.substr(hit->value_pos, end - hit->value_pos));
}

// ---------------------------------------------------------------------------
// Detection

struct RawDetection {
  std::optional<std::string> part, fallacy, explain_short, explain_long;
  bool recognized() const { return part.has_value() || fallacy.has_value(); }
};

void collect_strict(const json& j, std::vector<RawDetection>& out, std::size_t depth) {
  if (depth > kMaxNesting) return;
  if (j.is_array()) {
    for (const auto& v : j) collect_strict(v, out, depth + 1);
    return;
  }
  if (!j.is_object()) return;
  if (j.contains("part") || j.contains("fallacy")) {
    RawDetection d;
    if (j.contains("part")) d.part = as_text(j.at("part"));
    if (j.contains("fallacy")) d.fallacy = as_text(j.at("fallacy"));
    if (j.contains("explain_short")) d.explain_short = as_text(j.at("explain_short"));
    if (j.contains("explain_long")) d.explain_long = as_text(j.at("explain_long"));
    out.push_back(std::move(d));
    return;
  }
  for (const auto& [k, v] : j.items()) collect_strict(v, out, depth + 1);
}

void collect_blocks(std::string_view raw, std::vector<RawDetection>& out, std::size_t depth) {
  if (depth > kMaxNesting) return;
  for (auto block : find_blocks(raw)) {
    if (auto j = parse_strict(block)) {
      std::vector<RawDetection> found;
      collect_strict(*j, found, 0);
      if (!found.empty()) {
        out.insert(out.end(), found.begin(), found.end());
        continue;
      }
    }
    auto inner = block.size() >= 2 ? block.substr(1, block.size() - 2) : std::string_view{};
    if (inner.find('{') != std::string_view::npos) {
      auto before = out.size();
      collect_blocks(inner, out, depth + 1);
      if (out.size() > before) continue;
    }
    auto lowered = text::to_lower_ascii(block);
    RawDetection d;
    d.part = lenient_string(block, lowered, "part", kDetectionKeys);
    d.fallacy = lenient_string(block, lowered, "fallacy", kDetectionKeys);
    d.explain_short = lenient_string(block, lowered, "explain_short", kDetectionKeys);
    d.explain_long = lenient_string(block, lowered, "explain_long", kDetectionKeys);
    if (d.recognized()) out.push_back(std::move(d));
  }
}

bool says_nothing(std::string_view raw) {
  auto s = text::to_lower_ascii(text::trim(raw));
  std::string_view v = s;
  auto strip = [](char c) { return is_quote(c) || c == '.' || c == '*' || c == '`' || c == '!'; };
  while (!v.empty() && strip(v.back())) v.remove_suffix(1);
  while (!v.empty() && strip(v.front())) v.remove_prefix(1);
  return text::trim(v) == "nothing";
}

std::string_view strip_wrapping(std::string_view part) {
  static constexpr std::array<std::string_view, 6> kWraps{"\"", "'", "\xE2\x80\x9C", "\xE2\x80\x9D",
                                                          "...", "\xE2\x80\xA6"};
  bool changed = true;
  while (changed) {
    changed = false;
    part = text::trim(part);
    for (auto w : kWraps) {
      if (part.starts_with(w)) {
        part.remove_prefix(w.size());
        changed = true;
      }
      if (part.ends_with(w)) {
        part.remove_suffix(w.size());
        changed = true;
      }
    }
  }
  return part;
}

std::string clean_part(std::string_view part, std::string_view source) {
  auto trimmed = text::trim(part);
  if (source.empty() || contains_normalized(source, trimmed)) return std::string(trimmed);
  auto unwrapped = strip_wrapping(trimmed);
  if (!unwrapped.empty() && contains_normalized(source, unwrapped)) return std::string(unwrapped);
  return std::string(trimmed);
}

// ---------------------------------------------------------------------------
// Lists

std::optional<std::vector<std::string>> strict_list(const json& j, std::string_view key,
                                                    std::size_t depth) {
  if (depth > kMaxNesting) return std::nullopt;
  if (j.is_object()) {
    auto it = j.find(std::string(key));
    if (it != j.end() && it->is_array()) {
      std::vector<std::string> items;
      for (const auto& v : *it) items.push_back(as_text(v));
      return items;
    }
    for (const auto& [k, v] : j.items()) {
      if (auto found = strict_list(v, key, depth + 1)) return found;
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (auto found = strict_list(v, key, depth + 1)) return found;
    }
  }
  return std::nullopt;
}

std::string strip_bullet(std::string_view item) {
  item = text::trim(item);
  if (!item.empty() && (item.front() == '-' || item.front() == '*')) {
    item.remove_prefix(1);
  } else {
    std::size_t d = 0;
    while (d < item.size() && std::isdigit(static_cast<unsigned char>(item[d]))) ++d;
    if (d > 0 && d < item.size() && (item[d] == '.' || item[d] == ')')) item.remove_prefix(d + 1);
  }
  return unquote(item);
}

// Items of a list body (brackets removed). Quoted items are split on
// quote-comma-quote boundaries so that unescaped quotes inside an item
// survive; unquoted bodies split on lines, or on commas when single-line.
std::vector<std::string> split_items(std::string_view body) {
  std::vector<std::string> items;
  auto t = strip_value_tail(body);
  auto first = t.find('"');
  auto last = t.rfind('"');
  if (first != std::string_view::npos && last > first) {
    auto inner = t.substr(first + 1, last - first - 1);
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < inner.size()) {
      if (inner[i] == '"' && (i == 0 || inner[i - 1] != '\\')) {
        auto j = skip_space(inner, i + 1);
        bool comma = j < inner.size() && inner[j] == ',';
        if (comma) j = skip_space(inner, j + 1);
        if (j < inner.size() && inner[j] == '"' && (comma || j > i + 1)) {
          items.push_back(std::string(text::trim(unescape(inner.substr(start, i - start)))));
          start = j + 1;
          i = j + 1;
          continue;
        }
      }
      ++i;
    }
    items.push_back(std::string(text::trim(unescape(inner.substr(start)))));
  } else if (t.find('\n') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= t.size()) {
      auto nl = t.find('\n', start);
      auto line = t.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
      auto l = text::trim(line);
      while (!l.empty() && l.back() == ',') l.remove_suffix(1);
      items.push_back(strip_bullet(l));
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  } else {
    std::size_t start = 0;
    while (start <= t.size()) {
      auto comma = t.find(',', start);
      items.push_back(strip_bullet(
          t.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  std::erase_if(items, [](const std::string& s) { return text::is_blank(s); });
  return items;
}

std::optional<std::vector<std::string>> lenient_list(std::string_view raw, std::string_view lowered,
                                                     std::string_view key) {
  auto hit = find_key_any(lowered, key);
  if (!hit) return std::nullopt;
  std::size_t begin = hit->value_pos;
  std::size_t end = value_end(lowered, begin, raw.size(), kListKeys);
  if (end < begin) end = begin;
  if (begin < raw.size() && raw[begin] == '[') {
    std::size_t depth = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (raw[i] == '[') {
        ++depth;
      } else if (raw[i] == ']' && --depth == 0) {
        end = i;
        break;
      }
    }
    ++begin;
  }
  return split_items(raw.substr(begin, end - begin));
}

std::optional<std::vector<std::string>> find_list(std::string_view raw, std::string_view key) {
  std::optional<std::vector<std::string>> found;
  if (auto j = parse_strict(raw)) found = strict_list(*j, key, 0);
  if (!found) {
    for (auto block : find_blocks(raw)) {
      if (auto j = parse_strict(block)) found = strict_list(*j, key, 0);
      if (found) break;
    }
  }
  if (!found) {
    auto lowered = text::to_lower_ascii(raw);
    found = lenient_list(raw, lowered, key);
  }
  if (found) {
    std::vector<std::string> cleaned;
    for (auto& item : *found) {
      auto t = text::trim(item);
      if (!t.empty()) cleaned.emplace_back(t);
    }
    found = std::move(cleaned);
  }
  return found;
}

bool cap(std::vector<std::string>& items, std::size_t limit) {
  if (items.size() <= limit) return false;
  items.resize(limit);
  return true;
}

std::string pretty(const nlohmann::ordered_json& j) {
  return j.dump(2, ' ', false, json::error_handler_t::replace);
}

}  // namespace

std::vector<DetectedFallacy> parse_detection(std::string_view raw, std::string_view source) {
  if (says_nothing(raw)) return {};
  std::vector<RawDetection> found;
  collect_blocks(raw, found, 0);
  if (found.empty()) unparseable("no fallacy block found in the detection output", raw);

  std::vector<DetectedFallacy> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& d : found) {
    DetectedFallacy entry;
    entry.part = clean_part(d.part.value_or(""), source);
    if (text::is_blank(entry.part)) continue;
    entry.raw_label = std::string(text::trim(d.fallacy.value_or("")));
    auto parsed = parse_label(entry.raw_label);
    entry.label = parsed.label;
    entry.out_of_set = parsed.out_of_set;
    if (entry.label == FallacyLabel::Nothing && !entry.out_of_set) continue;
    entry.explain_short = std::string(text::trim(d.explain_short.value_or("")));
    entry.explain_long = std::string(text::trim(d.explain_long.value_or("")));
    if (entry.label != FallacyLabel::Nothing && entry.explain_short.empty()) {
      entry.explain_short = entry.explain_long.empty() ? std::string(card_for(entry.label).definition)
                                                       : entry.explain_long;
    }
    auto key = std::make_pair(text::collapse_whitespace(entry.part),
                              entry.out_of_set ? text::to_lower_ascii(entry.raw_label)
                                               : std::string(label_key(entry.label)));
    if (!seen.insert(std::move(key)).second) continue;
    out.push_back(std::move(entry));
  }
  return out;
}

EnrichmentResult parse_enrichment(std::string_view raw) {
  auto questions = find_list(raw, "critical_questions");
  auto queries = find_list(raw, "critical_queries");
  if ((!questions || questions->empty()) && (!queries || queries->empty())) {
    unparseable("neither critical_questions nor critical_queries found", raw);
  }
  EnrichmentResult out;
  if (questions) out.critical_questions = std::move(*questions);
  if (queries) out.critical_queries = std::move(*queries);
  out.overflow = cap(out.critical_questions, kTargetQuestions);
  out.overflow = cap(out.critical_queries, kTargetQueries) || out.overflow;
  out.questions_shortfall = out.critical_questions.size() < kTargetQuestions;
  out.queries_shortfall = out.critical_queries.size() < kTargetQueries;
  return out;
}

RevisedQueries parse_revised_queries(std::string_view raw) {
  auto queries = find_list(raw, "revised_queries");
  if (!queries || queries->empty()) unparseable("no revised_queries found", raw);
  RevisedQueries out;
  out.queries = std::move(*queries);
  out.overflow = cap(out.queries, kTargetRevisedQueries);
  out.shortfall = out.queries.size() < kTargetRevisedQueries;
  return out;
}

ExtractSet parse_extracts(std::string_view raw) {
  auto extracts = find_list(raw, "extracts");
  if (!extracts || extracts->empty()) unparseable("no extracts found", raw);
  ExtractSet out;
  out.extracts = std::move(*extracts);
  out.overflow = cap(out.extracts, kMaxExtracts);
  return out;
}

SummaryResult make_summary(std::string summary) {
  SummaryResult out;
  out.word_count = text::count_words(summary);
  out.length_conformant = out.word_count >= kSummaryMinWords && out.word_count <= kSummaryMaxWords;
  out.summary = std::move(summary);
  return out;
}

SummaryResult parse_summary(std::string_view raw) {
  auto strict_summary = [](const json& j) -> std::optional<std::string> {
    if (j.is_object()) {
      auto it = j.find("summary");
      if (it != j.end()) return as_text(*it);
    }
    return std::nullopt;
  };
  std::optional<std::string> summary;
  if (auto j = parse_strict(raw)) summary = strict_summary(*j);
  if (!summary) {
    for (auto block : find_blocks(raw)) {
      if (auto j = parse_strict(block)) summary = strict_summary(*j);
      if (summary) break;
    }
  }
  if (!summary) {
    auto lowered = text::to_lower_ascii(raw);
    if (auto hit = find_key_any(lowered, "summary")) {
      auto limit = block_limit(lowered);
      if (limit < hit->value_pos) limit = raw.size();
      auto end = value_end(lowered, hit->value_pos, limit, kListKeys);
      if (end < hit->value_pos) end = hit->value_pos;
      summary = unquote(raw.substr(hit->value_pos, end - hit->value_pos));
    }
  }
  if (!summary || text::is_blank(*summary)) unparseable("no summary found", raw);
  return make_summary(std::string(text::trim(*summary)));
}

std::string format_detection_response(std::span<const DetectedFallacy> detections) {
  if (detections.empty()) return "nothing";
  std::string out;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& d = detections[i];
    nlohmann::ordered_json j;
    j["part"] = d.part;
    j["fallacy"] = d.raw_label.empty() ? text::to_lower_ascii(english_name(d.label)) : d.raw_label;
    j["explain_short"] = d.explain_short;
    j["explain_long"] = d.explain_long;
    if (i > 0) out += ",\n";
    out += pretty(j);
  }
  return out;
}

std::string format_enrichment_response(const EnrichmentResult& enrichment) {
  nlohmann::ordered_json j;
  j["critical_questions"] = enrichment.critical_questions;
  j["critical_queries"] = enrichment.critical_queries;
  return pretty(j);
}

std::string format_revised_queries_response(std::span<const std::string> queries) {
  nlohmann::ordered_json j;
  j["revised_queries"] = std::vector<std::string>(queries.begin(), queries.end());
  return pretty(j);
}

std::string format_extracts_response(std::span<const std::string> extracts) {
  nlohmann::ordered_json j;
  j["extracts"] = std::vector<std::string>(extracts.begin(), extracts.end());
  return pretty(j);
}

std::string format_summary_response(std::string_view summary) {
  nlohmann::ordered_json j;
  j["summary"] = std::string(summary);
  return pretty(j);
}

}  // namespace fallacyscope
