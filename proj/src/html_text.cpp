#include "fallacyscope/html_text.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include "fallacyscope/text.hpp"

namespace fallacyscope {
namespace {

struct Tag {
  std::string name;  // lower-case
  bool closing = false;
  bool self_closing = false;
  std::string attrs;  // raw attribute text, lower-cased
};

constexpr std::array<std::string_view, 9> kRawText{"script", "style",    "noscript", "template", "svg",
                                                   "iframe", "textarea", "title",    "head"};
constexpr std::array<std::string_view, 8> kChrome{"nav",    "header", "footer", "aside",
                                                  "form",   "button", "select", "menu"};
constexpr std::array<std::string_view, 13> kParagraph{"p",  "h1", "h2", "h3",         "h4",
                                                      "h5", "h6", "li", "blockquote", "pre",
                                                      "td", "dd", "figcaption"};
constexpr std::array<std::string_view, 10> kBlock{"div",   "section", "article", "main", "br",
                                                  "tr",    "ul",      "ol",      "table", "body"};

template <std::size_t N>
bool one_of(const std::array<std::string_view, N>& set, std::string_view name) {
  for (auto s : set) {
    if (s == name) return true;
  }
  return false;
}

bool chrome_role(std::string_view attrs) {
  return attrs.find("role=\"navigation\"") != std::string_view::npos ||
         attrs.find("role=\"banner\"") != std::string_view::npos ||
         attrs.find("role=\"contentinfo\"") != std::string_view::npos ||
         attrs.find("aria-hidden=\"true\"") != std::string_view::npos;
}

bool main_role(const Tag& tag) {
  return tag.name == "article" || tag.name == "main" ||
         tag.attrs.find("role=\"main\"") != std::string::npos;
}

// Parses the tag starting at html[i] == '<'. Returns the index past '>'.
std::size_t read_tag(std::string_view html, std::size_t i, Tag& tag) {
  std::size_t j = i + 1;
  if (j < html.size() && html[j] == '/') {
    tag.closing = true;
    ++j;
  }
  std::size_t name_start = j;
  while (j < html.size() && (std::isalnum(static_cast<unsigned char>(html[j])) || html[j] == '-')) ++j;
  tag.name = text::to_lower_ascii(html.substr(name_start, j - name_start));
  std::size_t attr_start = j;
  char quote = 0;
  while (j < html.size()) {
    char c = html[j];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      break;
    }
    ++j;
  }
  tag.attrs = text::to_lower_ascii(html.substr(attr_start, j - attr_start));
  auto trimmed = text::trim(tag.attrs);
  tag.self_closing = !trimmed.empty() && trimmed.back() == '/';
  return j < html.size() ? j + 1 : html.size();
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size() && match; ++k) {
      match = std::tolower(static_cast<unsigned char>(hay[i + k])) == needle[k];
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

bool has_main_region(std::string_view html) {
  return find_ci(html, "<article", 0) != std::string_view::npos ||
         find_ci(html, "<main", 0) != std::string_view::npos ||
         find_ci(html, "role=\"main\"", 0) != std::string_view::npos;
}

struct Collector {
  std::vector<std::string> paragraphs;  // from paragraph-level elements
  std::vector<std::string> loose;       // any other text block
  std::string buffer;
  bool buffer_is_paragraph = false;

  void flush() {
    auto t = text::collapse_whitespace(decode_entities(buffer));
    if (!t.empty()) (buffer_is_paragraph ? paragraphs : loose).push_back(std::move(t));
    buffer.clear();
    buffer_is_paragraph = false;
  }
};

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
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

}  // namespace

std::string decode_entities(std::string_view s) {
  struct Named {
    std::string_view name;
    std::string_view value;
  };
  static constexpr std::array<Named, 14> kNamed{{{"amp", "&"},
                                                 {"lt", "<"},
                                                 {"gt", ">"},
                                                 {"quot", "\""},
                                                 {"apos", "'"},
                                                 {"nbsp", " "},
                                                 {"mdash", "\xE2\x80\x94"},
                                                 {"ndash", "\xE2\x80\x93"},
                                                 {"hellip", "\xE2\x80\xA6"},
                                                 {"rsquo", "\xE2\x80\x99"},
                                                 {"lsquo", "\xE2\x80\x98"},
                                                 {"rdquo", "\xE2\x80\x9D"},
                                                 {"ldquo", "\xE2\x80\x9C"},
                                                 {"copy", "\xC2\xA9"}}};
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    auto entity = s.substr(i + 1, semi - i - 1);
    bool done = false;
    if (!entity.empty() && entity[0] == '#') {
      std::uint32_t cp = 0;
      auto digits = entity.substr(1);
      int base = 10;
      if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
        digits.remove_prefix(1);
        base = 16;
      }
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, base);
      if (ec == std::errc{} && ptr == digits.data() + digits.size() && !digits.empty()) {
        append_utf8(out, cp);
        done = true;
      }
    } else {
      for (const auto& n : kNamed) {
        if (n.name == entity) {
          out.append(n.value);
          done = true;
          break;
        }
      }
    }
    if (done) {
      i = semi;
    } else {
      out.push_back('&');
    }
  }
  return out;
}

std::string extract_main_text(std::string_view html) {
  const bool restrict_to_main = has_main_region(html);
  Collector c;
  int main_depth = 0;
  int paragraph_depth = 0;
  struct OpenChrome {
    std::string name;
    int nested;
  };
  std::vector<OpenChrome> open_chrome;

  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      auto next = html.find('<', i);
      if (next == std::string_view::npos) next = html.size();
      if (open_chrome.empty() && (!restrict_to_main || main_depth > 0)) {
        c.buffer.append(html.substr(i, next - i));
        if (paragraph_depth > 0) c.buffer_is_paragraph = true;
      }
      i = next;
      continue;
    }
    if (html.substr(i, 4) == "<!--") {
      auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
      auto end = html.find('>', i);
      i = end == std::string_view::npos ? html.size() : end + 1;
      continue;
    }
    if (i + 1 < html.size() && !std::isalpha(static_cast<unsigned char>(html[i + 1])) &&
        html[i + 1] != '/') {
      c.buffer.push_back('<');
      ++i;
      continue;
    }
    Tag tag;
    i = read_tag(html, i, tag);
    if (tag.name.empty()) continue;

    if (!tag.closing && one_of(kRawText, tag.name)) {
      if (!tag.self_closing) {
        auto end = find_ci(html, "</" + tag.name, i);
        if (end == std::string_view::npos) {
          i = html.size();
        } else {
          auto close = html.find('>', end);
          i = close == std::string_view::npos ? html.size() : close + 1;
        }
      }
      continue;
    }

    if (!open_chrome.empty() && open_chrome.back().name == tag.name && !tag.self_closing) {
      auto& top = open_chrome.back();
      if (!tag.closing) {
        ++top.nested;
      } else if (top.nested > 0) {
        --top.nested;
      } else {
        c.flush();
        open_chrome.pop_back();
      }
      continue;
    }
    const bool is_chrome = one_of(kChrome, tag.name) || chrome_role(tag.attrs);
    if (!tag.closing && is_chrome && !tag.self_closing) {
      c.flush();
      open_chrome.push_back({tag.name, 0});
      continue;
    }
    if (!open_chrome.empty()) continue;

    if (main_role(tag) && !tag.self_closing) {
      c.flush();
      main_depth += tag.closing ? (main_depth > 0 ? -1 : 0) : 1;
      continue;
    }
    if (one_of(kParagraph, tag.name)) {
      c.flush();
      if (!tag.self_closing) {
        paragraph_depth += tag.closing ? (paragraph_depth > 0 ? -1 : 0) : 1;
      }
      continue;
    }
    if (one_of(kBlock, tag.name)) {
      c.flush();
      continue;
    }
    // Inline element: keep words apart.
    if (tag.name == "img" || tag.name == "input") c.buffer.push_back(' ');
  }
  c.flush();

  const auto& chosen = c.paragraphs.empty() ? c.loose : c.paragraphs;
  std::string out;
  for (const auto& p : chosen) {
    if (!out.empty()) out += "\n\n";
    out += p;
  }
  return out;
}

}  // namespace fallacyscope
