#include "fallacyscope/url.hpp"

#include <cctype>
#include <charconv>

#include "fallacyscope/text.hpp"

namespace fallacyscope {
namespace {

int default_port(std::string_view scheme) { return scheme == "https" ? 443 : 80; }

}  // namespace

std::string Url::origin() const {
  std::string out = scheme + "://" + host;
  if (port != default_port(scheme)) out += ":" + std::to_string(port);
  return out;
}

std::string Url::path() const { return target.substr(0, target.find('?')); }

std::string Url::str() const { return origin() + target; }

std::optional<Url> parse_url(std::string_view raw) {
  auto s = text::trim(raw);
  auto sep = s.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  Url url;
  url.scheme = text::to_lower_ascii(s.substr(0, sep));
  if (url.scheme != "http" && url.scheme != "https") return std::nullopt;
  auto rest = s.substr(sep + 3);
  auto frag = rest.find('#');
  if (frag != std::string_view::npos) rest = rest.substr(0, frag);
  auto slash = rest.find_first_of("/?");
  auto authority = rest.substr(0, slash);
  url.target = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (!url.target.empty() && url.target.front() == '?') url.target.insert(0, "/");
  if (authority.find('@') != std::string_view::npos) return std::nullopt;
  auto colon = authority.rfind(':');
  url.port = default_port(url.scheme);
  if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    auto port = authority.substr(colon + 1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc{} || ptr != port.data() + port.size() || value <= 0 || value > 65535) {
      return std::nullopt;
    }
    url.port = value;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) return std::nullopt;
  for (char c : authority) {
    auto uc = static_cast<unsigned char>(c);
    if (!(std::isalnum(uc) || c == '-' || c == '.' || c == '_' || c == '[' || c == ']' || c == ':')) {
      return std::nullopt;
    }
  }
  url.host = text::to_lower_ascii(authority);
  for (char c : url.target) {
    if (static_cast<unsigned char>(c) <= 0x20) return std::nullopt;
  }
  return url;
}

std::string canonical_page_key(std::string_view raw) {
  auto url = parse_url(raw);
  if (!url) return std::string(text::trim(raw));
  return url->str();
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size() * 3);
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

}  // namespace fallacyscope
