#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fallacyscope {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string target;  // path plus query, always starting with '/'

  /// "scheme://host[:port]", the form HTTP clients take.
  std::string origin() const;
  std::string path() const;  // target without the query string
  std::string str() const;
};

/// Accepts absolute http(s) URLs only.
std::optional<Url> parse_url(std::string_view raw);

/// Lower-cased scheme and host, default port and fragment dropped. Inputs that
/// are not URLs are returned trimmed.
std::string canonical_page_key(std::string_view raw);

std::string url_encode(std::string_view s);

}  // namespace fallacyscope
