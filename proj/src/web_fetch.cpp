#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fallacyscope/error.hpp"
#include "fallacyscope/probe_pipeline.hpp"
#include "fallacyscope/text.hpp"
#include "fallacyscope/url.hpp"

namespace fallacyscope {
namespace {

void configure(httplib::Client& client, std::chrono::seconds timeout) {
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
}

// robots.txt path pattern: prefix match with '*' wildcards and a '$' end anchor.
bool robots_match(std::string_view pattern, std::string_view path) {
  bool anchored = !pattern.empty() && pattern.back() == '$';
  if (anchored) pattern.remove_suffix(1);
  std::size_t p = 0;
  std::size_t s = 0;
  std::size_t star = std::string_view::npos;
  std::size_t star_s = 0;
  while (s < path.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      star_s = s;
    } else if (p < pattern.size() && pattern[p] == path[s]) {
      ++p;
      ++s;
    } else if (p == pattern.size() && !anchored) {
      return true;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      s = ++star_s;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

}  // namespace

HttpPageFetcher::HttpPageFetcher(FetcherOptions options) : options_(std::move(options)) {}

bool HttpPageFetcher::robots_allows(std::string_view robots_txt, std::string_view user_agent,
                                    std::string_view path) {
  auto agent = text::to_lower_ascii(user_agent.substr(0, user_agent.find('/')));
  struct Rule {
    bool allow;
    std::string pattern;
  };
  std::vector<Rule> specific, wildcard;
  bool have_specific = false;
  bool in_specific = false, in_wildcard = false, last_was_agent = false;

  std::size_t pos = 0;
  while (pos <= robots_txt.size()) {
    auto nl = robots_txt.find('\n', pos);
    auto line = robots_txt.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? robots_txt.size() + 1 : nl + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    auto field = text::to_lower_ascii(text::trim(line.substr(0, colon)));
    auto value = std::string(text::trim(line.substr(colon + 1)));
    if (field == "user-agent") {
      if (!last_was_agent) in_specific = in_wildcard = false;
      auto v = text::to_lower_ascii(value);
      if (v == "*") {
        in_wildcard = true;
      } else if (!agent.empty() && agent.find(v) != std::string::npos) {
        in_specific = have_specific = true;
      }
      last_was_agent = true;
      continue;
    }
    last_was_agent = false;
    if (field != "allow" && field != "disallow") continue;
    if (value.empty()) continue;  // "Disallow:" with no path allows everything
    Rule rule{field == "allow", value};
    if (in_specific) specific.push_back(rule);
    if (in_wildcard) wildcard.push_back(rule);
  }
  const auto& rules = have_specific ? specific : wildcard;
  std::size_t best = 0;
  bool allowed = true;
  for (const auto& r : rules) {
    if (!robots_match(r.pattern, path)) continue;
    if (r.pattern.size() > best || (r.pattern.size() == best && r.allow)) {
      best = r.pattern.size();
      allowed = r.allow;
    }
  }
  return allowed;
}

bool HttpPageFetcher::allowed(const std::string& origin, const std::string& path_and_query) {
  std::string robots;
  {
    std::lock_guard lock(robots_mutex_);
    auto it = robots_cache_.find(origin);
    if (it != robots_cache_.end()) return robots_allows(it->second, options_.user_agent, path_and_query);
  }
  httplib::Client client(origin);
  configure(client, options_.timeout);
  auto res = client.Get("/robots.txt", {{"User-Agent", options_.user_agent}});
  if (res && res->status == 200) robots = res->body;
  {
    std::lock_guard lock(robots_mutex_);
    robots_cache_.emplace(origin, robots);
  }
  return robots_allows(robots, options_.user_agent, path_and_query);
}

FetchedPage HttpPageFetcher::fetch(const std::string& raw_url) {
  std::string current = raw_url;
  for (int hop = 0; hop <= options_.max_redirects; ++hop) {
    auto url = parse_url(current);
    if (!url) throw Error(ErrorCode::Fetch, "invalid url: " + current);
    if (options_.respect_robots && !allowed(url->origin(), url->target)) {
      throw Error(ErrorCode::Fetch, "disallowed by robots.txt: " + current);
    }
    httplib::Client client(url->origin());
    configure(client, options_.timeout);
    std::string body;
    bool too_large = false;
    auto res = client.Get(
        url->target, {{"User-Agent", options_.user_agent}},
        [](const httplib::Response&) { return true; },
        [&](const char* data, std::size_t len) {
          if (body.size() + len > options_.max_bytes) {
            too_large = true;
            return false;
          }
          body.append(data, len);
          return true;
        });
    if (too_large) throw Error(ErrorCode::Fetch, "page exceeds the size limit: " + current);
    if (!res) throw Error(ErrorCode::Fetch, "fetch failed (" + httplib::to_string(res.error()) + "): " + current);
    if (res->status >= 300 && res->status < 400 && res->has_header("Location")) {
      auto location = res->get_header_value("Location");
      current = location.starts_with("/") ? url->origin() + location : location;
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::Fetch, "HTTP " + std::to_string(res->status) + " for " + current);
    }
    return {current, res->get_header_value("Content-Type"), std::move(body)};
  }
  throw Error(ErrorCode::Fetch, "too many redirects: " + raw_url);
}

GoogleSearchProvider::GoogleSearchProvider(GoogleSearchConfig config) : config_(std::move(config)) {
  if (const char* k = std::getenv(config_.api_key_env.c_str())) api_key_ = k;
  if (const char* cx = std::getenv(config_.engine_id_env.c_str())) engine_id_ = cx;
}

std::vector<SearchHit> GoogleSearchProvider::search(std::string_view query, std::size_t count) {
  if (api_key_.empty() || engine_id_.empty()) {
    throw Error(ErrorCode::Config, "search API key or engine id is not set (" + config_.api_key_env +
                                       ", " + config_.engine_id_env + ")");
  }
  auto url = parse_url(config_.endpoint);
  if (!url) throw Error(ErrorCode::Config, "invalid search endpoint: " + config_.endpoint);
  httplib::Client client(url->origin());
  configure(client, config_.timeout);
  auto target = url->path() + "?key=" + url_encode(api_key_) + "&cx=" + url_encode(engine_id_) +
                "&num=" + std::to_string(count) + "&q=" + url_encode(query);
  auto res = client.Get(target);
  if (!res) throw Error(ErrorCode::Upstream, "search request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw Error(ErrorCode::Upstream, "search returned HTTP " + std::to_string(res->status));
  std::vector<SearchHit> hits;
  try {
    auto j = nlohmann::json::parse(res->body);
    for (const auto& item : j.value("items", nlohmann::json::array())) {
      hits.push_back({item.value("title", ""), item.value("link", ""), item.value("snippet", "")});
      if (hits.size() == count) break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Upstream, std::string("malformed search response: ") + e.what());
  }
  return hits;
}

}  // namespace fallacyscope
