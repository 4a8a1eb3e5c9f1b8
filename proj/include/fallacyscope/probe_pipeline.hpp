#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fallacyscope/llm_gateway.hpp"
#include "fallacyscope/output_parser.hpp"

namespace fallacyscope {

inline constexpr std::size_t kFindingsSources = 3;

struct SearchHit {
  std::string title;
  std::string url;
  std::string snippet;
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  /// Ranked hits, best first. Throws on provider failure.
  virtual std::vector<SearchHit> search(std::string_view query, std::size_t count) = 0;
};

/// Canned results keyed by exact query; unknown queries return nothing.
class FixtureSearchProvider : public SearchProvider {
 public:
  FixtureSearchProvider() = default;
  /// {"<query>": [{"title": ..., "url": ..., "snippet": ...}, ...], ...}
  static std::unique_ptr<FixtureSearchProvider> from_file(const std::string& path);

  void add(std::string query, std::vector<SearchHit> hits);
  std::vector<SearchHit> search(std::string_view query, std::size_t count) override;

 private:
  std::map<std::string, std::vector<SearchHit>, std::less<>> results_;
};

struct GoogleSearchConfig {
  std::string endpoint = "https://www.googleapis.com/customsearch/v1";
  std::string api_key_env = "FALLACYSCOPE_SEARCH_API_KEY";
  std::string engine_id_env = "FALLACYSCOPE_SEARCH_ENGINE_ID";
  std::chrono::seconds timeout{10};
};

/// Google Programmable Search (Custom Search JSON API).
class GoogleSearchProvider : public SearchProvider {
 public:
  explicit GoogleSearchProvider(GoogleSearchConfig config);
  std::vector<SearchHit> search(std::string_view query, std::size_t count) override;

 private:
  GoogleSearchConfig config_;
  std::string api_key_;
  std::string engine_id_;
};

struct FetchedPage {
  std::string url;
  std::string content_type;
  std::string body;
};

class PageFetcher {
 public:
  virtual ~PageFetcher() = default;
  /// Throws Error{Fetch}.
  virtual FetchedPage fetch(const std::string& url) = 0;
};

struct FetcherOptions {
  std::chrono::seconds timeout{10};
  std::size_t max_bytes = 2 * 1024 * 1024;
  std::string user_agent = "fallacyscope/1.0 (+fallacy analysis; respects robots.txt)";
  bool respect_robots = true;
  int max_redirects = 5;
};

class HttpPageFetcher : public PageFetcher {
 public:
  explicit HttpPageFetcher(FetcherOptions options = {});
  FetchedPage fetch(const std::string& url) override;

  /// Allow/Disallow rules for our agent, parsed from a robots.txt body.
  static bool robots_allows(std::string_view robots_txt, std::string_view user_agent,
                            std::string_view path);

 private:
  bool allowed(const std::string& origin, const std::string& path_and_query);

  FetcherOptions options_;
  std::mutex robots_mutex_;
  std::map<std::string, std::string> robots_cache_;  // origin -> robots.txt body
};

/// Fetches `url` and reduces it to readable main-content text. Non-HTML
/// content is rejected with Error{Fetch}. No truncation happens here.
std::string fetch_main_text(PageFetcher& fetcher, const std::string& url);

struct SourceFindings {
  SearchHit hit;
  ExtractSet extracts;
};

struct SkippedSource {
  std::string url;
  std::string reason;
};

struct WebFindings {
  std::string query;
  std::vector<SourceFindings> sources;  // 1..3, search-rank order
  SummaryResult summary;
  std::vector<std::string> references;  // urls of `sources`, same order
  // Provenance
  std::size_t padded_lists = 0;  // empty extract lists added to reach three
  std::vector<SkippedSource> skipped;
  std::optional<std::string> summary_error;
};

/// Search -> fetch top three pages -> extract per page -> one summary.
class ProbePipeline {
 public:
  ProbePipeline(SearchProvider& search, PageFetcher& fetcher, LlmGateway& llm)
      : search_(search), fetcher_(fetcher), llm_(llm) {}

  /// Throws Error{NoFindings} when no page survives, Error{Upstream} when the
  /// search provider fails, Error{EmptyInput} for a blank query.
  WebFindings run_findings(std::string_view query);

 private:
  SearchProvider& search_;
  PageFetcher& fetcher_;
  LlmGateway& llm_;
};

}  // namespace fallacyscope
