#pragma once

#include <filesystem>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>

#include "fallacyscope/llm_gateway.hpp"
#include "fallacyscope/probe_pipeline.hpp"
#include "fallacyscope/prompt_engine.hpp"

namespace testsupport {

/// httplib server on an ephemeral localhost port, stopped on destruction.
class LocalServer {
 public:
  LocalServer();
  ~LocalServer();
  LocalServer(const LocalServer&) = delete;
  LocalServer& operator=(const LocalServer&) = delete;

  httplib::Server& server() { return server_; }
  /// Starts listening; register handlers first.
  void start();
  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Values a rendered prompt put into its template slots, recovered from the
/// body by matching the template's literal pieces.
std::vector<std::string> slot_values(const fallacyscope::RenderedPrompt& prompt);

/// `text` with every occurrence of `from` replaced by `to`.
std::string replace_marker(std::string_view text, std::string_view from, std::string_view to);

struct ScriptedFallacy {
  std::string part;
  std::string fallacy;  // as the model would write it
  std::string explain_short;
  std::string explain_long;
};

/// Deterministic stand-in for the model: answers each task in the shape its
/// template asks for. Detection reports every scripted part that occurs in
/// the text, "nothing" otherwise.
class ScriptedModel {
 public:
  explicit ScriptedModel(std::vector<ScriptedFallacy> fallacies = {});
  std::string operator()(const fallacyscope::RenderedPrompt& prompt) const;

 private:
  std::vector<ScriptedFallacy> fallacies_;
};

std::shared_ptr<fallacyscope::FakeEndpoint> scripted_endpoint(std::vector<ScriptedFallacy> fallacies = {});

/// Page fetcher over an in-memory url -> (content type, body) map; unknown
/// urls fail like a 404.
class MapFetcher : public fallacyscope::PageFetcher {
 public:
  void add(std::string url, std::string content_type, std::string body);
  fallacyscope::FetchedPage fetch(const std::string& url) override;
  std::size_t fetch_count() const { return fetches_; }

 private:
  std::map<std::string, fallacyscope::FetchedPage> pages_;
  std::atomic<std::size_t> fetches_{0};
};

/// A short opinion piece with four fallacious sentences, one per scripted
/// fallacy in `article_fallacies()`.
const std::string& article_text();
std::vector<ScriptedFallacy> article_fallacies();

/// HTML page whose main text is a few paragraphs about `topic`.
std::string html_page(std::string_view title, std::string_view topic);

}  // namespace testsupport
