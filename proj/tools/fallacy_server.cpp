// HTTP backend for the browser extension.
#include <csignal>
#include <memory>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "fallacyscope/api_service.hpp"
#include "fallacyscope/error.hpp"

using namespace fallacyscope;

namespace {
httplib::Server* g_server = nullptr;
void stop(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fallacy analysis backend"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store_path = "fallacyscope.db";
  std::string llm_url, model = "meta-llama/Meta-Llama-3-8B-Instruct", adapter = "chat";
  std::string fake_llm, search = "google", search_fixtures;
  int max_in_flight = kDefaultMaxInFlight;
  long deadline_ms = kDefaultDeadline.count();
  bool ignore_robots = false, verbose = false;

  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "bind port");
  app.add_option("--store", store_path, "SQLite file for pages, highlights, discussions and events");
  auto url_opt = app.add_option("--llm-url", llm_url, "OpenAI-compatible endpoint base URL");
  app.add_option("--model", model, "model name sent to the endpoint");
  app.add_option("--adapter", adapter, "chat or completion")->check(CLI::IsMember({"chat", "completion"}));
  auto fake_opt = app.add_option("--fake-llm", fake_llm, "serve completions from a fixture file instead")
                      ->check(CLI::ExistingFile);
  url_opt->excludes(fake_opt);
  app.add_option("--search", search, "google, fixtures or none")
      ->check(CLI::IsMember({"google", "fixtures", "none"}));
  app.add_option("--search-fixtures", search_fixtures, "search results file for --search fixtures")
      ->check(CLI::ExistingFile);
  app.add_option("--max-in-flight", max_in_flight, "concurrent LLM calls")->check(CLI::PositiveNumber);
  app.add_option("--deadline-ms", deadline_ms, "per-call LLM deadline")->check(CLI::PositiveNumber);
  app.add_flag("--ignore-robots", ignore_robots, "fetch pages even when robots.txt disallows it");
  app.add_flag("-v,--verbose", verbose);
  CLI11_PARSE(app, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    std::shared_ptr<CompletionEndpoint> endpoint;
    if (!fake_llm.empty()) {
      endpoint = FakeEndpoint::from_file(fake_llm);
    } else if (!llm_url.empty()) {
      endpoint = make_http_endpoint(
          {llm_url, model, adapter == "chat" ? AdapterKind::Chat : AdapterKind::Completion});
    } else {
      spdlog::error("either --llm-url or --fake-llm is required");
      return 2;
    }
    GatewayOptions gateway_options;
    gateway_options.max_in_flight = max_in_flight;
    gateway_options.default_deadline = Millis{deadline_ms};
    LlmGateway llm(endpoint, gateway_options);
    DiscussionStore store(store_path);

    std::unique_ptr<SearchProvider> provider;
    if (search == "google") {
      provider = std::make_unique<GoogleSearchProvider>(GoogleSearchConfig{});
    } else if (search == "fixtures") {
      if (search_fixtures.empty()) {
        spdlog::error("--search fixtures needs --search-fixtures");
        return 2;
      }
      provider = FixtureSearchProvider::from_file(search_fixtures);
    }
    FetcherOptions fetcher_options;
    fetcher_options.respect_robots = !ignore_robots;
    HttpPageFetcher fetcher(fetcher_options);
    std::unique_ptr<ProbePipeline> probe;
    if (provider) probe = std::make_unique<ProbePipeline>(*provider, fetcher, llm);

    ApiService service(llm, store, probe.get());
    httplib::Server server;
    service.mount(server);
    g_server = &server;
    std::signal(SIGINT, stop);
    std::signal(SIGTERM, stop);
    spdlog::info("listening on {}:{} (model {})", host, port, llm.model_id());
    if (!server.listen(host, port)) {
      spdlog::error("cannot bind {}:{}", host, port);
      return 1;
    }
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.code()), e.what());
    return 1;
  }
  return 0;
}
