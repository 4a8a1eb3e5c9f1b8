#pragma once

#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fallacyscope/discussion_store.hpp"
#include "fallacyscope/llm_gateway.hpp"
#include "fallacyscope/probe_pipeline.hpp"

namespace httplib {
class Server;
}

namespace fallacyscope {

inline constexpr std::string_view kDisclosedAccuracy =
    "Fallacies are detected by a language model that identified them correctly in 84% of cases "
    "in our evaluation. A highlight can be wrong, and a fallacy marks a claim as unsupported, "
    "not as false.";

struct ApiRequest {
  std::string method;
  std::string path;
  std::string body;
  std::map<std::string, std::string> query;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// HTTP facade over the analysis modules. `handle` holds all routing so it
/// can be driven without a socket; `mount` binds it to an httplib server.
/// `probe` may be null, in which case /queries/findings answers 502.
class ApiService {
 public:
  ApiService(LlmGateway& llm, DiscussionStore& store, ProbePipeline* probe);

  ApiResponse handle(const ApiRequest& request);
  void mount(httplib::Server& server);

 private:
  using json = nlohmann::json;

  json analyze(const json& body);
  json add_user_highlight(const json& body);
  json own_query(const std::string& highlight_id, const json& body);
  json questions(const std::string& highlight_id, bool refresh);
  json findings(const json& body);
  json post_message(const std::string& highlight_id, const json& body);
  json list_messages(const std::string& highlight_id);
  json vote(const std::string& message_id, const json& body);
  json page(const std::map<std::string, std::string>& query);
  json log_event(const json& body);
  json event_counts(const std::map<std::string, std::string>& query);

  EnrichmentResult enrich(const Highlight& highlight, std::string_view text);
  StoredHighlight require_highlight(const std::string& id) const;

  LlmGateway& llm_;
  DiscussionStore& store_;
  ProbePipeline* probe_;
};

}  // namespace fallacyscope
