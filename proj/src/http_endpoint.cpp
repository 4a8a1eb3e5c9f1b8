#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fallacyscope/error.hpp"
#include "fallacyscope/llm_gateway.hpp"
#include "fallacyscope/url.hpp"

namespace fallacyscope {
namespace {

using Clock = std::chrono::steady_clock;

class HttpCompletionEndpoint : public CompletionEndpoint {
 public:
  explicit HttpCompletionEndpoint(const EndpointConfig& config) : config_(config) {
    auto url = parse_url(config.url);
    if (!url) throw Error(ErrorCode::Config, "invalid LLM endpoint URL: " + config.url);
    origin_ = url->origin();
    prefix_ = url->path();
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    if (const char* key = std::getenv(config.api_key_env.c_str()); key != nullptr && *key != '\0') {
      api_key_ = key;
    }
  }

  std::string model_id() const override { return config_.model; }

  std::string send(const RenderedPrompt& prompt, Millis timeout) override {
    nlohmann::json request{
        {"model", config_.model},
        {"temperature", prompt.params.temperature},
        {"max_tokens", prompt.params.max_new_tokens},
    };
    std::string path = prefix_;
    if (config_.adapter == AdapterKind::Chat) {
      auto messages = prompt.messages();
      request["messages"] = nlohmann::json::array({
          {{"role", "system"}, {"content", messages.system}},
          {{"role", "user"}, {"content", messages.user}},
      });
      path += "/v1/chat/completions";
    } else {
      request["prompt"] = prompt.body;
      path += "/v1/completions";
    }

    httplib::Client client(origin_);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto start = Clock::now();
    auto res = client.Post(path, headers,
                           request.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                           "application/json");
    if (!res) {
      auto err = res.error();
      bool timed_out = err == httplib::Error::ConnectionTimeout ||
                       ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                        Clock::now() - start >= timeout * 9 / 10);
      if (timed_out) throw TransportError(TransportFailure::Timeout, httplib::to_string(err));
      throw TransportError(TransportFailure::Transient, httplib::to_string(err));
    }
    const int status = res->status;
    if (status == 401 || status == 403) {
      throw TransportError(TransportFailure::Auth, "HTTP " + std::to_string(status));
    }
    if (status == 429 || status >= 500) {
      throw TransportError(TransportFailure::Transient, "HTTP " + std::to_string(status));
    }
    if (status != 200) {
      throw TransportError(TransportFailure::Fatal, "HTTP " + std::to_string(status));
    }
    try {
      auto body = nlohmann::json::parse(res->body);
      const auto& choice = body.at("choices").at(0);
      if (config_.adapter == AdapterKind::Chat) {
        return choice.at("message").at("content").get<std::string>();
      }
      return choice.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(TransportFailure::Fatal,
                           std::string("malformed completion payload: ") + e.what());
    }
  }

 private:
  EndpointConfig config_;
  std::string origin_;
  std::string prefix_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<CompletionEndpoint> make_http_endpoint(const EndpointConfig& config) {
  return std::make_unique<HttpCompletionEndpoint>(config);
}

}  // namespace fallacyscope
