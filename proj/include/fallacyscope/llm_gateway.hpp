#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fallacyscope/prompt_engine.hpp"

namespace fallacyscope {

using Millis = std::chrono::milliseconds;

inline constexpr Millis kDefaultDeadline{60'000};
inline constexpr int kDefaultMaxAttempts = 3;
inline constexpr int kDefaultMaxInFlight = 4;

struct CompletionRequest {
  RenderedPrompt prompt;
  Millis deadline = kDefaultDeadline;
};

struct CompletionResult {
  std::string raw_text;
  Millis latency{0};
  int attempts = 1;
};

enum class TransportFailure {
  Transient,  // connection refused/reset, 5xx, 429: retried
  Timeout,    // no answer within the remaining deadline
  Auth,       // 401/403
  Fatal,      // anything else; never retried
};

class TransportError : public std::runtime_error {
 public:
  TransportError(TransportFailure kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  TransportFailure kind() const noexcept { return kind_; }

 private:
  TransportFailure kind_;
};

/// One transport call to a completion service. Implementations throw
/// TransportError; any returned string is a well-formed response.
class CompletionEndpoint {
 public:
  virtual ~CompletionEndpoint() = default;
  virtual std::string send(const RenderedPrompt& prompt, Millis timeout) = 0;
  virtual std::string model_id() const = 0;
};

enum class AdapterKind { Chat, Completion };

struct EndpointConfig {
  std::string url;  // base URL, e.g. http://localhost:8000
  std::string model;
  AdapterKind adapter = AdapterKind::Chat;
  std::string api_key_env = "FALLACYSCOPE_LLM_API_KEY";
};

/// OpenAI-compatible HTTP adapters: /v1/chat/completions for Chat (system +
/// user messages), /v1/completions for Completion (the flat body).
std::unique_ptr<CompletionEndpoint> make_http_endpoint(const EndpointConfig& config);

/// Offline endpoint answering from fixtures keyed by the SHA-256 of the
/// prompt body, with substring rules as a fallback. Records every call.
class FakeEndpoint : public CompletionEndpoint {
 public:
  struct Call {
    PromptTask task;
    std::string body;
    GenerationParams params;
  };

  FakeEndpoint() = default;

  /// {"model": "...", "responses": [{"prompt_sha256"|"contains": "...", "response": "..."}]}
  static std::unique_ptr<FakeEndpoint> from_json(const nlohmann::json& fixtures);
  static std::unique_ptr<FakeEndpoint> from_file(const std::string& path);

  void add(std::string_view prompt_body, std::string response);
  void add_hash(std::string sha256, std::string response);
  void add_rule(std::string needle, std::string response);
  /// Computed answer, consulted after hashes and rules.
  void set_fallback(std::function<std::string(const RenderedPrompt&)> fallback);

  /// The next `count` calls fail with `kind` before any fixture lookup.
  void inject_failures(int count, TransportFailure kind);
  void set_delay(Millis delay);

  std::string send(const RenderedPrompt& prompt, Millis timeout) override;
  std::string model_id() const override { return model_; }
  void set_model_id(std::string model) { model_ = std::move(model); }

  std::vector<Call> calls() const;
  std::size_t call_count() const;

 private:
  mutable std::mutex mutex_;
  std::string model_ = "fake";
  std::map<std::string, std::string> by_hash_;
  std::vector<std::pair<std::string, std::string>> rules_;
  std::function<std::string(const RenderedPrompt&)> fallback_;
  int pending_failures_ = 0;
  TransportFailure failure_kind_ = TransportFailure::Transient;
  Millis delay_{0};
  std::vector<Call> calls_;
};

struct GatewayOptions {
  int max_attempts = kDefaultMaxAttempts;
  Millis initial_backoff{200};
  double backoff_factor = 2.0;
  Millis default_deadline = kDefaultDeadline;
  int max_in_flight = kDefaultMaxInFlight;
};

/// Submits rendered prompts with their generation parameters. Retries
/// transient transport failures with exponential backoff inside the request
/// deadline and bounds the number of concurrent endpoint calls.
class LlmGateway {
 public:
  explicit LlmGateway(std::shared_ptr<CompletionEndpoint> endpoint, GatewayOptions options = {});

  /// Throws Error{Deadline}, Error{Unavailable} or Error{Config}.
  CompletionResult complete(const CompletionRequest& request);
  CompletionResult complete(const RenderedPrompt& prompt);

  std::string model_id() const { return endpoint_->model_id(); }
  const GatewayOptions& options() const { return options_; }
  int max_in_flight_observed() const;

 private:
  class Slot;

  std::shared_ptr<CompletionEndpoint> endpoint_;
  GatewayOptions options_;
  mutable std::mutex mutex_;
  std::condition_variable slot_freed_;
  int in_flight_ = 0;
  int peak_in_flight_ = 0;
};

}  // namespace fallacyscope
