#include "fallacyscope/llm_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "fallacyscope/error.hpp"
#include "fallacyscope/hashing.hpp"

namespace fallacyscope {

using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// FakeEndpoint

std::unique_ptr<FakeEndpoint> FakeEndpoint::from_json(const nlohmann::json& fixtures) {
  auto fake = std::make_unique<FakeEndpoint>();
  if (fixtures.contains("model")) fake->set_model_id(fixtures.at("model").get<std::string>());
  for (const auto& entry : fixtures.value("responses", nlohmann::json::array())) {
    auto response = entry.at("response").get<std::string>();
    if (entry.contains("prompt_sha256")) {
      fake->add_hash(entry.at("prompt_sha256").get<std::string>(), std::move(response));
    } else if (entry.contains("contains")) {
      fake->add_rule(entry.at("contains").get<std::string>(), std::move(response));
    } else {
      throw Error(ErrorCode::Config, "fixture entry needs prompt_sha256 or contains");
    }
  }
  return fake;
}

std::unique_ptr<FakeEndpoint> FakeEndpoint::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open LLM fixture file " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "bad LLM fixture file " + path + ": " + e.what());
  }
}

void FakeEndpoint::add(std::string_view prompt_body, std::string response) {
  add_hash(sha256_hex(prompt_body), std::move(response));
}

void FakeEndpoint::add_hash(std::string sha256, std::string response) {
  std::lock_guard lock(mutex_);
  by_hash_[std::move(sha256)] = std::move(response);
}

void FakeEndpoint::add_rule(std::string needle, std::string response) {
  std::lock_guard lock(mutex_);
  rules_.emplace_back(std::move(needle), std::move(response));
}

void FakeEndpoint::set_fallback(std::function<std::string(const RenderedPrompt&)> fallback) {
  std::lock_guard lock(mutex_);
  fallback_ = std::move(fallback);
}

void FakeEndpoint::inject_failures(int count, TransportFailure kind) {
  std::lock_guard lock(mutex_);
  pending_failures_ = count;
  failure_kind_ = kind;
}

void FakeEndpoint::set_delay(Millis delay) {
  std::lock_guard lock(mutex_);
  delay_ = delay;
}

std::string FakeEndpoint::send(const RenderedPrompt& prompt, Millis timeout) {
  Millis delay{0};
  std::function<std::string(const RenderedPrompt&)> fallback;
  std::optional<std::string> answer;
  {
    std::lock_guard lock(mutex_);
    calls_.push_back({prompt.task, prompt.body, prompt.params});
    if (pending_failures_ > 0) {
      --pending_failures_;
      throw TransportError(failure_kind_, "injected failure");
    }
    delay = delay_;
    auto it = by_hash_.find(sha256_hex(prompt.body));
    if (it != by_hash_.end()) {
      answer = it->second;
    } else {
      for (const auto& [needle, response] : rules_) {
        if (prompt.body.find(needle) != std::string::npos) {
          answer = response;
          break;
        }
      }
    }
    fallback = fallback_;
  }
  if (delay > Millis{0}) {
    if (delay > timeout) {
      std::this_thread::sleep_for(timeout);
      throw TransportError(TransportFailure::Timeout, "fake endpoint exceeded the timeout");
    }
    std::this_thread::sleep_for(delay);
  }
  if (answer) return *answer;
  if (fallback) return fallback(prompt);
  throw TransportError(TransportFailure::Fatal,
                       "no fixture for prompt " + sha256_hex(prompt.body) + " (" +
                           std::string(to_string(prompt.task)) + ")");
}

std::vector<FakeEndpoint::Call> FakeEndpoint::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::size_t FakeEndpoint::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_.size();
}

// ---------------------------------------------------------------------------
// LlmGateway

class LlmGateway::Slot {
 public:
  Slot(LlmGateway& gw, Clock::time_point deadline) : gw_(gw) {
    std::unique_lock lock(gw_.mutex_);
    if (!gw_.slot_freed_.wait_until(lock, deadline, [&] {
          return gw_.in_flight_ < std::max(1, gw_.options_.max_in_flight);
        })) {
      throw Error(ErrorCode::Deadline, "deadline passed while waiting for an endpoint slot");
    }
    ++gw_.in_flight_;
    gw_.peak_in_flight_ = std::max(gw_.peak_in_flight_, gw_.in_flight_);
  }
  ~Slot() {
    {
      std::lock_guard lock(gw_.mutex_);
      --gw_.in_flight_;
    }
    gw_.slot_freed_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  LlmGateway& gw_;
};

LlmGateway::LlmGateway(std::shared_ptr<CompletionEndpoint> endpoint, GatewayOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
  if (!endpoint_) throw Error(ErrorCode::Config, "no completion endpoint configured");
  if (options_.max_attempts < 1) options_.max_attempts = 1;
}

int LlmGateway::max_in_flight_observed() const {
  std::lock_guard lock(mutex_);
  return peak_in_flight_;
}

CompletionResult LlmGateway::complete(const RenderedPrompt& prompt) {
  return complete(CompletionRequest{prompt, options_.default_deadline});
}

CompletionResult LlmGateway::complete(const CompletionRequest& request) {
  if (request.deadline <= Millis{0}) {
    throw Error(ErrorCode::InvalidArgument, "completion deadline must be positive");
  }
  const auto start = Clock::now();
  const auto deadline = start + request.deadline;
  auto elapsed = [&] { return std::chrono::duration_cast<Millis>(Clock::now() - start); };

  for (int attempt = 1;; ++attempt) {
    auto remaining = std::chrono::duration_cast<Millis>(deadline - Clock::now());
    if (remaining <= Millis{0}) {
      throw Error(ErrorCode::Deadline, "completion deadline exceeded");
    }
    try {
      Slot slot(*this, deadline);
      remaining = std::chrono::duration_cast<Millis>(deadline - Clock::now());
      if (remaining <= Millis{0}) throw Error(ErrorCode::Deadline, "completion deadline exceeded");
      auto text = endpoint_->send(request.prompt, remaining);
      return {std::move(text), elapsed(), attempt};
    } catch (const TransportError& e) {
      switch (e.kind()) {
        case TransportFailure::Timeout:
          throw Error(ErrorCode::Deadline, std::string("completion timed out: ") + e.what());
        case TransportFailure::Auth:
          throw Error(ErrorCode::Config, std::string("endpoint rejected credentials: ") + e.what());
        case TransportFailure::Fatal:
          throw Error(ErrorCode::Unavailable, std::string("endpoint failed: ") + e.what());
        case TransportFailure::Transient:
          break;
      }
      if (attempt >= options_.max_attempts) {
        throw Error(ErrorCode::Unavailable, "endpoint unavailable after " +
                                                std::to_string(attempt) + " attempts: " + e.what());
      }
      auto backoff = Millis(static_cast<Millis::rep>(
          static_cast<double>(options_.initial_backoff.count()) *
          std::pow(options_.backoff_factor, attempt - 1)));
      spdlog::warn("completion attempt {} failed ({}); retrying in {} ms", attempt, e.what(),
                   backoff.count());
      auto wake = std::min(deadline, Clock::now() + backoff);
      std::this_thread::sleep_until(wake);
    }
  }
}

}  // namespace fallacyscope
