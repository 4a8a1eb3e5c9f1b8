#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fallacyscope/eval/dataset.hpp"
#include "fallacyscope/eval/metrics.hpp"
#include "fallacyscope/llm_gateway.hpp"

namespace fallacyscope::eval {

/// Raw detection completions on disk, one JSON file per (model, text).
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir);

  static std::string key(std::string_view model_id, std::string_view text);

  std::optional<std::string> get(std::string_view model_id, std::string_view text) const;
  void put(std::string_view model_id, std::string_view text, std::string_view raw);

 private:
  std::filesystem::path file_for(std::string_view model_id, std::string_view text) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

struct Prediction {
  std::string text;
  FallacyLabel gold = FallacyLabel::Nothing;
  FallacyLabel predicted = FallacyLabel::Nothing;
  bool out_of_set = false;      // model named a label outside the taxonomy
  bool unparseable = false;     // completion had no recognizable answer
  std::string raw_label;        // label as the model wrote it
  std::optional<std::string> error;  // set when every attempt failed
};

/// First detected fallacy wins; out-of-set labels and unparseable output
/// count as Nothing.
Prediction interpret_detection(const EvalInstance& instance, std::string_view raw);

struct ClassifyOptions {
  std::optional<std::filesystem::path> cache_dir;
  int retry_passes = 1;           // extra passes over failed instances
  double max_failure_rate = 0.05;  // abort above this fraction
  std::size_t workers = kDefaultMaxInFlight;
};

struct ClassificationRun {
  std::vector<Prediction> predictions;  // input order
  std::size_t endpoint_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t failures = 0;
};

/// Throws Error{FailureRateExceeded} when too many instances still fail
/// after the retry passes.
ClassificationRun classify_all(std::span<const EvalInstance> instances, LlmGateway& llm,
                               const ClassifyOptions& options = {});

/// Successful predictions only.
std::vector<LabelPair> label_pairs(std::span<const Prediction> predictions);

void write_predictions_jsonl(const std::filesystem::path& path, std::span<const Prediction> predictions);
std::vector<Prediction> read_predictions_jsonl(const std::filesystem::path& path);

}  // namespace fallacyscope::eval
