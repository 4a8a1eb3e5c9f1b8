#include "fallacyscope/eval/classify.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "fallacyscope/error.hpp"
#include "fallacyscope/hashing.hpp"
#include "fallacyscope/output_parser.hpp"
#include "fallacyscope/prompt_engine.hpp"
#include "fallacyscope/text.hpp"

namespace fallacyscope::eval {
namespace {

using json = nlohmann::json;

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace

CompletionCache::CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string CompletionCache::key(std::string_view model_id, std::string_view text) {
  return sha256_hex(std::string(model_id) + '\n' + sha256_hex(text));
}

std::filesystem::path CompletionCache::file_for(std::string_view model_id, std::string_view text) const {
  return dir_ / (key(model_id, text) + ".json");
}

std::optional<std::string> CompletionCache::get(std::string_view model_id, std::string_view text) const {
  std::lock_guard lock(mutex_);
  std::ifstream in(file_for(model_id, text));
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  auto j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded() || !j.contains("raw") || !j["raw"].is_string()) return std::nullopt;
  return j["raw"].get<std::string>();
}

void CompletionCache::put(std::string_view model_id, std::string_view text, std::string_view raw) {
  std::lock_guard lock(mutex_);
  auto target = file_for(model_id, text);
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    out << dump(json{{"model", model_id}, {"text_sha256", sha256_hex(text)}, {"raw", raw}});
    if (!out) throw Error(ErrorCode::Storage, "cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

Prediction interpret_detection(const EvalInstance& instance, std::string_view raw) {
  Prediction p{instance.text, instance.gold, FallacyLabel::Nothing, false, false, "", std::nullopt};
  std::vector<DetectedFallacy> found;
  try {
    found = parse_detection(raw, instance.text);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unparseable) throw;
    p.unparseable = true;
    return p;
  }
  if (found.empty()) {
    p.raw_label = "nothing";
    return p;
  }
  const auto& first = found.front();
  p.raw_label = first.raw_label;
  p.out_of_set = first.out_of_set;
  p.predicted = first.out_of_set ? FallacyLabel::Nothing : first.label;
  return p;
}

ClassificationRun classify_all(std::span<const EvalInstance> instances, LlmGateway& llm,
                               const ClassifyOptions& options) {
  std::optional<CompletionCache> cache;
  if (options.cache_dir) cache.emplace(*options.cache_dir);
  auto model = llm.model_id();

  ClassificationRun run;
  run.predictions.resize(instances.size());
  std::atomic<std::size_t> calls{0}, hits{0};

  auto classify_one = [&](std::size_t i) {
    const auto& inst = instances[i];
    if (cache) {
      if (auto raw = cache->get(model, inst.text)) {
        ++hits;
        run.predictions[i] = interpret_detection(inst, *raw);
        return;
      }
    }
    try {
      ++calls;
      auto raw = llm.complete(render_detection(inst.text)).raw_text;
      if (cache) cache->put(model, inst.text, raw);
      run.predictions[i] = interpret_detection(inst, raw);
    } catch (const Error& e) {
      run.predictions[i] = Prediction{inst.text, inst.gold, FallacyLabel::Nothing, false, false, "", e.what()};
    }
  };

  auto run_pass = [&](const std::vector<std::size_t>& todo) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (auto k = next++; k < todo.size(); k = next++) classify_one(todo[k]);
    };
    std::vector<std::thread> pool;
    auto n = std::min(std::max<std::size_t>(options.workers, 1), todo.size());
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  };

  std::vector<std::size_t> todo(instances.size());
  for (std::size_t i = 0; i < todo.size(); ++i) todo[i] = i;
  for (int pass = 0; pass <= options.retry_passes && !todo.empty(); ++pass) {
    if (pass > 0) spdlog::info("retrying {} failed instances", todo.size());
    run_pass(todo);
    std::vector<std::size_t> failed;
    for (auto i : todo) {
      if (run.predictions[i].error) failed.push_back(i);
    }
    todo = std::move(failed);
  }

  run.endpoint_calls = calls;
  run.cache_hits = hits;
  run.failures = todo.size();
  if (!instances.empty() &&
      static_cast<double>(run.failures) > options.max_failure_rate * static_cast<double>(instances.size())) {
    throw Error(ErrorCode::FailureRateExceeded,
                std::to_string(run.failures) + " of " + std::to_string(instances.size()) +
                    " instances failed after retries");
  }
  return run;
}

std::vector<LabelPair> label_pairs(std::span<const Prediction> predictions) {
  std::vector<LabelPair> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) {
    if (!p.error) out.push_back({p.gold, p.predicted});
  }
  return out;
}

void write_predictions_jsonl(const std::filesystem::path& path, std::span<const Prediction> predictions) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  for (const auto& p : predictions) {
    json j{{"text", p.text},
           {"gold", label_key(p.gold)},
           {"predicted", label_key(p.predicted)},
           {"out_of_set", p.out_of_set},
           {"unparseable", p.unparseable},
           {"raw_label", p.raw_label}};
    if (p.error) j["error"] = *p.error;
    out << dump(j) << '\n';
  }
}

std::vector<Prediction> read_predictions_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    auto j = json::parse(line, nullptr, false);
    auto where = path.string() + ":" + std::to_string(line_no);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidArgument, where + ": not a JSON object");
    auto gold = label_from_key(j.value("gold", ""));
    auto predicted = label_from_key(j.value("predicted", ""));
    if (!gold || !predicted) throw Error(ErrorCode::InvalidArgument, where + ": unknown label");
    Prediction p{j.value("text", ""), *gold, *predicted, j.value("out_of_set", false),
                 j.value("unparseable", false), j.value("raw_label", ""), std::nullopt};
    if (j.contains("error") && j["error"].is_string()) p.error = j["error"].get<std::string>();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace fallacyscope::eval
