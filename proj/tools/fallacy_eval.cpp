// Benchmark harness for the detection prompt: dataset filtering, assembly,
// classification against an endpoint, and metric reports.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "fallacyscope/error.hpp"
#include "fallacyscope/eval/classify.hpp"
#include "fallacyscope/eval/dataset.hpp"
#include "fallacyscope/eval/metrics.hpp"

#ifndef FALLACYSCOPE_DATA_DIR
#define FALLACYSCOPE_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace fallacyscope;
using namespace fallacyscope::eval;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  return out;
}

void print_counts(std::span<const EvalInstance> set) {
  std::array<std::size_t, kLabelCount> counts{};
  for (const auto& i : set) ++counts[index_of(i.gold)];
  for (auto l : kAllLabels) std::cout << "  " << label_key(l) << ": " << counts[index_of(l)] << '\n';
}

void write_report(const std::vector<LabelPair>& pairs, MetricsMode mode, const fs::path& dir) {
  auto report = compute_metrics(pairs, mode);
  auto name = std::string(to_string(mode));
  open_out(dir / ("metrics_" + name + ".json")) << metrics_json(report) << '\n';
  {
    auto out = open_out(dir / ("confusion_" + name + ".csv"));
    write_confusion_csv(out, report.confusion);
  }
  {
    auto out = open_out(dir / ("confusion_" + name + "_normalized.csv"));
    write_confusion_csv(out, report.normalized_confusion);
  }
  {
    auto out = open_out(dir / ("confusion_" + name + ".svg"));
    write_confusion_svg(out, report.normalized_confusion,
                        "Normalized confusion matrix, " + name + " data (N=" + std::to_string(report.n) + ")");
  }
  const auto& avg = mode == MetricsMode::Full ? report.macro : report.weighted;
  std::printf("%-7s n=%zu accuracy=%.4f %s P=%.4f R=%.4f F1=%.4f\n", name.c_str(), report.n, report.accuracy,
              mode == MetricsMode::Full ? "macro" : "weighted", avg.precision, avg.recall, avg.f1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fallacy detection benchmark"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose);

  std::string input, output, filters_dir = std::string(FALLACYSCOPE_DATA_DIR) + "/filters";
  auto* filter = app.add_subcommand("filter", "apply the exclusion rules to a raw corpus");
  filter->add_option("--input", input, "raw {text,label} records")->required()->check(CLI::ExistingFile);
  filter->add_option("--filters", filters_dir, "directory with the pattern files")->check(CLI::ExistingDirectory);
  filter->add_option("--out", output, "filtered records")->required();

  std::string filtered_path, facts_path = std::string(FALLACYSCOPE_DATA_DIR) + "/facts_standin.jsonl";
  std::string fewshot_path = std::string(FALLACYSCOPE_DATA_DIR) + "/fewshot.jsonl";
  auto* assemble = app.add_subcommand("assemble", "add the facts corpus and drop the few-shot examples");
  assemble->add_option("--filtered", filtered_path)->required()->check(CLI::ExistingFile);
  assemble->add_option("--facts", facts_path)->check(CLI::ExistingFile);
  assemble->add_option("--fewshot", fewshot_path)->check(CLI::ExistingFile);
  assemble->add_option("--out", output)->required();

  std::string dataset;
  std::size_t sample_n = 60;
  std::uint64_t seed = 7;
  auto* sample = app.add_subcommand("sample", "stratified sample of an evaluation set");
  sample->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);
  sample->add_option("-n", sample_n)->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed);
  sample->add_option("--out", output)->required();

  std::string endpoint_url, model = "meta-llama/Meta-Llama-3-8B-Instruct", adapter = "chat", fake, cache_dir;
  double max_failure_rate = 0.05;
  int max_in_flight = kDefaultMaxInFlight;
  auto* run = app.add_subcommand("run", "classify every instance with the detection prompt");
  run->add_option("--dataset", dataset)->required()->check(CLI::ExistingFile);
  auto url_opt = run->add_option("--endpoint", endpoint_url, "OpenAI-compatible base URL");
  run->add_option("--model", model);
  run->add_option("--adapter", adapter)->check(CLI::IsMember({"chat", "completion"}));
  auto fake_opt = run->add_option("--fake-llm", fake, "fixture completions")->check(CLI::ExistingFile);
  url_opt->excludes(fake_opt);
  run->add_option("--cache", cache_dir, "completion cache directory");
  run->add_option("--max-failure-rate", max_failure_rate)->check(CLI::Range(0.0, 1.0));
  run->add_option("--max-in-flight", max_in_flight)->check(CLI::PositiveNumber);
  run->add_option("--out", output, "predictions")->required();

  std::string predictions_path, mode = "both", out_dir;
  auto* report = app.add_subcommand("report", "metrics, breakdown and confusion matrices");
  report->add_option("--predictions", predictions_path)->required()->check(CLI::ExistingFile);
  report->add_option("--mode", mode)->check(CLI::IsMember({"full", "subset", "both"}));
  report->add_option("--out", out_dir)->required();

  CLI11_PARSE(app, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (*filter) {
      auto result = filter_dataset(read_raw_jsonl(input), FilterRules::load(filters_dir));
      write_eval_jsonl(output, result.kept);
      std::cout << "kept " << result.kept.size() << " (duplicates " << result.duplicates << ", out of scope "
                << result.out_of_scope << ", definitions " << result.definitions << ", latin " << result.latin
                << ", quiz " << result.quiz << ")\n";
      print_counts(result.kept);
    } else if (*assemble) {
      auto set = assemble_eval_set(read_eval_jsonl(filtered_path), read_eval_jsonl(facts_path),
                                   read_eval_jsonl(fewshot_path));
      write_eval_jsonl(output, set);
      std::cout << "evaluation set: " << set.size() << '\n';
      print_counts(set);
    } else if (*sample) {
      auto set = stratified_sample(read_eval_jsonl(dataset), sample_n, seed);
      write_eval_jsonl(output, set);
      std::cout << "sampled " << set.size() << '\n';
      print_counts(set);
    } else if (*run) {
      std::shared_ptr<CompletionEndpoint> endpoint;
      if (!fake.empty()) {
        endpoint = FakeEndpoint::from_file(fake);
      } else if (!endpoint_url.empty()) {
        endpoint = make_http_endpoint(
            {endpoint_url, model, adapter == "chat" ? AdapterKind::Chat : AdapterKind::Completion});
      } else {
        std::cerr << "run: --endpoint or --fake-llm is required\n";
        return 2;
      }
      GatewayOptions gateway_options;
      gateway_options.max_in_flight = max_in_flight;
      LlmGateway llm(endpoint, gateway_options);
      ClassifyOptions options;
      if (!cache_dir.empty()) options.cache_dir = cache_dir;
      options.max_failure_rate = max_failure_rate;
      options.workers = static_cast<std::size_t>(max_in_flight);
      auto instances = read_eval_jsonl(dataset);
      auto result = classify_all(instances, llm, options);
      write_predictions_jsonl(output, result.predictions);
      std::cout << "classified " << result.predictions.size() << " (endpoint calls " << result.endpoint_calls
                << ", cache hits " << result.cache_hits << ", failures " << result.failures << ")\n";
    } else if (*report) {
      fs::create_directories(out_dir);
      auto predictions = read_predictions_jsonl(predictions_path);
      auto pairs = label_pairs(predictions);
      if (mode != "subset") write_report(pairs, MetricsMode::Full, out_dir);
      if (mode != "full") write_report(pairs, MetricsMode::Subset, out_dir);
      auto breakdown = breakdown_report(pairs);
      auto out = open_out(fs::path(out_dir) / "breakdown.csv");
      write_breakdown_csv(out, breakdown);
      write_breakdown_csv(std::cout, breakdown);
    }
  } catch (const Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
