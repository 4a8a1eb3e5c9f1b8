#include "fallacyscope/probe_pipeline.hpp"

#include <fstream>
#include <future>
#include <variant>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "fallacyscope/error.hpp"
#include "fallacyscope/html_text.hpp"
#include "fallacyscope/prompt_engine.hpp"
#include "fallacyscope/text.hpp"
#include "fallacyscope/url.hpp"

namespace fallacyscope {
namespace {

bool is_html(std::string_view content_type, std::string_view body) {
  auto ct = text::to_lower_ascii(content_type);
  if (ct.starts_with("text/html") || ct.starts_with("application/xhtml+xml")) return true;
  if (!ct.empty()) return false;
  auto head = text::to_lower_ascii(text::trim(body.substr(0, 512)));
  return head.starts_with("<!doctype html") || head.starts_with("<html");
}

bool llm_failure(ErrorCode code) {
  return code == ErrorCode::Unavailable || code == ErrorCode::Deadline || code == ErrorCode::Config;
}

}  // namespace

std::unique_ptr<FixtureSearchProvider> FixtureSearchProvider::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open search fixture file " + path);
  auto provider = std::make_unique<FixtureSearchProvider>();
  try {
    auto j = nlohmann::json::parse(in);
    for (const auto& [query, hits] : j.items()) {
      std::vector<SearchHit> list;
      for (const auto& h : hits) {
        list.push_back({h.value("title", ""), h.at("url").get<std::string>(), h.value("snippet", "")});
      }
      provider->add(query, std::move(list));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "bad search fixture file " + path + ": " + e.what());
  }
  return provider;
}

void FixtureSearchProvider::add(std::string query, std::vector<SearchHit> hits) {
  results_[std::move(query)] = std::move(hits);
}

std::vector<SearchHit> FixtureSearchProvider::search(std::string_view query, std::size_t count) {
  auto it = results_.find(query);
  if (it == results_.end()) return {};
  std::vector<SearchHit> hits = it->second;
  if (hits.size() > count) hits.resize(count);
  return hits;
}

std::string fetch_main_text(PageFetcher& fetcher, const std::string& url) {
  auto page = fetcher.fetch(url);
  if (!is_html(page.content_type, page.body)) {
    throw Error(ErrorCode::Fetch, "unsupported content type '" + page.content_type + "' at " + url);
  }
  return extract_main_text(page.body);
}

WebFindings ProbePipeline::run_findings(std::string_view query) {
  if (text::is_blank(query)) throw Error(ErrorCode::EmptyInput, "search query must not be empty");
  const std::string q(text::trim(query));

  std::vector<SearchHit> hits;
  try {
    hits = search_.search(q, kFindingsSources);
  } catch (const Error& e) {
    throw Error(ErrorCode::Upstream, std::string("search provider failed: ") + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Upstream, std::string("search provider failed: ") + e.what());
  }
  if (hits.size() > kFindingsSources) hits.resize(kFindingsSources);
  if (hits.empty()) throw Error(ErrorCode::NoFindings, "the search returned no results");

  using Outcome = std::variant<SourceFindings, SkippedSource>;
  auto process = [this, &q](const SearchHit& hit) -> Outcome {
    try {
      if (!parse_url(hit.url)) return SkippedSource{hit.url, "invalid url"};
      auto page_text = fetch_main_text(fetcher_, hit.url);
      if (text::is_blank(page_text)) return SkippedSource{hit.url, "no readable text"};
      auto completion = llm_.complete(render_extraction(page_text, q));
      return SourceFindings{hit, parse_extracts(completion.raw_text)};
    } catch (const Error& e) {
      if (llm_failure(e.code())) throw;
      return SkippedSource{hit.url, std::string(to_string(e.code())) + ": " + e.what()};
    }
  };

  std::vector<std::future<Outcome>> pending;
  pending.reserve(hits.size());
  for (const auto& hit : hits) pending.push_back(std::async(std::launch::async, process, hit));

  WebFindings findings;
  findings.query = q;
  std::vector<Outcome> outcomes;
  for (auto& f : pending) outcomes.push_back(f.get());
  for (auto& outcome : outcomes) {
    if (auto* source = std::get_if<SourceFindings>(&outcome)) {
      findings.references.push_back(source->hit.url);
      findings.sources.push_back(std::move(*source));
    } else {
      auto& skipped = std::get<SkippedSource>(outcome);
      spdlog::info("skipping {}: {}", skipped.url, skipped.reason);
      findings.skipped.push_back(std::move(skipped));
    }
  }
  if (findings.sources.empty()) {
    throw Error(ErrorCode::NoFindings, "none of the search results yielded usable content");
  }

  std::vector<std::vector<std::string>> lists;
  for (const auto& s : findings.sources) lists.push_back(s.extracts.extracts);
  while (lists.size() < kSummaryExtractLists) {
    lists.emplace_back();
    ++findings.padded_lists;
  }
  auto completion = llm_.complete(render_summary(lists, q));
  try {
    findings.summary = parse_summary(completion.raw_text);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unparseable) throw;
    findings.summary_error = e.what();
  }
  return findings;
}

}  // namespace fallacyscope
