#include "fallacyscope/prompt_engine.hpp"

#include <nlohmann/json.hpp>

#include "fallacyscope/error.hpp"
#include "fallacyscope/prompt_templates.hpp"
#include "fallacyscope/text.hpp"

namespace fallacyscope {
namespace {

constexpr std::string_view kMarkerOpen = "--The ";
constexpr std::string_view kMarkerClose = " here--";
constexpr std::string_view kUserHeader = "<|start_header_id|>user<|end_header_id|>";
constexpr std::string_view kEndOfTurn = "<|eot_id|>";

// A template cut at its placeholder markers: literal[0] slot literal[1] slot ...
struct SplitTemplate {
  std::vector<std::string_view> literals;
};

SplitTemplate split(std::string_view tpl) {
  SplitTemplate out;
  std::size_t pos = 0;
  while (true) {
    auto open = tpl.find(kMarkerOpen, pos);
    if (open == std::string_view::npos) break;
    auto close = tpl.find(kMarkerClose, open + kMarkerOpen.size());
    if (close == std::string_view::npos) break;
    out.literals.push_back(tpl.substr(pos, open - pos));
    pos = close + kMarkerClose.size();
  }
  out.literals.push_back(tpl.substr(pos));
  return out;
}

const SplitTemplate& split_for(PromptTask task) {
  static const std::array<SplitTemplate, kPromptTasks.size()> cache = [] {
    std::array<SplitTemplate, kPromptTasks.size()> all;
    for (auto t : kPromptTasks) all[static_cast<std::size_t>(t)] = split(template_for(t));
    return all;
  }();
  return cache[static_cast<std::size_t>(task)];
}

RenderedPrompt fill(PromptTask task, std::initializer_list<std::string_view> values) {
  const auto& tpl = split_for(task);
  if (tpl.literals.size() != values.size() + 1) {
    throw std::logic_error("template slot count mismatch for " + std::string(to_string(task)));
  }
  RenderedPrompt out{task, {}, params_for(task)};
  std::size_t size = 0;
  for (auto l : tpl.literals) size += l.size();
  for (auto v : values) size += v.size();
  out.body.reserve(size);
  auto value = values.begin();
  for (std::size_t i = 0; i < tpl.literals.size(); ++i) {
    out.body.append(tpl.literals[i]);
    if (value != values.end()) out.body.append(*value++);
  }
  return out;
}

void require_text(std::string_view value, std::string_view what) {
  if (text::is_blank(value)) {
    throw Error(ErrorCode::EmptyInput, std::string(what) + " must not be empty");
  }
}

void require_anchor(std::string_view text, std::string_view part) {
  require_text(part, "part");
  if (!contains_normalized(text, part)) {
    throw Error(ErrorCode::AnchorMismatch, "part does not occur in the text");
  }
}

std::string extract_list_literal(const std::vector<std::string>& extracts) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : extracts) list.push_back(e);
  return list.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace

std::string_view to_string(PromptTask task) {
  switch (task) {
    case PromptTask::DetectFallacies: return "detect_fallacies";
    case PromptTask::EnrichAiHighlight: return "enrich_ai_highlight";
    case PromptTask::ReviseOwnQuery: return "revise_own_query";
    case PromptTask::ExtractWebContent: return "extract_web_content";
    case PromptTask::SummarizeExtracts: return "summarize_extracts";
    case PromptTask::EnrichUserHighlight: return "enrich_user_highlight";
  }
  return "";
}

GenerationParams params_for(PromptTask task) {
  switch (task) {
    case PromptTask::DetectFallacies: return {0.0, 512};
    case PromptTask::EnrichAiHighlight: return {0.7, 512};
    case PromptTask::ReviseOwnQuery: return {0.7, 256};
    case PromptTask::ExtractWebContent: return {0.7, 512};
    case PromptTask::SummarizeExtracts: return {0.7, 256};
    case PromptTask::EnrichUserHighlight: return {0.7, 512};
  }
  return {};
}

std::string_view template_for(PromptTask task) {
  switch (task) {
    case PromptTask::DetectFallacies: return detail::k_detect_fallacies;
    case PromptTask::EnrichAiHighlight: return detail::k_enrich_ai_highlight;
    case PromptTask::ReviseOwnQuery: return detail::k_revise_own_query;
    case PromptTask::ExtractWebContent: return detail::k_extract_web_content;
    case PromptTask::SummarizeExtracts: return detail::k_summarize_extracts;
    case PromptTask::EnrichUserHighlight: return detail::k_enrich_user_highlight;
  }
  return {};
}

ChatMessages RenderedPrompt::messages() const {
  ChatMessages out{std::string(params.system_role), {}};
  std::string_view b = body;
  auto start = b.find(kUserHeader);
  auto end = b.rfind(kEndOfTurn);
  if (start == std::string_view::npos || end == std::string_view::npos ||
      end < start + kUserHeader.size()) {
    out.user = body;
    return out;
  }
  start += kUserHeader.size();
  out.user = std::string(b.substr(start, end - start));
  return out;
}

bool contains_normalized(std::string_view text, std::string_view part) {
  auto p = text::collapse_whitespace(part);
  if (p.empty()) return false;
  return text::collapse_whitespace(text).find(p) != std::string::npos;
}

RenderedPrompt render_detection(std::string_view text) {
  require_text(text, "text");
  return fill(PromptTask::DetectFallacies, {text});
}

RenderedPrompt render_enrichment(std::string_view text, std::string_view part,
                                 std::string_view fallacy_name) {
  require_text(text, "text");
  require_anchor(text, part);
  require_text(fallacy_name, "fallacy name");
  return fill(PromptTask::EnrichAiHighlight, {text, part, fallacy_name});
}

RenderedPrompt render_own_query(std::string_view text, std::string_view part,
                                std::string_view search_terms) {
  require_text(search_terms, "search terms");
  // The template carries the text marker twice; the second occurrence is the part slot.
  return fill(PromptTask::ReviseOwnQuery, {text, part, search_terms});
}

RenderedPrompt render_extraction(std::string_view web_text, std::string_view query) {
  require_text(web_text, "web text");
  require_text(query, "search query");
  return fill(PromptTask::ExtractWebContent, {text::truncate_words(web_text, kMaxWebWords), query});
}

RenderedPrompt render_summary(std::span<const std::vector<std::string>> extracts,
                              std::string_view query) {
  if (extracts.size() != kSummaryExtractLists) {
    throw Error(ErrorCode::Arity, "expected exactly three extract lists, got " +
                                      std::to_string(extracts.size()));
  }
  bool any = false;
  for (const auto& list : extracts) {
    if (list.size() > kMaxExtractsPerList) {
      throw Error(ErrorCode::Arity, "an extract list holds more than five extracts");
    }
    any = any || !list.empty();
  }
  if (!any) throw Error(ErrorCode::Arity, "all three extract lists are empty");
  require_text(query, "search query");
  auto first = extract_list_literal(extracts[0]);
  auto second = extract_list_literal(extracts[1]);
  auto third = extract_list_literal(extracts[2]);
  return fill(PromptTask::SummarizeExtracts, {first, second, third, query});
}

RenderedPrompt render_user_highlight(std::string_view text, std::string_view part,
                                     std::string_view reason) {
  require_text(text, "text");
  require_anchor(text, part);
  require_text(reason, "reason");
  return fill(PromptTask::EnrichUserHighlight, {text, part, reason});
}

}  // namespace fallacyscope
