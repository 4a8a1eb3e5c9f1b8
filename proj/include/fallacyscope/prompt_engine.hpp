#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fallacyscope {

enum class PromptTask {
  DetectFallacies,
  EnrichAiHighlight,
  ReviseOwnQuery,
  ExtractWebContent,
  SummarizeExtracts,
  EnrichUserHighlight,
};

inline constexpr std::array<PromptTask, 6> kPromptTasks{
    PromptTask::DetectFallacies,   PromptTask::EnrichAiHighlight, PromptTask::ReviseOwnQuery,
    PromptTask::ExtractWebContent, PromptTask::SummarizeExtracts, PromptTask::EnrichUserHighlight};

std::string_view to_string(PromptTask task);

inline constexpr std::string_view kSystemRole = "You are a critical thinker.";

/// Web text fed to the extraction prompt is cut to this many words.
inline constexpr std::size_t kMaxWebWords = 2500;
inline constexpr std::size_t kSummaryExtractLists = 3;
inline constexpr std::size_t kMaxExtractsPerList = 5;

struct GenerationParams {
  double temperature = 0.0;
  int max_new_tokens = 0;
  std::string_view system_role = kSystemRole;

  friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

GenerationParams params_for(PromptTask task);

/// The unfilled golden template for a task.
std::string_view template_for(PromptTask task);

struct ChatMessages {
  std::string system;
  std::string user;
};

struct RenderedPrompt {
  PromptTask task = PromptTask::DetectFallacies;
  std::string body;  // flat Llama-3 formatted prompt, header markers included
  GenerationParams params;

  /// The same prompt split for chat-style endpoints: the system role and the
  /// user turn without header markers.
  ChatMessages messages() const;
};

RenderedPrompt render_detection(std::string_view text);
RenderedPrompt render_enrichment(std::string_view text, std::string_view part,
                                 std::string_view fallacy_name);
RenderedPrompt render_own_query(std::string_view text, std::string_view part,
                                std::string_view search_terms);
RenderedPrompt render_extraction(std::string_view web_text, std::string_view query);

/// `extracts` must hold exactly three lists of at most five extracts each.
/// Empty lists are allowed as padding when fewer sources survived, but at
/// least one list must be non-empty.
RenderedPrompt render_summary(std::span<const std::vector<std::string>> extracts,
                              std::string_view query);
RenderedPrompt render_user_highlight(std::string_view text, std::string_view part,
                                     std::string_view reason);

/// True when `part` occurs in `text` once both are whitespace-collapsed.
bool contains_normalized(std::string_view text, std::string_view part);

}  // namespace fallacyscope
