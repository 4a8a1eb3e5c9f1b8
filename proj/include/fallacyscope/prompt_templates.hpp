#pragma once

#include <string_view>

// Golden prompt templates compiled in from resources/prompts.
namespace fallacyscope::detail {

extern const std::string_view k_detect_fallacies;
extern const std::string_view k_enrich_ai_highlight;
extern const std::string_view k_revise_own_query;
extern const std::string_view k_extract_web_content;
extern const std::string_view k_summarize_extracts;
extern const std::string_view k_enrich_user_highlight;

}  // namespace fallacyscope::detail
