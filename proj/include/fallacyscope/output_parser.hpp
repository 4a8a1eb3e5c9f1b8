#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fallacyscope/taxonomy.hpp"

namespace fallacyscope {

inline constexpr std::size_t kTargetQuestions = 8;
inline constexpr std::size_t kTargetQueries = 3;
inline constexpr std::size_t kTargetRevisedQueries = 3;
inline constexpr std::size_t kMaxExtracts = 5;
inline constexpr std::size_t kSummaryMinWords = 80;
inline constexpr std::size_t kSummaryMaxWords = 150;

struct DetectedFallacy {
  std::string part;
  FallacyLabel label = FallacyLabel::Nothing;
  bool out_of_set = false;
  std::string raw_label;  // the model's fallacy name, trimmed
  std::string explain_short;
  std::string explain_long;

  friend bool operator==(const DetectedFallacy&, const DetectedFallacy&) = default;
};

struct EnrichmentResult {
  std::vector<std::string> critical_questions;
  std::vector<std::string> critical_queries;
  bool questions_shortfall = false;
  bool queries_shortfall = false;
  bool overflow = false;  // extra items beyond the targets were dropped

  friend bool operator==(const EnrichmentResult&, const EnrichmentResult&) = default;
};

struct RevisedQueries {
  std::vector<std::string> queries;
  bool shortfall = false;
  bool overflow = false;
};

struct ExtractSet {
  std::vector<std::string> extracts;
  bool overflow = false;

  friend bool operator==(const ExtractSet&, const ExtractSet&) = default;
};

struct SummaryResult {
  std::string summary;
  std::size_t word_count = 0;
  bool length_conformant = false;

  friend bool operator==(const SummaryResult&, const SummaryResult&) = default;
};

/// Detection completions: "nothing" or a run of object-like blocks with
/// part/fallacy/explain_short/explain_long fields. Parses each block as
/// JSON first, then field-wise for the malformed shapes the detection
/// template itself invites (missing commas, trailing commas, unescaped
/// quotes, truncated output). Out-of-set labels are kept and flagged;
/// entries with an empty part are dropped; repeated part+label pairs keep
/// the first. `source` is used to unwrap parts quoted with stray quotes or
/// ellipses. Throws Error{Unparseable} carrying the raw text.
std::vector<DetectedFallacy> parse_detection(std::string_view raw, std::string_view source);

/// Throws Error{Unparseable} when neither list is present.
EnrichmentResult parse_enrichment(std::string_view raw);
/// Throws Error{Unparseable} when the list is missing or empty.
RevisedQueries parse_revised_queries(std::string_view raw);
/// Keeps the first five extracts. Throws Error{Unparseable} when none.
ExtractSet parse_extracts(std::string_view raw);
/// Length bounds are soft: violations are flagged, not rejected.
SummaryResult parse_summary(std::string_view raw);

SummaryResult make_summary(std::string summary);

// Well-formed completions in the shape each template asks for. Used to build
// fixtures for the offline endpoint.
std::string format_detection_response(std::span<const DetectedFallacy> detections);
std::string format_enrichment_response(const EnrichmentResult& enrichment);
std::string format_revised_queries_response(std::span<const std::string> queries);
std::string format_extracts_response(std::span<const std::string> extracts);
std::string format_summary_response(std::string_view summary);

}  // namespace fallacyscope
