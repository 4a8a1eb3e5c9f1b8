#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fallacyscope/output_parser.hpp"
#include "fallacyscope/taxonomy.hpp"

namespace fallacyscope {

/// Half-open byte range [start, end) into a UTF-8 source text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

constexpr bool overlaps(Span a, Span b) { return a.start < b.end && b.start < a.end; }

enum class Origin { Ai, User };

std::string_view to_string(Origin origin);

struct Highlight {
  std::string id;
  Origin origin = Origin::Ai;
  Span span;
  std::string part;  // the anchored slice of the source, verbatim
  std::optional<FallacyLabel> label;  // AI only
  std::string reason;                 // User only
  std::string author;                 // User only
  std::string explain_short;
  std::string explain_long;

  friend bool operator==(const Highlight&, const Highlight&) = default;
};

/// First occurrence of `part` in `source` under whitespace collapsing,
/// case-sensitive first and ASCII case-insensitive second. Throws
/// Error{AnchorFailure} when absent and Error{EmptyInput} for a blank part.
Span anchor(std::string_view part, std::string_view source);

/// Number of (non-overlapping) occurrences of `part` in `source` under the
/// same normalization; more than one means `anchor` picked the first.
std::size_t occurrences(std::string_view part, std::string_view source);

std::string ai_highlight_id(std::string_view page_key, FallacyLabel label, std::string_view part);
std::string user_highlight_id(std::string_view page_key, std::string_view part,
                              std::string_view reason, std::string_view author);

/// Anchors an in-set detection. Throws Error{AnchorFailure}, or
/// Error{InvalidArgument} for a Nothing/out-of-set detection.
Highlight make_ai_highlight(const DetectedFallacy& detection, std::string_view source,
                            std::string_view page_key);
Highlight make_user_highlight(std::string_view part, std::string_view reason,
                              std::string_view author, std::string_view source,
                              std::string_view page_key);

/// AI highlights overlapping an earlier one (document order) are dropped;
/// user highlights are always kept. Output is ordered by span start, AI
/// before User on ties.
std::vector<Highlight> merge(std::vector<Highlight> ai, std::vector<Highlight> user);

struct FallacySummary {
  std::array<std::size_t, kFallacyCount> counts{};
  std::size_t total = 0;

  std::size_t count(FallacyLabel label) const;
};

/// Counts AI highlights by label.
FallacySummary summarize(std::span<const Highlight> highlights);

}  // namespace fallacyscope
