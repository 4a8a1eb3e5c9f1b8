#include "fallacyscope/highlighter.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "fallacyscope/error.hpp"
#include "fallacyscope/hashing.hpp"
#include "fallacyscope/text.hpp"

namespace fallacyscope {
namespace {

std::optional<Span> find_normalized(const text::NormalizedText& hay, std::string_view needle,
                                    bool fold_case) {
  std::size_t pos;
  if (fold_case) {
    pos = text::to_lower_ascii(hay.text).find(text::to_lower_ascii(needle));
  } else {
    pos = hay.text.find(needle);
  }
  if (pos == std::string::npos) return std::nullopt;
  return Span{hay.starts[pos], hay.ends[pos + needle.size() - 1]};
}

std::string short_id(std::string_view prefix, std::string_view material) {
  return std::string(prefix) + sha256_hex(material).substr(0, 16);
}

}  // namespace

std::string_view to_string(Origin origin) { return origin == Origin::Ai ? "ai" : "user"; }

Span anchor(std::string_view part, std::string_view source) {
  auto needle = text::collapse_whitespace(part);
  if (needle.empty()) throw Error(ErrorCode::EmptyInput, "cannot anchor an empty part");
  auto hay = text::normalize_whitespace(source);
  if (auto span = find_normalized(hay, needle, false)) return *span;
  if (auto span = find_normalized(hay, needle, true)) return *span;
  throw Error(ErrorCode::AnchorFailure, "part not found in the source text", std::string(part));
}

std::size_t occurrences(std::string_view part, std::string_view source) {
  auto needle = text::collapse_whitespace(part);
  if (needle.empty()) return 0;
  auto hay = text::collapse_whitespace(source);
  std::size_t count = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

std::string ai_highlight_id(std::string_view page_key, FallacyLabel label, std::string_view part) {
  std::string material;
  material.append(page_key).append("\n").append(label_key(label)).append("\n");
  material.append(text::collapse_whitespace(part));
  return short_id("ai-", material);
}

std::string user_highlight_id(std::string_view page_key, std::string_view part,
                              std::string_view reason, std::string_view author) {
  std::string material;
  material.append(page_key).append("\n").append(text::collapse_whitespace(part)).append("\n");
  material.append(text::trim(reason)).append("\n").append(text::trim(author));
  return short_id("user-", material);
}

Highlight make_ai_highlight(const DetectedFallacy& detection, std::string_view source,
                            std::string_view page_key) {
  if (detection.label == FallacyLabel::Nothing || detection.out_of_set) {
    throw Error(ErrorCode::InvalidArgument, "only in-set detections become highlights");
  }
  auto span = anchor(detection.part, source);
  if (occurrences(detection.part, source) > 1) {
    spdlog::info("part occurs more than once; anchored to the first occurrence: {}",
                 detection.part);
  }
  Highlight h;
  h.origin = Origin::Ai;
  h.span = span;
  h.part = std::string(source.substr(span.start, span.end - span.start));
  h.label = detection.label;
  h.explain_short = detection.explain_short;
  h.explain_long = detection.explain_long;
  h.id = ai_highlight_id(page_key, detection.label, h.part);
  return h;
}

Highlight make_user_highlight(std::string_view part, std::string_view reason,
                              std::string_view author, std::string_view source,
                              std::string_view page_key) {
  if (text::is_blank(reason)) throw Error(ErrorCode::EmptyInput, "a user highlight needs a reason");
  auto span = anchor(part, source);
  Highlight h;
  h.origin = Origin::User;
  h.span = span;
  h.part = std::string(source.substr(span.start, span.end - span.start));
  h.reason = std::string(text::trim(reason));
  h.author = std::string(text::trim(author));
  h.id = user_highlight_id(page_key, h.part, h.reason, h.author);
  return h;
}

std::vector<Highlight> merge(std::vector<Highlight> ai, std::vector<Highlight> user) {
  std::stable_sort(ai.begin(), ai.end(),
                   [](const Highlight& a, const Highlight& b) { return a.span.start < b.span.start; });
  std::vector<Highlight> out;
  out.reserve(ai.size() + user.size());
  std::size_t covered_to = 0;
  bool any = false;
  for (auto& h : ai) {
    if (any && h.span.start < covered_to) {
      spdlog::debug("dropping AI highlight {} overlapping an earlier one", h.id);
      continue;
    }
    covered_to = h.span.end;
    any = true;
    out.push_back(std::move(h));
  }
  for (auto& h : user) out.push_back(std::move(h));
  std::stable_sort(out.begin(), out.end(), [](const Highlight& a, const Highlight& b) {
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return a.origin == Origin::Ai && b.origin == Origin::User;
  });
  return out;
}

std::size_t FallacySummary::count(FallacyLabel label) const {
  return label == FallacyLabel::Nothing ? 0 : counts[index_of(label)];
}

FallacySummary summarize(std::span<const Highlight> highlights) {
  FallacySummary s;
  for (const auto& h : highlights) {
    if (h.origin != Origin::Ai || !h.label || *h.label == FallacyLabel::Nothing) continue;
    ++s.counts[index_of(*h.label)];
    ++s.total;
  }
  return s;
}

}  // namespace fallacyscope
