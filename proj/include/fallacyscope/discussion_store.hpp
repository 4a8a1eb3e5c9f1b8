#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fallacyscope/highlighter.hpp"
#include "fallacyscope/output_parser.hpp"

struct sqlite3;

namespace fallacyscope {

enum class InteractionKind {
  SummaryChart,
  AiHighlight,
  UserHighlight,
  FoodForThought,
  DiscussionSpace,
  SuggestedQueries,
  WebFindings,
  OpenReference,
  WriteOwnQuery,
  OpenQuery,
};

inline constexpr std::array<InteractionKind, 10> kInteractionKinds{
    InteractionKind::SummaryChart,     InteractionKind::AiHighlight,   InteractionKind::UserHighlight,
    InteractionKind::FoodForThought,   InteractionKind::DiscussionSpace,
    InteractionKind::SuggestedQueries, InteractionKind::WebFindings,   InteractionKind::OpenReference,
    InteractionKind::WriteOwnQuery,    InteractionKind::OpenQuery};

std::string_view to_string(InteractionKind kind);
std::optional<InteractionKind> parse_interaction_kind(std::string_view raw);

struct InteractionEvent {
  std::string session;
  InteractionKind kind = InteractionKind::SummaryChart;
  std::string payload;
  std::int64_t at = 0;  // unix milliseconds; 0 means "now"
};

struct ChatMessage {
  std::int64_t id = 0;
  std::string highlight_id;
  std::string author;
  std::string body;
  std::int64_t votes = 0;
  std::int64_t created_at = 0;  // unix milliseconds
};

enum class VoteDirection { Up = 1, Down = -1 };

/// Vote identity: self-declared username plus the client's session id.
struct Voter {
  std::string username;
  std::string session;
};

struct PageRecord {
  std::string page_key;
  std::string text;
  std::vector<Highlight> highlights;  // active only, ordered by span start
  std::map<std::string, EnrichmentResult> enrichments;  // latest per highlight
  std::map<std::string, std::vector<ChatMessage>> messages;
};

struct StoredHighlight {
  std::string page_key;
  Highlight highlight;
  bool archived = false;
};

/// Embedded SQLite store. One connection guarded by a mutex, so page writes
/// are serialized and the event log accepts concurrent appends.
class DiscussionStore {
 public:
  using Clock = std::function<std::int64_t()>;

  /// `path` may be ":memory:".
  explicit DiscussionStore(const std::string& path, Clock clock = {});
  ~DiscussionStore();
  DiscussionStore(const DiscussionStore&) = delete;
  DiscussionStore& operator=(const DiscussionStore&) = delete;

  /// Upserts a page analysis. AI highlights not in `highlights` are archived;
  /// stored user highlights are re-anchored in `text` and archived when their
  /// part no longer occurs. Every AI highlight needs an entry in
  /// `enrichments` unless one is already stored for its id.
  PageRecord save_page_analysis(std::string_view page_key, std::string_view text,
                                std::span<const Highlight> highlights,
                                const std::map<std::string, EnrichmentResult>& enrichments);

  std::optional<PageRecord> load_page(std::string_view page_key) const;
  std::optional<StoredHighlight> find_highlight(std::string_view highlight_id) const;
  /// Active user highlights of a page.
  std::vector<Highlight> user_highlights(std::string_view page_key) const;

  /// Stores a user highlight with its first enrichment; re-adding the same id
  /// reactivates it.
  void add_user_highlight(std::string_view page_key, const Highlight& highlight,
                          const EnrichmentResult& enrichment);

  std::optional<EnrichmentResult> latest_enrichment(std::string_view highlight_id) const;
  /// Appends a refreshed set to the highlight's history; returns its generation (1-based).
  int append_enrichment(std::string_view highlight_id, const EnrichmentResult& enrichment);
  int enrichment_generations(std::string_view highlight_id) const;

  /// Throws Error{UnknownHighlight} or Error{EmptyInput}.
  ChatMessage post_message(std::string_view highlight_id, std::string_view author,
                           std::string_view body);
  std::vector<ChatMessage> messages_for(std::string_view highlight_id) const;
  std::optional<ChatMessage> find_message(std::int64_t message_id) const;

  /// One vote per voter per message: repeating a direction is a no-op, the
  /// opposite direction replaces. Returns the message's new tally. Throws
  /// Error{UnknownMessage}.
  std::int64_t vote(std::int64_t message_id, VoteDirection direction, const Voter& voter);

  void log_event(const InteractionEvent& event);
  /// Counts per kind, optionally restricted to one session.
  std::map<InteractionKind, std::size_t> event_counts(
      std::optional<std::string_view> session = std::nullopt) const;
  std::vector<InteractionEvent> events(std::optional<std::string_view> session = std::nullopt) const;
  /// Line-delimited JSON, one event per line, in append order.
  void export_events(std::ostream& out) const;

 private:
  class Statement;

  void exec(const char* sql) const;
  std::int64_t now() const;
  std::vector<Highlight> highlights_where(std::string_view page_key, std::string_view origin,
                                          bool archived) const;
  void upsert_highlight(std::string_view page_key, const Highlight& h, bool archived);
  void insert_enrichment(std::string_view highlight_id, const EnrichmentResult& e);
  std::optional<EnrichmentResult> latest_enrichment_locked(std::string_view highlight_id) const;
  std::vector<ChatMessage> messages_locked(std::string_view highlight_id) const;
  std::optional<PageRecord> load_page_locked(std::string_view page_key) const;

  sqlite3* db_ = nullptr;
  Clock clock_;
  mutable std::recursive_mutex mutex_;
};

}  // namespace fallacyscope
