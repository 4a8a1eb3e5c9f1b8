#include "fallacyscope/discussion_store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <set>

#include <nlohmann/json.hpp>

#include "fallacyscope/error.hpp"
#include "fallacyscope/text.hpp"

namespace fallacyscope {
namespace {

using json = nlohmann::json;

constexpr const char* kSchema = R"sql(
PRAGMA foreign_keys = ON;
CREATE TABLE IF NOT EXISTS pages (
  page_key TEXT PRIMARY KEY,
  text TEXT NOT NULL,
  updated_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS highlights (
  id TEXT PRIMARY KEY,
  page_key TEXT NOT NULL REFERENCES pages(page_key),
  origin TEXT NOT NULL CHECK (origin IN ('ai', 'user')),
  start INTEGER NOT NULL,
  end INTEGER NOT NULL,
  part TEXT NOT NULL,
  label TEXT,
  reason TEXT NOT NULL DEFAULT '',
  author TEXT NOT NULL DEFAULT '',
  explain_short TEXT NOT NULL DEFAULT '',
  explain_long TEXT NOT NULL DEFAULT '',
  archived INTEGER NOT NULL DEFAULT 0
);
CREATE INDEX IF NOT EXISTS highlights_page ON highlights(page_key);
CREATE TABLE IF NOT EXISTS enrichments (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  highlight_id TEXT NOT NULL REFERENCES highlights(id),
  questions TEXT NOT NULL,
  queries TEXT NOT NULL,
  questions_shortfall INTEGER NOT NULL,
  queries_shortfall INTEGER NOT NULL,
  overflow INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS enrichments_highlight ON enrichments(highlight_id);
CREATE TABLE IF NOT EXISTS messages (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  highlight_id TEXT NOT NULL REFERENCES highlights(id),
  author TEXT NOT NULL,
  body TEXT NOT NULL CHECK (length(body) > 0),
  created_at INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS messages_highlight ON messages(highlight_id);
CREATE TABLE IF NOT EXISTS votes (
  message_id INTEGER NOT NULL REFERENCES messages(id),
  voter TEXT NOT NULL,
  direction INTEGER NOT NULL CHECK (direction IN (-1, 1)),
  PRIMARY KEY (message_id, voter)
);
CREATE TABLE IF NOT EXISTS events (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  session TEXT NOT NULL,
  kind TEXT NOT NULL,
  payload TEXT NOT NULL,
  at INTEGER NOT NULL
);
CREATE TRIGGER IF NOT EXISTS events_no_update BEFORE UPDATE ON events
BEGIN SELECT RAISE(ABORT, 'the event log is append-only'); END;
CREATE TRIGGER IF NOT EXISTS events_no_delete BEFORE DELETE ON events
BEGIN SELECT RAISE(ABORT, 'the event log is append-only'); END;
)sql";

std::string list_json(const std::vector<std::string>& items) {
  return json(items).dump(-1, ' ', false, json::error_handler_t::replace);
}

std::vector<std::string> parse_list(const std::string& s) {
  auto j = json::parse(s, nullptr, false);
  if (j.is_discarded() || !j.is_array()) return {};
  return j.get<std::vector<std::string>>();
}

}  // namespace

std::string_view to_string(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::SummaryChart: return "SummaryChart";
    case InteractionKind::AiHighlight: return "AiHighlight";
    case InteractionKind::UserHighlight: return "UserHighlight";
    case InteractionKind::FoodForThought: return "FoodForThought";
    case InteractionKind::DiscussionSpace: return "DiscussionSpace";
    case InteractionKind::SuggestedQueries: return "SuggestedQueries";
    case InteractionKind::WebFindings: return "WebFindings";
    case InteractionKind::OpenReference: return "OpenReference";
    case InteractionKind::WriteOwnQuery: return "WriteOwnQuery";
    case InteractionKind::OpenQuery: return "OpenQuery";
  }
  return "";
}

std::optional<InteractionKind> parse_interaction_kind(std::string_view raw) {
  for (auto k : kInteractionKinds) {
    if (to_string(k) == raw) return k;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

class DiscussionStore::Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw Error(ErrorCode::Storage, std::string("prepare failed: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int i, std::string_view v) {
    check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Statement& bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }
  Statement& bind_null(int i) {
    check(sqlite3_bind_null(stmt_, i));
    return *this;
  }

  /// True while a row is available.
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(ErrorCode::Storage, std::string("statement failed: ") + sqlite3_errmsg(db_));
  }
  void run() {
    while (step()) {
    }
  }

  std::string text(int col) const {
    auto p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p),
                           static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string();
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw Error(ErrorCode::Storage, std::string("bind failed: ") + sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

namespace {

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { run("BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    run("COMMIT");
    done_ = true;
  }

 private:
  void run(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown";
      sqlite3_free(err);
      throw Error(ErrorCode::Storage, msg);
    }
  }
  sqlite3* db_;
  bool done_ = false;
};

Highlight read_highlight(const auto& s) {
  Highlight h;
  h.id = s.text(0);
  h.origin = s.text(1) == "ai" ? Origin::Ai : Origin::User;
  h.span = {static_cast<std::size_t>(s.integer(2)), static_cast<std::size_t>(s.integer(3))};
  h.part = s.text(4);
  if (!s.is_null(5)) h.label = label_from_key(s.text(5));
  h.reason = s.text(6);
  h.author = s.text(7);
  h.explain_short = s.text(8);
  h.explain_long = s.text(9);
  return h;
}

constexpr const char* kHighlightColumns =
    "id, origin, start, end, part, label, reason, author, explain_short, explain_long";

}  // namespace

DiscussionStore::DiscussionStore(const std::string& path, Clock clock) : clock_(std::move(clock)) {
  if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw Error(ErrorCode::Storage, "cannot open store at " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec(kSchema);
}

DiscussionStore::~DiscussionStore() { sqlite3_close(db_); }

void DiscussionStore::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    throw Error(ErrorCode::Storage, msg);
  }
}

std::int64_t DiscussionStore::now() const {
  if (clock_) return clock_();
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void DiscussionStore::upsert_highlight(std::string_view page_key, const Highlight& h, bool archived) {
  Statement s(db_,
              "INSERT INTO highlights (id, page_key, origin, start, end, part, label, reason, author,"
              " explain_short, explain_long, archived) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12)"
              " ON CONFLICT(id) DO UPDATE SET start = excluded.start, end = excluded.end,"
              " part = excluded.part, explain_short = excluded.explain_short,"
              " explain_long = excluded.explain_long, archived = excluded.archived");
  s.bind(1, h.id).bind(2, page_key).bind(3, to_string(h.origin));
  s.bind(4, static_cast<std::int64_t>(h.span.start)).bind(5, static_cast<std::int64_t>(h.span.end));
  s.bind(6, h.part);
  if (h.label) {
    s.bind(7, label_key(*h.label));
  } else {
    s.bind_null(7);
  }
  s.bind(8, h.reason).bind(9, h.author).bind(10, h.explain_short).bind(11, h.explain_long);
  s.bind(12, std::int64_t{archived ? 1 : 0});
  s.run();
}

void DiscussionStore::insert_enrichment(std::string_view highlight_id, const EnrichmentResult& e) {
  Statement s(db_,
              "INSERT INTO enrichments (highlight_id, questions, queries, questions_shortfall,"
              " queries_shortfall, overflow) VALUES (?1, ?2, ?3, ?4, ?5, ?6)");
  s.bind(1, highlight_id).bind(2, list_json(e.critical_questions)).bind(3, list_json(e.critical_queries));
  s.bind(4, std::int64_t{e.questions_shortfall}).bind(5, std::int64_t{e.queries_shortfall});
  s.bind(6, std::int64_t{e.overflow});
  s.run();
}

std::optional<EnrichmentResult> DiscussionStore::latest_enrichment_locked(
    std::string_view highlight_id) const {
  Statement s(db_,
              "SELECT questions, queries, questions_shortfall, queries_shortfall, overflow"
              " FROM enrichments WHERE highlight_id = ?1 ORDER BY seq DESC LIMIT 1");
  s.bind(1, highlight_id);
  if (!s.step()) return std::nullopt;
  EnrichmentResult e;
  e.critical_questions = parse_list(s.text(0));
  e.critical_queries = parse_list(s.text(1));
  e.questions_shortfall = s.integer(2) != 0;
  e.queries_shortfall = s.integer(3) != 0;
  e.overflow = s.integer(4) != 0;
  return e;
}

std::vector<Highlight> DiscussionStore::highlights_where(std::string_view page_key,
                                                         std::string_view origin,
                                                         bool archived) const {
  std::string sql = std::string("SELECT ") + kHighlightColumns +
                    " FROM highlights WHERE page_key = ?1 AND archived = ?2" +
                    (origin.empty() ? "" : " AND origin = ?3") + " ORDER BY start, origin, id";
  Statement s(db_, sql.c_str());
  s.bind(1, page_key).bind(2, std::int64_t{archived ? 1 : 0});
  if (!origin.empty()) s.bind(3, origin);
  std::vector<Highlight> out;
  while (s.step()) out.push_back(read_highlight(s));
  return out;
}

std::vector<ChatMessage> DiscussionStore::messages_locked(std::string_view highlight_id) const {
  Statement s(db_,
              "SELECT m.id, m.highlight_id, m.author, m.body, m.created_at,"
              " COALESCE((SELECT SUM(direction) FROM votes v WHERE v.message_id = m.id), 0)"
              " FROM messages m WHERE m.highlight_id = ?1 ORDER BY m.id");
  s.bind(1, highlight_id);
  std::vector<ChatMessage> out;
  while (s.step()) {
    out.push_back({s.integer(0), s.text(1), s.text(2), s.text(3), s.integer(5), s.integer(4)});
  }
  return out;
}

std::optional<PageRecord> DiscussionStore::load_page_locked(std::string_view page_key) const {
  Statement s(db_, "SELECT text FROM pages WHERE page_key = ?1");
  s.bind(1, page_key);
  if (!s.step()) return std::nullopt;
  PageRecord record;
  record.page_key = std::string(page_key);
  record.text = s.text(0);
  record.highlights = highlights_where(page_key, "", false);
  std::stable_sort(record.highlights.begin(), record.highlights.end(),
                   [](const Highlight& a, const Highlight& b) {
                     if (a.span.start != b.span.start) return a.span.start < b.span.start;
                     return a.origin == Origin::Ai && b.origin == Origin::User;
                   });
  for (const auto& h : record.highlights) {
    if (auto e = latest_enrichment_locked(h.id)) record.enrichments.emplace(h.id, std::move(*e));
    auto msgs = messages_locked(h.id);
    if (!msgs.empty()) record.messages.emplace(h.id, std::move(msgs));
  }
  return record;
}

PageRecord DiscussionStore::save_page_analysis(
    std::string_view page_key, std::string_view text, std::span<const Highlight> highlights,
    const std::map<std::string, EnrichmentResult>& enrichments) {
  if (text::is_blank(page_key)) throw Error(ErrorCode::InvalidArgument, "page key must not be empty");
  std::lock_guard lock(mutex_);
  for (const auto& h : highlights) {
    if (h.span.start >= h.span.end || h.span.end > text.size()) {
      throw Error(ErrorCode::InvalidArgument, "highlight " + h.id + " is not anchored in the text");
    }
    if (h.origin == Origin::Ai && !enrichments.contains(h.id) && !latest_enrichment_locked(h.id)) {
      throw Error(ErrorCode::InvalidArgument, "missing enrichment for highlight " + h.id);
    }
  }

  Transaction tx(db_);
  {
    Statement s(db_,
                "INSERT INTO pages (page_key, text, updated_at) VALUES (?1, ?2, ?3)"
                " ON CONFLICT(page_key) DO UPDATE SET text = excluded.text, updated_at = excluded.updated_at");
    s.bind(1, page_key).bind(2, text).bind(3, now());
    s.run();
  }
  std::set<std::string> incoming;
  for (const auto& h : highlights) incoming.insert(h.id);

  for (const auto& h : highlights_where(page_key, "ai", false)) {
    if (!incoming.contains(h.id)) upsert_highlight(page_key, h, true);
  }
  for (const auto& h : highlights) {
    upsert_highlight(page_key, h, false);
    auto e = enrichments.find(h.id);
    if (e != enrichments.end() && !latest_enrichment_locked(h.id)) insert_enrichment(h.id, e->second);
  }
  // Re-anchor stored user highlights against the new text.
  for (bool archived : {false, true}) {
    for (auto h : highlights_where(page_key, "user", archived)) {
      if (incoming.contains(h.id)) continue;
      try {
        h.span = anchor(h.part, text);
        h.part = std::string(text.substr(h.span.start, h.span.end - h.span.start));
        upsert_highlight(page_key, h, false);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AnchorFailure) throw;
        upsert_highlight(page_key, h, true);
      }
    }
  }
  tx.commit();
  return *load_page_locked(page_key);
}

std::optional<PageRecord> DiscussionStore::load_page(std::string_view page_key) const {
  std::lock_guard lock(mutex_);
  return load_page_locked(page_key);
}

std::optional<StoredHighlight> DiscussionStore::find_highlight(std::string_view highlight_id) const {
  std::lock_guard lock(mutex_);
  std::string sql = std::string("SELECT ") + kHighlightColumns +
                    ", page_key, archived FROM highlights WHERE id = ?1";
  Statement s(db_, sql.c_str());
  s.bind(1, highlight_id);
  if (!s.step()) return std::nullopt;
  return StoredHighlight{s.text(10), read_highlight(s), s.integer(11) != 0};
}

std::vector<Highlight> DiscussionStore::user_highlights(std::string_view page_key) const {
  std::lock_guard lock(mutex_);
  return highlights_where(page_key, "user", false);
}

void DiscussionStore::add_user_highlight(std::string_view page_key, const Highlight& highlight,
                                         const EnrichmentResult& enrichment) {
  if (highlight.origin != Origin::User || text::is_blank(highlight.reason)) {
    throw Error(ErrorCode::InvalidArgument, "not a user highlight with a reason");
  }
  std::lock_guard lock(mutex_);
  {
    Statement s(db_, "SELECT 1 FROM pages WHERE page_key = ?1");
    s.bind(1, page_key);
    if (!s.step()) throw Error(ErrorCode::UnknownPage, "page has not been analyzed: " + std::string(page_key));
  }
  Transaction tx(db_);
  upsert_highlight(page_key, highlight, false);
  if (!latest_enrichment_locked(highlight.id)) insert_enrichment(highlight.id, enrichment);
  tx.commit();
}

std::optional<EnrichmentResult> DiscussionStore::latest_enrichment(std::string_view highlight_id) const {
  std::lock_guard lock(mutex_);
  return latest_enrichment_locked(highlight_id);
}

int DiscussionStore::append_enrichment(std::string_view highlight_id, const EnrichmentResult& enrichment) {
  std::lock_guard lock(mutex_);
  {
    Statement s(db_, "SELECT 1 FROM highlights WHERE id = ?1");
    s.bind(1, highlight_id);
    if (!s.step()) throw Error(ErrorCode::UnknownHighlight, "unknown highlight " + std::string(highlight_id));
  }
  insert_enrichment(highlight_id, enrichment);
  return enrichment_generations(highlight_id);
}

int DiscussionStore::enrichment_generations(std::string_view highlight_id) const {
  std::lock_guard lock(mutex_);
  Statement s(db_, "SELECT COUNT(*) FROM enrichments WHERE highlight_id = ?1");
  s.bind(1, highlight_id);
  s.step();
  return static_cast<int>(s.integer(0));
}

ChatMessage DiscussionStore::post_message(std::string_view highlight_id, std::string_view author,
                                          std::string_view body) {
  if (text::is_blank(body)) throw Error(ErrorCode::EmptyInput, "message body must not be empty");
  std::lock_guard lock(mutex_);
  {
    Statement s(db_, "SELECT archived FROM highlights WHERE id = ?1");
    s.bind(1, highlight_id);
    if (!s.step() || s.integer(0) != 0) {
      throw Error(ErrorCode::UnknownHighlight, "unknown highlight " + std::string(highlight_id));
    }
  }
  ChatMessage m{0, std::string(highlight_id), std::string(text::trim(author)), std::string(body), 0, now()};
  Statement s(db_, "INSERT INTO messages (highlight_id, author, body, created_at) VALUES (?1, ?2, ?3, ?4)");
  s.bind(1, m.highlight_id).bind(2, m.author).bind(3, m.body).bind(4, m.created_at);
  s.run();
  m.id = sqlite3_last_insert_rowid(db_);
  return m;
}

std::vector<ChatMessage> DiscussionStore::messages_for(std::string_view highlight_id) const {
  std::lock_guard lock(mutex_);
  return messages_locked(highlight_id);
}

std::optional<ChatMessage> DiscussionStore::find_message(std::int64_t message_id) const {
  std::lock_guard lock(mutex_);
  Statement s(db_,
              "SELECT m.id, m.highlight_id, m.author, m.body, m.created_at,"
              " COALESCE((SELECT SUM(direction) FROM votes v WHERE v.message_id = m.id), 0)"
              " FROM messages m WHERE m.id = ?1");
  s.bind(1, message_id);
  if (!s.step()) return std::nullopt;
  return ChatMessage{s.integer(0), s.text(1), s.text(2), s.text(3), s.integer(5), s.integer(4)};
}

std::int64_t DiscussionStore::vote(std::int64_t message_id, VoteDirection direction, const Voter& voter) {
  if (text::is_blank(voter.username)) throw Error(ErrorCode::InvalidArgument, "voter needs a username");
  std::lock_guard lock(mutex_);
  {
    Statement s(db_, "SELECT 1 FROM messages WHERE id = ?1");
    s.bind(1, message_id);
    if (!s.step()) throw Error(ErrorCode::UnknownMessage, "unknown message " + std::to_string(message_id));
  }
  std::string key = std::string(text::trim(voter.username)) + '\x1f' + std::string(text::trim(voter.session));
  {
    Statement s(db_,
                "INSERT INTO votes (message_id, voter, direction) VALUES (?1, ?2, ?3)"
                " ON CONFLICT(message_id, voter) DO UPDATE SET direction = excluded.direction");
    s.bind(1, message_id).bind(2, key).bind(3, static_cast<std::int64_t>(direction));
    s.run();
  }
  Statement s(db_, "SELECT COALESCE(SUM(direction), 0) FROM votes WHERE message_id = ?1");
  s.bind(1, message_id);
  s.step();
  return s.integer(0);
}

void DiscussionStore::log_event(const InteractionEvent& event) {
  if (text::is_blank(event.session)) throw Error(ErrorCode::InvalidArgument, "event needs a session");
  std::lock_guard lock(mutex_);
  Statement s(db_, "INSERT INTO events (session, kind, payload, at) VALUES (?1, ?2, ?3, ?4)");
  s.bind(1, event.session).bind(2, to_string(event.kind)).bind(3, event.payload);
  s.bind(4, event.at != 0 ? event.at : now());
  s.run();
}

std::vector<InteractionEvent> DiscussionStore::events(std::optional<std::string_view> session) const {
  std::lock_guard lock(mutex_);
  Statement s(db_, session ? "SELECT session, kind, payload, at FROM events WHERE session = ?1 ORDER BY seq"
                           : "SELECT session, kind, payload, at FROM events ORDER BY seq");
  if (session) s.bind(1, *session);
  std::vector<InteractionEvent> out;
  while (s.step()) {
    auto kind = parse_interaction_kind(s.text(1));
    if (!kind) throw Error(ErrorCode::Storage, "corrupt event kind " + s.text(1));
    out.push_back({s.text(0), *kind, s.text(2), s.integer(3)});
  }
  return out;
}

std::map<InteractionKind, std::size_t> DiscussionStore::event_counts(
    std::optional<std::string_view> session) const {
  std::map<InteractionKind, std::size_t> counts;
  for (auto k : kInteractionKinds) counts[k] = 0;
  for (const auto& e : events(session)) ++counts[e.kind];
  return counts;
}

void DiscussionStore::export_events(std::ostream& out) const {
  for (const auto& e : events()) {
    json line{{"session", e.session}, {"kind", to_string(e.kind)}, {"payload", e.payload}, {"at", e.at}};
    out << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
}

}  // namespace fallacyscope
