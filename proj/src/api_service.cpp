#include "fallacyscope/api_service.hpp"

#include <charconv>
#include <future>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "fallacyscope/error.hpp"
#include "fallacyscope/prompt_engine.hpp"
#include "fallacyscope/text.hpp"
#include "fallacyscope/url.hpp"

namespace fallacyscope {
namespace {

using json = nlohmann::json;

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput:
    case ErrorCode::AnchorMismatch:
    case ErrorCode::Arity:
    case ErrorCode::InvalidArgument:
      return 400;
    case ErrorCode::UnknownHighlight:
    case ErrorCode::UnknownMessage:
    case ErrorCode::UnknownPage:
    case ErrorCode::NoFindings:
    case ErrorCode::NoCard:
      return 404;
    case ErrorCode::AnchorFailure:
      return 422;
    case ErrorCode::Unavailable:
    case ErrorCode::Upstream:
    case ErrorCode::Unparseable:
    case ErrorCode::Config:
    case ErrorCode::Fetch:
      return 502;
    case ErrorCode::Deadline:
      return 504;
    default:
      return 500;
  }
}

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
  return {status, dump(json{{"code", code}, {"message", message}})};
}

std::string require_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::string optional_string(const json& body, const char* key) {
  auto it = body.find(key);
  return it != body.end() && it->is_string() ? it->get<std::string>() : std::string();
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    auto slash = path.find('/');
    auto seg = path.substr(0, slash);
    if (!seg.empty()) parts.push_back(seg);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

json enrichment_json(const EnrichmentResult& e) {
  return {{"critical_questions", e.critical_questions},
          {"critical_queries", e.critical_queries},
          {"questions_shortfall", e.questions_shortfall},
          {"queries_shortfall", e.queries_shortfall}};
}

json highlight_json(const Highlight& h, std::string_view text) {
  json j{{"id", h.id},
         {"origin", to_string(h.origin)},
         {"start", h.span.start},
         {"end", h.span.end},
         {"start_utf16", text::utf16_offset(text, h.span.start)},
         {"end_utf16", text::utf16_offset(text, h.span.end)},
         {"part", h.part},
         {"explain_short", h.explain_short},
         {"explain_long", h.explain_long}};
  if (h.label) {
    const auto& card = card_for(*h.label);
    j["label"] = label_key(card.label);
    j["fallacy"] = card.english_name;
    j["latin"] = card.latin_name;
    j["strategy"] = to_string(card.strategy);
    j["definition"] = card.definition;
    j["color"] = card.color_token;
  } else {
    j["reason"] = h.reason;
    j["author"] = h.author;
    j["color"] = kUserHighlightColor;
  }
  return j;
}

json message_json(const ChatMessage& m) {
  return {{"id", m.id},
          {"highlight_id", m.highlight_id},
          {"author", m.author},
          {"body", m.body},
          {"votes", m.votes},
          {"created_at", m.created_at}};
}

json summary_json(const FallacySummary& s) {
  json counts = json::object();
  for (auto label : kFallacies) counts[std::string(label_key(label))] = s.count(label);
  return {{"counts", counts}, {"total", s.total}};
}

std::int64_t parse_id(std::string_view raw) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec != std::errc{} || p != raw.data() + raw.size()) {
    throw Error(ErrorCode::UnknownMessage, "unknown message " + std::string(raw));
  }
  return v;
}

}  // namespace

ApiService::ApiService(LlmGateway& llm, DiscussionStore& store, ProbePipeline* probe)
    : llm_(llm), store_(store), probe_(probe) {}

ApiResponse ApiService::handle(const ApiRequest& request) {
  auto parts = split_path(request.path);
  const auto& m = request.method;
  auto body = [&] {
    auto j = json::parse(request.body.empty() ? std::string("{}") : request.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    }
    return j;
  };
  auto ok = [](const json& j) { return ApiResponse{200, dump(j)}; };

  try {
    auto n = parts.size();
    if (m == "GET" && n == 1 && parts[0] == "healthz") {
      return ok({{"status", "ok"}, {"model", llm_.model_id()}});
    }
    if (m == "POST" && n == 1 && parts[0] == "analyze") return ok(analyze(body()));
    if (m == "GET" && n == 1 && parts[0] == "pages") return ok(page(request.query));
    if (m == "POST" && n == 1 && parts[0] == "highlights") return ok(add_user_highlight(body()));
    if (n == 3 && parts[0] == "highlights") {
      std::string id(parts[1]);
      if (m == "POST" && parts[2] == "own-query") return ok(own_query(id, body()));
      if (m == "GET" && parts[2] == "questions") {
        auto it = request.query.find("refresh");
        bool refresh = it != request.query.end() && (it->second == "true" || it->second == "1");
        return ok(questions(id, refresh));
      }
      if (m == "POST" && parts[2] == "messages") return ok(post_message(id, body()));
      if (m == "GET" && parts[2] == "messages") return ok(list_messages(id));
    }
    if (m == "POST" && n == 2 && parts[0] == "queries" && parts[1] == "findings") return ok(findings(body()));
    if (m == "POST" && n == 3 && parts[0] == "messages" && parts[2] == "vote") {
      return ok(vote(std::string(parts[1]), body()));
    }
    if (m == "POST" && n == 1 && parts[0] == "events") return ok(log_event(body()));
    if (m == "GET" && n == 2 && parts[0] == "events" && parts[1] == "counts") return ok(event_counts(request.query));
    if (m == "GET" && n == 2 && parts[0] == "events" && parts[1] == "export") {
      std::ostringstream out;
      store_.export_events(out);
      return {200, out.str(), "application/x-ndjson"};
    }
    return error_response(404, "not_found", "no route for " + m + " " + request.path);
  } catch (const Error& e) {
    int status = status_for(e.code());
    if (status >= 500) spdlog::warn("{} {} failed: {}", m, request.path, e.what());
    return error_response(status, to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    spdlog::error("{} {} failed: {}", m, request.path, e.what());
    return error_response(500, "internal", e.what());
  }
}

void ApiService::mount(httplib::Server& server) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request{req.method, req.path, req.body, {}};
    for (const auto& [k, v] : req.params) request.query.emplace(k, v);
    auto response = handle(request);
    res.status = response.status;
    res.set_content(response.body, response.content_type);
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

EnrichmentResult ApiService::enrich(const Highlight& highlight, std::string_view text) {
  auto prompt = highlight.origin == Origin::Ai
                    ? render_enrichment(text, highlight.part,
                                        text::to_lower_ascii(english_name(*highlight.label)))
                    : render_user_highlight(text, highlight.part, highlight.reason);
  auto raw = llm_.complete(prompt).raw_text;
  return parse_enrichment(raw);
}

StoredHighlight ApiService::require_highlight(const std::string& id) const {
  auto found = store_.find_highlight(id);
  if (!found) throw Error(ErrorCode::UnknownHighlight, "unknown highlight " + id);
  return *found;
}

json ApiService::analyze(const json& body) {
  auto page_key = canonical_page_key(require_string(body, "page_key"));
  auto text = require_string(body, "text");
  if (text::is_blank(page_key)) throw Error(ErrorCode::InvalidArgument, "page_key must not be empty");
  if (text::is_blank(text)) throw Error(ErrorCode::EmptyInput, "text must not be empty");

  auto raw = llm_.complete(render_detection(text)).raw_text;
  std::vector<DetectedFallacy> detections;
  std::string_view status = "ok";
  try {
    detections = parse_detection(raw, text);
    if (detections.empty()) status = "nothing";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unparseable) throw;
    spdlog::warn("detection output for {} is unparseable; treating it as no findings", page_key);
    status = "unparseable";
  }

  std::vector<Highlight> ai;
  std::size_t unanchored = 0, out_of_set = 0;
  for (const auto& d : detections) {
    if (d.out_of_set || d.label == FallacyLabel::Nothing) {
      ++out_of_set;
      continue;
    }
    try {
      ai.push_back(make_ai_highlight(d, text, page_key));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AnchorFailure) throw;
      spdlog::info("dropping detection that does not anchor in {}: {}", page_key, d.part);
      ++unanchored;
    }
  }
  auto merged = merge(std::move(ai), {});

  // Eager enrichment for AI highlights without a stored set.
  std::vector<std::pair<std::string, std::future<EnrichmentResult>>> pending;
  for (const auto& h : merged) {
    if (store_.latest_enrichment(h.id)) continue;
    pending.emplace_back(h.id, std::async(std::launch::async, [this, &h, &text] {
                           try {
                             return enrich(h, text);
                           } catch (const Error& e) {
                             if (e.code() != ErrorCode::Unparseable) throw;
                             spdlog::warn("enrichment for {} unparseable", h.id);
                             EnrichmentResult empty;
                             empty.questions_shortfall = empty.queries_shortfall = true;
                             return empty;
                           }
                         }));
  }
  std::map<std::string, EnrichmentResult> enrichments;
  for (auto& [id, f] : pending) enrichments.emplace(id, f.get());

  auto record = store_.save_page_analysis(page_key, text, merged, enrichments);

  json highlights = json::array();
  for (const auto& h : record.highlights) {
    auto j = highlight_json(h, record.text);
    if (auto e = record.enrichments.find(h.id); e != record.enrichments.end()) {
      j["enrichment"] = enrichment_json(e->second);
    }
    highlights.push_back(std::move(j));
  }
  return {{"page_key", page_key},
          {"highlights", highlights},
          {"summary", summary_json(summarize(record.highlights))},
          {"disclosed_accuracy", kDisclosedAccuracy},
          {"detection_status", status},
          {"dropped", {{"unanchored", unanchored}, {"out_of_set", out_of_set}}}};
}

json ApiService::page(const std::map<std::string, std::string>& query) {
  auto it = query.find("page_key");
  if (it == query.end()) throw Error(ErrorCode::InvalidArgument, "missing page_key");
  auto record = store_.load_page(canonical_page_key(it->second));
  if (!record) throw Error(ErrorCode::UnknownPage, "page has not been analyzed");
  json highlights = json::array();
  for (const auto& h : record->highlights) {
    auto j = highlight_json(h, record->text);
    if (auto e = record->enrichments.find(h.id); e != record->enrichments.end()) {
      j["enrichment"] = enrichment_json(e->second);
    }
    json messages = json::array();
    if (auto ms = record->messages.find(h.id); ms != record->messages.end()) {
      for (const auto& msg : ms->second) messages.push_back(message_json(msg));
    }
    j["messages"] = std::move(messages);
    highlights.push_back(std::move(j));
  }
  return {{"page_key", record->page_key},
          {"highlights", highlights},
          {"summary", summary_json(summarize(record->highlights))},
          {"disclosed_accuracy", kDisclosedAccuracy}};
}

json ApiService::add_user_highlight(const json& body) {
  auto page_key = canonical_page_key(require_string(body, "page_key"));
  auto part = require_string(body, "part");
  auto reason = require_string(body, "reason");
  auto author = optional_string(body, "author");
  if (text::is_blank(reason)) throw Error(ErrorCode::EmptyInput, "a reason is required");
  auto record = store_.load_page(page_key);
  if (!record) throw Error(ErrorCode::UnknownPage, "page has not been analyzed: " + page_key);

  auto highlight = make_user_highlight(part, reason, author, record->text, page_key);
  auto enrichment = store_.latest_enrichment(highlight.id);
  if (!enrichment) enrichment = enrich(highlight, record->text);
  store_.add_user_highlight(page_key, highlight, *enrichment);
  return {{"highlight", highlight_json(highlight, record->text)}, {"enrichment", enrichment_json(*enrichment)}};
}

json ApiService::own_query(const std::string& highlight_id, const json& body) {
  auto terms = require_string(body, "search_terms");
  if (text::is_blank(terms)) throw Error(ErrorCode::EmptyInput, "search terms must not be empty");
  auto stored = require_highlight(highlight_id);
  auto record = store_.load_page(stored.page_key);
  if (!record) throw Error(ErrorCode::UnknownPage, "page has not been analyzed");
  auto raw = llm_.complete(render_own_query(record->text, stored.highlight.part, terms)).raw_text;
  auto revised = parse_revised_queries(raw);
  return {{"highlight_id", highlight_id}, {"queries", revised.queries}, {"shortfall", revised.shortfall}};
}

json ApiService::questions(const std::string& highlight_id, bool refresh) {
  auto stored = require_highlight(highlight_id);
  std::optional<EnrichmentResult> current;
  if (!refresh) current = store_.latest_enrichment(highlight_id);
  if (!current) {
    auto record = store_.load_page(stored.page_key);
    if (!record) throw Error(ErrorCode::UnknownPage, "page has not been analyzed");
    current = enrich(stored.highlight, record->text);
    store_.append_enrichment(highlight_id, *current);
  }
  return {{"highlight_id", highlight_id},
          {"generation", store_.enrichment_generations(highlight_id)},
          {"critical_questions", current->critical_questions},
          {"critical_queries", current->critical_queries},
          {"questions_shortfall", current->questions_shortfall}};
}

json ApiService::findings(const json& body) {
  auto query = require_string(body, "query");
  if (text::is_blank(query)) throw Error(ErrorCode::EmptyInput, "query must not be empty");
  if (!probe_) throw Error(ErrorCode::Config, "no search provider configured");
  auto found = probe_->run_findings(query);
  json sources = json::array();
  for (const auto& s : found.sources) {
    sources.push_back({{"title", s.hit.title},
                       {"url", s.hit.url},
                       {"snippet", s.hit.snippet},
                       {"extracts", s.extracts.extracts}});
  }
  json skipped = json::array();
  for (const auto& s : found.skipped) skipped.push_back({{"url", s.url}, {"reason", s.reason}});
  json out{{"query", found.query},
           {"summary", found.summary.summary},
           {"word_count", found.summary.word_count},
           {"length_conformant", found.summary.length_conformant},
           {"references", found.references},
           {"sources", sources},
           {"padded_lists", found.padded_lists},
           {"skipped", skipped}};
  if (found.summary_error) out["summary_error"] = *found.summary_error;
  return out;
}

json ApiService::post_message(const std::string& highlight_id, const json& body) {
  auto message = store_.post_message(highlight_id, optional_string(body, "author"),
                                     require_string(body, "body"));
  return message_json(message);
}

json ApiService::list_messages(const std::string& highlight_id) {
  require_highlight(highlight_id);
  json out = json::array();
  for (const auto& msg : store_.messages_for(highlight_id)) out.push_back(message_json(msg));
  return {{"highlight_id", highlight_id}, {"messages", out}};
}

json ApiService::vote(const std::string& message_id, const json& body) {
  auto id = parse_id(message_id);
  VoteDirection direction;
  auto d = body.find("direction");
  if (d != body.end() && ((d->is_string() && *d == "up") || (d->is_number_integer() && *d == 1))) {
    direction = VoteDirection::Up;
  } else if (d != body.end() && ((d->is_string() && *d == "down") || (d->is_number_integer() && *d == -1))) {
    direction = VoteDirection::Down;
  } else {
    throw Error(ErrorCode::InvalidArgument, "direction must be \"up\" or \"down\"");
  }
  Voter voter{require_string(body, "voter"), optional_string(body, "session")};
  return {{"message_id", id}, {"votes", store_.vote(id, direction, voter)}};
}

json ApiService::log_event(const json& body) {
  auto kind = parse_interaction_kind(require_string(body, "kind"));
  if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown interaction kind");
  InteractionEvent event{require_string(body, "session"), *kind, "", 0};
  if (auto p = body.find("payload"); p != body.end()) event.payload = p->is_string() ? p->get<std::string>() : dump(*p);
  store_.log_event(event);
  return {{"logged", true}};
}

json ApiService::event_counts(const std::map<std::string, std::string>& query) {
  std::optional<std::string_view> session;
  if (auto it = query.find("session"); it != query.end()) session = it->second;
  json counts = json::object();
  for (const auto& [kind, n] : store_.event_counts(session)) counts[std::string(to_string(kind))] = n;
  return {{"counts", counts}};
}

}  // namespace fallacyscope
