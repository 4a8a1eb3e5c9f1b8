#include "support.hpp"

#include <chrono>
#include <random>
#include <sstream>

#include "fallacyscope/error.hpp"
#include "fallacyscope/output_parser.hpp"
#include "fallacyscope/text.hpp"

namespace testsupport {

using namespace fallacyscope;

LocalServer::LocalServer() = default;

void LocalServer::start() {
  port_ = server_.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("cannot bind a local port");
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
}

LocalServer::~LocalServer() {
  server_.stop();
  if (thread_.joinable()) thread_.join();
}

TempDir::TempDir() {
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() / ("fallacyscope-test-" + std::to_string(rd()) + "-" +
                                                    std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string replace_marker(std::string_view text, std::string_view from, std::string_view to) {
  std::string out;
  std::size_t pos = 0;
  for (auto hit = text.find(from); hit != std::string_view::npos; hit = text.find(from, pos)) {
    out.append(text.substr(pos, hit - pos)).append(to);
    pos = hit + from.size();
  }
  out.append(text.substr(pos));
  return out;
}

std::vector<std::string> slot_values(const RenderedPrompt& prompt) {
  std::string_view tpl = template_for(prompt.task);
  std::vector<std::string_view> literals;
  std::size_t pos = 0;
  for (;;) {
    auto open = tpl.find("--The ", pos);
    if (open == std::string_view::npos) break;
    auto close = tpl.find(" here--", open);
    literals.push_back(tpl.substr(pos, open - pos));
    pos = close + 7;
  }
  literals.push_back(tpl.substr(pos));

  std::string_view body = prompt.body;
  std::vector<std::string> values;
  std::size_t at = literals[0].size();
  for (std::size_t i = 1; i < literals.size(); ++i) {
    bool last = i + 1 == literals.size();
    auto next = last ? body.size() - literals[i].size() : body.find(literals[i], at);
    if (next == std::string_view::npos) throw std::runtime_error("prompt does not match its template");
    values.emplace_back(body.substr(at, next - at));
    at = next + literals[i].size();
  }
  return values;
}

ScriptedModel::ScriptedModel(std::vector<ScriptedFallacy> fallacies) : fallacies_(std::move(fallacies)) {}

namespace {

std::string first_words(std::string_view s, std::size_t n) {
  std::istringstream in{std::string(s)};
  std::string w, out;
  for (std::size_t i = 0; i < n && in >> w; ++i) out += (i ? " " : "") + w;
  return out;
}

}  // namespace

std::string ScriptedModel::operator()(const RenderedPrompt& prompt) const {
  auto slots = slot_values(prompt);
  switch (prompt.task) {
    case PromptTask::DetectFallacies: {
      std::vector<DetectedFallacy> found;
      for (const auto& f : fallacies_) {
        if (slots[0].find(f.part) == std::string::npos) continue;
        auto parsed = parse_label(f.fallacy);
        found.push_back({f.part, parsed.label, parsed.out_of_set, f.fallacy, f.explain_short, f.explain_long});
      }
      return format_detection_response(found);
    }
    case PromptTask::EnrichAiHighlight:
    case PromptTask::EnrichUserHighlight: {
      auto topic = first_words(slots[1], 5);
      EnrichmentResult e;
      for (int i = 1; i <= 8; ++i) {
        e.critical_questions.push_back("Question " + std::to_string(i) + " about \"" + topic + "\"?");
      }
      for (int i = 1; i <= 3; ++i) {
        e.critical_queries.push_back("Is it true that " + topic + " (query " + std::to_string(i) + ")?");
      }
      return format_enrichment_response(e);
    }
    case PromptTask::ReviseOwnQuery: {
      std::vector<std::string> q;
      for (int i = 1; i <= 3; ++i) q.push_back("What is known about " + slots[2] + " (" + std::to_string(i) + ")?");
      return format_revised_queries_response(q);
    }
    case PromptTask::ExtractWebContent: {
      std::vector<std::string> ex{"First relevant line: " + first_words(slots[0], 8),
                                  "Second relevant line: " + first_words(slots[1], 6)};
      return format_extracts_response(ex);
    }
    case PromptTask::SummarizeExtracts: {
      std::string summary = "The sources agree on the main points.";
      while (text::count_words(summary) < 90) summary += " They add careful context about " + slots[3] + ".";
      return format_summary_response(summary);
    }
  }
  return "nothing";
}

std::shared_ptr<FakeEndpoint> scripted_endpoint(std::vector<ScriptedFallacy> fallacies) {
  auto endpoint = std::make_shared<FakeEndpoint>();
  endpoint->set_model_id("scripted-model");
  endpoint->set_fallback(ScriptedModel(std::move(fallacies)));
  return endpoint;
}

void MapFetcher::add(std::string url, std::string content_type, std::string body) {
  pages_[url] = {url, std::move(content_type), std::move(body)};
}

FetchedPage MapFetcher::fetch(const std::string& url) {
  ++fetches_;
  auto it = pages_.find(url);
  if (it == pages_.end()) throw Error(ErrorCode::Fetch, "HTTP 404 for " + url);
  return it->second;
}

const std::string& article_text() {
  static const std::string text =
      "The city council will vote on the new bike lanes next week.\n\n"
      "Critics say the plan is rushed. Councillor Reyes supports it, but Reyes can't even ride a bike, "
      "so nobody should listen to her. "
      "Everyone in my neighbourhood already hates the lanes, so they must be a bad idea. "
      "A famous chef said on television that bike lanes ruin local business. "
      "Think of the children who will be terrified every single morning by cyclists racing past them! "
      "Since the last lane opened, two shops on Main Street closed, which proves the lanes killed them.\n\n"
      "The vote is on Tuesday at 6 pm in the town hall.";
  return text;
}

std::vector<ScriptedFallacy> article_fallacies() {
  return {
      {"Reyes can't even ride a bike, so nobody should listen to her", "ad hominem",
       "Attacks the councillor instead of the plan.",
       "Whether Reyes rides a bike says nothing about whether the plan is good; the argument targets the person."},
      {"Everyone in my neighbourhood already hates the lanes, so they must be a bad idea", "ad populum",
       "Popularity is taken as proof.", "Many people disliking the lanes does not show the lanes are a bad idea."},
      {"A famous chef said on television that bike lanes ruin local business", "appeal to authority",
       "A chef is not an authority on traffic economics.",
       "Fame in cooking does not make someone an expert on how bike lanes affect business."},
      {"two shops on Main Street closed, which proves the lanes killed them", "questionable cause",
       "Closure after the lane opened does not show the lane caused it.",
       "The shops may have closed for many reasons; sequence alone does not establish cause."},
  };
}

std::string html_page(std::string_view title, std::string_view topic) {
  std::string t(topic);
  return "<!doctype html><html><head><title>" + std::string(title) +
         "</title><script>var tracking = 1;</script><style>p{color:red}</style></head><body>"
         "<nav><a href=\"/\">Home</a> <a href=\"/about\">About</a></nav>"
         "<article><h1>" + std::string(title) + "</h1>"
         "<p>Researchers studied " + t + " across several cities over five years.</p>"
         "<p>The data showed no consistent effect of " + t + " on the outcome they measured.</p>"
         "<p>Local conditions &amp; timing mattered more than " + t + " itself.</p></article>"
         "<footer>Copyright 2024</footer></body></html>";
}

}  // namespace testsupport
