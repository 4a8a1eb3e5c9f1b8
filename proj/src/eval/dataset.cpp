#include "fallacyscope/eval/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "fallacyscope/error.hpp"
#include "fallacyscope/text.hpp"

namespace fallacyscope::eval {
namespace {

using json = nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  return in;
}

template <class Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string() ||
        !j.contains("label") || !j["label"].is_string()) {
      throw Error(ErrorCode::InvalidArgument,
                  path.string() + ":" + std::to_string(line_no) + ": expected {\"text\", \"label\"}");
    }
    fn(j["text"].get<std::string>(), j["label"].get<std::string>(), line_no);
  }
}

}  // namespace

std::optional<FallacyLabel> map_gold_label(std::string_view raw) {
  auto key = text::collapse_whitespace(text::to_lower_ascii(raw));
  std::replace(key.begin(), key.end(), '_', ' ');
  if (key == "false causality") return FallacyLabel::QuestionableCause;
  if (key == "fallacy of credibility") return FallacyLabel::AppealToAuthority;
  auto parsed = parse_label(key);
  if (parsed.out_of_set) return std::nullopt;
  return parsed.label;
}

std::vector<RawInstance> read_raw_jsonl(const std::filesystem::path& path) {
  std::vector<RawInstance> out;
  for_each_record(path, [&](std::string t, std::string l, std::size_t) {
    out.push_back({std::move(t), std::move(l)});
  });
  return out;
}

std::vector<EvalInstance> read_eval_jsonl(const std::filesystem::path& path) {
  std::vector<EvalInstance> out;
  for_each_record(path, [&](std::string t, std::string l, std::size_t line_no) {
    auto label = label_from_key(l);
    if (!label) label = map_gold_label(l);
    if (!label) {
      throw Error(ErrorCode::InvalidArgument,
                  path.string() + ":" + std::to_string(line_no) + ": label outside the taxonomy: " + l);
    }
    out.push_back({std::move(t), *label});
  });
  return out;
}

void write_eval_jsonl(const std::filesystem::path& path, std::span<const EvalInstance> instances) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  for (const auto& i : instances) {
    out << json{{"text", i.text}, {"label", label_key(i.gold)}}.dump(-1, ' ', false,
                                                                     json::error_handler_t::replace)
        << '\n';
  }
}

bool PatternList::matches(std::string_view text) const {
  return std::any_of(patterns.begin(), patterns.end(), [&](const std::regex& re) {
    return std::regex_search(text.begin(), text.end(), re);
  });
}

PatternList load_patterns(const std::filesystem::path& path) {
  auto in = open_input(path);
  PatternList list;
  list.name = path.stem().string();
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      list.patterns.emplace_back(std::string(t), std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::Config, "bad pattern in " + path.string() + ": " + std::string(t), e.what());
    }
    list.sources.emplace_back(t);
  }
  return list;
}

FilterRules FilterRules::load(const std::filesystem::path& dir) {
  return {load_patterns(dir / "definition_patterns.txt"), load_patterns(dir / "latin_patterns.txt"),
          load_patterns(dir / "quiz_patterns.txt")};
}

FilterResult filter_dataset(std::span<const RawInstance> raw, const FilterRules& rules) {
  FilterResult result;
  std::set<std::string, std::less<>> seen;
  for (const auto& r : raw) {
    auto t = std::string(text::trim(r.text));
    if (t.empty() || !seen.insert(t).second) {
      ++result.duplicates;
      continue;
    }
    auto label = map_gold_label(r.label);
    if (!label || *label == FallacyLabel::Nothing) {
      ++result.out_of_scope;
    } else if (rules.definition.matches(t)) {
      ++result.definitions;
    } else if (rules.latin.matches(t)) {
      ++result.latin;
    } else if (rules.quiz.matches(t)) {
      ++result.quiz;
    } else {
      result.kept.push_back({std::move(t), *label});
    }
  }
  return result;
}

std::vector<EvalInstance> assemble_eval_set(std::span<const EvalInstance> filtered,
                                            std::span<const EvalInstance> facts,
                                            std::span<const EvalInstance> fewshot) {
  std::set<std::string_view> filtered_texts;
  for (const auto& i : filtered) filtered_texts.insert(i.text);
  std::set<std::string_view> excluded;
  for (const auto& i : fewshot) {
    if (!filtered_texts.contains(i.text)) {
      throw Error(ErrorCode::InvalidArgument, "few-shot example is not in the filtered set", i.text);
    }
    excluded.insert(i.text);
  }
  std::vector<EvalInstance> out;
  std::set<std::string_view> taken;
  for (const auto& i : filtered) {
    if (excluded.contains(i.text) || !taken.insert(i.text).second) continue;
    out.push_back(i);
  }
  for (const auto& i : facts) {
    if (i.gold != FallacyLabel::Nothing) {
      throw Error(ErrorCode::InvalidArgument, "fact instances must be labelled nothing", i.text);
    }
    if (excluded.contains(i.text) || !taken.insert(i.text).second) continue;
    out.push_back(i);
  }
  return out;
}

std::vector<EvalInstance> stratified_sample(std::span<const EvalInstance> instances, std::size_t n,
                                            std::uint64_t seed) {
  if (n >= instances.size()) return {instances.begin(), instances.end()};
  std::map<FallacyLabel, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < instances.size(); ++i) strata[instances[i].gold].push_back(i);

  // Largest-remainder allocation; ties go to the earlier label.
  struct Share {
    FallacyLabel label;
    std::size_t base;
    std::size_t remainder;  // scaled by instances.size()
  };
  std::vector<Share> shares;
  std::size_t allocated = 0;
  for (const auto& [label, idx] : strata) {
    auto scaled = idx.size() * n;
    shares.push_back({label, scaled / instances.size(), scaled % instances.size()});
    allocated += shares.back().base;
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return shares[a].remainder > shares[b].remainder; });
  for (std::size_t k = 0; allocated < n; ++k, ++allocated) ++shares[order[k % order.size()]].base;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> picked;
  for (const auto& s : shares) {
    auto idx = strata[s.label];
    std::shuffle(idx.begin(), idx.end(), rng);
    picked.insert(picked.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s.base));
  }
  std::sort(picked.begin(), picked.end());
  std::vector<EvalInstance> out;
  out.reserve(picked.size());
  for (auto i : picked) out.push_back(instances[i]);
  return out;
}

}  // namespace fallacyscope::eval
