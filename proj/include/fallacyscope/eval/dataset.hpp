#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fallacyscope/taxonomy.hpp"

namespace fallacyscope::eval {

/// A record as it appears in the source corpus: free-form label string.
struct RawInstance {
  std::string text;
  std::string label;
};

struct EvalInstance {
  std::string text;
  FallacyLabel gold = FallacyLabel::Nothing;

  friend bool operator==(const EvalInstance&, const EvalInstance&) = default;
};

/// Corpus label -> taxonomy label. Accepts the taxonomy's own names plus the
/// corpus aliases "false causality" and "fallacy of credibility". Anything
/// else (the corpus's other fallacy classes) is out of scope.
std::optional<FallacyLabel> map_gold_label(std::string_view raw);

/// Line-delimited {"text", "label"} records. Blank lines are skipped; a
/// malformed line throws Error{InvalidArgument} naming the line number.
std::vector<RawInstance> read_raw_jsonl(const std::filesystem::path& path);
std::vector<EvalInstance> read_eval_jsonl(const std::filesystem::path& path);
void write_eval_jsonl(const std::filesystem::path& path, std::span<const EvalInstance> instances);

struct PatternList {
  std::string name;
  std::vector<std::string> sources;
  std::vector<std::regex> patterns;  // ECMAScript, case-insensitive

  bool matches(std::string_view text) const;
};

/// One regex per line; blank lines and lines starting with '#' ignored.
PatternList load_patterns(const std::filesystem::path& path);

struct FilterRules {
  PatternList definition;  // (c) items that only define or describe a fallacy
  PatternList latin;       // (d) items naming a fallacy by its Latin phrase
  PatternList quiz;        // (e) quiz scaffolding

  /// Reads definition_patterns.txt, latin_patterns.txt and quiz_patterns.txt.
  static FilterRules load(const std::filesystem::path& dir);
};

struct FilterResult {
  std::vector<EvalInstance> kept;  // input order
  std::size_t duplicates = 0;
  std::size_t out_of_scope = 0;
  std::size_t definitions = 0;
  std::size_t latin = 0;
  std::size_t quiz = 0;
};

/// Applies the exclusion rules in order: duplicate text (first occurrence
/// survives), out-of-scope label, definition, Latin phrase, quiz phrasing.
FilterResult filter_dataset(std::span<const RawInstance> raw, const FilterRules& rules);

/// filtered ∪ facts − fewshot. Throws Error{InvalidArgument} when a
/// few-shot item is not in `filtered` or a fact is not labelled Nothing.
std::vector<EvalInstance> assemble_eval_set(std::span<const EvalInstance> filtered,
                                            std::span<const EvalInstance> facts,
                                            std::span<const EvalInstance> fewshot);

/// Proportional stratified sample by gold label (largest remainder), in
/// input order. Deterministic for a given seed.
std::vector<EvalInstance> stratified_sample(std::span<const EvalInstance> instances, std::size_t n,
                                            std::uint64_t seed);

}  // namespace fallacyscope::eval
