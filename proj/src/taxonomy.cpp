#include "fallacyscope/taxonomy.hpp"

#include <string>

#include "fallacyscope/error.hpp"
#include "fallacyscope/text.hpp"

namespace fallacyscope {
namespace {

constexpr std::array<FallacyCard, kFallacyCount> kCards{{
    {FallacyLabel::AgainstThePerson, PersuasiveStrategy::Ethos, "Against the Person", "Argumentum Ad Hominem",
     "Attacking the person or some aspect of the person making the argument instead of "
     "addressing the argument directly.",
     "orange"},
    {FallacyLabel::AppealToAuthority, PersuasiveStrategy::Ethos, "Appeal to Authority",
     "Argumentum Ad Verecundiam",
     "Using an alleged authority who is not really an authority on the facts relevant to the "
     "argument as evidence.",
     "yellow"},
    {FallacyLabel::AppealToPopularity, PersuasiveStrategy::Pathos, "Appeal to Popularity",
     "Argumentum Ad Populum",
     "Affirming that something is real or better because the majority in general or of a "
     "particular group thinks so.",
     "green"},
    {FallacyLabel::AppealToEmotion, PersuasiveStrategy::Pathos, "Appeal to Emotion",
     "Argumentum Ad Passiones",
     "Manipulating the reader's emotions in order to win the argument in place of a valid "
     "reason.",
     "blue"},
    {FallacyLabel::QuestionableCause, PersuasiveStrategy::Logos, "Questionable Cause",
     "Non Causa Pro Causa",
     "Concluding that one thing caused another simply because they are regularly associated.",
     "violet"},
}};

constexpr std::array<std::string_view, kLabelCount> kKeys{
    "against_the_person", "appeal_to_authority", "appeal_to_popularity",
    "appeal_to_emotion",  "questionable_cause",  "nothing"};

// Lower-cases, maps '_' and '-' to spaces, collapses whitespace and strips
// wrapping quotes, brackets and a trailing period.
std::string canonical(std::string_view raw) {
  std::string s = text::to_lower_ascii(raw);
  for (auto& c : s) {
    if (c == '_' || c == '-') c = ' ';
  }
  s = text::collapse_whitespace(s);
  auto strip = [](char c) {
    return c == '"' || c == '\'' || c == '.' || c == '*' || c == '`' || c == '(' || c == ')' ||
           c == '[' || c == ']' || c == ':' || c == ',';
  };
  while (!s.empty() && strip(s.back())) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && strip(s[b])) ++b;
  s.erase(0, b);
  return std::string(text::trim(s));
}

}  // namespace

const FallacyCard& card_for(FallacyLabel label) {
  if (label == FallacyLabel::Nothing) {
    throw Error(ErrorCode::NoCard, "the Nothing label has no fallacy card");
  }
  return kCards[index_of(label)];
}

std::optional<PersuasiveStrategy> strategy_of(FallacyLabel label) {
  if (label == FallacyLabel::Nothing) return std::nullopt;
  return kCards[index_of(label)].strategy;
}

std::string_view to_string(PersuasiveStrategy strategy) {
  switch (strategy) {
    case PersuasiveStrategy::Ethos: return "ethos";
    case PersuasiveStrategy::Pathos: return "pathos";
    case PersuasiveStrategy::Logos: return "logos";
  }
  return "";
}

std::string_view english_name(FallacyLabel label) {
  if (label == FallacyLabel::Nothing) return "Nothing";
  return kCards[index_of(label)].english_name;
}

std::string_view latin_name(FallacyLabel label) {
  if (label == FallacyLabel::Nothing) return "";
  return kCards[index_of(label)].latin_name;
}

std::string_view label_key(FallacyLabel label) { return kKeys[index_of(label)]; }

std::optional<FallacyLabel> label_from_key(std::string_view key) {
  for (auto label : kAllLabels) {
    if (kKeys[index_of(label)] == key) return label;
  }
  return std::nullopt;
}

ParsedLabel parse_label(std::string_view raw) {
  std::string s = canonical(raw);
  if (s == "nothing") return {FallacyLabel::Nothing, false};

  constexpr std::string_view kSuffix = " fallacy";
  if (s.size() > kSuffix.size() && s.ends_with(kSuffix)) s.resize(s.size() - kSuffix.size());
  constexpr std::string_view kArgumentum = "argumentum ";
  if (s.starts_with(kArgumentum)) s.erase(0, kArgumentum.size());

  for (const auto& card : kCards) {
    auto latin = text::to_lower_ascii(card.latin_name);
    if (latin.starts_with(kArgumentum)) latin.erase(0, kArgumentum.size());
    if (s == text::to_lower_ascii(card.english_name) || s == latin) {
      return {card.label, false};
    }
  }
  return {FallacyLabel::Nothing, true};
}

}  // namespace fallacyscope
