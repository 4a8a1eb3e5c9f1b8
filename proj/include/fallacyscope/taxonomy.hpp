#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace fallacyscope {

enum class FallacyLabel : std::uint8_t {
  AgainstThePerson,
  AppealToAuthority,
  AppealToPopularity,
  AppealToEmotion,
  QuestionableCause,
  Nothing,
};

inline constexpr std::size_t kFallacyCount = 5;
inline constexpr std::size_t kLabelCount = 6;

inline constexpr std::array<FallacyLabel, kFallacyCount> kFallacies{
    FallacyLabel::AgainstThePerson, FallacyLabel::AppealToAuthority,
    FallacyLabel::AppealToPopularity, FallacyLabel::AppealToEmotion,
    FallacyLabel::QuestionableCause};

/// Five fallacies followed by Nothing; the row/column order of every matrix.
inline constexpr std::array<FallacyLabel, kLabelCount> kAllLabels{
    FallacyLabel::AgainstThePerson,   FallacyLabel::AppealToAuthority,
    FallacyLabel::AppealToPopularity, FallacyLabel::AppealToEmotion,
    FallacyLabel::QuestionableCause,  FallacyLabel::Nothing};

constexpr std::size_t index_of(FallacyLabel label) {
  return static_cast<std::size_t>(label);
}

enum class PersuasiveStrategy : std::uint8_t { Ethos, Pathos, Logos };

struct FallacyCard {
  FallacyLabel label;
  PersuasiveStrategy strategy;
  std::string_view english_name;
  std::string_view latin_name;
  std::string_view definition;
  std::string_view color_token;
};

inline constexpr std::string_view kUserHighlightColor = "light-red";

/// Throws Error{NoCard} for Nothing.
const FallacyCard& card_for(FallacyLabel label);

std::optional<PersuasiveStrategy> strategy_of(FallacyLabel label);
std::string_view to_string(PersuasiveStrategy strategy);

/// "Against the Person", ..., "Nothing".
std::string_view english_name(FallacyLabel label);
/// "ad hominem", ...; empty for Nothing.
std::string_view latin_name(FallacyLabel label);
/// Stable snake_case identifier used on the wire: "against_the_person", ...
std::string_view label_key(FallacyLabel label);
std::optional<FallacyLabel> label_from_key(std::string_view key);

struct ParsedLabel {
  FallacyLabel label = FallacyLabel::Nothing;
  bool out_of_set = false;
};

/// Total: unknown names collapse to Nothing with out_of_set set.
ParsedLabel parse_label(std::string_view raw);

}  // namespace fallacyscope
