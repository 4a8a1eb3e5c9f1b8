#include <random>

#include <gtest/gtest.h>

#include "fallacyscope/error.hpp"
#include "fallacyscope/highlighter.hpp"
#include "fallacyscope/text.hpp"

using namespace fallacyscope;

namespace {

Highlight ai_at(std::size_t start, std::size_t end, FallacyLabel label = FallacyLabel::AgainstThePerson) {
  Highlight h;
  h.id = "ai-" + std::to_string(start) + "-" + std::to_string(end);
  h.origin = Origin::Ai;
  h.span = {start, end};
  h.label = label;
  return h;
}

Highlight user_at(std::size_t start, std::size_t end) {
  Highlight h;
  h.id = "user-" + std::to_string(start) + "-" + std::to_string(end);
  h.origin = Origin::User;
  h.span = {start, end};
  h.reason = "looks off";
  return h;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Storage;
}

}  // namespace

TEST(Anchor, ExactSubstring) {
  std::string src = "Some say the moon is cheese. Others disagree.";
  auto span = anchor("the moon is cheese", src);
  EXPECT_EQ(span.start, 9u);
  EXPECT_EQ(span.end, 27u);
  EXPECT_EQ(src.substr(span.start, span.end - span.start), "the moon is cheese");
}

TEST(Anchor, WhitespaceNormalization) {
  // Offsets worked out by hand: "Line one.\n\nThe  moon" -> "The" starts at byte 11.
  std::string src = "Line one.\n\nThe  moon\tis\n cheese, really.";
  auto span = anchor("The moon is  cheese", src);
  EXPECT_EQ(span.start, 11u);
  EXPECT_EQ(span.end, 31u);
  EXPECT_EQ(src.substr(span.start, span.end - span.start), "The  moon\tis\n cheese");
}

TEST(Anchor, CaseInsensitiveFallbackAndFirstOccurrence) {
  std::string src = "Cheese moon. cheese moon.";
  EXPECT_EQ(anchor("cheese moon", src).start, 13u);  // exact case wins over earlier folded match
  EXPECT_EQ(anchor("CHEESE MOON", src).start, 0u);
  EXPECT_EQ(anchor("moon", src).start, 7u);
  EXPECT_EQ(occurrences("moon", src), 2u);
}

TEST(Anchor, Failures) {
  EXPECT_EQ(code_of([] { anchor("absent", "present text"); }), ErrorCode::AnchorFailure);
  EXPECT_EQ(code_of([] { anchor("  \n", "text"); }), ErrorCode::EmptyInput);
}

TEST(Highlights, AiHighlightSlicesTheSource) {
  std::string src = "We must act.  Everyone   agrees, so it is right.";
  DetectedFallacy d{"Everyone agrees, so it is right.", FallacyLabel::AppealToPopularity, false, "ad populum", "s", "l"};
  auto h = make_ai_highlight(d, src, "https://example.org/a");
  EXPECT_EQ(h.origin, Origin::Ai);
  EXPECT_EQ(h.part, "Everyone   agrees, so it is right.");
  EXPECT_EQ(h.label, FallacyLabel::AppealToPopularity);
  EXPECT_EQ(h.id.rfind("ai-", 0), 0u);
  EXPECT_EQ(h.id.size(), 19u);
  // Same page, label and part (modulo whitespace) give the same id.
  EXPECT_EQ(h.id, ai_highlight_id("https://example.org/a", FallacyLabel::AppealToPopularity, "Everyone agrees, so it is right."));
  EXPECT_NE(h.id, ai_highlight_id("https://example.org/b", FallacyLabel::AppealToPopularity, h.part));

  DetectedFallacy outside{"x", FallacyLabel::Nothing, true, "appeal to tradition", "", ""};
  EXPECT_EQ(code_of([&] { make_ai_highlight(outside, src, "p"); }), ErrorCode::InvalidArgument);
}

TEST(Highlights, UserHighlightNeedsAReason) {
  std::string src = "Vaccines cause autism, my neighbour said.";
  auto h = make_user_highlight("Vaccines cause autism", " unsupported claim ", "sam", src, "page");
  EXPECT_EQ(h.origin, Origin::User);
  EXPECT_EQ(h.reason, "unsupported claim");
  EXPECT_FALSE(h.label.has_value());
  EXPECT_EQ(h.id.rfind("user-", 0), 0u);
  EXPECT_EQ(code_of([&] { make_user_highlight("Vaccines", "  ", "sam", src, "page"); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([&] { make_user_highlight("absent", "why", "sam", src, "page"); }), ErrorCode::AnchorFailure);
}

TEST(Merge, OverlapCases) {
  // Enumerated by hand: disjoint, touching, nested, partial overlap, identical start.
  auto out = merge({ai_at(0, 5), ai_at(5, 9)}, {});
  EXPECT_EQ(out.size(), 2u);  // touching spans do not overlap
  out = merge({ai_at(10, 20), ai_at(0, 12)}, {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].span.start, 0u);  // smaller start wins
  out = merge({ai_at(0, 20), ai_at(5, 8)}, {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].span.end, 20u);
  out = merge({ai_at(3, 6), ai_at(3, 9)}, {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].span.end, 6u);  // same start: the earlier one in input order
}

TEST(Merge, UserHighlightsAreNeverDropped) {
  auto out = merge({ai_at(0, 10)}, {user_at(2, 4), user_at(2, 4)});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].origin, Origin::Ai);
  EXPECT_EQ(out[1].origin, Origin::User);
}

TEST(Summary, CountsAiHighlightsOnly) {
  EXPECT_EQ(summarize({}).total, 0u);
  std::vector<Highlight> hs{ai_at(0, 1), ai_at(2, 3), ai_at(4, 5, FallacyLabel::QuestionableCause), user_at(6, 7)};
  auto s = summarize(hs);
  EXPECT_EQ(s.total, 3u);
  EXPECT_EQ(s.counts, (std::array<std::size_t, kFallacyCount>{2, 0, 0, 0, 1}));
  EXPECT_EQ(s.count(FallacyLabel::Nothing), 0u);
}

TEST(Summary, FourMixedHighlights) {
  std::vector<Highlight> hs{ai_at(0, 1, FallacyLabel::AgainstThePerson), ai_at(2, 3, FallacyLabel::AppealToEmotion),
                            ai_at(4, 5, FallacyLabel::QuestionableCause), ai_at(6, 7, FallacyLabel::AppealToAuthority)};
  auto s = summarize(hs);
  EXPECT_EQ(s.total, 4u);
  std::size_t sum = 0;
  for (auto c : s.counts) sum += c;
  EXPECT_EQ(sum, s.total);
}

// Property: random sources, parts cut from them, whitespace perturbed.
TEST(AnchorProperty, PerturbedPartsSliceBackUnderNormalization) {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> nwords(5, 60), wlen(1, 8), ch('a', 'e'), sep(0, 5);
  static const char* kSeps[] = {" ", "  ", "\n", "\t", " \n ", "\xC2\xA0"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> words(static_cast<std::size_t>(nwords(rng)));
    for (auto& w : words) {
      for (int k = wlen(rng); k > 0; --k) w.push_back(static_cast<char>(ch(rng)));
    }
    std::string src;
    for (std::size_t i = 0; i < words.size(); ++i) src += (i ? kSeps[sep(rng)] : "") + words[i];
    std::uniform_int_distribution<std::size_t> a(0, words.size() - 1);
    auto i = a(rng), j = a(rng);
    if (i > j) std::swap(i, j);
    std::string part;
    for (auto k = i; k <= j; ++k) part += (k > i ? kSeps[sep(rng)] : "") + words[k];
    auto span = anchor(part, src);
    ASSERT_LT(span.start, span.end);
    ASSERT_LE(span.end, src.size());
    EXPECT_EQ(text::collapse_whitespace(src.substr(span.start, span.end - span.start)), text::collapse_whitespace(part));
  }
}

TEST(MergeProperty, NonOverlappingAndIdempotent) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<std::size_t> pos(0, 200), len(1, 30), count(0, 12);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Highlight> ai, user;
    for (auto n = count(rng); n > 0; --n) {
      auto s = pos(rng);
      ai.push_back(ai_at(s, s + len(rng)));
    }
    for (auto n = count(rng) / 3; n > 0; --n) {
      auto s = pos(rng);
      user.push_back(user_at(s, s + len(rng)));
    }
    auto out = merge(ai, user);
    std::vector<Highlight> ai_out, user_out;
    for (const auto& h : out) (h.origin == Origin::Ai ? ai_out : user_out).push_back(h);
    EXPECT_EQ(user_out.size(), user.size());
    for (std::size_t x = 0; x < ai_out.size(); ++x) {
      for (std::size_t y = x + 1; y < ai_out.size(); ++y) EXPECT_FALSE(overlaps(ai_out[x].span, ai_out[y].span));
    }
    EXPECT_EQ(merge(ai_out, user_out), out);
  }
}
