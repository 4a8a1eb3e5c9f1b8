#include <algorithm>
#include <fstream>
#include <map>

#include <gtest/gtest.h>

#include "fallacyscope/error.hpp"
#include "fallacyscope/eval/dataset.hpp"
#include "support.hpp"

using namespace fallacyscope;
using namespace fallacyscope::eval;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Storage;
}

std::vector<EvalInstance> synthetic(FallacyLabel label, std::size_t n, std::string_view tag) {
  std::vector<EvalInstance> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({std::string(tag) + " item " + std::to_string(i), label});
  return out;
}

}  // namespace

TEST(GoldLabels, Mapping) {
  EXPECT_EQ(map_gold_label("ad hominem"), FallacyLabel::AgainstThePerson);
  EXPECT_EQ(map_gold_label("false causality"), FallacyLabel::QuestionableCause);
  EXPECT_EQ(map_gold_label("fallacy of credibility"), FallacyLabel::AppealToAuthority);
  EXPECT_EQ(map_gold_label("ad populum"), FallacyLabel::AppealToPopularity);
  EXPECT_EQ(map_gold_label("appeal to emotion"), FallacyLabel::AppealToEmotion);
  EXPECT_EQ(map_gold_label("nothing"), FallacyLabel::Nothing);
  EXPECT_FALSE(map_gold_label("faulty generalization").has_value());
  EXPECT_FALSE(map_gold_label("red herring").has_value());
  EXPECT_FALSE(map_gold_label("circular reasoning").has_value());
}

TEST(Filter, RulesAppliedInOrder) {
  auto rules = FilterRules::load(std::string(DATA_DIR) + "/filters");
  std::vector<RawInstance> raw{
      {"My opponent is a crook, so ignore his budget.", "ad hominem"},
      {"My opponent is a crook, so ignore his budget.  ", "ad hominem"},           // duplicate after trim
      {"Everyone does it, so it must be fine.", "faulty generalization"},         // out of scope
      {"An ad hominem fallacy occurs when someone attacks the person.", "ad hominem"},  // definition wins over Latin
      {"That is just ad populum thinking, everyone agrees.", "ad populum"},       // Latin
      {"Which of the following is an appeal to emotion?", "appeal to emotion"},   // quiz
      {"Ice cream sales rose, and then drownings rose.", "false causality"},
      {"  ", "ad hominem"},                                                        // blank counts as duplicate
      {"The famous actor says this diet works.", "fallacy of credibility"},
  };
  auto r = filter_dataset(raw, rules);
  EXPECT_EQ(r.duplicates, 2u);
  EXPECT_EQ(r.out_of_scope, 1u);
  EXPECT_EQ(r.definitions, 1u);
  EXPECT_EQ(r.latin, 1u);
  EXPECT_EQ(r.quiz, 1u);
  ASSERT_EQ(r.kept.size(), 3u);
  EXPECT_EQ(r.kept[0].gold, FallacyLabel::AgainstThePerson);
  EXPECT_EQ(r.kept[1].gold, FallacyLabel::QuestionableCause);
  EXPECT_EQ(r.kept[2].gold, FallacyLabel::AppealToAuthority);
  EXPECT_EQ(r.duplicates + r.out_of_scope + r.definitions + r.latin + r.quiz + r.kept.size(), raw.size());

  // Filtering is idempotent.
  std::vector<RawInstance> again;
  for (const auto& k : r.kept) again.push_back({k.text, std::string(label_key(k.gold))});
  EXPECT_EQ(filter_dataset(again, rules).kept, r.kept);
}

TEST(Filter, NothingLabelledCorpusItemsAreOutOfScope) {
  auto rules = FilterRules::load(std::string(DATA_DIR) + "/filters");
  std::vector<RawInstance> raw{{"Water boils at 100 degrees at sea level.", "nothing"}};
  EXPECT_EQ(filter_dataset(raw, rules).out_of_scope, 1u);
}

TEST(Filter, BadPatternIsAConfigError) {
  testsupport::TempDir dir;
  auto path = dir.path() / "bad.txt";
  std::ofstream(path) << "# comment\n\n(unclosed\n";
  EXPECT_EQ(code_of([&] { load_patterns(path); }), ErrorCode::Config);
  std::ofstream(path) << "# comment\n\nfoo\\d+\n";
  auto p = load_patterns(path);
  EXPECT_EQ(p.sources.size(), 1u);
  EXPECT_TRUE(p.matches("a FOO12 b"));
  EXPECT_FALSE(p.matches("foo"));
}

TEST(Assemble, BookkeepingReachesSixHundredThirty) {
  std::vector<EvalInstance> filtered, fewshot;
  const std::array<std::pair<FallacyLabel, std::size_t>, 5> counts{{{FallacyLabel::AgainstThePerson, 160},
                                                                    {FallacyLabel::AppealToAuthority, 77},
                                                                    {FallacyLabel::AppealToPopularity, 136},
                                                                    {FallacyLabel::AppealToEmotion, 44},
                                                                    {FallacyLabel::QuestionableCause, 129}}};
  for (auto [label, n] : counts) {
    auto items = synthetic(label, n, label_key(label));
    filtered.insert(filtered.end(), items.begin(), items.end());
    fewshot.insert(fewshot.end(), items.begin(), items.begin() + 3);
  }
  auto facts = synthetic(FallacyLabel::Nothing, 99, "fact");
  EXPECT_EQ(filtered.size(), 546u);
  auto set = assemble_eval_set(filtered, facts, fewshot);
  EXPECT_EQ(set.size(), 630u);
  EXPECT_EQ(assemble_eval_set(filtered, {}, fewshot).size(), 531u);
  std::size_t against = 0;
  for (const auto& e : set) against += e.gold == FallacyLabel::AgainstThePerson;
  EXPECT_EQ(against, 157u);
  for (const auto& f : fewshot) EXPECT_EQ(std::count(set.begin(), set.end(), f), 0);

  std::vector<EvalInstance> stray{{"not in the filtered set", FallacyLabel::AppealToEmotion}};
  EXPECT_EQ(code_of([&] { assemble_eval_set(filtered, facts, stray); }), ErrorCode::InvalidArgument);
  std::vector<EvalInstance> bad_fact{{"x", FallacyLabel::AppealToEmotion}};
  EXPECT_EQ(code_of([&] { assemble_eval_set(filtered, bad_fact, fewshot); }), ErrorCode::InvalidArgument);
}

TEST(Assemble, BundledDataFiles) {
  auto fewshot = read_eval_jsonl(std::string(DATA_DIR) + "/fewshot.jsonl");
  auto facts = read_eval_jsonl(std::string(DATA_DIR) + "/facts_standin.jsonl");
  EXPECT_EQ(fewshot.size(), 13u);
  EXPECT_EQ(facts.size(), 99u);
  for (const auto& f : facts) EXPECT_EQ(f.gold, FallacyLabel::Nothing);
  auto set = assemble_eval_set(fewshot, facts, fewshot);
  EXPECT_EQ(set, facts);
}

TEST(Jsonl, RoundTripAndErrors) {
  testsupport::TempDir dir;
  auto path = dir.path() / "set.jsonl";
  std::vector<EvalInstance> items{{"a \"quoted\" text\nwith newline", FallacyLabel::AppealToEmotion},
                                  {"plain", FallacyLabel::Nothing}};
  write_eval_jsonl(path, items);
  EXPECT_EQ(read_eval_jsonl(path), items);

  std::ofstream(path) << R"({"text": "x", "label": "ad hominem"})" << "\n\n" << R"({"text": "y", "label": "Appeal to Popularity"})" << "\n";
  auto read = read_eval_jsonl(path);
  ASSERT_EQ(read.size(), 2u);
  EXPECT_EQ(read[1].gold, FallacyLabel::AppealToPopularity);

  std::ofstream(path) << R"({"text": "x", "label": "ad hominem"})" << "\n{broken\n";
  try {
    read_raw_jsonl(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
}

TEST(Sample, ProportionalAndDeterministic) {
  std::vector<EvalInstance> set;
  for (auto [label, n] : std::vector<std::pair<FallacyLabel, std::size_t>>{{FallacyLabel::AgainstThePerson, 157},
                                                                           {FallacyLabel::AppealToAuthority, 74},
                                                                           {FallacyLabel::AppealToPopularity, 133},
                                                                           {FallacyLabel::AppealToEmotion, 41},
                                                                           {FallacyLabel::QuestionableCause, 126},
                                                                           {FallacyLabel::Nothing, 99}}) {
    auto items = synthetic(label, n, label_key(label));
    set.insert(set.end(), items.begin(), items.end());
  }
  auto s = stratified_sample(set, 60, 7);
  ASSERT_EQ(s.size(), 60u);
  // 60 * count / 630, largest remainders rounded up: 14.95 7.05 12.67 3.90 12.00 9.43.
  std::map<FallacyLabel, std::size_t> per;
  for (const auto& e : s) ++per[e.gold];
  EXPECT_EQ(per[FallacyLabel::AgainstThePerson], 15u);
  EXPECT_EQ(per[FallacyLabel::AppealToAuthority], 7u);
  EXPECT_EQ(per[FallacyLabel::AppealToPopularity], 13u);
  EXPECT_EQ(per[FallacyLabel::AppealToEmotion], 4u);
  EXPECT_EQ(per[FallacyLabel::QuestionableCause], 12u);
  EXPECT_EQ(per[FallacyLabel::Nothing], 9u);

  EXPECT_EQ(stratified_sample(set, 60, 7), s);
  EXPECT_NE(stratified_sample(set, 60, 8), s);
  // Input order is preserved.
  std::size_t cursor = 0;
  for (const auto& e : s) {
    auto it = std::find(set.begin() + static_cast<std::ptrdiff_t>(cursor), set.end(), e);
    ASSERT_NE(it, set.end());
    cursor = static_cast<std::size_t>(it - set.begin()) + 1;
  }
  EXPECT_EQ(stratified_sample(set, 1000, 7).size(), set.size());
}
