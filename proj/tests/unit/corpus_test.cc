#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "asb/corpus.h"
#include "asb/error.h"
#include "testing.h"

namespace asb {
namespace {

const char* kTwoConversations =
    R"({"conversation_id":"c2","message_id":"b1","seq":1,"author_id":"y","text":"ok","sentiment":"positive","abuse":"non_abusive","discursive_role":"empathy","participant_role":"victim_support"}
{"conversation_id":"c1","message_id":"a0","seq":0,"author_id":"x","text":"hi","sentiment":"negative","abuse":"abusive","discursive_role":"attack","participant_role":"bully"}
{"conversation_id":"c1","message_id":"a1","seq":1,"author_id":"w","text":"so","sentiment":"neutral","abuse":"unlabeled","discursive_role":"unlabeled","participant_role":"unlabeled"}
{"conversation_id":"c2","message_id":"b0","seq":0,"author_id":"z","text":"yo","sentiment":"neutral","abuse":"abusive","discursive_role":"other","participant_role":"conciliator"}
)";

TEST(Corpus, GroupsAndOrdersBySeq) {
  std::istringstream in(kTwoConversations);
  const Corpus c = parse_corpus(in);
  ASSERT_EQ(c.conversations().size(), 2u);
  EXPECT_EQ(c.conversations()[0].conversation_id, "c1");
  EXPECT_EQ(c.conversations()[1].messages[0].message_id, "b0");
  EXPECT_EQ(c.conversation_of("b1").conversation_id, "c2");
  EXPECT_EQ(c.message_count(), 4u);
}

TEST(Corpus, WriteParseIsByteStable) {
  std::istringstream in(kTwoConversations);
  const Corpus c = parse_corpus(in);
  std::ostringstream a;
  write_corpus(c, a);
  std::istringstream again(a.str());
  std::ostringstream b;
  write_corpus(parse_corpus(again), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Corpus, DuplicateIdIsDataError) {
  std::istringstream in(
      R"({"conversation_id":"c","message_id":"m","seq":0,"author_id":"a","text":"x"}
{"conversation_id":"c","message_id":"m","seq":1,"author_id":"a","text":"y"}
)");
  EXPECT_THROW(parse_corpus(in), DataError);
}

TEST(Corpus, UnknownEnumFallsBackAndIsCounted) {
  std::istringstream in(
      R"({"conversation_id":"c","message_id":"m","seq":0,"author_id":"a","text":"x","sentiment":"grumpy"}
{"conversation_id":"c","message_id":"n","seq":1,"author_id":"b","text":"y","sentiment":"positive"}
)");
  const Corpus c = parse_corpus(in);
  EXPECT_EQ(c.unknown_enum_count(), 1u);
  EXPECT_EQ(c.message("m").sentiment, Sentiment::kNeutral);
}

TEST(Corpus, TaskInstancesFollowLabelRules) {
  std::istringstream in(kTwoConversations);
  const Corpus c = parse_corpus(in);
  EXPECT_EQ(build_task_instances(c, Task::kAbd).size(), 3u);
  const auto bba = build_task_instances(c, Task::kBba);
  ASSERT_EQ(bba.size(), 2u);  // "other" has no BBA label
  EXPECT_EQ(bba[0].label, "CBB");
  EXPECT_EQ(bba[1].label, "NO_CBB");
  EXPECT_EQ(build_task_instances(c, Task::kBpi).size(), 2u);  // conciliators excluded
  EXPECT_THROW(parse_task("xyz"), UsageError);
}

TEST(Splits, StratifiedDisjointAndDeterministic) {
  const auto inst = testing::instances_with_counts(Task::kBpi, {{"victim", 165}, {"victim_support", 248},
                                                                {"bully", 216}, {"bully_support", 263}});
  const SplitPlan a = make_splits(inst, 5, 0.7, 11);
  const SplitPlan b = make_splits(inst, 5, 0.7, 11);
  EXPECT_EQ(a.assignments, b.assignments);
  const SplitPlan other = make_splits(inst, 5, 0.7, 12);
  EXPECT_NE(a.assignments, other.assignments);
  for (int s = 0; s < 5; ++s) {
    const auto tr = a.train_indices(s);
    const auto te = a.test_indices(s);
    EXPECT_EQ(tr.size() + te.size(), inst.size());
    std::set<size_t> all(tr.begin(), tr.end());
    for (size_t i : te) EXPECT_FALSE(all.count(i));
    std::map<std::string, int> per;
    for (size_t i : tr) ++per[inst[i].label];
    EXPECT_EQ(per["victim"], 116);  // round(0.7 * 165)
    EXPECT_EQ(per["bully_support"], 184);
  }
  EXPECT_NE(a.assignments[0], a.assignments[1]);
}

TEST(Splits, TinyClassKeepsBothSides) {
  const auto inst = testing::instances_with_counts(Task::kAbd, {{"abusive", 2}, {"non_abusive", 10}});
  const SplitPlan p = make_splits(inst, 3, 0.99, 1);
  for (int s = 0; s < 3; ++s) {
    int test_abusive = 0;
    for (size_t i : p.test_indices(s)) test_abusive += inst[i].label == "abusive";
    EXPECT_EQ(test_abusive, 1);
  }
}

TEST(Splits, UndersampleMatchesMinority) {
  const auto inst = testing::instances_with_counts(Task::kAbd, {{"abusive", 30}, {"non_abusive", 7}});
  const auto u = undersample(inst, 5);
  std::map<std::string, int> per;
  for (const auto& i : u) ++per[i.label];
  EXPECT_EQ(per["abusive"], 7);
  EXPECT_EQ(per["non_abusive"], 7);
  EXPECT_TRUE(std::is_sorted(u.begin(), u.end(),
                             [](const TaskInstance& a, const TaskInstance& b) { return a.message_id < b.message_id; }));
}

TEST(Synthetic, DeterministicAndFullyLabeled) {
  SyntheticSpec spec;
  const Corpus a = generate_synthetic_corpus(spec, 3);
  const Corpus b = generate_synthetic_corpus(spec, 3);
  std::ostringstream sa, sb;
  write_corpus(a, sa);
  write_corpus(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.message_count(), static_cast<size_t>(spec.conversations * spec.messages_per_conversation));
  for (Task t : {Task::kAbd, Task::kBba, Task::kBpi}) {
    std::set<std::string> labels;
    for (const auto& i : build_task_instances(a, t)) labels.insert(i.label);
    EXPECT_EQ(labels.size(), task_labels(t).size()) << to_string(t);
  }
}

}  // namespace
}  // namespace asb
