#ifndef ASB_CORPUS_H_
#define ASB_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace asb {

enum class Sentiment { kPositive, kNegative, kNeutral };
enum class Abuse { kAbusive, kNonAbusive, kUnlabeled };
enum class DiscursiveRole {
  kAttack,
  kGaslighting,
  kInstigatingAbetting,
  kEmpathy,
  kCounterspeech,
  kConflictResolution,
  kDefend,
  kOther,
  kUnlabeled,
};
enum class ParticipantRole {
  kVictim,
  kVictimSupport,
  kBully,
  kBullySupport,
  kConciliator,
  kUnlabeled,
};

std::string_view to_string(Sentiment v);
std::string_view to_string(Abuse v);
std::string_view to_string(DiscursiveRole v);
std::string_view to_string(ParticipantRole v);

// Lenient parsers used by ingestion. Unknown strings fall back to the
// neutral/unlabeled/other member and set *recognized to false.
Sentiment parse_sentiment(std::string_view s, bool* recognized);
Abuse parse_abuse(std::string_view s, bool* recognized);
DiscursiveRole parse_discursive_role(std::string_view s, bool* recognized);
ParticipantRole parse_participant_role(std::string_view s, bool* recognized);

struct Message {
  std::string conversation_id;
  std::string message_id;
  int64_t seq = 0;
  std::string author_id;
  std::string text;
  Sentiment sentiment = Sentiment::kNeutral;
  Abuse abuse = Abuse::kUnlabeled;
  DiscursiveRole discursive_role = DiscursiveRole::kUnlabeled;
  ParticipantRole participant_role = ParticipantRole::kUnlabeled;
};

struct Conversation {
  std::string conversation_id;
  std::vector<Message> messages;  // ordered by seq, seq == index
  std::set<std::string> participants;
};

struct MessageRef {
  size_t conversation = 0;
  size_t position = 0;
};

class Corpus {
 public:
  Corpus() = default;

  // Groups, sorts and validates. Throws DataError on integrity violations.
  static Corpus from_messages(std::vector<Message> messages);

  const std::vector<Conversation>& conversations() const {
    return conversations_;
  }
  size_t message_count() const { return index_.size(); }

  const Message& message(std::string_view message_id) const;
  MessageRef locate(std::string_view message_id) const;
  bool contains(std::string_view message_id) const;
  const Conversation& conversation_of(std::string_view message_id) const;

  // Number of enum strings that were not recognized during ingestion.
  size_t unknown_enum_count() const { return unknown_enum_count_; }
  void set_unknown_enum_count(size_t n) { unknown_enum_count_ = n; }

  // Every message in canonical order (conversation id, then seq).
  std::vector<const Message*> all_messages() const;

 private:
  std::vector<Conversation> conversations_;
  std::unordered_map<std::string, MessageRef> index_;
  size_t unknown_enum_count_ = 0;
};

Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in);

// Canonical JSON-lines serialization; load(write(c)) is byte-stable.
void write_corpus(const Corpus& corpus, std::ostream& out);
std::string message_to_json_line(const Message& m);

enum class Task { kAbd, kBba, kBpi };

std::string_view to_string(Task t);  // "abd", "bba", "bpi"
Task parse_task(std::string_view s);  // throws UsageError
// Ordered label vocabulary of a task.
const std::vector<std::string>& task_labels(Task t);

// BBA label of a discursive role; nullopt for other/unlabeled.
std::optional<std::string> map_bba_label(DiscursiveRole role);

struct TaskInstance {
  std::string message_id;
  Task task = Task::kAbd;
  std::string label;
};

std::vector<TaskInstance> build_task_instances(const Corpus& corpus, Task task);

enum class Fold : uint8_t { kTrain, kTest };

struct SplitPlan {
  int n_splits = 5;
  double train_fraction = 0.70;
  uint64_t seed = 0;
  std::vector<std::string> instance_ids;
  // assignments[split][i] refers to instance_ids[i].
  std::vector<std::vector<Fold>> assignments;

  std::vector<size_t> train_indices(int split) const;
  std::vector<size_t> test_indices(int split) const;
};

// Independent stratified holdout partitions: per class, round(fraction * n)
// instances go to train (clamped so both sides are nonempty).
SplitPlan make_splits(const std::vector<TaskInstance>& instances, int n_splits,
                      double train_fraction, uint64_t seed);

// Downsamples every class to the minority-class count. Selected instances
// keep their input order.
std::vector<TaskInstance> undersample(const std::vector<TaskInstance>& instances,
                                      uint64_t seed);

struct SyntheticSpec {
  int conversations = 4;
  int messages_per_conversation = 60;
  int victims = 1;
  int victim_supports = 2;
  int bullies = 2;
  int bully_supports = 2;
  int conciliators = 1;
  // Probability that a bully-side message is negative.
  double hostility = 0.9;
};

// Planted-structure corpus: turn-taking, sentiment and every label are driven
// by the author's participant role. Deterministic given (spec, seed).
Corpus generate_synthetic_corpus(const SyntheticSpec& spec, uint64_t seed);

}  // namespace asb

#endif  // ASB_CORPUS_H_
