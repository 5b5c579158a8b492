#include "asb/corpus.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <iostream>
#include <sstream>

#include "asb/error.h"
#include "json.hpp"

namespace asb {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 3> kSentimentNames = {
    "positive", "negative", "neutral"};
constexpr std::array<std::string_view, 3> kAbuseNames = {
    "abusive", "non_abusive", "unlabeled"};
constexpr std::array<std::string_view, 9> kDiscursiveNames = {
    "attack",       "gaslighting", "instigating_abetting",
    "empathy",      "counterspeech", "conflict_resolution",
    "defend",       "other",       "unlabeled"};
constexpr std::array<std::string_view, 6> kParticipantNames = {
    "victim",       "victim_support", "bully",
    "bully_support", "conciliator",   "unlabeled"};

template <typename Enum, size_t N>
Enum parse_enum(const std::array<std::string_view, N>& names,
                std::string_view s, Enum fallback, bool* recognized) {
  for (size_t i = 0; i < N; ++i) {
    if (names[i] == s) {
      if (recognized) *recognized = true;
      return static_cast<Enum>(i);
    }
  }
  if (recognized) *recognized = false;
  return fallback;
}

std::string json_id(const json& v, const char* field, size_t line) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<int64_t>());
  throw DataError("line " + std::to_string(line) + ": field '" + field +
                  "' must be a string id");
}

}  // namespace

std::string_view to_string(Sentiment v) {
  return kSentimentNames[static_cast<size_t>(v)];
}
std::string_view to_string(Abuse v) { return kAbuseNames[static_cast<size_t>(v)]; }
std::string_view to_string(DiscursiveRole v) {
  return kDiscursiveNames[static_cast<size_t>(v)];
}
std::string_view to_string(ParticipantRole v) {
  return kParticipantNames[static_cast<size_t>(v)];
}

Sentiment parse_sentiment(std::string_view s, bool* recognized) {
  return parse_enum(kSentimentNames, s, Sentiment::kNeutral, recognized);
}
Abuse parse_abuse(std::string_view s, bool* recognized) {
  return parse_enum(kAbuseNames, s, Abuse::kUnlabeled, recognized);
}
DiscursiveRole parse_discursive_role(std::string_view s, bool* recognized) {
  return parse_enum(kDiscursiveNames, s, DiscursiveRole::kOther, recognized);
}
ParticipantRole parse_participant_role(std::string_view s, bool* recognized) {
  return parse_enum(kParticipantNames, s, ParticipantRole::kUnlabeled,
                    recognized);
}

Corpus Corpus::from_messages(std::vector<Message> messages) {
  Corpus corpus;
  std::map<std::string, std::vector<Message>> grouped;
  std::set<std::string> seen;
  for (auto& m : messages) {
    if (!seen.insert(m.message_id).second) {
      throw DataError("duplicate message_id \"" + m.message_id + "\"");
    }
    if (m.text.empty()) {
      throw DataError("message \"" + m.message_id + "\" has empty text");
    }
    grouped[m.conversation_id].push_back(std::move(m));
  }
  for (auto& [cid, msgs] : grouped) {
    std::sort(msgs.begin(), msgs.end(),
              [](const Message& a, const Message& b) { return a.seq < b.seq; });
    for (size_t i = 0; i < msgs.size(); ++i) {
      if (msgs[i].seq != static_cast<int64_t>(i)) {
        throw DataError("conversation \"" + cid +
                        "\": seq values must be contiguous from 0 (found " +
                        std::to_string(msgs[i].seq) + " at position " +
                        std::to_string(i) + ")");
      }
    }
    if (msgs.size() < 2) {
      throw DataError("conversation \"" + cid +
                      "\" has fewer than 2 messages");
    }
    Conversation conv;
    conv.conversation_id = cid;
    for (const auto& m : msgs) conv.participants.insert(m.author_id);
    conv.messages = std::move(msgs);
    corpus.conversations_.push_back(std::move(conv));
  }
  for (size_t c = 0; c < corpus.conversations_.size(); ++c) {
    const auto& conv = corpus.conversations_[c];
    for (size_t p = 0; p < conv.messages.size(); ++p) {
      corpus.index_.emplace(conv.messages[p].message_id, MessageRef{c, p});
    }
  }
  return corpus;
}

MessageRef Corpus::locate(std::string_view message_id) const {
  auto it = index_.find(std::string(message_id));
  if (it == index_.end()) {
    throw DataError("unknown message_id \"" + std::string(message_id) + "\"");
  }
  return it->second;
}

bool Corpus::contains(std::string_view message_id) const {
  return index_.count(std::string(message_id)) > 0;
}

const Message& Corpus::message(std::string_view message_id) const {
  const MessageRef ref = locate(message_id);
  return conversations_[ref.conversation].messages[ref.position];
}

const Conversation& Corpus::conversation_of(std::string_view message_id) const {
  return conversations_[locate(message_id).conversation];
}

std::vector<const Message*> Corpus::all_messages() const {
  std::vector<const Message*> out;
  out.reserve(index_.size());
  for (const auto& conv : conversations_) {
    for (const auto& m : conv.messages) out.push_back(&m);
  }
  return out;
}

Corpus parse_corpus(std::istream& in) {
  std::vector<Message> messages;
  size_t unknown = 0;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("line " + std::to_string(line_no) +
                      ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected a JSON object");
    }
    auto require = [&](const char* field) -> const json& {
      auto it = obj.find(field);
      if (it == obj.end()) {
        throw DataError("line " + std::to_string(line_no) +
                        ": missing field '" + field + "'");
      }
      return *it;
    };
    Message m;
    m.conversation_id = json_id(require("conversation_id"), "conversation_id",
                                line_no);
    m.message_id = json_id(require("message_id"), "message_id", line_no);
    m.author_id = json_id(require("author_id"), "author_id", line_no);
    const json& seq = require("seq");
    if (!seq.is_number_integer() || seq.get<int64_t>() < 0) {
      throw DataError("line " + std::to_string(line_no) +
                      ": 'seq' must be a nonnegative integer");
    }
    m.seq = seq.get<int64_t>();
    const json& text = require("text");
    if (!text.is_string()) {
      throw DataError("line " + std::to_string(line_no) +
                      ": 'text' must be a string");
    }
    m.text = text.get<std::string>();

    // Missing or null annotations are treated as absent; unrecognized strings
    // are counted.
    auto enum_field = [&](const char* field) -> std::optional<std::string> {
      auto it = obj.find(field);
      if (it == obj.end() || it->is_null()) return std::nullopt;
      if (!it->is_string()) {
        ++unknown;
        return std::string("?");
      }
      return it->get<std::string>();
    };
    bool ok = true;
    if (auto s = enum_field("sentiment")) {
      m.sentiment = parse_sentiment(*s, &ok);
      unknown += ok ? 0 : 1;
    }
    if (auto s = enum_field("abuse")) {
      m.abuse = parse_abuse(*s, &ok);
      unknown += ok ? 0 : 1;
    }
    if (auto s = enum_field("discursive_role")) {
      m.discursive_role = parse_discursive_role(*s, &ok);
      unknown += ok ? 0 : 1;
    }
    if (auto s = enum_field("participant_role")) {
      m.participant_role = parse_participant_role(*s, &ok);
      unknown += ok ? 0 : 1;
    }
    messages.push_back(std::move(m));
  }
  Corpus corpus = Corpus::from_messages(std::move(messages));
  corpus.set_unknown_enum_count(unknown);
  if (unknown > 0) {
    std::cerr << "warning: " << unknown
              << " unrecognized annotation value(s) mapped to "
                 "unlabeled/other/neutral\n";
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open corpus file: " + path.string());
  return parse_corpus(in);
}

std::string message_to_json_line(const Message& m) {
  nlohmann::ordered_json obj;
  obj["conversation_id"] = m.conversation_id;
  obj["message_id"] = m.message_id;
  obj["seq"] = m.seq;
  obj["author_id"] = m.author_id;
  obj["text"] = m.text;
  obj["sentiment"] = std::string(to_string(m.sentiment));
  obj["abuse"] = std::string(to_string(m.abuse));
  obj["discursive_role"] = std::string(to_string(m.discursive_role));
  obj["participant_role"] = std::string(to_string(m.participant_role));
  return obj.dump();
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const Message* m : corpus.all_messages()) {
    out << message_to_json_line(*m) << '\n';
  }
}

std::string_view to_string(Task t) {
  switch (t) {
    case Task::kAbd:
      return "abd";
    case Task::kBba:
      return "bba";
    case Task::kBpi:
      return "bpi";
  }
  return "?";
}

Task parse_task(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "abd") return Task::kAbd;
  if (lower == "bba") return Task::kBba;
  if (lower == "bpi") return Task::kBpi;
  throw UsageError("unknown task \"" + std::string(s) +
                   "\" (expected abd, bba or bpi)");
}

const std::vector<std::string>& task_labels(Task t) {
  static const std::vector<std::string> kAbd = {"abusive", "non_abusive"};
  static const std::vector<std::string> kBba = {"CBB", "NO_CBB"};
  static const std::vector<std::string> kBpi = {"victim", "victim_support",
                                                "bully", "bully_support"};
  switch (t) {
    case Task::kAbd:
      return kAbd;
    case Task::kBba:
      return kBba;
    case Task::kBpi:
      return kBpi;
  }
  return kAbd;
}

std::optional<std::string> map_bba_label(DiscursiveRole role) {
  switch (role) {
    case DiscursiveRole::kAttack:
    case DiscursiveRole::kGaslighting:
    case DiscursiveRole::kInstigatingAbetting:
      return "CBB";
    case DiscursiveRole::kEmpathy:
    case DiscursiveRole::kCounterspeech:
    case DiscursiveRole::kConflictResolution:
    case DiscursiveRole::kDefend:
      return "NO_CBB";
    case DiscursiveRole::kOther:
    case DiscursiveRole::kUnlabeled:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<TaskInstance> build_task_instances(const Corpus& corpus, Task task) {
  std::vector<TaskInstance> out;
  for (const Message* m : corpus.all_messages()) {
    std::optional<std::string> label;
    switch (task) {
      case Task::kAbd:
        if (m->abuse != Abuse::kUnlabeled) label = std::string(to_string(m->abuse));
        break;
      case Task::kBba:
        label = map_bba_label(m->discursive_role);
        break;
      case Task::kBpi:
        if (m->participant_role != ParticipantRole::kConciliator &&
            m->participant_role != ParticipantRole::kUnlabeled) {
          label = std::string(to_string(m->participant_role));
        }
        break;
    }
    if (label) out.push_back(TaskInstance{m->message_id, task, *label});
  }
  return out;
}

}  // namespace asb
