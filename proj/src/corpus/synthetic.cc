#include <array>
#include <cstdio>

#include "asb/corpus.h"
#include "asb/error.h"
#include "asb/rng.h"

namespace asb {

namespace {

constexpr int kRoleCount = 5;  // victim .. conciliator

// Next-speaker role distribution given the previous speaker's role, in
// ParticipantRole order (victim, victim_support, bully, bully_support,
// conciliator). Bullies answer victims, supporters answer their side.
constexpr std::array<std::array<double, kRoleCount>, kRoleCount> kTurnTaking = {{
    {0.10, 0.20, 0.50, 0.15, 0.05},  // after victim
    {0.30, 0.05, 0.40, 0.20, 0.05},  // after victim_support
    {0.35, 0.20, 0.05, 0.35, 0.05},  // after bully
    {0.30, 0.20, 0.30, 0.10, 0.10},  // after bully_support
    {0.25, 0.20, 0.25, 0.20, 0.10},  // after conciliator
}};

// Probability of a negative message, as a multiple of the hostility rate.
constexpr std::array<double, kRoleCount> kNegativeShare = {0.1, 0.0, 1.0, 0.5,
                                                           0.0};

std::string padded(const char* prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, value);
  return buf;
}

template <size_t N>
size_t draw_weighted(Rng& rng, const std::array<double, N>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform01() * total;
  for (size_t i = 0; i < N; ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  for (size_t i = N; i-- > 0;) {
    if (weights[i] > 0) return i;
  }
  return 0;
}

}  // namespace

Corpus generate_synthetic_corpus(const SyntheticSpec& spec, uint64_t seed) {
  const std::array<int, kRoleCount> counts = {
      spec.victims, spec.victim_supports, spec.bullies, spec.bully_supports,
      spec.conciliators};
  int total = 0;
  for (int c : counts) {
    if (c < 0) throw UsageError("synthetic spec: negative participant count");
    total += c;
  }
  if (total == 0) throw UsageError("synthetic spec: zero participants");
  if (spec.conversations < 1) {
    throw UsageError("synthetic spec: conversations must be >= 1");
  }
  if (spec.messages_per_conversation < 2) {
    throw UsageError("synthetic spec: messages_per_conversation must be >= 2");
  }
  if (!(spec.hostility >= 0.0 && spec.hostility <= 1.0)) {
    throw UsageError("synthetic spec: hostility must lie in [0, 1]");
  }

  static const std::array<const char*, kRoleCount> kRolePrefix = {
      "victim", "vsupport", "bully", "bsupport", "conciliator"};
  static const std::array<DiscursiveRole, 3> kBullyActs = {
      DiscursiveRole::kAttack, DiscursiveRole::kGaslighting,
      DiscursiveRole::kInstigatingAbetting};
  static const std::array<DiscursiveRole, 2> kSupportActs = {
      DiscursiveRole::kEmpathy, DiscursiveRole::kCounterspeech};

  Rng rng(seed);
  std::vector<Message> messages;
  for (int c = 0; c < spec.conversations; ++c) {
    const std::string cid = padded("c", c, 3);
    std::array<std::vector<std::string>, kRoleCount> members;
    for (int r = 0; r < kRoleCount; ++r) {
      for (int k = 0; k < counts[r]; ++k) {
        members[r].push_back(cid + "_" + kRolePrefix[r] + std::to_string(k));
      }
    }
    std::array<double, kRoleCount> available{};
    for (int r = 0; r < kRoleCount; ++r) available[r] = counts[r] > 0 ? 1.0 : 0.0;

    size_t role = counts[0] > 0 ? 0 : draw_weighted(rng, available);
    for (int s = 0; s < spec.messages_per_conversation; ++s) {
      if (s > 0) {
        std::array<double, kRoleCount> w{};
        for (int r = 0; r < kRoleCount; ++r) {
          w[r] = kTurnTaking[role][r] * available[r];
        }
        role = draw_weighted(rng, w);
      }
      Message m;
      m.conversation_id = cid;
      m.message_id = cid + "_" + padded("m", s, 4);
      m.seq = s;
      m.author_id = members[role][rng.uniform_index(members[role].size())];

      const int words = 3 + static_cast<int>(rng.uniform_index(7));
      for (int w = 0; w < words; ++w) {
        if (w > 0) m.text += ' ';
        m.text += "tok" + std::to_string(rng.uniform_index(500));
      }

      const bool negative = rng.bernoulli(spec.hostility * kNegativeShare[role]);
      if (negative) {
        m.sentiment = Sentiment::kNegative;
      } else {
        m.sentiment = rng.bernoulli(0.5) ? Sentiment::kPositive : Sentiment::kNeutral;
      }

      const auto prole = static_cast<ParticipantRole>(role);
      m.participant_role = prole;
      const bool bully_side = prole == ParticipantRole::kBully ||
                              prole == ParticipantRole::kBullySupport;
      m.abuse = bully_side ? Abuse::kAbusive : Abuse::kNonAbusive;
      switch (prole) {
        case ParticipantRole::kBully:
          m.discursive_role = kBullyActs[rng.uniform_index(kBullyActs.size())];
          break;
        case ParticipantRole::kBullySupport:
          m.discursive_role = DiscursiveRole::kInstigatingAbetting;
          break;
        case ParticipantRole::kVictim:
          m.discursive_role = DiscursiveRole::kDefend;
          break;
        case ParticipantRole::kVictimSupport:
          m.discursive_role = kSupportActs[rng.uniform_index(kSupportActs.size())];
          break;
        default:
          m.discursive_role = DiscursiveRole::kConflictResolution;
          break;
      }
      messages.push_back(std::move(m));
    }
  }
  return Corpus::from_messages(std::move(messages));
}

}  // namespace asb
