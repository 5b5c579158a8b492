#include "testing.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace asb::testing {

namespace {

std::string node_id(size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "n%03zu", i);
  return buf;
}

}  // namespace

InteractionGraph random_graph(Rng& rng, int min_nodes, int max_nodes) {
  const int n = min_nodes + static_cast<int>(rng.uniform_index(static_cast<uint64_t>(max_nodes - min_nodes + 1)));
  std::vector<std::string> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back(node_id(static_cast<size_t>(i)));
  std::vector<SignedEdge> edges;
  if (n > 1) {
    const double p = 0.15 + 0.5 * rng.uniform01();
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        if (u == v || !rng.bernoulli(p)) continue;
        const int sign = rng.bernoulli(0.5) ? 1 : -1;
        const int weight = 1 + static_cast<int>(rng.uniform_index(3));
        edges.push_back({nodes[static_cast<size_t>(u)], nodes[static_cast<size_t>(v)], sign, weight});
      }
    }
    if (edges.empty()) edges.push_back({nodes[0], nodes[1], -1, 1});
  }
  const std::string target = nodes[rng.uniform_index(nodes.size())];
  return make_graph("t-" + std::to_string(rng.next_u64() % 1000000), target, nodes, edges);
}

std::vector<InteractionGraph> invariance_graphs(uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<InteractionGraph> out;
  for (int i = 0; i < count; ++i) {
    auto g = random_graph(rng, 1, 50);
    g.target_message_id = "g" + std::to_string(i);
    out.push_back(std::move(g));
  }
  return out;
}

InteractionGraph flip_signs(const InteractionGraph& g) {
  InteractionGraph out = g;
  for (auto& e : out.edges) e.sign = -e.sign;
  return make_graph(out.target_message_id, out.target_author, out.nodes, out.edges);
}

InteractionGraph relabel(const InteractionGraph& g, const std::vector<size_t>& perm) {
  std::map<std::string, std::string> rename;
  for (size_t i = 0; i < g.nodes.size(); ++i) rename[g.nodes[i]] = g.nodes[perm[i]];
  std::vector<std::string> nodes;
  for (const auto& n : g.nodes) nodes.push_back(rename.at(n));
  std::vector<SignedEdge> edges;
  for (const auto& e : g.edges) edges.push_back({rename.at(e.src), rename.at(e.dst), e.sign, e.weight});
  return make_graph(g.target_message_id, rename.at(g.target_author), nodes, edges);
}

double oracle_weighted_f1(const std::vector<std::string>& y_true,
                          const std::vector<std::string>& y_pred) {
  std::vector<std::string> labels(y_true.begin(), y_true.end());
  labels.insert(labels.end(), y_pred.begin(), y_pred.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const size_t k = labels.size();
  auto index = [&](const std::string& s) {
    return static_cast<size_t>(std::lower_bound(labels.begin(), labels.end(), s) - labels.begin());
  };
  std::vector<std::vector<long>> cm(k, std::vector<long>(k, 0));
  for (size_t i = 0; i < y_true.size(); ++i) ++cm[index(y_true[i])][index(y_pred[i])];
  double total = 0.0;
  double weighted = 0.0;
  for (size_t c = 0; c < k; ++c) {
    long tp = cm[c][c], row = 0, col = 0;
    for (size_t j = 0; j < k; ++j) {
      row += cm[c][j];
      col += cm[j][c];
    }
    const double precision = col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    const double recall = row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    weighted += f1 * static_cast<double>(row);
    total += static_cast<double>(row);
  }
  return weighted / total;
}

std::vector<SignedEdge> oracle_edges(const Conversation& c, size_t begin, size_t end,
                                     int window, bool neutral_as_positive) {
  std::vector<SignedEdge> out;
  for (size_t i = begin; i < end; ++i) {
    const Message& m = c.messages[i];
    const bool pos = m.sentiment == Sentiment::kPositive ||
                     (m.sentiment == Sentiment::kNeutral && neutral_as_positive);
    std::set<std::string> seen;
    int looked = 0;
    for (size_t j = i; j > begin && looked < window; --j, ++looked) {
      const Message& prev = c.messages[j - 1];
      if (prev.author_id != m.author_id) seen.insert(prev.author_id);
    }
    for (const auto& r : seen) out.push_back({m.author_id, r, pos ? 1 : -1, 1});
  }
  return out;
}

Conversation make_conversation(const std::string& id,
                               const std::vector<std::pair<std::string, Sentiment>>& turns) {
  Conversation c;
  c.conversation_id = id;
  for (size_t i = 0; i < turns.size(); ++i) {
    Message m;
    m.conversation_id = id;
    m.message_id = id + "-" + std::to_string(1000 + i);
    m.seq = static_cast<int64_t>(i);
    m.author_id = turns[i].first;
    m.text = "message " + std::to_string(i);
    m.sentiment = turns[i].second;
    c.participants.insert(m.author_id);
    c.messages.push_back(std::move(m));
  }
  return c;
}

std::vector<TaskInstance> instances_with_counts(Task task,
                                                const std::vector<std::pair<std::string, int>>& counts) {
  std::vector<TaskInstance> out;
  for (const auto& [label, n] : counts) {
    for (int i = 0; i < n; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "m%05zu", out.size());
      out.push_back({buf, task, label});
    }
  }
  return out;
}

}  // namespace asb::testing
