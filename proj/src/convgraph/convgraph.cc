#include "asb/convgraph.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "asb/error.h"
#include "json.hpp"

namespace asb {

size_t InteractionGraph::node_index(std::string_view id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id);
  if (it == nodes.end() || *it != id) {
    throw DataError("node \"" + std::string(id) + "\" not in graph");
  }
  return static_cast<size_t>(it - nodes.begin());
}

void GraphExtractionConfig::validate() const {
  if (context_window < 1) throw UsageError("context_window must be >= 1");
  if (recipient_window < 1) throw UsageError("recipient_window must be >= 1");
  if (following < 0) throw UsageError("following must be >= 0");
}

std::pair<size_t, size_t> context_range(size_t conversation_size,
                                        size_t target_position,
                                        const GraphExtractionConfig& config) {
  const size_t window =
      std::min(conversation_size, static_cast<size_t>(config.context_window));
  // Following slots shrink with the window so smaller windows stay nested.
  const size_t following =
      std::min(static_cast<size_t>(config.following), window - 1);
  const size_t preceding = window - 1 - following;
  size_t begin = target_position >= preceding ? target_position - preceding : 0;
  size_t end = begin + window;
  if (end > conversation_size) {
    end = conversation_size;
    begin = end - window;
  }
  return {begin, end};
}

InteractionGraph make_graph(std::string target_message_id,
                            std::string target_author,
                            std::vector<std::string> nodes,
                            std::vector<SignedEdge> edges) {
  std::map<std::tuple<std::string, std::string, int>, int> merged;
  std::set<std::string> node_set(nodes.begin(), nodes.end());
  node_set.insert(target_author);
  for (auto& e : edges) {
    if (e.src == e.dst) continue;
    if (e.sign != 1 && e.sign != -1) throw DataError("edge sign must be +1 or -1");
    if (e.weight < 1) throw DataError("edge weight must be positive");
    merged[{e.src, e.dst, e.sign}] += e.weight;
    node_set.insert(e.src);
    node_set.insert(e.dst);
  }
  InteractionGraph g;
  g.target_message_id = std::move(target_message_id);
  g.target_author = std::move(target_author);
  g.nodes.assign(node_set.begin(), node_set.end());
  for (const auto& [key, w] : merged) {
    g.edges.push_back(SignedEdge{std::get<0>(key), std::get<1>(key),
                                 std::get<2>(key), w});
  }
  return g;
}

InteractionGraph extract_graph(const Conversation& conversation,
                               std::string_view target_message_id,
                               const GraphExtractionConfig& config) {
  config.validate();
  const auto& msgs = conversation.messages;
  auto it = std::find_if(msgs.begin(), msgs.end(), [&](const Message& m) {
    return m.message_id == target_message_id;
  });
  if (it == msgs.end()) {
    throw DataError("target message \"" + std::string(target_message_id) +
                    "\" not found in conversation \"" +
                    conversation.conversation_id + "\"");
  }
  const size_t target = static_cast<size_t>(it - msgs.begin());
  const auto [begin, end] = context_range(msgs.size(), target, config);

  std::vector<std::string> nodes;
  std::vector<SignedEdge> edges;
  for (size_t i = begin; i < end; ++i) {
    const Message& m = msgs[i];
    nodes.push_back(m.author_id);
    const bool positive =
        m.sentiment == Sentiment::kPositive ||
        (m.sentiment == Sentiment::kNeutral && config.neutral_as_positive);
    const int sign = positive ? +1 : -1;
    const size_t lo = i >= begin + static_cast<size_t>(config.recipient_window)
                          ? i - static_cast<size_t>(config.recipient_window)
                          : begin;
    std::set<std::string> recipients;
    for (size_t j = lo; j < i; ++j) {
      if (msgs[j].author_id != m.author_id) recipients.insert(msgs[j].author_id);
    }
    for (const auto& r : recipients) {
      edges.push_back(SignedEdge{m.author_id, r, sign, 1});
    }
  }
  return make_graph(std::string(target_message_id), it->author_id,
                    std::move(nodes), std::move(edges));
}

double density(const InteractionGraph& g) {
  const double n = static_cast<double>(g.nodes.size());
  if (n < 2) return 0.0;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& e : g.edges) pairs.emplace(e.src, e.dst);
  return static_cast<double>(pairs.size()) / (n * (n - 1));
}

namespace {

StatSummary summarize(const std::vector<double>& xs) {
  StatSummary s;
  double sum = 0;
  s.min = xs.front();
  s.max = xs.front();
  for (double x : xs) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(xs.size());
  double sq = 0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(xs.size()));
  return s;
}

}  // namespace

GraphStats graph_stats(const std::vector<InteractionGraph>& graphs) {
  if (graphs.empty()) throw UsageError("graph_stats: empty graph list");
  std::vector<double> v, d, pos, neg;
  for (const auto& g : graphs) {
    v.push_back(static_cast<double>(g.nodes.size()));
    d.push_back(density(g));
    double p = 0, q = 0;
    for (const auto& e : g.edges) (e.sign > 0 ? p : q) += 1;
    pos.push_back(p);
    neg.push_back(q);
  }
  GraphStats out;
  out.graphs = graphs.size();
  out.vertices = summarize(v);
  out.density = summarize(d);
  out.positive_edges = summarize(pos);
  out.negative_edges = summarize(neg);
  return out;
}

std::string graph_to_json(const InteractionGraph& g) {
  nlohmann::ordered_json obj;
  obj["target"] = g.target_message_id;
  obj["target_author"] = g.target_author;
  obj["nodes"] = g.nodes;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges) {
    nlohmann::ordered_json je;
    je["src"] = e.src;
    je["dst"] = e.dst;
    je["sign"] = e.sign;
    je["weight"] = e.weight;
    edges.push_back(std::move(je));
  }
  obj["edges"] = std::move(edges);
  return obj.dump();
}

InteractionGraph graph_from_json(std::string_view text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
    std::vector<SignedEdge> edges;
    for (const auto& je : obj.at("edges")) {
      edges.push_back(SignedEdge{je.at("src").get<std::string>(),
                                 je.at("dst").get<std::string>(),
                                 je.at("sign").get<int>(),
                                 je.at("weight").get<int>()});
    }
    return make_graph(obj.at("target").get<std::string>(),
                      obj.at("target_author").get<std::string>(),
                      obj.at("nodes").get<std::vector<std::string>>(),
                      std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed graph dump: ") + e.what());
  }
}

}  // namespace asb
