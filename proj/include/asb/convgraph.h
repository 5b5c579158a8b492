#ifndef ASB_CONVGRAPH_H_
#define ASB_CONVGRAPH_H_

#include <string>
#include <string_view>
#include <vector>

#include "asb/corpus.h"

namespace asb {

struct SignedEdge {
  std::string src;
  std::string dst;
  int sign = +1;  // +1 or -1
  int weight = 1;

  bool operator==(const SignedEdge&) const = default;
};

// Directed signed weighted participant graph around one target message.
// Nodes are kept sorted; edges are sorted by (src, dst, sign) and unique on
// that triple.
struct InteractionGraph {
  std::string target_message_id;
  std::string target_author;
  std::vector<std::string> nodes;
  std::vector<SignedEdge> edges;

  size_t node_index(std::string_view id) const;  // throws if absent
  bool operator==(const InteractionGraph&) const = default;
};

struct GraphExtractionConfig {
  // Total context size including the target message.
  int context_window = 21;
  // How many of the context slots follow the target; the rest precede it.
  int following = 4;
  int recipient_window = 8;
  bool neutral_as_positive = true;

  void validate() const;
};

// Context positions [begin, end) inside the conversation. The window keeps
// its full size near conversation boundaries by shifting.
std::pair<size_t, size_t> context_range(size_t conversation_size,
                                        size_t target_position,
                                        const GraphExtractionConfig& config);

InteractionGraph extract_graph(const Conversation& conversation,
                               std::string_view target_message_id,
                               const GraphExtractionConfig& config);

// Rebuilds a graph from raw edges: merges duplicate triples, sorts, and
// adds endpoints to the node set.
InteractionGraph make_graph(std::string target_message_id,
                            std::string target_author,
                            std::vector<std::string> nodes,
                            std::vector<SignedEdge> edges);

// Directed density: distinct (src, dst) pairs over n(n-1); 0 when n < 2.
double density(const InteractionGraph& g);

struct StatSummary {
  double mean = 0, std = 0, min = 0, max = 0;
};

struct GraphStats {
  size_t graphs = 0;
  StatSummary vertices;
  StatSummary density;
  StatSummary positive_edges;
  StatSummary negative_edges;
};

// Population std (ddof 0). Edge counts are distinct signed edges.
GraphStats graph_stats(const std::vector<InteractionGraph>& graphs);

// Byte-stable JSON dump {target, nodes[], edges[{src,dst,sign,weight}]}.
std::string graph_to_json(const InteractionGraph& g);
InteractionGraph graph_from_json(std::string_view text);

}  // namespace asb

#endif  // ASB_CONVGRAPH_H_
