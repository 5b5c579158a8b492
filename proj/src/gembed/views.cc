#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "asb/error.h"
#include "asb/gembed.h"
#include "asb/gembed_detail.h"
#include "asb/hash.h"
#include "asb/lexembed.h"

namespace asb {

std::string_view method_name(GraphMethod m) {
  switch (m) {
    case GraphMethod::kNode2Vec: return "node2vec";
    case GraphMethod::kWalklets: return "walklets";
    case GraphMethod::kGraphWave: return "graphwave";
    case GraphMethod::kFgsd: return "fgsd";
    case GraphMethod::kSg2v: return "sg2v";
    case GraphMethod::kWdSg2v: return "wd-sg2v";
    case GraphMethod::kSgcn: return "sgcn";
    case GraphMethod::kWdSgcn: return "wd-sgcn";
    case GraphMethod::kNgnn: return "ngnn";
  }
  return "?";
}

GraphMethod parse_method(std::string_view s) {
  std::string key(s);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
    return c == '_' ? '-' : static_cast<char>(std::tolower(c));
  });
  for (GraphMethod m : kAllGraphMethods) {
    if (method_name(m) == key) return m;
  }
  throw UsageError("unknown graph embedding method \"" + std::string(s) + "\"");
}

EmbeddingSource method_source(GraphMethod m) {
  switch (m) {
    case GraphMethod::kNode2Vec:
    case GraphMethod::kWalklets:
    case GraphMethod::kGraphWave:
    case GraphMethod::kSgcn:
    case GraphMethod::kWdSgcn:
      return EmbeddingSource::kNodeLevel;
    default:
      return EmbeddingSource::kGraphLevel;
  }
}

int default_dim(GraphMethod m) {
  switch (m) {
    case GraphMethod::kNode2Vec: return 128;
    case GraphMethod::kWalklets: return 32;
    case GraphMethod::kGraphWave: return 200;
    case GraphMethod::kFgsd: return 200;
    case GraphMethod::kSg2v: return 128;
    case GraphMethod::kWdSg2v: return 128;
    case GraphMethod::kSgcn: return 128;
    case GraphMethod::kWdSgcn: return 128;
    case GraphMethod::kNgnn: return 64;
  }
  return 0;
}

bool method_needs_training(GraphMethod m) {
  switch (m) {
    case GraphMethod::kSg2v:
    case GraphMethod::kWdSg2v:
    case GraphMethod::kSgcn:
    case GraphMethod::kWdSgcn:
    case GraphMethod::kNgnn:
      return true;
    default:
      return false;
  }
}

bool method_is_sign_blind(GraphMethod m) {
  return m == GraphMethod::kNode2Vec || m == GraphMethod::kWalklets ||
         m == GraphMethod::kGraphWave || m == GraphMethod::kFgsd;
}

GraphEmbeddingConfig GraphEmbeddingConfig::defaults(GraphMethod method,
                                                    uint64_t seed) {
  GraphEmbeddingConfig c;
  c.method = method;
  c.seed = seed;
  return c;
}

int GraphEmbeddingConfig::resolved_dim() const {
  return dim > 0 ? dim : default_dim(method);
}

void GraphEmbeddingConfig::validate() const {
  const int d = resolved_dim();
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError("graph embedding config: " + what);
  };
  need(d > 0, "dim must be positive");
  switch (method) {
    case GraphMethod::kNode2Vec:
    case GraphMethod::kWalklets:
      need(walk.walks_per_node >= 1 && walk.walk_length >= 1 && walk.window >= 1 &&
               walk.epochs >= 1 && walk.negatives >= 0,
           "walk parameters must be positive");
      need(walk.p > 0 && walk.q > 0, "p and q must be positive");
      if (method == GraphMethod::kWalklets) {
        need(walk.walklets_scales >= 1 && d % walk.walklets_scales == 0,
             "walklets dim must be divisible by the scale count");
      }
      break;
    case GraphMethod::kGraphWave:
      need(d % 4 == 0, "graphwave dim must be divisible by 4 (2 scales x Re/Im)");
      need(graphwave.t_max > 0, "graphwave t_max must be positive");
      break;
    case GraphMethod::kFgsd:
      need(fgsd.bin_width > 0, "fgsd bin width must be positive");
      break;
    case GraphMethod::kSg2v:
    case GraphMethod::kWdSg2v:
      need(sg2v.wl_iterations >= 0 && sg2v.epochs >= 1 && sg2v.infer_epochs >= 1,
           "sg2v iteration counts must be positive");
      break;
    case GraphMethod::kSgcn:
    case GraphMethod::kWdSgcn:
      need(d % 2 == 0, "sgcn dim must be even ([B || U])");
      need(sgcn.epochs >= 0 && sgcn.max_pairs_per_graph >= 1, "bad sgcn parameters");
      break;
    case GraphMethod::kNgnn:
      need(ngnn.epochs >= 0, "bad ngnn parameters");
      break;
  }
}

std::string GraphEmbeddingConfig::provenance() const {
  std::ostringstream os;
  os << "method=" << method_name(method) << ";dim=" << resolved_dim()
     << ";seed=" << seed;
  switch (method) {
    case GraphMethod::kNode2Vec:
    case GraphMethod::kWalklets:
      os << ";walks_per_node=" << walk.walks_per_node
         << ";walk_length=" << walk.walk_length << ";window=" << walk.window
         << ";negatives=" << walk.negatives << ";epochs=" << walk.epochs
         << ";p=" << format_double(walk.p) << ";q=" << format_double(walk.q)
         << ";lr=" << format_double(walk.learning_rate);
      if (method == GraphMethod::kWalklets) os << ";scales=" << walk.walklets_scales;
      break;
    case GraphMethod::kGraphWave:
      os << ";points=" << resolved_dim() / 4 << ";t_max=" << format_double(graphwave.t_max)
         << ";eta_small=" << format_double(graphwave.eta_small_scale)
         << ";eta_large=" << format_double(graphwave.eta_large_scale);
      break;
    case GraphMethod::kFgsd:
      os << ";bins=" << resolved_dim() << ";bin_width=" << format_double(fgsd.bin_width);
      break;
    case GraphMethod::kSg2v:
    case GraphMethod::kWdSg2v:
      os << ";wl_iterations=" << sg2v.wl_iterations << ";epochs=" << sg2v.epochs
         << ";infer_epochs=" << sg2v.infer_epochs << ";negatives=" << sg2v.negatives
         << ";lr=" << format_double(sg2v.learning_rate);
      break;
    case GraphMethod::kSgcn:
    case GraphMethod::kWdSgcn:
      os << ";layers=2;hidden=" << resolved_dim() / 2 << ";epochs=" << sgcn.epochs
         << ";lr=" << format_double(sgcn.learning_rate)
         << ";max_pairs=" << sgcn.max_pairs_per_graph;
      break;
    case GraphMethod::kNgnn:
      os << ";layers=2;hidden=" << resolved_dim() << ";epochs=" << ngnn.epochs
         << ";lr=" << format_double(ngnn.learning_rate);
      break;
  }
  return os.str();
}

std::string GraphEmbeddingConfig::hash() const { return to_hex(fnv1a(provenance())); }

namespace detail {

bool UndirectedView::has_edge(int u, int v) const {
  const auto& a = adjacency[static_cast<size_t>(u)];
  return std::binary_search(a.begin(), a.end(), v);
}

UndirectedView undirected_view(const InteractionGraph& g) {
  UndirectedView view;
  view.n = static_cast<int>(g.nodes.size());
  view.target = static_cast<int>(g.node_index(g.target_author));
  std::vector<std::set<int>> adj(g.nodes.size());
  for (const auto& e : g.edges) {
    const int u = static_cast<int>(g.node_index(e.src));
    const int v = static_cast<int>(g.node_index(e.dst));
    if (u == v) continue;
    adj[static_cast<size_t>(u)].insert(v);
    adj[static_cast<size_t>(v)].insert(u);
  }
  view.adjacency.reserve(adj.size());
  for (const auto& s : adj) view.adjacency.emplace_back(s.begin(), s.end());
  return view;
}

Eigen::MatrixXd adjacency_matrix(const UndirectedView& view) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(view.n, view.n);
  for (int u = 0; u < view.n; ++u) {
    for (int v : view.adjacency[static_cast<size_t>(u)]) a(u, v) = 1.0;
  }
  return a;
}

Eigen::MatrixXd laplacian(const UndirectedView& view) {
  Eigen::MatrixXd a = adjacency_matrix(view);
  Eigen::MatrixXd l = -a;
  for (int u = 0; u < view.n; ++u) l(u, u) = a.row(u).sum();
  return l;
}

Eigen::MatrixXd normalized_laplacian(const UndirectedView& view) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(view.n, view.n);
  std::vector<double> inv_sqrt(static_cast<size_t>(view.n), 0.0);
  for (int u = 0; u < view.n; ++u) {
    const auto deg = view.adjacency[static_cast<size_t>(u)].size();
    if (deg > 0) {
      inv_sqrt[static_cast<size_t>(u)] = 1.0 / std::sqrt(static_cast<double>(deg));
      l(u, u) = 1.0;
    }
  }
  for (int u = 0; u < view.n; ++u) {
    for (int v : view.adjacency[static_cast<size_t>(u)]) {
      l(u, v) = -inv_sqrt[static_cast<size_t>(u)] * inv_sqrt[static_cast<size_t>(v)];
    }
  }
  return l;
}

IndexedGraph index_graph(const InteractionGraph& g) {
  IndexedGraph out;
  out.n = static_cast<int>(g.nodes.size());
  out.target = static_cast<int>(g.node_index(g.target_author));
  out.edges.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    out.edges.push_back(IndexedEdge{static_cast<int>(g.node_index(e.src)),
                                    static_cast<int>(g.node_index(e.dst)), e.sign,
                                    e.weight});
  }
  return out;
}

int log2_bucket(int value) {
  int b = 0;
  while (value > 1) {
    value >>= 1;
    ++b;
  }
  return b;
}

SignedAggregators signed_aggregators(const IndexedGraph& g, bool weighted_directed) {
  using Triplet = Eigen::Triplet<double>;
  // (row, col) -> accumulated weight, per sign.
  std::map<std::pair<int, int>, double> pos, neg;
  for (const auto& e : g.edges) {
    auto& bucket = e.sign > 0 ? pos : neg;
    if (weighted_directed) {
      // Incoming: row = receiver, col = sender.
      bucket[{e.dst, e.src}] += static_cast<double>(e.weight);
    } else {
      bucket[{e.dst, e.src}] = 1.0;
      bucket[{e.src, e.dst}] = 1.0;
    }
  }
  auto build = [&](const std::map<std::pair<int, int>, double>& cells) {
    std::vector<double> row_sum(static_cast<size_t>(g.n), 0.0);
    for (const auto& [rc, w] : cells) row_sum[static_cast<size_t>(rc.first)] += w;
    std::vector<Triplet> trips;
    trips.reserve(cells.size());
    for (const auto& [rc, w] : cells) {
      trips.emplace_back(rc.first, rc.second, w / row_sum[static_cast<size_t>(rc.first)]);
    }
    nn::SparseMatrix m(g.n, g.n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
  };
  return SignedAggregators{build(pos), build(neg)};
}

Eigen::MatrixXd signed_degree_features(const IndexedGraph& g, bool weighted) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(g.n, 5);
  for (const auto& e : g.edges) {
    const double w = weighted ? static_cast<double>(e.weight) : 1.0;
    const int in_col = e.sign > 0 ? 0 : 1;
    const int out_col = e.sign > 0 ? 2 : 3;
    x(e.dst, in_col) += w;
    x(e.src, out_col) += w;
  }
  const double mx = x.leftCols(4).maxCoeff();
  if (mx > 0) x.leftCols(4) /= mx;
  x.col(4).setOnes();
  return x;
}

}  // namespace detail
}  // namespace asb
