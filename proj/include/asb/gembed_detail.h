#ifndef ASB_GEMBED_DETAIL_H_
#define ASB_GEMBED_DETAIL_H_

// Building blocks of the graph embedders, exposed for tests and oracles.

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "asb/convgraph.h"
#include "asb/gembed.h"
#include "asb/rng.h"

namespace asb::detail {

// Simple undirected unsigned unweighted view: parallel and reciprocal edges
// collapse, direction and sign are dropped. Node i is g.nodes[i].
struct UndirectedView {
  int n = 0;
  int target = 0;
  std::vector<std::vector<int>> adjacency;  // sorted, unique, no self-loops

  bool has_edge(int u, int v) const;
};

UndirectedView undirected_view(const InteractionGraph& g);
Eigen::MatrixXd adjacency_matrix(const UndirectedView& view);
Eigen::MatrixXd laplacian(const UndirectedView& view);             // D - A
Eigen::MatrixXd normalized_laplacian(const UndirectedView& view);  // I - D^-1/2 A D^-1/2

struct IndexedEdge {
  int src = 0;
  int dst = 0;
  int sign = 1;
  int weight = 1;
};

struct IndexedGraph {
  int n = 0;
  int target = 0;
  std::vector<IndexedEdge> edges;
};

IndexedGraph index_graph(const InteractionGraph& g);

// ---- random walks and skip-gram ----

using Walk = std::vector<int>;

// Second-order biased walks (return p, in-out q); walks_per_node rounds over
// all nodes in index order. Isolated nodes yield constant walks.
std::vector<Walk> biased_walks(const UndirectedView& view, const WalkParams& params,
                               Rng& rng);

// (center, context) pairs with 0 < |i - j| <= window.
std::vector<std::pair<int, int>> window_pairs(const std::vector<Walk>& walks,
                                              int window);
// (w[i], w[i+k]) and (w[i+k], w[i]) for every i.
std::vector<std::pair<int, int>> stride_pairs(const std::vector<Walk>& walks,
                                              int stride);

struct SkipGramOptions {
  int dim = 128;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;
};

// Skip-gram with negative sampling; returns the input-vector matrix
// (vocab x dim).
Eigen::MatrixXd train_skipgram(int vocab, const std::vector<std::pair<int, int>>& pairs,
                               const SkipGramOptions& options, Rng& rng);

// Draws ids with probability proportional to counts^0.75.
class NegativeSampler {
 public:
  explicit NegativeSampler(const std::vector<double>& counts);
  int sample(Rng& rng) const;
  bool empty() const { return cdf_.empty() || cdf_.back() <= 0.0; }

 private:
  std::vector<double> cdf_;
};

// ---- spectral ----

struct HeatScales {
  double small = 1.0;
  double large = 2.0;
};

HeatScales graphwave_scales(const Eigen::VectorXd& eigenvalues,
                            const GraphWaveParams& params);

// Characteristic-function embedding from a wavelet column.
std::vector<double> characteristic_embedding(const Eigen::VectorXd& wavelet,
                                             const GraphWaveParams& params);

// Harmonic spectral distance matrix sum_{l>0} (phi_l(u) - phi_l(v))^2 / l.
Eigen::MatrixXd harmonic_distances(const UndirectedView& view);

// Bin index for a distance; overflow goes to the last bin.
int fgsd_bin(double distance, const FgsdParams& params);

// ---- signed WL ----

int log2_bucket(int value);  // 0 for value <= 1, else floor(log2 value)

// Sorted multiset of hashed labels across iterations 0..iterations.
std::vector<uint64_t> wl_document(const InteractionGraph& g, int iterations,
                                  bool weighted);

// ---- message passing ----

// Row-normalized aggregation operators (n x n) for the positive and negative
// neighborhoods. Plain: symmetric neighborhoods, unweighted means.
// weighted_directed: incoming edges only, weight-normalized means.
struct SignedAggregators {
  nn::SparseMatrix positive;
  nn::SparseMatrix negative;
};
SignedAggregators signed_aggregators(const IndexedGraph& g, bool weighted_directed);

// Normalized signed-degree profile: (pos-in, neg-in, pos-out, neg-out) over
// the graph maximum, plus a constant 1 column.
Eigen::MatrixXd signed_degree_features(const IndexedGraph& g, bool weighted);

}  // namespace asb::detail

#endif  // ASB_GEMBED_DETAIL_H_
