#include <algorithm>
#include <array>
#include <map>

#include "asb/error.h"
#include "asb/gembed.h"
#include "asb/gembed_detail.h"

namespace asb {

namespace {

// [1, is_root, pos-in, neg-in, pos-out, neg-out] inside the rooted subgraph.
constexpr int kFeatures = 6;
constexpr size_t kBatch = 32;

using nn::Tape;

Tape::Var bind(Tape& tape, nn::Parameter& p, bool trainable) {
  return trainable ? tape.param(p) : tape.constant(p.value);
}

// All rooted radius-1 subgraphs of a batch of graphs, laid out as one
// block-diagonal graph, plus the pooling operator (graphs x subgraph nodes).
struct NestedBatch {
  std::shared_ptr<const nn::SparseMatrix> adjacency;
  std::shared_ptr<const nn::SparseMatrix> pooling;
  nn::Matrix features;
};

NestedBatch nest(const std::vector<const InteractionGraph*>& graphs) {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> adj, pool;
  std::vector<std::array<double, kFeatures>> rows;
  for (size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto ig = detail::index_graph(*graphs[gi]);
    const auto view = detail::undirected_view(*graphs[gi]);
    const double share = 1.0 / static_cast<double>(ig.n);
    for (int root = 0; root < ig.n; ++root) {
      std::vector<int> members{root};
      const auto& nbrs = view.adjacency[static_cast<size_t>(root)];
      members.insert(members.end(), nbrs.begin(), nbrs.end());
      std::map<int, int> local;
      for (size_t k = 0; k < members.size(); ++k) local[members[k]] = static_cast<int>(k);
      const int base = static_cast<int>(rows.size());
      for (size_t k = 0; k < members.size(); ++k) {
        std::array<double, kFeatures> f{1.0, k == 0 ? 1.0 : 0.0, 0, 0, 0, 0};
        rows.push_back(f);
        pool.emplace_back(static_cast<int>(gi), base + static_cast<int>(k), share);
      }
      for (const auto& e : ig.edges) {
        auto s = local.find(e.src);
        auto d = local.find(e.dst);
        if (s == local.end() || d == local.end()) continue;
        rows[static_cast<size_t>(base + d->second)][e.sign > 0 ? 2 : 3] += 1.0;
        rows[static_cast<size_t>(base + s->second)][e.sign > 0 ? 4 : 5] += 1.0;
      }
      for (size_t k = 0; k < members.size(); ++k) {
        for (size_t j = k + 1; j < members.size(); ++j) {
          if (view.has_edge(members[k], members[j])) {
            adj.emplace_back(base + static_cast<int>(k), base + static_cast<int>(j), 1.0);
            adj.emplace_back(base + static_cast<int>(j), base + static_cast<int>(k), 1.0);
          }
        }
      }
    }
  }
  const auto total = static_cast<Eigen::Index>(rows.size());
  NestedBatch batch;
  nn::SparseMatrix a(total, total), p(static_cast<Eigen::Index>(graphs.size()), total);
  a.setFromTriplets(adj.begin(), adj.end());
  p.setFromTriplets(pool.begin(), pool.end());
  batch.adjacency = std::make_shared<const nn::SparseMatrix>(std::move(a));
  batch.pooling = std::make_shared<const nn::SparseMatrix>(std::move(p));
  batch.features.resize(total, kFeatures);
  for (Eigen::Index r = 0; r < total; ++r) {
    for (int c = 0; c < kFeatures; ++c) batch.features(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
  }
  return batch;
}

}  // namespace

struct NgnnModel::Weights {
  nn::Parameter w1, b1;  // inner layer 1: [X, AX] -> h
  nn::Parameter w2, b2;  // inner layer 2: [H, AH] -> h
  nn::Parameter head, head_bias;

  std::vector<nn::Parameter*> all() { return {&w1, &b1, &w2, &b2, &head, &head_bias}; }

  // Pooled graph vectors (graphs x h). Sum readout per subgraph followed by a
  // mean over subgraphs equals one pooling product with weight 1/n.
  Tape::Var forward(Tape& tape, const NestedBatch& batch, bool trainable) {
    const auto x = tape.constant(batch.features);
    const auto h1 = tape.relu(tape.add_row(
        tape.matmul(tape.hcat({x, tape.spmm(batch.adjacency, x)}), bind(tape, w1, trainable)),
        bind(tape, b1, trainable)));
    const auto h2 = tape.relu(tape.add_row(
        tape.matmul(tape.hcat({h1, tape.spmm(batch.adjacency, h1)}), bind(tape, w2, trainable)),
        bind(tape, b2, trainable)));
    return tape.spmm(batch.pooling, h2);
  }
};

NgnnModel NgnnModel::untrained(const GraphEmbeddingConfig& config, int n_classes) {
  config.validate();
  if (config.method != GraphMethod::kNgnn) throw UsageError("NgnnModel: method must be ngnn");
  if (n_classes < 2) throw UsageError("NgnnModel: need at least 2 classes");
  NgnnModel model;
  model.config_ = config;
  const int h = config.resolved_dim();
  Rng rng(derive_seed(config.seed, "ngnn-init"));
  auto w = std::make_shared<Weights>();
  w->w1 = nn::glorot(2 * kFeatures, h, rng);
  w->b1 = nn::zeros(1, h);
  w->w2 = nn::glorot(2 * h, h, rng);
  w->b2 = nn::zeros(1, h);
  w->head = nn::glorot(h, n_classes, rng);
  w->head_bias = nn::zeros(1, n_classes);
  model.weights_ = std::move(w);
  return model;
}

NgnnModel NgnnModel::fit(const std::vector<const InteractionGraph*>& training,
                         const std::vector<int>& labels, int n_classes,
                         const GraphEmbeddingConfig& config, LeakageAudit* audit) {
  if (training.empty() || labels.size() != training.size()) {
    throw UsageError("NgnnModel: fold training labels are missing");
  }
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw UsageError("NgnnModel: label out of range");
  }
  NgnnModel model = untrained(config, n_classes);
  for (const InteractionGraph* g : training) {
    if (audit) audit->touch("embedding-training", g->target_message_id);
  }
  Weights& w = *model.weights_;
  nn::Adam adam(config.ngnn.learning_rate);
  Rng rng(derive_seed(config.seed, "ngnn-train"));
  std::vector<size_t> order(training.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.ngnn.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += kBatch) {
      const size_t end = std::min(order.size(), start + kBatch);
      std::vector<const InteractionGraph*> graphs;
      std::vector<int> ys;
      for (size_t k = start; k < end; ++k) {
        graphs.push_back(training[order[k]]);
        ys.push_back(labels[order[k]]);
      }
      const NestedBatch batch = nest(graphs);
      Tape tape;
      const auto pooled = w.forward(tape, batch, true);
      const auto logits =
          tape.add_row(tape.matmul(pooled, tape.param(w.head)), tape.param(w.head_bias));
      const auto loss = tape.softmax_cross_entropy(logits, ys);
      for (auto* param : w.all()) param->zero_grad();
      tape.backward(loss);
      adam.step(w.all());
    }
  }
  return model;
}

EmbeddingVector NgnnModel::embed(const InteractionGraph& g) const {
  const NestedBatch batch = nest({&g});
  Tape tape;
  const auto pooled = weights_->forward(tape, batch, false);
  const nn::Matrix& m = tape.value(pooled);
  EmbeddingVector v;
  v.dim = static_cast<int>(m.cols());
  v.values.assign(m.data(), m.data() + m.size());
  v.method = GraphMethod::kNgnn;
  v.source = EmbeddingSource::kGraphLevel;
  return v;
}

}  // namespace asb
