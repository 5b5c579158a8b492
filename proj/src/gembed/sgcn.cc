#include <algorithm>
#include <set>

#include "asb/error.h"
#include "asb/gembed.h"
#include "asb/gembed_detail.h"

namespace asb {

namespace {

constexpr int kFeatures = 5;
constexpr int kPairClasses = 3;  // positive edge, negative edge, no edge

using nn::Tape;

Tape::Var bind(Tape& tape, nn::Parameter& p, bool trainable) {
  return trainable ? tape.param(p) : tape.constant(p.value);
}

struct GraphOperators {
  detail::IndexedGraph graph;
  std::shared_ptr<const nn::SparseMatrix> positive;
  std::shared_ptr<const nn::SparseMatrix> negative;
  nn::Matrix features;
};

GraphOperators prepare(const InteractionGraph& g, bool weighted_directed) {
  GraphOperators ops;
  ops.graph = detail::index_graph(g);
  auto agg = detail::signed_aggregators(ops.graph, weighted_directed);
  ops.positive = std::make_shared<const nn::SparseMatrix>(std::move(agg.positive));
  ops.negative = std::make_shared<const nn::SparseMatrix>(std::move(agg.negative));
  ops.features = detail::signed_degree_features(ops.graph, weighted_directed);
  return ops;
}

}  // namespace

struct SgcnModel::Weights {
  nn::Parameter w1b, w1u;  // (2F x h)
  nn::Parameter w2b, w2u;  // (3h x h)
  nn::Parameter head;      // (4h x 3)
  nn::Parameter head_bias;

  std::vector<nn::Parameter*> all() { return {&w1b, &w1u, &w2b, &w2u, &head, &head_bias}; }

  // Returns the [B || U] node matrix.
  Tape::Var forward(Tape& tape, const GraphOperators& ops, bool trainable) {
    const auto x = tape.constant(ops.features);
    const auto b1 = tape.tanh(tape.matmul(
        tape.hcat({tape.spmm(ops.positive, x), x}), bind(tape, w1b, trainable)));
    const auto u1 = tape.tanh(tape.matmul(
        tape.hcat({tape.spmm(ops.negative, x), x}), bind(tape, w1u, trainable)));
    const auto b2 = tape.tanh(tape.matmul(
        tape.hcat({tape.spmm(ops.positive, b1), tape.spmm(ops.negative, u1), b1}),
        bind(tape, w2b, trainable)));
    const auto u2 = tape.tanh(tape.matmul(
        tape.hcat({tape.spmm(ops.positive, u1), tape.spmm(ops.negative, b1), u1}),
        bind(tape, w2u, trainable)));
    return tape.hcat({b2, u2});
  }
};

SgcnModel SgcnModel::untrained(const GraphEmbeddingConfig& config) {
  config.validate();
  if (config.method != GraphMethod::kSgcn && config.method != GraphMethod::kWdSgcn) {
    throw UsageError("SgcnModel: method must be sgcn or wd-sgcn");
  }
  SgcnModel model;
  model.config_ = config;
  model.weighted_directed_ = config.method == GraphMethod::kWdSgcn;
  const int h = config.resolved_dim() / 2;
  Rng rng(derive_seed(config.seed, "sgcn-init"));
  auto w = std::make_shared<Weights>();
  w->w1b = nn::glorot(2 * kFeatures, h, rng);
  w->w1u = nn::glorot(2 * kFeatures, h, rng);
  w->w2b = nn::glorot(3 * h, h, rng);
  w->w2u = nn::glorot(3 * h, h, rng);
  w->head = nn::glorot(4 * h, kPairClasses, rng);
  w->head_bias = nn::zeros(1, kPairClasses);
  model.weights_ = std::move(w);
  return model;
}

SgcnModel SgcnModel::fit(const std::vector<const InteractionGraph*>& training,
                         const GraphEmbeddingConfig& config, LeakageAudit* audit) {
  SgcnModel model = untrained(config);
  const auto& p = config.sgcn;
  std::vector<GraphOperators> prepared;
  prepared.reserve(training.size());
  for (const InteractionGraph* g : training) {
    if (audit) audit->touch("embedding-training", g->target_message_id);
    prepared.push_back(prepare(*g, model.weighted_directed_));
  }

  Weights& w = *model.weights_;
  nn::Adam adam(p.learning_rate);
  Rng rng(derive_seed(config.seed, "sgcn-train"));
  std::vector<size_t> order(prepared.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t gi : order) {
      const GraphOperators& ops = prepared[gi];
      const int n = ops.graph.n;
      if (n < 2) continue;

      // Labeled pairs: every signed edge, then as many random non-edges.
      std::set<std::pair<int, int>> linked;
      std::vector<int> us, vs, labels;
      for (const auto& e : ops.graph.edges) {
        linked.insert({e.src, e.dst});
        us.push_back(e.src);
        vs.push_back(e.dst);
        labels.push_back(e.sign > 0 ? 0 : 1);
      }
      const size_t free_pairs =
          static_cast<size_t>(n) * static_cast<size_t>(n - 1) - linked.size();
      const size_t wanted = std::min(us.size(), free_pairs);
      size_t added = 0;
      for (size_t attempt = 0; added < wanted && attempt < 20 * wanted + 20; ++attempt) {
        const int a = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
        const int b = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
        if (a == b || linked.count({a, b})) continue;
        us.push_back(a);
        vs.push_back(b);
        labels.push_back(2);
        ++added;
      }
      if (labels.size() > static_cast<size_t>(p.max_pairs_per_graph)) {
        std::vector<size_t> pick(labels.size());
        for (size_t i = 0; i < pick.size(); ++i) pick[i] = i;
        rng.shuffle(pick);
        pick.resize(static_cast<size_t>(p.max_pairs_per_graph));
        std::sort(pick.begin(), pick.end());
        std::vector<int> su, sv, sl;
        for (size_t i : pick) {
          su.push_back(us[i]);
          sv.push_back(vs[i]);
          sl.push_back(labels[i]);
        }
        us.swap(su);
        vs.swap(sv);
        labels.swap(sl);
      }
      if (labels.empty()) continue;
      model.sampled_pairs_ += labels.size();

      Tape tape;
      const auto z = w.forward(tape, ops, true);
      const auto pair = tape.hcat({tape.gather_rows(z, us), tape.gather_rows(z, vs)});
      const auto logits =
          tape.add_row(tape.matmul(pair, tape.param(w.head)), tape.param(w.head_bias));
      const auto loss = tape.softmax_cross_entropy(logits, labels);
      for (auto* param : w.all()) param->zero_grad();
      tape.backward(loss);
      adam.step(w.all());
    }
  }
  return model;
}

nn::Matrix SgcnModel::node_representations(const InteractionGraph& g) const {
  const GraphOperators ops = prepare(g, weighted_directed_);
  Tape tape;
  const auto z = weights_->forward(tape, ops, false);
  return tape.value(z);
}

EmbeddingVector SgcnModel::embed(const InteractionGraph& g) const {
  const nn::Matrix z = node_representations(g);
  const auto target = static_cast<Eigen::Index>(detail::index_graph(g).target);
  EmbeddingVector v;
  v.dim = static_cast<int>(z.cols());
  v.values.resize(static_cast<size_t>(v.dim));
  for (Eigen::Index c = 0; c < z.cols(); ++c) v.values[static_cast<size_t>(c)] = z(target, c);
  v.method = config_.method;
  v.source = EmbeddingSource::kNodeLevel;
  return v;
}

}  // namespace asb
