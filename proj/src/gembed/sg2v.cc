#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

#include "asb/gembed.h"
#include "asb/gembed_detail.h"
#include "asb/hash.h"

namespace asb {

namespace detail {

namespace {

int degree_bucket(int count) { return count == 0 ? 0 : 1 + log2_bucket(count); }

}  // namespace

std::vector<uint64_t> wl_document(const InteractionGraph& g, int iterations,
                                  bool weighted) {
  const IndexedGraph ig = index_graph(g);
  const size_t n = static_cast<size_t>(ig.n);
  std::vector<std::array<int, 4>> profile(n, {0, 0, 0, 0});
  for (const auto& e : ig.edges) {
    profile[static_cast<size_t>(e.dst)][e.sign > 0 ? 0 : 1]++;
    profile[static_cast<size_t>(e.src)][e.sign > 0 ? 2 : 3]++;
  }
  std::vector<uint64_t> labels(n);
  for (size_t v = 0; v < n; ++v) {
    Fnv1a h;
    h.u64(0);
    for (int c : profile[v]) h.i64(degree_bucket(c));
    labels[v] = h.digest();
  }
  std::vector<uint64_t> document(labels);

  // (direction, sign, weight bucket, neighbor label); direction 0 = outgoing.
  using Item = std::tuple<int, int, int, uint64_t>;
  std::vector<std::vector<Item>> items(n);
  for (int it = 1; it <= iterations; ++it) {
    for (auto& list : items) list.clear();
    for (const auto& e : ig.edges) {
      const int wb = weighted ? log2_bucket(e.weight) : 0;
      items[static_cast<size_t>(e.src)].emplace_back(0, e.sign, wb,
                                                     labels[static_cast<size_t>(e.dst)]);
      items[static_cast<size_t>(e.dst)].emplace_back(1, e.sign, wb,
                                                     labels[static_cast<size_t>(e.src)]);
    }
    std::vector<uint64_t> next(n);
    for (size_t v = 0; v < n; ++v) {
      auto& list = items[v];
      std::sort(list.begin(), list.end());
      Fnv1a h;
      h.i64(it).u64(labels[v]).u64(list.size());
      for (const auto& [dir, sign, wb, lab] : list) {
        h.i64(dir).i64(sign).i64(wb).u64(lab);
      }
      next[v] = h.digest();
    }
    labels = std::move(next);
    document.insert(document.end(), labels.begin(), labels.end());
  }
  std::sort(document.begin(), document.end());
  return document;
}

}  // namespace detail

namespace {

inline double sigmoid(double x) {
  if (x > 30) return 1.0;
  if (x < -30) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

uint64_t document_hash(const std::vector<uint64_t>& doc) {
  Fnv1a h;
  for (uint64_t l : doc) h.u64(l);
  return h.digest();
}

// One SGNS update of `doc` toward `label`. Output vectors move only when
// `update` is non-null (it must alias `out`).
void sgns_step(double* doc, const nn::Matrix& out, nn::Matrix* update, int label, double lr,
               int negatives, const detail::NegativeSampler& sampler, Rng& rng,
               std::vector<double>& err) {
  const Eigen::Index d = out.cols();
  std::fill(err.begin(), err.end(), 0.0);
  for (int k = 0; k <= negatives; ++k) {
    int target = label;
    double y = 1.0;
    if (k > 0) {
      target = sampler.sample(rng);
      if (target == label) continue;
      y = 0.0;
    }
    double dot = 0;
    for (Eigen::Index i = 0; i < d; ++i) dot += doc[i] * out(target, i);
    const double g = (y - sigmoid(dot)) * lr;
    for (Eigen::Index i = 0; i < d; ++i) {
      err[static_cast<size_t>(i)] += g * out(target, i);
      if (update) (*update)(target, i) += g * doc[i];
    }
  }
  for (Eigen::Index i = 0; i < d; ++i) doc[i] += err[static_cast<size_t>(i)];
}

std::vector<double> initial_doc_vector(uint64_t doc_hash, uint64_t seed, int dim) {
  Rng rng(mix64(doc_hash ^ derive_seed(seed, "sg2v-doc")));
  std::vector<double> v(static_cast<size_t>(dim));
  for (auto& x : v) x = (rng.uniform01() - 0.5) / static_cast<double>(dim);
  return v;
}

}  // namespace

Sg2vModel Sg2vModel::fit(const std::vector<const InteractionGraph*>& training,
                         const GraphEmbeddingConfig& config, LeakageAudit* audit) {
  config.validate();
  Sg2vModel model;
  model.config_ = config;
  model.weighted_ = config.method == GraphMethod::kWdSg2v;
  const int dim = config.resolved_dim();
  const auto& p = config.sg2v;

  std::vector<std::vector<uint64_t>> docs;
  docs.reserve(training.size());
  for (const InteractionGraph* g : training) {
    if (audit) audit->touch("embedding-training", g->target_message_id);
    docs.push_back(detail::wl_document(*g, p.wl_iterations, model.weighted_));
  }
  for (const auto& doc : docs) {
    model.vocab_.insert(model.vocab_.end(), doc.begin(), doc.end());
  }
  std::sort(model.vocab_.begin(), model.vocab_.end());
  model.vocab_.erase(std::unique(model.vocab_.begin(), model.vocab_.end()),
                     model.vocab_.end());
  const auto vocab_index = [&](uint64_t label) {
    return static_cast<int>(std::lower_bound(model.vocab_.begin(), model.vocab_.end(), label) -
                            model.vocab_.begin());
  };

  std::vector<std::pair<int, int>> pairs;  // (doc, label index)
  model.label_counts_.assign(model.vocab_.size(), 0.0);
  for (size_t d = 0; d < docs.size(); ++d) {
    for (uint64_t l : docs[d]) {
      const int li = vocab_index(l);
      pairs.emplace_back(static_cast<int>(d), li);
      model.label_counts_[static_cast<size_t>(li)] += 1.0;
    }
  }
  model.label_vectors_ = nn::Matrix::Zero(static_cast<Eigen::Index>(model.vocab_.size()), dim);
  if (pairs.empty()) return model;

  std::vector<std::vector<double>> doc_vecs;
  for (const auto& doc : docs) {
    doc_vecs.push_back(initial_doc_vector(document_hash(doc), config.seed, dim));
  }
  const detail::NegativeSampler sampler(model.label_counts_);
  Rng rng(derive_seed(config.seed, "sg2v-train"));
  std::vector<double> err(static_cast<size_t>(dim));
  const double total = static_cast<double>(pairs.size()) * p.epochs;
  double step = 0;
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(pairs);
    for (const auto& [d, l] : pairs) {
      const double lr = p.learning_rate * std::max(1e-4, 1.0 - step / total);
      step += 1;
      sgns_step(doc_vecs[static_cast<size_t>(d)].data(), model.label_vectors_,
                &model.label_vectors_, l, lr, p.negatives, sampler, rng, err);
    }
  }
  return model;
}

EmbeddingVector Sg2vModel::embed(const InteractionGraph& g) const {
  const int dim = config_.resolved_dim();
  const auto& p = config_.sg2v;
  const auto doc = detail::wl_document(g, p.wl_iterations, weighted_);
  const uint64_t h = document_hash(doc);
  std::vector<double> vec = initial_doc_vector(h, config_.seed, dim);

  std::vector<int> known;
  for (uint64_t l : doc) {
    auto it = std::lower_bound(vocab_.begin(), vocab_.end(), l);
    if (it != vocab_.end() && *it == l) known.push_back(static_cast<int>(it - vocab_.begin()));
  }
  if (!known.empty()) {
    const detail::NegativeSampler sampler(label_counts_);
    Rng rng(mix64(h ^ derive_seed(config_.seed, "sg2v-infer")));
    std::vector<double> err(static_cast<size_t>(dim));
    const double total = static_cast<double>(known.size()) * p.infer_epochs;
    double step = 0;
    for (int epoch = 0; epoch < p.infer_epochs; ++epoch) {
      rng.shuffle(known);
      for (int l : known) {
        const double lr = p.learning_rate * std::max(1e-4, 1.0 - step / total);
        step += 1;
        sgns_step(vec.data(), label_vectors_, nullptr, l, lr, p.negatives, sampler, rng, err);
      }
    }
  }
  EmbeddingVector v;
  v.values = std::move(vec);
  v.dim = dim;
  v.method = config_.method;
  v.source = EmbeddingSource::kGraphLevel;
  return v;
}

}  // namespace asb
