#include "asb/error.h"
#include "asb/gembed.h"
#include "asb/gembed_detail.h"

namespace asb {

namespace detail {

std::vector<Walk> biased_walks(const UndirectedView& view, const WalkParams& params,
                               Rng& rng) {
  std::vector<Walk> walks;
  walks.reserve(static_cast<size_t>(view.n) * static_cast<size_t>(params.walks_per_node));
  std::vector<double> weights;
  for (int round = 0; round < params.walks_per_node; ++round) {
    for (int start = 0; start < view.n; ++start) {
      Walk walk;
      walk.reserve(static_cast<size_t>(params.walk_length));
      walk.push_back(start);
      while (static_cast<int>(walk.size()) < params.walk_length) {
        const int cur = walk.back();
        const auto& nbrs = view.adjacency[static_cast<size_t>(cur)];
        if (nbrs.empty()) {
          walk.push_back(cur);
          continue;
        }
        weights.assign(nbrs.size(), 1.0);
        if (walk.size() >= 2) {
          const int prev = walk[walk.size() - 2];
          for (size_t k = 0; k < nbrs.size(); ++k) {
            const int x = nbrs[k];
            if (x == prev) {
              weights[k] = 1.0 / params.p;
            } else if (!view.has_edge(prev, x)) {
              weights[k] = 1.0 / params.q;
            }
          }
        }
        double total = 0;
        for (double w : weights) total += w;
        double u = rng.uniform01() * total;
        size_t pick = nbrs.size() - 1;
        for (size_t k = 0; k < nbrs.size(); ++k) {
          if (u < weights[k]) {
            pick = k;
            break;
          }
          u -= weights[k];
        }
        walk.push_back(nbrs[pick]);
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

std::vector<std::pair<int, int>> window_pairs(const std::vector<Walk>& walks,
                                              int window) {
  std::vector<std::pair<int, int>> pairs;
  for (const auto& w : walks) {
    const int len = static_cast<int>(w.size());
    for (int i = 0; i < len; ++i) {
      const int lo = std::max(0, i - window);
      const int hi = std::min(len - 1, i + window);
      for (int j = lo; j <= hi; ++j) {
        if (j != i) pairs.emplace_back(w[static_cast<size_t>(i)], w[static_cast<size_t>(j)]);
      }
    }
  }
  return pairs;
}

std::vector<std::pair<int, int>> stride_pairs(const std::vector<Walk>& walks,
                                              int stride) {
  std::vector<std::pair<int, int>> pairs;
  for (const auto& w : walks) {
    for (size_t i = 0; i + static_cast<size_t>(stride) < w.size(); ++i) {
      const int a = w[i];
      const int b = w[i + static_cast<size_t>(stride)];
      pairs.emplace_back(a, b);
      pairs.emplace_back(b, a);
    }
  }
  return pairs;
}

}  // namespace detail

namespace {

EmbeddingVector finish(std::vector<double> values, GraphMethod method) {
  EmbeddingVector v;
  v.dim = static_cast<int>(values.size());
  v.values = std::move(values);
  v.method = method;
  v.source = method_source(method);
  return v;
}

}  // namespace

EmbeddingVector node2vec_embed(const InteractionGraph& g,
                               const GraphEmbeddingConfig& config) {
  config.validate();
  const auto view = detail::undirected_view(g);
  Rng rng(derive_seed(config.seed, "node2vec"));
  const auto walks = detail::biased_walks(view, config.walk, rng);
  const auto pairs = detail::window_pairs(walks, config.walk.window);
  detail::SkipGramOptions opts;
  opts.dim = config.resolved_dim();
  opts.negatives = config.walk.negatives;
  opts.epochs = config.walk.epochs;
  opts.learning_rate = config.walk.learning_rate;
  const Eigen::MatrixXd emb = detail::train_skipgram(view.n, pairs, opts, rng);
  std::vector<double> out(static_cast<size_t>(opts.dim));
  for (int c = 0; c < opts.dim; ++c) out[static_cast<size_t>(c)] = emb(view.target, c);
  return finish(std::move(out), GraphMethod::kNode2Vec);
}

EmbeddingVector walklets_embed(const InteractionGraph& g,
                               const GraphEmbeddingConfig& config) {
  config.validate();
  const auto view = detail::undirected_view(g);
  WalkParams uniform = config.walk;
  uniform.p = 1.0;
  uniform.q = 1.0;
  Rng walk_rng(derive_seed(config.seed, "walklets"));
  const auto walks = detail::biased_walks(view, uniform, walk_rng);

  const int scales = config.walk.walklets_scales;
  detail::SkipGramOptions opts;
  opts.dim = config.resolved_dim() / scales;
  opts.negatives = config.walk.negatives;
  opts.epochs = config.walk.epochs;
  opts.learning_rate = config.walk.learning_rate;

  std::vector<double> out;
  out.reserve(static_cast<size_t>(config.resolved_dim()));
  for (int k = 1; k <= scales; ++k) {
    Rng rng(derive_seed(config.seed, "walklets-scale-" + std::to_string(k)));
    const auto pairs = detail::stride_pairs(walks, k);
    const Eigen::MatrixXd emb = detail::train_skipgram(view.n, pairs, opts, rng);
    for (int c = 0; c < opts.dim; ++c) out.push_back(emb(view.target, c));
  }
  return finish(std::move(out), GraphMethod::kWalklets);
}

}  // namespace asb
