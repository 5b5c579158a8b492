#include <algorithm>
#include <cmath>

#include "asb/gembed_detail.h"

namespace asb::detail {

NegativeSampler::NegativeSampler(const std::vector<double>& counts) {
  cdf_.reserve(counts.size());
  double acc = 0;
  for (double c : counts) {
    acc += c > 0 ? std::pow(c, 0.75) : 0.0;
    cdf_.push_back(acc);
  }
}

int NegativeSampler::sample(Rng& rng) const {
  const double u = rng.uniform01() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<int>(it - cdf_.begin());
}

namespace {

inline double sigmoid(double x) {
  if (x > 30) return 1.0;
  if (x < -30) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

Eigen::MatrixXd train_skipgram(int vocab, const std::vector<std::pair<int, int>>& pairs,
                               const SkipGramOptions& options, Rng& rng) {
  const size_t d = static_cast<size_t>(options.dim);
  const size_t v = static_cast<size_t>(vocab);
  std::vector<double> in(v * d), out(v * d, 0.0), err(d);
  for (auto& x : in) x = (rng.uniform01() - 0.5) / static_cast<double>(d);

  std::vector<double> counts(v, 0.0);
  for (const auto& [c, o] : pairs) counts[static_cast<size_t>(o)] += 1.0;
  const NegativeSampler sampler(counts);

  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const double total_steps =
      static_cast<double>(pairs.size()) * static_cast<double>(options.epochs);
  double step = 0;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t idx : order) {
      const auto [center, context] = pairs[idx];
      const double lr =
          options.learning_rate * std::max(1e-4, 1.0 - step / std::max(1.0, total_steps));
      step += 1;
      double* h = &in[static_cast<size_t>(center) * d];
      std::fill(err.begin(), err.end(), 0.0);
      for (int k = 0; k <= options.negatives; ++k) {
        int target;
        double label;
        if (k == 0) {
          target = context;
          label = 1.0;
        } else {
          if (sampler.empty()) break;
          target = sampler.sample(rng);
          if (target == context) continue;
          label = 0.0;
        }
        double* w = &out[static_cast<size_t>(target) * d];
        double dot = 0;
        for (size_t i = 0; i < d; ++i) dot += h[i] * w[i];
        const double g = (label - sigmoid(dot)) * lr;
        for (size_t i = 0; i < d; ++i) {
          err[i] += g * w[i];
          w[i] += g * h[i];
        }
      }
      for (size_t i = 0; i < d; ++i) h[i] += err[i];
    }
  }

  Eigen::MatrixXd result(vocab, options.dim);
  for (size_t r = 0; r < v; ++r) {
    for (size_t c = 0; c < d; ++c) result(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = in[r * d + c];
  }
  return result;
}

}  // namespace asb::detail
