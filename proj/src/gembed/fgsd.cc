#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "asb/error.h"
#include "asb/gembed.h"
#include "asb/gembed_detail.h"

namespace asb {

namespace detail {

Eigen::MatrixXd harmonic_distances(const UndirectedView& view) {
  const Eigen::MatrixXd lap = laplacian(view);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const Eigen::MatrixXd& phi = solver.eigenvectors();
  const double tol = 1e-9 * std::max(1.0, lambda.size() ? lambda.maxCoeff() : 1.0);
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(view.n, view.n);
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) <= tol) continue;
    const double inv = 1.0 / lambda(k);
    for (int a = 0; a < view.n; ++a) {
      for (int b = a + 1; b < view.n; ++b) {
        const double diff = phi(a, k) - phi(b, k);
        dist(a, b) += inv * diff * diff;
      }
    }
  }
  for (int a = 0; a < view.n; ++a) {
    for (int b = 0; b < a; ++b) dist(a, b) = dist(b, a);
  }
  return dist;
}

int fgsd_bin(double distance, const FgsdParams& params) {
  // The small offset keeps exact bin edges (1.0, 1.5, ...) in the upper bin
  // despite rounding in the eigendecomposition.
  const double pos = std::floor(distance / params.bin_width + 1e-9);
  if (pos < 0) return 0;
  if (pos >= params.bins - 1) return params.bins - 1;
  return static_cast<int>(pos);
}

}  // namespace detail

EmbeddingVector fgsd_embed(const InteractionGraph& g,
                           const GraphEmbeddingConfig& config) {
  config.validate();
  if (g.nodes.size() < 2) {
    throw DataError("fgsd: graph of \"" + g.target_message_id +
                    "\" has fewer than 2 nodes");
  }
  const auto view = detail::undirected_view(g);
  const Eigen::MatrixXd dist = detail::harmonic_distances(view);
  FgsdParams params = config.fgsd;
  params.bins = config.resolved_dim();
  EmbeddingVector v;
  v.method = GraphMethod::kFgsd;
  v.source = EmbeddingSource::kGraphLevel;
  v.dim = params.bins;
  v.values.assign(static_cast<size_t>(params.bins), 0.0);
  for (int a = 0; a < view.n; ++a) {
    for (int b = a + 1; b < view.n; ++b) {
      v.values[static_cast<size_t>(detail::fgsd_bin(dist(a, b), params))] += 1.0;
    }
  }
  return v;
}

}  // namespace asb
