#include <Eigen/Eigenvalues>
#include <cmath>

#include "asb/gembed.h"
#include "asb/gembed_detail.h"

namespace asb {

namespace detail {

HeatScales graphwave_scales(const Eigen::VectorXd& eigenvalues,
                            const GraphWaveParams& params) {
  HeatScales scales;
  if (eigenvalues.size() == 0) return scales;
  const double largest = eigenvalues.maxCoeff();
  const double tol = 1e-9 * std::max(1.0, largest);
  double smallest_positive = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double l = eigenvalues(i);
    if (l > tol && (smallest_positive == 0 || l < smallest_positive)) {
      smallest_positive = l;
    }
  }
  // No spectral gap (edgeless graph): keep the unit defaults.
  if (smallest_positive == 0) return scales;
  const double geo = std::sqrt(smallest_positive * largest);
  scales.small = -std::log(params.eta_small_scale) / geo;
  scales.large = -std::log(params.eta_large_scale) / geo;
  return scales;
}

std::vector<double> characteristic_embedding(const Eigen::VectorXd& wavelet,
                                             const GraphWaveParams& params) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(params.points) * 2);
  const double n = static_cast<double>(wavelet.size());
  for (int k = 0; k < params.points; ++k) {
    const double t = params.points > 1
                         ? params.t_max * static_cast<double>(k) /
                               static_cast<double>(params.points - 1)
                         : 0.0;
    double re = 0, im = 0;
    for (Eigen::Index m = 0; m < wavelet.size(); ++m) {
      re += std::cos(t * wavelet(m));
      im += std::sin(t * wavelet(m));
    }
    out.push_back(re / n);
    out.push_back(im / n);
  }
  return out;
}

}  // namespace detail

EmbeddingVector graphwave_embed(const InteractionGraph& g,
                                const GraphEmbeddingConfig& config) {
  config.validate();
  const auto view = detail::undirected_view(g);
  const Eigen::MatrixXd lap = detail::normalized_laplacian(view);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const Eigen::MatrixXd& u = solver.eigenvectors();
  const auto scales = detail::graphwave_scales(lambda, config.graphwave);

  GraphWaveParams params = config.graphwave;
  params.points = config.resolved_dim() / 4;
  EmbeddingVector v;
  v.method = GraphMethod::kGraphWave;
  v.source = EmbeddingSource::kNodeLevel;
  const Eigen::VectorXd target_row = u.row(view.target).transpose();
  for (double s : {scales.small, scales.large}) {
    const Eigen::VectorXd filtered = (-s * lambda.array()).exp().matrix().cwiseProduct(target_row);
    const Eigen::VectorXd wavelet = u * filtered;
    auto part = detail::characteristic_embedding(wavelet, params);
    v.values.insert(v.values.end(), part.begin(), part.end());
  }
  v.dim = static_cast<int>(v.values.size());
  return v;
}

}  // namespace asb
