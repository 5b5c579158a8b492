#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "asb/classify.h"
#include "asb/error.h"
#include "asb/lexembed.h"

namespace asb {

std::string_view to_string(Kernel k) {
  switch (k) {
    case Kernel::kRbf:
      return "rbf";
    case Kernel::kSigmoid:
      return "sigmoid";
    case Kernel::kPoly:
      return "poly";
    case Kernel::kLinear:
      return "linear";
  }
  return "rbf";
}

Kernel parse_kernel(std::string_view s) {
  if (s == "rbf") return Kernel::kRbf;
  if (s == "sigmoid") return Kernel::kSigmoid;
  if (s == "poly") return Kernel::kPoly;
  if (s == "linear") return Kernel::kLinear;
  throw UsageError("unknown kernel \"" + std::string(s) + "\"");
}

std::string Gamma::to_string() const {
  switch (kind) {
    case Kind::kScale:
      return "scale";
    case Kind::kAuto:
      return "auto";
    case Kind::kValue:
      return format_double(value);
  }
  return "scale";
}

Gamma Gamma::parse(std::string_view s) {
  if (s == "scale") return scale();
  if (s == "auto") return automatic();
  try {
    size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size() || !(v > 0) || !std::isfinite(v)) throw std::invalid_argument("gamma");
    return of(v);
  } catch (const std::exception&) {
    throw UsageError("gamma must be scale, auto or a positive number, got \"" +
                     std::string(s) + "\"");
  }
}

void SvmConfig::validate() const {
  if (!(C > 0) || !std::isfinite(C)) throw UsageError("SVM C must be positive");
  if (uses_gamma() && gamma.kind == Gamma::Kind::kValue &&
      !(gamma.value > 0 && std::isfinite(gamma.value))) {
    throw UsageError("SVM gamma must be positive");
  }
  if (uses_degree() && degree < 2) throw UsageError("SVM poly degree must be >= 2");
  if (max_iterations < 1) throw UsageError("SVM max_iterations must be >= 1");
}

SvmConfig SvmConfig::canonical() const {
  SvmConfig c = *this;
  if (!c.uses_gamma()) c.gamma = Gamma::scale();
  if (!c.uses_degree()) c.degree = 0;
  return c;
}

std::string SvmConfig::to_string() const {
  std::ostringstream os;
  os << asb::to_string(kernel) << " C=" << format_double(C);
  if (uses_gamma()) os << " gamma=" << gamma.to_string();
  if (uses_degree()) os << " degree=" << degree;
  os << " max_iter=" << max_iterations;
  return os.str();
}

bool tie_break_less(const SvmConfig& a, const SvmConfig& b) {
  const auto key = [](const SvmConfig& c) {
    const SvmConfig k = c.canonical();
    const double gv = k.gamma.kind == Gamma::Kind::kValue ? k.gamma.value : 0.0;
    return std::make_tuple(static_cast<int>(k.kernel), k.C, static_cast<int>(k.gamma.kind), gv,
                           k.degree, k.max_iterations);
  };
  return key(a) < key(b);
}

double resolve_gamma(const Gamma& gamma, const Eigen::MatrixXd& X) {
  const double dim = static_cast<double>(std::max<Eigen::Index>(1, X.cols()));
  switch (gamma.kind) {
    case Gamma::Kind::kValue:
      return gamma.value;
    case Gamma::Kind::kAuto:
      return 1.0 / dim;
    case Gamma::Kind::kScale: {
      if (X.size() == 0) return 1.0;
      const double mean = X.mean();
      const double var = (X.array() - mean).square().mean();
      return var > 0 ? 1.0 / (dim * var) : 1.0;
    }
  }
  return 1.0;
}

Eigen::MatrixXd kernel_from_dots(const Eigen::MatrixXd& dots, const Eigen::VectorXd& left_sq,
                                 const Eigen::VectorXd& right_sq, const KernelParams& p) {
  switch (p.kernel) {
    case Kernel::kLinear:
      return dots;
    case Kernel::kRbf: {
      Eigen::MatrixXd k(dots.rows(), dots.cols());
      for (Eigen::Index j = 0; j < dots.cols(); ++j) {
        for (Eigen::Index i = 0; i < dots.rows(); ++i) {
          const double d2 = std::max(0.0, left_sq(i) + right_sq(j) - 2.0 * dots(i, j));
          k(i, j) = std::exp(-p.gamma * d2);
        }
      }
      return k;
    }
    case Kernel::kSigmoid:
      return (p.gamma * dots.array()).tanh().matrix();
    case Kernel::kPoly:
      return (p.gamma * dots.array()).pow(static_cast<double>(p.degree)).matrix();
  }
  return dots;
}

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

BinarySolution solve_binary(const Eigen::MatrixXd& K, const std::vector<double>& y, double C,
                            int max_iterations, double tolerance) {
  const int n = static_cast<int>(y.size());
  BinarySolution sol;
  sol.alpha.assign(static_cast<size_t>(n), 0.0);
  bool has_pos = false, has_neg = false;
  for (double v : y) (v > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    // One-sided problem: constant decision y.
    sol.rho = has_pos ? -1.0 : 1.0;
    sol.converged = true;
    return sol;
  }

  std::vector<double> G(static_cast<size_t>(n), -1.0);
  auto& a = sol.alpha;
  const auto upper = [&](int t) { return a[static_cast<size_t>(t)] >= C; };
  const auto lower = [&](int t) { return a[static_cast<size_t>(t)] <= 0; };

  // Returns false when the KKT gap is below tolerance.
  const auto select = [&](int& out_i, int& out_j) {
    double gmax = -kInf;
    int gi = -1;
    for (int t = 0; t < n; ++t) {
      const double g = G[static_cast<size_t>(t)];
      if (y[static_cast<size_t>(t)] > 0) {
        if (!upper(t) && -g >= gmax) {
          gmax = -g;
          gi = t;
        }
      } else if (!lower(t) && g >= gmax) {
        gmax = g;
        gi = t;
      }
    }
    double gmax2 = -kInf;
    int gj = -1;
    double best = kInf;
    const double yi = gi >= 0 ? y[static_cast<size_t>(gi)] : 0.0;
    for (int t = 0; t < n; ++t) {
      const double g = G[static_cast<size_t>(t)];
      if (y[static_cast<size_t>(t)] > 0) {
        if (!lower(t)) {
          const double diff = gmax + g;
          if (g >= gmax2) gmax2 = g;
          if (gi >= 0 && diff > 0) {
            double quad = K(gi, gi) + K(t, t) - 2.0 * yi * K(gi, t);
            if (quad <= 0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj <= best) {
              gj = t;
              best = obj;
            }
          }
        }
      } else if (!upper(t)) {
        const double diff = gmax - g;
        if (-g >= gmax2) gmax2 = -g;
        if (gi >= 0 && diff > 0) {
          double quad = K(gi, gi) + K(t, t) + 2.0 * yi * K(gi, t);
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) {
            gj = t;
            best = obj;
          }
        }
      }
    }
    if (gmax + gmax2 < tolerance || gi < 0 || gj < 0) return false;
    out_i = gi;
    out_j = gj;
    return true;
  };

  int i = -1, j = -1;
  while (true) {
    if (!select(i, j)) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iterations) break;
    ++sol.iterations;
    const size_t si = static_cast<size_t>(i), sj = static_cast<size_t>(j);
    const double yi = y[si], yj = y[sj];
    const double old_ai = a[si], old_aj = a[sj];
    const double qij = yi * yj * K(i, j);
    if (yi != yj) {
      double quad = K(i, i) + K(j, j) + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-G[si] - G[sj]) / quad;
      const double diff = a[si] - a[sj];
      a[si] += delta;
      a[sj] += delta;
      if (diff > 0) {
        if (a[sj] < 0) {
          a[sj] = 0;
          a[si] = diff;
        }
      } else if (a[si] < 0) {
        a[si] = 0;
        a[sj] = -diff;
      }
      if (diff > 0) {
        if (a[si] > C) {
          a[si] = C;
          a[sj] = C - diff;
        }
      } else if (a[sj] > C) {
        a[sj] = C;
        a[si] = C + diff;
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (G[si] - G[sj]) / quad;
      const double sum = a[si] + a[sj];
      a[si] -= delta;
      a[sj] += delta;
      if (sum > C) {
        if (a[si] > C) {
          a[si] = C;
          a[sj] = sum - C;
        }
      } else if (a[sj] < 0) {
        a[sj] = 0;
        a[si] = sum;
      }
      if (sum > C) {
        if (a[sj] > C) {
          a[sj] = C;
          a[si] = sum - C;
        }
      } else if (a[si] < 0) {
        a[si] = 0;
        a[sj] = sum;
      }
    }
    const double dai = a[si] - old_ai, daj = a[sj] - old_aj;
    for (int t = 0; t < n; ++t) {
      const double yt = y[static_cast<size_t>(t)];
      G[static_cast<size_t>(t)] += yt * (yi * K(i, t) * dai + yj * K(j, t) * daj);
    }
  }

  double ub = kInf, lb = -kInf, sum_free = 0;
  int n_free = 0;
  for (int t = 0; t < n; ++t) {
    const double yg = y[static_cast<size_t>(t)] * G[static_cast<size_t>(t)];
    const bool pos = y[static_cast<size_t>(t)] > 0;
    if (upper(t)) {
      if (pos) lb = std::max(lb, yg);
      else ub = std::min(ub, yg);
    } else if (lower(t)) {
      if (pos) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  sol.rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2;
  return sol;
}

Eigen::MatrixXd OvrSolution::scores(const Eigen::MatrixXd& K_rows) const {
  Eigen::MatrixXd f = K_rows * coef;
  f.rowwise() -= rho.transpose();
  if (n_classes == 2) {
    Eigen::MatrixXd out(f.rows(), 2);
    out.col(0) = -f.col(0);
    out.col(1) = f.col(0);
    return out;
  }
  return f;
}

OvrSolution train_ovr(const Eigen::MatrixXd& K, const std::vector<int>& labels, int n_classes,
                      double C, int max_iterations) {
  const int problems = n_classes == 2 ? 1 : n_classes;
  const auto n = static_cast<Eigen::Index>(labels.size());
  OvrSolution out;
  out.n_classes = n_classes;
  out.coef = Eigen::MatrixXd::Zero(n, problems);
  out.rho = Eigen::VectorXd::Zero(problems);
  std::vector<double> y(labels.size());
  for (int p = 0; p < problems; ++p) {
    const int positive = n_classes == 2 ? 1 : p;
    for (size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == positive ? 1.0 : -1.0;
    const BinarySolution sol = solve_binary(K, y, C, max_iterations);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.coef(i, p) = sol.alpha[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
    }
    out.rho(p) = sol.rho;
    out.converged = out.converged && sol.converged;
    out.max_iterations_used = std::max(out.max_iterations_used, sol.iterations);
  }
  return out;
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  int best = 0;
  for (Eigen::Index k = 1; k < scores.size(); ++k) {
    if (scores(k) > scores(best)) best = static_cast<int>(k);
  }
  return best;
}

std::vector<double> TrainedClassifier::decision_scores(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != feature_dim_) {
    throw DataError("decision_scores: input dim " + std::to_string(x.size()) +
                    " does not match classifier dim " + std::to_string(feature_dim_));
  }
  const Eigen::MatrixXd row =
      Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::MatrixXd s = decision_scores(row);
  return std::vector<double>(s.data(), s.data() + s.size());
}

std::string TrainedClassifier::predict(const std::vector<double>& x) const {
  const auto s = decision_scores(x);
  return classes_[static_cast<size_t>(
      argmax(Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()))))];
}

Eigen::MatrixXd TrainedClassifier::decision_scores(const Eigen::MatrixXd& X) const {
  if (X.cols() != feature_dim_) {
    throw DataError("decision_scores: input dim " + std::to_string(X.cols()) +
                    " does not match classifier dim " + std::to_string(feature_dim_));
  }
  const Eigen::MatrixXd dots = X * support_.transpose();
  const Eigen::VectorXd sq = X.rowwise().squaredNorm();
  return solution_.scores(kernel_from_dots(dots, sq, support_sq_, params_));
}

std::vector<std::string> TrainedClassifier::predict(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd s = decision_scores(X);
  std::vector<std::string> out(static_cast<size_t>(s.rows()));
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    out[static_cast<size_t>(r)] = classes_[static_cast<size_t>(argmax(s.row(r).transpose()))];
  }
  return out;
}

TrainedClassifier train_svm(const Eigen::MatrixXd& X, const std::vector<std::string>& y,
                            const SvmConfig& config,
                            const std::vector<std::string>& class_order) {
  config.validate();
  if (static_cast<size_t>(X.rows()) != y.size() || y.size() < 2) {
    throw DataError("train_svm: need at least 2 rows with one label each");
  }
  if (!X.allFinite()) throw DataError("train_svm: non-finite feature value");
  std::vector<std::string> classes = class_order;
  if (classes.empty()) {
    classes.assign(y.begin(), y.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  }
  std::map<std::string, int> index;
  for (size_t k = 0; k < classes.size(); ++k) index[classes[k]] = static_cast<int>(k);
  std::vector<int> labels(y.size());
  std::set<int> present;
  for (size_t i = 0; i < y.size(); ++i) {
    auto it = index.find(y[i]);
    if (it == index.end()) throw DataError("train_svm: label \"" + y[i] + "\" not in class list");
    labels[i] = it->second;
    present.insert(it->second);
  }
  if (present.size() < 2) throw DataError("train_svm: training labels contain a single class");

  TrainedClassifier clf;
  clf.config_ = config.canonical();
  clf.classes_ = classes;
  clf.feature_dim_ = static_cast<int>(X.cols());
  clf.params_ = {config.kernel, resolve_gamma(config.gamma, X), config.degree};
  const Eigen::MatrixXd dots = X * X.transpose();
  const Eigen::VectorXd sq = dots.diagonal();
  const Eigen::MatrixXd K = kernel_from_dots(dots, sq, sq, clf.params_);
  OvrSolution full = train_ovr(K, labels, static_cast<int>(classes.size()), config.C,
                               config.max_iterations);

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < full.coef.rows(); ++i) {
    if ((full.coef.row(i).array() != 0.0).any()) keep.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  clf.support_.resize(m, X.cols());
  clf.support_sq_.resize(m);
  clf.solution_ = full;
  clf.solution_.coef.resize(m, full.coef.cols());
  for (Eigen::Index r = 0; r < m; ++r) {
    clf.support_.row(r) = X.row(keep[static_cast<size_t>(r)]);
    clf.support_sq_(r) = sq(keep[static_cast<size_t>(r)]);
    clf.solution_.coef.row(r) = full.coef.row(keep[static_cast<size_t>(r)]);
  }
  return clf;
}

}  // namespace asb
