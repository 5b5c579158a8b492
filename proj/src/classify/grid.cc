#include <algorithm>
#include <map>
#include <ostream>
#include <tuple>

#include "asb/classify.h"
#include "asb/error.h"
#include "asb/lexembed.h"
#include "asb/metrics.h"
#include "asb/parallel.h"
#include "asb/rng.h"

namespace asb {

SvmGrid SvmGrid::full() {
  SvmGrid g;
  g.kernels = {Kernel::kRbf, Kernel::kSigmoid, Kernel::kPoly, Kernel::kLinear};
  g.C = {0.01, 0.1, 1, 10, 100};
  g.gamma = {Gamma::scale(), Gamma::automatic(), Gamma::of(0.001), Gamma::of(0.01),
             Gamma::of(0.1), Gamma::of(1), Gamma::of(10)};
  g.degree = {2, 3, 4, 5};
  g.max_iterations = {100, 200, 500};
  return g;
}

std::vector<SvmConfig> SvmGrid::configs() const {
  // An empty axis falls back to the single default value.
  const SvmConfig base;
  const auto or_default = [](auto values, auto fallback) {
    if (values.empty()) values.push_back(fallback);
    return values;
  };
  std::vector<SvmConfig> out;
  for (Kernel k : or_default(kernels, base.kernel)) {
    for (double c : or_default(C, base.C)) {
      for (const Gamma& g : or_default(gamma, base.gamma)) {
        for (int d : or_default(degree, base.degree)) {
          for (int it : or_default(max_iterations, base.max_iterations)) {
            SvmConfig cfg;
            cfg.kernel = k;
            cfg.C = c;
            cfg.gamma = g;
            cfg.degree = d;
            cfg.max_iterations = it;
            cfg.validate();
            out.push_back(cfg.canonical());
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), tie_break_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void GridSearchReport::write_csv(std::ostream& out) const {
  out << "kernel,C,gamma,degree,max_iterations,mean_wf1,std_wf1,selected\n";
  for (const auto& r : rows) {
    const auto& c = r.config;
    out << to_string(c.kernel) << ',' << format_double(c.C) << ','
        << (c.uses_gamma() ? c.gamma.to_string() : "") << ','
        << (c.uses_degree() ? std::to_string(c.degree) : "") << ',' << c.max_iterations << ','
        << format_double(r.mean_wf1) << ',' << format_double(r.std_wf1) << ','
        << (r.selected ? "true" : "false") << '\n';
  }
}

std::vector<int> stratified_folds(const std::vector<std::string>& y, int folds, uint64_t seed) {
  if (folds < 2) throw UsageError("cross-validation needs at least 2 folds");
  if (y.size() < static_cast<size_t>(folds)) {
    throw DataError("cross-validation: " + std::to_string(y.size()) +
                    " instances cannot fill " + std::to_string(folds) + " folds");
  }
  std::map<std::string, std::vector<size_t>> by_class;
  for (size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  Rng rng(derive_seed(seed, "cv-folds"));
  std::vector<int> fold(y.size(), 0);
  size_t dealt = 0;
  for (auto& [label, members] : by_class) {
    rng.shuffle(members);
    for (size_t i : members) fold[i] = static_cast<int>(dealt++ % static_cast<size_t>(folds));
  }
  return fold;
}

namespace {

using KernelKey = std::tuple<int, int, double, int>;  // kernel, gamma kind, gamma value, degree

KernelKey kernel_key(const SvmConfig& c) {
  return {static_cast<int>(c.kernel), static_cast<int>(c.gamma.kind),
          c.gamma.kind == Gamma::Kind::kValue ? c.gamma.value : 0.0, c.degree};
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

Eigen::MatrixXd select_block(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows,
                             const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) {
    for (size_t r = 0; r < rows.size(); ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(rows[r], cols[c]);
    }
  }
  return out;
}

Eigen::VectorXd select(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

}  // namespace

GridSearchReport grid_search_cv(const Eigen::MatrixXd& X, const std::vector<std::string>& y,
                                const SvmGrid& grid, const GridSearchOptions& options,
                                const std::vector<std::string>& class_order) {
  if (static_cast<size_t>(X.rows()) != y.size()) {
    throw DataError("grid_search_cv: feature rows and labels differ in count");
  }
  if (!X.allFinite()) throw DataError("grid_search_cv: non-finite feature value");
  std::vector<std::string> classes = class_order;
  if (classes.empty()) {
    classes = y;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  }
  if (classes.size() < 2) throw DataError("grid_search_cv: a single class");
  std::map<std::string, int> index;
  for (size_t k = 0; k < classes.size(); ++k) index[classes[k]] = static_cast<int>(k);
  std::vector<int> labels(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    auto it = index.find(y[i]);
    if (it == index.end()) throw DataError("grid_search_cv: label \"" + y[i] + "\" not in class list");
    labels[i] = it->second;
  }

  const std::vector<SvmConfig> configs = grid.configs();
  if (configs.empty()) throw UsageError("grid_search_cv: empty grid");
  const int k = options.folds;
  const std::vector<int> fold = stratified_folds(y, k, options.seed);
  std::vector<std::vector<Eigen::Index>> train(static_cast<size_t>(k)), val(static_cast<size_t>(k));
  for (size_t i = 0; i < y.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      (fold[i] == f ? val : train)[static_cast<size_t>(f)].push_back(static_cast<Eigen::Index>(i));
    }
  }

  const Eigen::MatrixXd dots = X * X.transpose();
  const Eigen::VectorXd sq = dots.diagonal();

  // Group configs sharing one kernel so each (kernel, fold) matrix is built once.
  std::map<KernelKey, std::vector<size_t>> groups;
  for (size_t c = 0; c < configs.size(); ++c) groups[kernel_key(configs[c])].push_back(c);
  std::vector<std::vector<size_t>> group_list;
  for (auto& [key, members] : groups) group_list.push_back(members);

  std::vector<std::vector<double>> scores(configs.size(), std::vector<double>(static_cast<size_t>(k)));
  std::vector<std::vector<char>> converged(configs.size(), std::vector<char>(static_cast<size_t>(k), 1));
  const size_t tasks = group_list.size() * static_cast<size_t>(k);
  parallel_for(tasks, options.jobs, [&](size_t task) {
    const auto& members = group_list[task / static_cast<size_t>(k)];
    const size_t f = task % static_cast<size_t>(k);
    const SvmConfig& proto = configs[members.front()];
    const KernelParams params{proto.kernel, resolve_gamma(proto.gamma, select_rows(X, train[f])),
                              proto.degree};
    const Eigen::VectorXd sq_train = select(sq, train[f]);
    const Eigen::MatrixXd k_train =
        kernel_from_dots(select_block(dots, train[f], train[f]), sq_train, sq_train, params);
    const Eigen::MatrixXd k_val = kernel_from_dots(select_block(dots, val[f], train[f]),
                                                   select(sq, val[f]), sq_train, params);
    std::vector<int> fold_labels;
    for (Eigen::Index i : train[f]) fold_labels.push_back(labels[static_cast<size_t>(i)]);
    std::vector<std::string> truth;
    for (Eigen::Index i : val[f]) truth.push_back(y[static_cast<size_t>(i)]);
    for (size_t c : members) {
      const OvrSolution sol = train_ovr(k_train, fold_labels, static_cast<int>(classes.size()),
                                        configs[c].C, configs[c].max_iterations);
      const Eigen::MatrixXd s = sol.scores(k_val);
      std::vector<std::string> pred(truth.size());
      for (Eigen::Index r = 0; r < s.rows(); ++r) {
        pred[static_cast<size_t>(r)] = classes[static_cast<size_t>(argmax(s.row(r).transpose()))];
      }
      scores[c][f] = weighted_f1(truth, pred);
      converged[c][f] = sol.converged ? 1 : 0;
    }
  });

  GridSearchReport report;
  for (size_t c = 0; c < configs.size(); ++c) {
    GridRow row;
    row.config = configs[c];
    const MeanStd ms = mean_std(scores[c]);
    row.mean_wf1 = ms.mean;
    row.std_wf1 = ms.std;
    row.converged = std::all_of(converged[c].begin(), converged[c].end(), [](char v) { return v != 0; });
    report.rows.push_back(row);
  }
  for (size_t c = 1; c < report.rows.size(); ++c) {
    if (report.rows[c].mean_wf1 > report.rows[report.selected].mean_wf1) report.selected = c;
  }
  report.rows[report.selected].selected = true;
  return report;
}

}  // namespace asb
