#include "asb/fusion.h"

#include "asb/error.h"
#include "asb/rng.h"

namespace asb {

std::string_view to_string(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::kEarly:
      return "early";
    case FusionStrategy::kLate:
      return "late";
    case FusionStrategy::kHybrid:
      return "hybrid";
  }
  return "early";
}

FusionStrategy parse_strategy(std::string_view s) {
  if (s == "early") return FusionStrategy::kEarly;
  if (s == "late") return FusionStrategy::kLate;
  if (s == "hybrid") return FusionStrategy::kHybrid;
  throw UsageError("unknown fusion strategy \"" + std::string(s) + "\"");
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw DataError("Standardizer: no rows to fit");
  Standardizer s;
  s.mean_ = X.colwise().mean();
  s.scale_.resize(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double var = (X.col(c).array() - s.mean_(c)).square().mean();
    s.scale_(c) = var > 0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean_.size()) throw DataError("Standardizer: column count mismatch");
  Eigen::MatrixXd out = X.rowwise() - mean_;
  return out.array().rowwise() / scale_.array();
}

std::vector<double> Standardizer::apply(const std::vector<double>& x) const {
  if (static_cast<Eigen::Index>(x.size()) != mean_.size()) {
    throw DataError("Standardizer: vector length mismatch");
  }
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    out[i] = (x[i] - mean_(c)) / scale_(c);
  }
  return out;
}

std::vector<double> early_fuse(const std::vector<double>& text, const std::vector<double>& graph) {
  if (text.empty() || graph.empty()) {
    throw DataError("early_fuse: missing text or graph vector");
  }
  std::vector<double> out(text);
  out.insert(out.end(), graph.begin(), graph.end());
  return out;
}

void require_same_classes(const TrainedClassifier& a, const TrainedClassifier& b) {
  if (a.classes() != b.classes()) {
    throw DataError("fusion: unimodal classifiers disagree on the class set");
  }
}

std::vector<double> late_input(const std::vector<double>& text_scores,
                               const std::vector<double>& graph_scores, size_t n_classes) {
  if (text_scores.size() != n_classes || graph_scores.size() != n_classes) {
    throw DataError("late fusion: score vectors must have one value per class");
  }
  std::vector<double> out(text_scores);
  out.insert(out.end(), graph_scores.begin(), graph_scores.end());
  return out;
}

std::string late_fuse(const std::vector<double>& text_scores,
                      const std::vector<double>& graph_scores, const TrainedClassifier& meta) {
  return meta.predict(late_input(text_scores, graph_scores, meta.classes().size()));
}

std::string hybrid_fuse(const std::vector<double>& text_vec, const std::vector<double>& graph_vec,
                        const std::vector<double>& text_scores,
                        const std::vector<double>& graph_scores, const TrainedClassifier& meta) {
  std::vector<double> input = early_fuse(text_vec, graph_vec);
  const auto scores = late_input(text_scores, graph_scores, meta.classes().size());
  input.insert(input.end(), scores.begin(), scores.end());
  return meta.predict(input);
}

namespace {

void touch_all(LeakageAudit* audit, std::string_view stage, const std::vector<std::string>& ids) {
  if (!audit) return;
  for (const auto& id : ids) audit->touch(stage, id);
}

SvmConfig choose(const Eigen::MatrixXd& X, const FoldData& fold, const ModelSelection& selection,
                 const std::optional<SvmConfig>& fixed) {
  if (fixed) return *fixed;
  return grid_search_cv(X, fold.train_labels, selection.grid, selection.cv, fold.classes).best();
}

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<Eigen::Index>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (Eigen::Index i : idx) out.push_back(v[static_cast<size_t>(i)]);
  return out;
}

void check_block(const Block& b, const FoldData& fold, std::string_view what) {
  if (static_cast<size_t>(b.train.rows()) != fold.train_labels.size() ||
      fold.train_ids.size() != fold.train_labels.size()) {
    throw DataError(std::string(what) + ": training rows, ids and labels differ in count");
  }
  if (b.test.cols() != b.train.cols()) {
    throw DataError(std::string(what) + ": train and test dims differ");
  }
}

}  // namespace

FoldOutcome fit_predict_unimodal(const Block& block, const FoldData& fold,
                                 const ModelSelection& selection, LeakageAudit* audit,
                                 const std::optional<SvmConfig>& fixed) {
  check_block(block, fold, "unimodal");
  touch_all(audit, "standardization", fold.train_ids);
  const Standardizer st = Standardizer::fit(block.train);
  const Eigen::MatrixXd train = st.apply(block.train);
  touch_all(audit, "unimodal-fit", fold.train_ids);
  FoldOutcome out;
  out.config = choose(train, fold, selection, fixed);
  const TrainedClassifier clf = train_svm(train, fold.train_labels, out.config, fold.classes);
  out.predictions = clf.predict(st.apply(block.test));
  out.input_dim = train.cols();
  out.converged = clf.converged();
  return out;
}

FoldOutcome fit_predict_fusion(FusionStrategy strategy, const Block& text, const Block& graph,
                               const FoldData& fold, const ModelSelection& selection,
                               LeakageAudit* audit, const FusionConfigs& configs) {
  check_block(text, fold, "fusion text block");
  check_block(graph, fold, "fusion graph block");
  if (text.test.rows() != graph.test.rows()) {
    throw DataError("fusion: text and graph test rows differ in count");
  }
  touch_all(audit, "standardization", fold.train_ids);
  const Standardizer st_text = Standardizer::fit(text.train);
  const Standardizer st_graph = Standardizer::fit(graph.train);
  const Eigen::MatrixXd t_train = st_text.apply(text.train), t_test = st_text.apply(text.test);
  const Eigen::MatrixXd g_train = st_graph.apply(graph.train), g_test = st_graph.apply(graph.test);

  FoldOutcome out;
  if (strategy == FusionStrategy::kEarly) {
    const Eigen::MatrixXd train = hcat(t_train, g_train);
    touch_all(audit, "meta-fit", fold.train_ids);
    out.config = choose(train, fold, selection, std::nullopt);
    const TrainedClassifier clf = train_svm(train, fold.train_labels, out.config, fold.classes);
    out.predictions = clf.predict(hcat(t_test, g_test));
    out.input_dim = train.cols();
    out.converged = clf.converged();
    return out;
  }

  touch_all(audit, "unimodal-fit", fold.train_ids);
  out.text_config = choose(t_train, fold, selection, configs.text);
  out.graph_config = choose(g_train, fold, selection, configs.graph);

  // Out-of-fold base scores for the meta classifier's training rows.
  const auto n = static_cast<Eigen::Index>(fold.train_labels.size());
  const auto k = static_cast<Eigen::Index>(fold.classes.size());
  Eigen::MatrixXd oof = Eigen::MatrixXd::Zero(n, 2 * k);
  const std::vector<int> assignment = stratified_folds(
      fold.train_labels, configs.stacking_folds, derive_seed(selection.cv.seed, "stacking"));
  for (int f = 0; f < configs.stacking_folds; ++f) {
    std::vector<Eigen::Index> inner, held;
    for (Eigen::Index i = 0; i < n; ++i) {
      (assignment[static_cast<size_t>(i)] == f ? held : inner).push_back(i);
    }
    if (held.empty()) continue;
    const auto inner_ids = pick(fold.train_ids, inner);
    const auto inner_labels = pick(fold.train_labels, inner);
    touch_all(audit, "stacking", inner_ids);
    const TrainedClassifier tc =
        train_svm(rows_of(t_train, inner), inner_labels, *out.text_config, fold.classes);
    const TrainedClassifier gc =
        train_svm(rows_of(g_train, inner), inner_labels, *out.graph_config, fold.classes);
    const Eigen::MatrixXd ts = tc.decision_scores(rows_of(t_train, held));
    const Eigen::MatrixXd gs = gc.decision_scores(rows_of(g_train, held));
    for (size_t r = 0; r < held.size(); ++r) {
      oof.row(held[r]) << ts.row(static_cast<Eigen::Index>(r)), gs.row(static_cast<Eigen::Index>(r));
    }
  }

  const TrainedClassifier text_clf = train_svm(t_train, fold.train_labels, *out.text_config, fold.classes);
  const TrainedClassifier graph_clf = train_svm(g_train, fold.train_labels, *out.graph_config, fold.classes);
  require_same_classes(text_clf, graph_clf);
  const Eigen::MatrixXd test_scores =
      hcat(text_clf.decision_scores(t_test), graph_clf.decision_scores(g_test));

  touch_all(audit, "standardization", fold.train_ids);
  const Standardizer st_scores = Standardizer::fit(oof);
  Eigen::MatrixXd meta_train = st_scores.apply(oof);
  Eigen::MatrixXd meta_test = st_scores.apply(test_scores);
  if (strategy == FusionStrategy::kHybrid) {
    meta_train = hcat(hcat(t_train, g_train), meta_train);
    meta_test = hcat(hcat(t_test, g_test), meta_test);
  }
  touch_all(audit, "meta-fit", fold.train_ids);
  out.config = choose(meta_train, fold, selection, std::nullopt);
  const TrainedClassifier meta = train_svm(meta_train, fold.train_labels, out.config, fold.classes);
  out.predictions = meta.predict(meta_test);
  out.input_dim = meta_train.cols();
  out.converged = meta.converged() && text_clf.converged() && graph_clf.converged();
  return out;
}

}  // namespace asb
