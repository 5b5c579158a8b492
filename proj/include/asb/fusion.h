#ifndef ASB_FUSION_H_
#define ASB_FUSION_H_

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asb/audit.h"
#include "asb/classify.h"

namespace asb {

enum class FusionStrategy { kEarly, kLate, kHybrid };

std::string_view to_string(FusionStrategy s);
FusionStrategy parse_strategy(std::string_view s);

// Per-column z-scoring with statistics from the rows it was fitted on.
// Constant columns are centered only.
class Standardizer {
 public:
  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  std::vector<double> apply(const std::vector<double>& x) const;
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
};

// text || graph. Both blocks are expected to be standardized already.
std::vector<double> early_fuse(const std::vector<double>& text, const std::vector<double>& graph);

// Throws DataError unless both classifiers share one ordered class list.
void require_same_classes(const TrainedClassifier& a, const TrainedClassifier& b);

// Meta input for late fusion: standardized text scores || graph scores.
std::vector<double> late_input(const std::vector<double>& text_scores,
                               const std::vector<double>& graph_scores, size_t n_classes);

std::string late_fuse(const std::vector<double>& text_scores,
                      const std::vector<double>& graph_scores, const TrainedClassifier& meta);

std::string hybrid_fuse(const std::vector<double>& text_vec, const std::vector<double>& graph_vec,
                        const std::vector<double>& text_scores,
                        const std::vector<double>& graph_scores, const TrainedClassifier& meta);

// ---- fold-level pipelines ----

struct ModelSelection {
  SvmGrid grid = SvmGrid::full();
  GridSearchOptions cv;
};

// One modality's rows for a split. ids name the instances behind the rows
// (used only for the leakage audit).
struct Block {
  Eigen::MatrixXd train;
  Eigen::MatrixXd test;
};

struct FoldData {
  std::vector<std::string> train_ids;
  std::vector<std::string> train_labels;
  std::vector<std::string> classes;
};

struct FoldOutcome {
  std::vector<std::string> predictions;  // one per test row
  SvmConfig config;                      // unimodal, or the meta classifier
  std::optional<SvmConfig> text_config;
  std::optional<SvmConfig> graph_config;
  Eigen::Index input_dim = 0;            // classifier input length
  bool converged = true;
};

// Standardize, grid-search, fit on train, predict test. `fixed` skips the
// grid search.
FoldOutcome fit_predict_unimodal(const Block& block, const FoldData& fold,
                                 const ModelSelection& selection, LeakageAudit* audit,
                                 const std::optional<SvmConfig>& fixed = std::nullopt);

struct FusionConfigs {
  std::optional<SvmConfig> text;   // preselected unimodal configs
  std::optional<SvmConfig> graph;
  int stacking_folds = 5;
};

FoldOutcome fit_predict_fusion(FusionStrategy strategy, const Block& text, const Block& graph,
                               const FoldData& fold, const ModelSelection& selection,
                               LeakageAudit* audit, const FusionConfigs& configs = {});

}  // namespace asb

#endif  // ASB_FUSION_H_
