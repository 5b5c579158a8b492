#include <gtest/gtest.h>

#include <cmath>

#include "asb/error.h"
#include "asb/fusion.h"
#include "asb/rng.h"

namespace asb {
namespace {

TEST(Standardizer, PopulationZScoreAndConstantColumns) {
  Eigen::MatrixXd X(4, 2);
  X << 1, 5, 2, 5, 3, 5, 4, 5;
  const auto s = Standardizer::fit(X);
  const Eigen::MatrixXd Z = s.apply(X);
  EXPECT_NEAR(Z.col(0).mean(), 0, 1e-15);
  EXPECT_NEAR(Z.col(0).squaredNorm() / 4, 1, 1e-12);
  EXPECT_EQ(Z.col(1), Eigen::VectorXd::Zero(4));
  const auto v = s.apply(std::vector<double>{2.5, 7});
  EXPECT_NEAR(v[0], 0, 1e-15);
  EXPECT_EQ(v[1], 2);
  EXPECT_THROW(s.apply(std::vector<double>{1}), DataError);
}

TEST(Fuse, ConcatenationOrder) {
  EXPECT_EQ(early_fuse({1, 2}, {3}), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(late_input({1, 2}, {3, 4}, 2), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_THROW(late_input({1}, {3, 4}, 2), DataError);
  EXPECT_THROW(early_fuse({}, {1}), DataError);
  EXPECT_EQ(parse_strategy("hybrid"), FusionStrategy::kHybrid);
  EXPECT_THROW(parse_strategy("middle"), UsageError);
}

struct Toy {
  Block text, graph;
  FoldData fold;
  std::vector<std::string> test_labels;
};

// Graph block carries the label, text block is noise.
Toy toy(uint64_t seed, int n_train, int n_test) {
  Rng rng(seed);
  Toy t;
  t.fold.classes = {"a", "b", "c"};
  auto fill = [&](int n, Eigen::MatrixXd& text, Eigen::MatrixXd& graph, std::vector<std::string>& labels) {
    text.resize(n, 5);
    graph.resize(n, 3);
    for (int i = 0; i < n; ++i) {
      const int k = i % 3;
      labels.push_back(t.fold.classes[static_cast<size_t>(k)]);
      for (int j = 0; j < 5; ++j) text(i, j) = rng.normal();
      for (int j = 0; j < 3; ++j) graph(i, j) = (j == k ? 3.0 : 0.0) + 0.3 * rng.normal();
    }
  };
  fill(n_train, t.text.train, t.graph.train, t.fold.train_labels);
  fill(n_test, t.text.test, t.graph.test, t.test_labels);
  for (int i = 0; i < n_train; ++i) t.fold.train_ids.push_back("tr" + std::to_string(i));
  return t;
}

ModelSelection quick() {
  ModelSelection s;
  s.grid.kernels = {Kernel::kLinear, Kernel::kRbf};
  s.grid.C = {1};
  s.grid.gamma = {Gamma::scale()};
  s.grid.degree = {3};
  s.grid.max_iterations = {1000};
  s.cv.folds = 3;
  s.cv.seed = 5;
  return s;
}

double accuracy(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  size_t hit = 0;
  for (size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

TEST(FitPredict, StrategiesUseTheInformativeModality) {
  const Toy t = toy(1, 60, 30);
  LeakageAudit audit(std::set<std::string>{"te0", "te1"});
  const auto uni = fit_predict_unimodal(t.graph, t.fold, quick(), &audit);
  EXPECT_EQ(uni.input_dim, 3);
  EXPECT_GT(accuracy(uni.predictions, t.test_labels), 0.9);
  const Eigen::Index dims[] = {8, 6, 14};  // early, late (2 x 3 scores), hybrid
  int i = 0;
  for (FusionStrategy s : {FusionStrategy::kEarly, FusionStrategy::kLate, FusionStrategy::kHybrid}) {
    const auto out = fit_predict_fusion(s, t.text, t.graph, t.fold, quick(), &audit);
    EXPECT_EQ(out.input_dim, dims[i++]) << to_string(s);
    EXPECT_EQ(out.predictions.size(), 30u);
    EXPECT_GT(accuracy(out.predictions, t.test_labels), 0.85) << to_string(s);
    if (s != FusionStrategy::kEarly) {
      EXPECT_TRUE(out.text_config.has_value());
      EXPECT_TRUE(out.graph_config.has_value());
    }
  }
  EXPECT_EQ(audit.violations(), 0u);
  const auto stages = audit.touches_by_stage();
  for (const char* stage : {"standardization", "unimodal-fit", "stacking", "meta-fit"}) {
    EXPECT_GT(stages.count(stage), 0u) << stage;
  }
}

TEST(FitPredict, AuditFlagsTestIdsInTraining) {
  Toy t = toy(2, 30, 6);
  t.fold.train_ids[3] = "leak";
  LeakageAudit audit(std::set<std::string>{"leak"});
  fit_predict_fusion(FusionStrategy::kLate, t.text, t.graph, t.fold, quick(), &audit);
  EXPECT_GT(audit.violations(), 0u);
}

TEST(FitPredict, DeterministicAndFixedConfigSkipsSearch) {
  const Toy t = toy(3, 45, 15);
  const auto a = fit_predict_fusion(FusionStrategy::kHybrid, t.text, t.graph, t.fold, quick(), nullptr);
  const auto b = fit_predict_fusion(FusionStrategy::kHybrid, t.text, t.graph, t.fold, quick(), nullptr);
  EXPECT_EQ(a.predictions, b.predictions);
  EXPECT_EQ(a.config, b.config);
  const SvmConfig fixed{Kernel::kLinear, 0.5, Gamma::scale(), 3, 700};
  const auto f = fit_predict_unimodal(t.graph, t.fold, quick(), nullptr, fixed);
  EXPECT_EQ(f.config, fixed);
}

TEST(FitPredict, RejectsMismatchedBlocks) {
  Toy t = toy(4, 30, 6);
  t.graph.test.conservativeResize(5, Eigen::NoChange);
  EXPECT_THROW(fit_predict_fusion(FusionStrategy::kEarly, t.text, t.graph, t.fold, quick(), nullptr), DataError);
}

}  // namespace
}  // namespace asb
