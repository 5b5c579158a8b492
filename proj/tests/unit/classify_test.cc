#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "asb/classify.h"
#include "asb/error.h"
#include "asb/rng.h"

namespace asb {
namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int n, int d) {
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = rng.normal();
  return X;
}

// Two Gaussian blobs separated along every axis.
void blobs(Rng& rng, int n, int d, double gap, Eigen::MatrixXd& X, std::vector<std::string>& y) {
  X = random_matrix(rng, n, d);
  y.clear();
  for (int i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    X.row(i).array() += pos ? gap : -gap;
    y.push_back(pos ? "pos" : "neg");
  }
}

TEST(Kernel, FromDotsMatchesDirectFormulas) {
  Rng rng(1);
  const Eigen::MatrixXd A = random_matrix(rng, 4, 3), B = random_matrix(rng, 5, 3);
  const Eigen::MatrixXd dots = A * B.transpose();
  const Eigen::VectorXd asq = A.rowwise().squaredNorm(), bsq = B.rowwise().squaredNorm();
  for (Kernel k : {Kernel::kRbf, Kernel::kSigmoid, Kernel::kPoly, Kernel::kLinear}) {
    const KernelParams p{k, 0.3, 3};
    const Eigen::MatrixXd K = kernel_from_dots(dots, asq, bsq, p);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 5; ++j) {
        const double dot = A.row(i).dot(B.row(j));
        double want = dot;
        if (k == Kernel::kRbf) want = std::exp(-0.3 * (A.row(i) - B.row(j)).squaredNorm());
        if (k == Kernel::kSigmoid) want = std::tanh(0.3 * dot);
        if (k == Kernel::kPoly) want = std::pow(0.3 * dot, 3);
        EXPECT_NEAR(K(i, j), want, 1e-12);
      }
    }
  }
}

TEST(Gamma, ResolutionAndParsing) {
  Eigen::MatrixXd X(2, 2);
  X << 0, 0, 2, 2;  // variance over all entries = 1
  EXPECT_DOUBLE_EQ(resolve_gamma(Gamma::scale(), X), 0.5);
  EXPECT_DOUBLE_EQ(resolve_gamma(Gamma::automatic(), X), 0.5);
  EXPECT_DOUBLE_EQ(resolve_gamma(Gamma::of(0.01), X), 0.01);
  EXPECT_DOUBLE_EQ(resolve_gamma(Gamma::scale(), Eigen::MatrixXd::Ones(3, 4)), 1.0);
  EXPECT_EQ(Gamma::parse("auto"), Gamma::automatic());
  EXPECT_EQ(Gamma::parse("0.1"), Gamma::of(0.1));
  EXPECT_THROW(Gamma::parse("-1"), UsageError);
  EXPECT_THROW(Gamma::parse("wide"), UsageError);
}

TEST(Smo, SolutionSatisfiesKkt) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 10 + static_cast<int>(rng.uniform_index(40));
    const Eigen::MatrixXd X = random_matrix(rng, n, 3);
    std::vector<double> y(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) y[static_cast<size_t>(i)] = X(i, 0) + 0.5 * rng.normal() > 0 ? 1 : -1;
    if (std::count(y.begin(), y.end(), 1.0) == 0 || std::count(y.begin(), y.end(), -1.0) == 0) continue;
    const Eigen::MatrixXd K = kernel_from_dots(X * X.transpose(), X.rowwise().squaredNorm(),
                                               X.rowwise().squaredNorm(), {Kernel::kRbf, 0.5, 3});
    const double C = 1.0;
    const auto sol = solve_binary(K, y, C, 100000);
    ASSERT_TRUE(sol.converged);
    double balance = 0;
    for (int i = 0; i < n; ++i) {
      const double a = sol.alpha[static_cast<size_t>(i)];
      EXPECT_GE(a, -1e-12);
      EXPECT_LE(a, C + 1e-12);
      balance += a * y[static_cast<size_t>(i)];
      double f = -sol.rho;
      for (int j = 0; j < n; ++j) f += sol.alpha[static_cast<size_t>(j)] * y[static_cast<size_t>(j)] * K(j, i);
      const double m = y[static_cast<size_t>(i)] * f;
      if (a < 1e-9) EXPECT_GE(m, 1 - 2e-3);
      else if (a > C - 1e-9) EXPECT_LE(m, 1 + 2e-3);
      else EXPECT_NEAR(m, 1, 2e-3);
    }
    EXPECT_NEAR(balance, 0, 1e-9);
  }
}

TEST(Svm, SymmetricOneDimensionalToy) {
  Eigen::MatrixXd X(2, 1);
  X << -1, 1;
  const auto clf = train_svm(X, {"A", "B"}, {Kernel::kLinear, 1.0, Gamma::scale(), 3, 1000});
  EXPECT_EQ(clf.predict(std::vector<double>{0.5}), "B");
  EXPECT_EQ(clf.predict(std::vector<double>{-0.5}), "A");
  const auto s = clf.decision_scores(std::vector<double>{0.0});
  EXPECT_NEAR(s[1], 0.0, 1e-12);
  // Both points are support vectors on the margin.
  EXPECT_NEAR(clf.decision_scores(std::vector<double>{1.0})[1], 1.0, 1e-3);
  // Input scaling keeps the decision.
  EXPECT_EQ(clf.predict(std::vector<double>{2 * 0.5}), "B");
}

TEST(Svm, SeparableSetsReachZeroTrainingError) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd X;
    std::vector<std::string> y;
    blobs(rng, 40, 4, 3.0, X, y);
    const auto clf = train_svm(X, y, {Kernel::kLinear, 100.0, Gamma::scale(), 3, 100000});
    EXPECT_EQ(clf.predict(X), y);
  }
}

TEST(Svm, PredictEqualsArgmaxOfScores) {
  Rng rng(5);
  Eigen::MatrixXd X = random_matrix(rng, 60, 3);
  std::vector<std::string> y;
  for (int i = 0; i < 60; ++i) y.push_back("c" + std::to_string(i % 3));
  const auto clf = train_svm(X, y, {Kernel::kRbf, 1.0, Gamma::scale(), 3, 1000});
  const Eigen::MatrixXd probe = random_matrix(rng, 200, 3);
  const auto pred = clf.predict(probe);
  const auto scores = clf.decision_scores(probe);
  ASSERT_EQ(scores.cols(), 3);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(pred[static_cast<size_t>(i)], clf.classes()[static_cast<size_t>(argmax(scores.row(i).transpose()))]);
}

TEST(Svm, DuplicatedDataGivesSamePredictions) {
  Rng rng(11);
  Eigen::MatrixXd X;
  std::vector<std::string> y;
  blobs(rng, 30, 2, 2.0, X, y);
  Eigen::MatrixXd X2(60, 2);
  X2 << X, X;
  std::vector<std::string> y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  // Separable with a large C: both fits are the same hard-margin solution.
  const SvmConfig cfg{Kernel::kLinear, 100.0, Gamma::scale(), 3, 100000};
  const auto a = train_svm(X, y, cfg);
  const auto b = train_svm(X2, y2, cfg);
  Eigen::MatrixXd probe;
  std::vector<std::string> unused;
  blobs(rng, 100, 2, 2.0, probe, unused);
  EXPECT_EQ(a.predict(probe), b.predict(probe));
}

TEST(Svm, BestPublishedConfigTrains) {
  Rng rng(2);
  Eigen::MatrixXd X;
  std::vector<std::string> y;
  blobs(rng, 50, 8, 0.3, X, y);
  const auto clf = train_svm(X, y, {Kernel::kPoly, 0.1, Gamma::of(0.01), 3, 500});
  EXPECT_EQ(clf.predict(X).size(), 50u);
}

TEST(Svm, ErrorsOnBadInput) {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  EXPECT_THROW(train_svm(X, {"a", "a", "a"}, {}), DataError);
  EXPECT_THROW(train_svm(X, {"a", "b"}, {}), DataError);
  const auto clf = train_svm(X, {"a", "b", "a"}, {});
  EXPECT_THROW(clf.decision_scores(std::vector<double>{1, 2}), DataError);
  EXPECT_THROW(SvmConfig({Kernel::kPoly, 1.0, Gamma::scale(), 1, 10}).validate(), UsageError);
}

TEST(Grid, CanonicalCountsAndOrder) {
  const auto full = SvmGrid::full().configs();
  EXPECT_EQ(full.size(), 5u * 3 + 2 * 5 * 7 * 3 + 5 * 7 * 4 * 3);
  EXPECT_TRUE(std::is_sorted(full.begin(), full.end(), tie_break_less));
  SvmGrid g;
  g.kernels = {Kernel::kLinear};
  g.C = {0.1, 1};
  g.gamma = {Gamma::scale(), Gamma::of(3)};
  g.degree = {2, 3};
  EXPECT_EQ(g.configs().size(), 2u);
}

TEST(Grid, StratifiedFoldsBalanced) {
  std::vector<std::string> y;
  for (int i = 0; i < 23; ++i) y.push_back(i < 13 ? "a" : "b");
  const auto f = stratified_folds(y, 5, 1);
  for (int k = 0; k < 5; ++k) {
    int a = 0, b = 0;
    for (size_t i = 0; i < y.size(); ++i) {
      if (f[i] != k) continue;
      (y[i] == "a" ? a : b)++;
    }
    EXPECT_GE(a, 2);
    EXPECT_LE(a, 3);
    EXPECT_GE(b, 2);
    EXPECT_LE(b, 2 + 1);
  }
  EXPECT_EQ(f, stratified_folds(y, 5, 1));
}

TEST(Grid, SelectionIsOrderInvariantAndTiesGoFirst) {
  Rng rng(4);
  Eigen::MatrixXd X;
  std::vector<std::string> y;
  blobs(rng, 40, 3, 2.5, X, y);  // every config fits perfectly -> all tie
  SvmGrid g;
  g.kernels = {Kernel::kLinear, Kernel::kRbf};
  g.C = {10, 1};
  g.gamma = {Gamma::scale()};
  g.degree = {3};
  g.max_iterations = {1000};
  SvmGrid reversed = g;
  std::reverse(reversed.kernels.begin(), reversed.kernels.end());
  std::reverse(reversed.C.begin(), reversed.C.end());
  GridSearchOptions opt;
  opt.seed = 9;
  const auto a = grid_search_cv(X, y, g, opt);
  opt.jobs = 3;
  const auto b = grid_search_cv(X, y, reversed, opt);
  ASSERT_EQ(a.rows.size(), 4u);
  EXPECT_EQ(a.best(), b.best());
  EXPECT_EQ(a.best().kernel, Kernel::kRbf);
  EXPECT_EQ(a.best().C, 1.0);
  std::ostringstream ca, cb;
  a.write_csv(ca);
  b.write_csv(cb);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(ca.str().substr(0, ca.str().find('\n')), "kernel,C,gamma,degree,max_iterations,mean_wf1,std_wf1,selected");
}

}  // namespace
}  // namespace asb
