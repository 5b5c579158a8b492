#ifndef ASB_CLASSIFY_H_
#define ASB_CLASSIFY_H_

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace asb {

enum class Kernel { kRbf, kSigmoid, kPoly, kLinear };  // grid tie-break order

std::string_view to_string(Kernel k);
Kernel parse_kernel(std::string_view s);

struct Gamma {
  enum class Kind { kScale, kAuto, kValue };
  Kind kind = Kind::kScale;
  double value = 0.0;  // used when kind == kValue

  static Gamma scale() { return {Kind::kScale, 0.0}; }
  static Gamma automatic() { return {Kind::kAuto, 0.0}; }
  static Gamma of(double v) { return {Kind::kValue, v}; }
  std::string to_string() const;
  static Gamma parse(std::string_view s);
  bool operator==(const Gamma&) const = default;
};

struct SvmConfig {
  Kernel kernel = Kernel::kRbf;
  double C = 1.0;
  Gamma gamma;
  int degree = 3;
  int max_iterations = 1000;

  void validate() const;
  bool uses_gamma() const { return kernel != Kernel::kLinear; }
  bool uses_degree() const { return kernel == Kernel::kPoly; }
  // Irrelevant fields reset to fixed placeholders.
  SvmConfig canonical() const;
  std::string to_string() const;  // e.g. "poly C=0.1 gamma=0.01 degree=3 max_iter=500"
  bool operator==(const SvmConfig&) const = default;
};

// Strict order used to break grid ties: kernel order, C, gamma (scale, auto,
// then numeric ascending), degree, max_iterations.
bool tie_break_less(const SvmConfig& a, const SvmConfig& b);

// Resolved numeric gamma: scale = 1 / (dim * var(X)) (1 when var = 0),
// auto = 1 / dim.
double resolve_gamma(const Gamma& gamma, const Eigen::MatrixXd& X);

struct KernelParams {
  Kernel kernel = Kernel::kRbf;
  double gamma = 1.0;
  int degree = 3;
};

// Kernel matrix from a block of dot products and the squared row norms of
// both sides. coef0 is 0 for sigmoid and poly.
Eigen::MatrixXd kernel_from_dots(const Eigen::MatrixXd& dots, const Eigen::VectorXd& left_sq,
                                 const Eigen::VectorXd& right_sq, const KernelParams& params);

// Dual solution of one binary soft-margin problem; f(x) = sum coef_i K(x_i, x) - rho.
struct BinarySolution {
  std::vector<double> alpha;
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;
};

// SMO with second-order working-set selection; y in {-1, +1}.
BinarySolution solve_binary(const Eigen::MatrixXd& K, const std::vector<double>& y, double C,
                            int max_iterations, double tolerance = 1e-3);

// One-vs-rest solutions over a precomputed training kernel. For two classes a
// single problem (positive = class 1) is solved.
struct OvrSolution {
  int n_classes = 0;
  Eigen::MatrixXd coef;   // n x problems, alpha_i * y_i
  Eigen::VectorXd rho;    // per problem
  bool converged = true;
  int max_iterations_used = 0;

  // Per-class scores from a block of kernel rows (m x n).
  Eigen::MatrixXd scores(const Eigen::MatrixXd& K_rows) const;
};

OvrSolution train_ovr(const Eigen::MatrixXd& K, const std::vector<int>& labels, int n_classes,
                      double C, int max_iterations);

// Index of the largest score; ties go to the lowest index.
int argmax(const Eigen::Ref<const Eigen::VectorXd>& scores);

class TrainedClassifier {
 public:
  const SvmConfig& config() const { return config_; }
  const std::vector<std::string>& classes() const { return classes_; }
  int feature_dim() const { return feature_dim_; }
  double gamma() const { return params_.gamma; }
  bool converged() const { return solution_.converged; }
  size_t support_vector_count() const { return static_cast<size_t>(support_.rows()); }

  std::vector<double> decision_scores(const std::vector<double>& x) const;
  std::string predict(const std::vector<double>& x) const;
  Eigen::MatrixXd decision_scores(const Eigen::MatrixXd& X) const;  // rows = inputs
  std::vector<std::string> predict(const Eigen::MatrixXd& X) const;

 private:
  friend TrainedClassifier train_svm(const Eigen::MatrixXd&, const std::vector<std::string>&,
                                     const SvmConfig&, const std::vector<std::string>&);
  SvmConfig config_;
  std::vector<std::string> classes_;
  int feature_dim_ = 0;
  KernelParams params_;
  Eigen::MatrixXd support_;  // support vectors, one per row
  Eigen::VectorXd support_sq_;
  OvrSolution solution_;     // coef rows follow support_
};

// Rows of X are instances. `class_order` fixes the class list (every entry
// must occur in y); empty means sorted distinct labels.
TrainedClassifier train_svm(const Eigen::MatrixXd& X, const std::vector<std::string>& y,
                            const SvmConfig& config,
                            const std::vector<std::string>& class_order = {});

// ---- grid search ----

struct SvmGrid {
  std::vector<Kernel> kernels;
  std::vector<double> C;
  std::vector<Gamma> gamma;
  std::vector<int> degree;
  std::vector<int> max_iterations;

  static SvmGrid full();  // the published grid
  // Canonicalized, de-duplicated configs in tie-break order.
  std::vector<SvmConfig> configs() const;
};

struct GridRow {
  SvmConfig config;
  double mean_wf1 = 0.0;
  double std_wf1 = 0.0;
  bool converged = true;  // every fold fit converged
  bool selected = false;
};

struct GridSearchReport {
  std::vector<GridRow> rows;  // tie-break order
  size_t selected = 0;
  const SvmConfig& best() const { return rows[selected].config; }
  void write_csv(std::ostream& out) const;
};

struct GridSearchOptions {
  int folds = 5;
  uint64_t seed = 0;
  int jobs = 1;
};

// Stratified k-fold assignment (fold index per instance): each class is
// shuffled and dealt round-robin.
std::vector<int> stratified_folds(const std::vector<std::string>& y, int folds, uint64_t seed);

GridSearchReport grid_search_cv(const Eigen::MatrixXd& X, const std::vector<std::string>& y,
                                const SvmGrid& grid, const GridSearchOptions& options,
                                const std::vector<std::string>& class_order = {});

}  // namespace asb

#endif  // ASB_CLASSIFY_H_
