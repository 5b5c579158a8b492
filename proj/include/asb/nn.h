#ifndef ASB_NN_H_
#define ASB_NN_H_

// Minimal reverse-mode differentiation over dense row-major node-feature
// matrices, enough for the small message-passing networks in gembed.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "asb/rng.h"

namespace asb::nn {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Parameter {
  Matrix value;
  Matrix grad;
  Matrix m;  // Adam first moment
  Matrix v;  // Adam second moment

  Parameter() = default;
  Parameter(Eigen::Index rows, Eigen::Index cols);
  void zero_grad() { grad.setZero(); }
};

// Glorot-uniform weights (rows = fan_in, cols = fan_out).
Parameter glorot(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);
Parameter zeros(Eigen::Index rows, Eigen::Index cols);

class Tape {
 public:
  using Var = int;

  Var constant(Matrix value);
  Var param(Parameter& p);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  // a (n x d) + broadcast of a 1 x d row.
  Var add_row(Var a, Var row);
  Var tanh(Var a);
  Var relu(Var a);
  Var hcat(const std::vector<Var>& parts);
  // Constant sparse operator applied on the left: s (m x n) * a (n x d).
  Var spmm(std::shared_ptr<const SparseMatrix> s, Var a);
  Var gather_rows(Var a, std::vector<int> rows);
  // Mean softmax cross-entropy of logits (n x k) against labels; 1 x 1.
  Var softmax_cross_entropy(Var logits, std::vector<int> labels);

  const Matrix& value(Var v) const { return nodes_[static_cast<size_t>(v)].value; }
  const Matrix& grad(Var v) const { return nodes_[static_cast<size_t>(v)].grad; }

  // Backpropagates d(loss)/d(.) and accumulates into every Parameter::grad.
  void backward(Var loss);

 private:
  enum class Op {
    kConstant,
    kParam,
    kMatmul,
    kAdd,
    kAddRow,
    kTanh,
    kRelu,
    kHcat,
    kSpmm,
    kGather,
    kSoftmaxXent,
  };
  struct Node {
    Op op = Op::kConstant;
    Matrix value;
    Matrix grad;
    std::vector<Var> inputs;
    Parameter* param = nullptr;
    std::shared_ptr<const SparseMatrix> sparse;
    std::vector<int> indices;
    Matrix aux;  // softmax probabilities
  };
  static Node make_node(Op op, Matrix value, std::vector<Var> inputs);
  Var push(Node node);

  std::vector<Node> nodes_;
};

class Adam {
 public:
  explicit Adam(double lr = 0.01, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Parameter*>& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace asb::nn

#endif  // ASB_NN_H_
