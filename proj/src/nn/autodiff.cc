#include <cmath>

#include "asb/error.h"
#include "asb/nn.h"

namespace asb::nn {

Parameter::Parameter(Eigen::Index rows, Eigen::Index cols)
    : value(Matrix::Zero(rows, cols)),
      grad(Matrix::Zero(rows, cols)),
      m(Matrix::Zero(rows, cols)),
      v(Matrix::Zero(rows, cols)) {}

Parameter glorot(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  Parameter p(fan_in, fan_out);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index r = 0; r < fan_in; ++r) {
    for (Eigen::Index c = 0; c < fan_out; ++c) {
      p.value(r, c) = rng.uniform(-limit, limit);
    }
  }
  return p;
}

Parameter zeros(Eigen::Index rows, Eigen::Index cols) { return Parameter(rows, cols); }

Tape::Var Tape::push(Node node) {
  node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  nodes_.push_back(std::move(node));
  return static_cast<Var>(nodes_.size() - 1);
}

Tape::Node Tape::make_node(Op op, Matrix value, std::vector<Var> inputs) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.inputs = std::move(inputs);
  return n;
}

Tape::Var Tape::constant(Matrix value) {
  Node n = make_node(Op::kConstant, std::move(value), {});
  return push(std::move(n));
}

Tape::Var Tape::param(Parameter& p) {
  Node n = make_node(Op::kParam, p.value, {});
  n.param = &p;
  return push(std::move(n));
}

Tape::Var Tape::matmul(Var a, Var b) {
  Node n = make_node(Op::kMatmul, value(a) * value(b), {a, b});
  return push(std::move(n));
}

Tape::Var Tape::add(Var a, Var b) {
  Node n = make_node(Op::kAdd, value(a) + value(b), {a, b});
  return push(std::move(n));
}

Tape::Var Tape::add_row(Var a, Var row) {
  Matrix out = value(a);
  out.rowwise() += value(row).row(0);
  Node n = make_node(Op::kAddRow, std::move(out), {a, row});
  return push(std::move(n));
}

Tape::Var Tape::tanh(Var a) {
  Node n = make_node(Op::kTanh, value(a).array().tanh().matrix(), {a});
  return push(std::move(n));
}

Tape::Var Tape::relu(Var a) {
  Node n = make_node(Op::kRelu, value(a).cwiseMax(0.0), {a});
  return push(std::move(n));
}

Tape::Var Tape::hcat(const std::vector<Var>& parts) {
  const Eigen::Index rows = value(parts.front()).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    if (value(p).rows() != rows) throw DataError("hcat: row count mismatch");
    cols += value(p).cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, value(p).cols()) = value(p);
    c += value(p).cols();
  }
  Node n = make_node(Op::kHcat, std::move(out), parts);
  return push(std::move(n));
}

Tape::Var Tape::spmm(std::shared_ptr<const SparseMatrix> s, Var a) {
  Node n = make_node(Op::kSpmm, (*s) * value(a), {a});
  n.sparse = std::move(s);
  return push(std::move(n));
}

Tape::Var Tape::gather_rows(Var a, std::vector<int> rows) {
  const Matrix& src = value(a);
  Matrix out(static_cast<Eigen::Index>(rows.size()), src.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
  Node n = make_node(Op::kGather, std::move(out), {a});
  n.indices = std::move(rows);
  return push(std::move(n));
}

Tape::Var Tape::softmax_cross_entropy(Var logits, std::vector<int> labels) {
  const Matrix& z = value(logits);
  if (static_cast<size_t>(z.rows()) != labels.size() || labels.empty()) {
    throw DataError("softmax_cross_entropy: label count mismatch");
  }
  Matrix probs(z.rows(), z.cols());
  double loss = 0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double mx = z.row(r).maxCoeff();
    double sum = 0;
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      probs(r, c) = std::exp(z(r, c) - mx);
      sum += probs(r, c);
    }
    probs.row(r) /= sum;
    loss -= std::log(std::max(probs(r, labels[static_cast<size_t>(r)]), 1e-300));
  }
  loss /= static_cast<double>(z.rows());
  Node n = make_node(Op::kSoftmaxXent, Matrix::Constant(1, 1, loss), {logits});
  n.aux = std::move(probs);
  n.indices = std::move(labels);
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  for (auto& n : nodes_) n.grad.setZero();
  nodes_[static_cast<size_t>(loss)].grad.setOnes();
  for (size_t i = static_cast<size_t>(loss) + 1; i-- > 0;) {
    Node& n = nodes_[i];
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParam:
        n.param->grad += g;
        break;
      case Op::kMatmul: {
        Node& a = nodes_[static_cast<size_t>(n.inputs[0])];
        Node& b = nodes_[static_cast<size_t>(n.inputs[1])];
        a.grad.noalias() += g * b.value.transpose();
        b.grad.noalias() += a.value.transpose() * g;
        break;
      }
      case Op::kAdd:
        nodes_[static_cast<size_t>(n.inputs[0])].grad += g;
        nodes_[static_cast<size_t>(n.inputs[1])].grad += g;
        break;
      case Op::kAddRow:
        nodes_[static_cast<size_t>(n.inputs[0])].grad += g;
        nodes_[static_cast<size_t>(n.inputs[1])].grad += g.colwise().sum();
        break;
      case Op::kTanh:
        nodes_[static_cast<size_t>(n.inputs[0])].grad.array() +=
            g.array() * (1.0 - n.value.array().square());
        break;
      case Op::kRelu:
        nodes_[static_cast<size_t>(n.inputs[0])].grad.array() +=
            g.array() * (n.value.array() > 0.0).cast<double>();
        break;
      case Op::kHcat: {
        Eigen::Index c = 0;
        for (Var p : n.inputs) {
          Node& part = nodes_[static_cast<size_t>(p)];
          part.grad += g.middleCols(c, part.value.cols());
          c += part.value.cols();
        }
        break;
      }
      case Op::kSpmm:
        nodes_[static_cast<size_t>(n.inputs[0])].grad.noalias() +=
            n.sparse->transpose() * g;
        break;
      case Op::kGather: {
        Node& a = nodes_[static_cast<size_t>(n.inputs[0])];
        for (size_t r = 0; r < n.indices.size(); ++r) {
          a.grad.row(n.indices[r]) += g.row(static_cast<Eigen::Index>(r));
        }
        break;
      }
      case Op::kSoftmaxXent: {
        Node& z = nodes_[static_cast<size_t>(n.inputs[0])];
        Matrix d = n.aux;
        for (size_t r = 0; r < n.indices.size(); ++r) {
          d(static_cast<Eigen::Index>(r), n.indices[r]) -= 1.0;
        }
        z.grad += d * (g(0, 0) / static_cast<double>(n.indices.size()));
        break;
      }
    }
  }
}

void Adam::step(const std::vector<Parameter*>& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Parameter* p : params) {
    p->m = beta1_ * p->m + (1.0 - beta1_) * p->grad;
    p->v = beta2_ * p->v + (1.0 - beta2_) * p->grad.cwiseAbs2();
    p->value.array() -=
        lr_ * (p->m.array() / c1) / ((p->v.array() / c2).sqrt() + eps_);
  }
}

}  // namespace asb::nn
