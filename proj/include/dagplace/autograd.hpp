/* Copyright 2026 The dagplace Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dagplace/error.hpp"
#include "dagplace/matrix.hpp"

namespace dagplace {

// Trainable storage. Owned by a model; tapes reference it through Tape::param.
struct Tensor {
  Matrix value;
  Matrix grad;
  bool requires_grad = true;

  Tensor() = default;
  explicit Tensor(Matrix v, bool trainable = true)
      : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())), requires_grad(trainable) {}

  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t index = 0;
};

// Explicit reverse-mode tape over dense matrices. Every primitive appends one
// entry; backward() walks the entries in exact reverse recording order.
class Tape {
 public:
  Var constant(Matrix m) { return push(std::move(m), false, {}); }

  Var param(Tensor& t) {
    Var v = push(t.value, t.requires_grad, {});
    nodes_[v.index].param = &t;
    return v;
  }

  const Matrix& value(Var v) const { return nodes_[v.index].value; }
  const Matrix& grad(Var v) const { return nodes_[v.index].grad; }
  bool requires_grad(Var v) const { return nodes_[v.index].requires_grad; }
  double scalar(Var v) const { return nodes_[v.index].value(0, 0); }
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b) {
    check(value(a).cols() == value(b).rows(), "matmul", a, b);
    Matrix out = value(a) * value(b);
    return record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
      if (t.requires_grad(a)) t.accumulate(a, g * t.value(b).transpose());
      if (t.requires_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
    });
  }

  Var add(Var a, Var b) {
    check(same_shape(a, b), "add", a, b);
    Matrix out = value(a) + value(b);
    return record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
      if (t.requires_grad(a)) t.accumulate(a, g);
      if (t.requires_grad(b)) t.accumulate(b, g);
    });
  }

  // Adds a 1 x c row to every row of an r x c matrix (bias broadcast).
  Var add_row(Var a, Var row) {
    check(value(row).rows() == 1 && value(row).cols() == value(a).cols(), "add_row", a, row);
    Matrix out = value(a).rowwise() + value(row).row(0);
    return record(std::move(out), {a, row}, [a, row](Tape& t, const Matrix& g) {
      if (t.requires_grad(a)) t.accumulate(a, g);
      if (t.requires_grad(row)) t.accumulate(row, g.colwise().sum());
    });
  }

  Var mul(Var a, Var b) {
    check(same_shape(a, b), "mul", a, b);
    Matrix out = value(a).cwiseProduct(value(b));
    return record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
      if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(t.value(b)));
      if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(t.value(a)));
    });
  }

  Var scale(Var a, double s) {
    Matrix out = value(a) * s;
    return record(std::move(out), {a}, [a, s](Tape& t, const Matrix& g) { t.accumulate(a, g * s); });
  }

  Var relu(Var a) {
    Matrix out = value(a).cwiseMax(0.0);
    return record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
      t.accumulate(a, g.cwiseProduct((t.value(a).array() > 0.0).cast<double>().matrix()));
    });
  }

  Var sigmoid(Var a) {
    Matrix out = value(a).unaryExpr([](double x) {
      return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    });
    Var result = record(std::move(out), {a}, {});
    set_backward(result, [a, result](Tape& t, const Matrix& g) {
      const Matrix& y = t.value(result);
      t.accumulate(a, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
    });
    return result;
  }

  Var log(Var a) {
    Matrix out = value(a).array().log().matrix();
    return record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
      t.accumulate(a, g.cwiseQuotient(t.value(a)));
    });
  }

  Var softmax_rows(Var a) {
    Matrix out = value(a);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      out.row(r).array() -= out.row(r).maxCoeff();
      out.row(r) = out.row(r).array().exp().matrix();
      out.row(r) /= out.row(r).sum();
    }
    Var result = record(std::move(out), {a}, {});
    set_backward(result, [a, result](Tape& t, const Matrix& g) {
      const Matrix& y = t.value(result);
      Matrix dx(y.rows(), y.cols());
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        const double dot = g.row(r).dot(y.row(r));
        dx.row(r) = y.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
      }
      t.accumulate(a, dx);
    });
    return result;
  }

  // Numerically stable log(softmax(a)) per row.
  Var log_softmax_rows(Var a) {
    Matrix out = value(a);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const double m = out.row(r).maxCoeff();
      const double lse = m + std::log((out.row(r).array() - m).exp().sum());
      out.row(r).array() -= lse;
    }
    Var result = record(std::move(out), {a}, {});
    set_backward(result, [a, result](Tape& t, const Matrix& g) {
      const Matrix& y = t.value(result);
      Matrix dx(y.rows(), y.cols());
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        dx.row(r) = g.row(r) - y.row(r).array().exp().matrix() * g.row(r).sum();
      }
      t.accumulate(a, dx);
    });
    return result;
  }

  // out[i] = a[index[i]]
  Var gather_rows(Var a, std::vector<int> index) {
    const Matrix& src = value(a);
    Matrix out(static_cast<Eigen::Index>(index.size()), src.cols());
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] < 0 || index[i] >= src.rows()) throw Error(ErrorCode::kShapeMismatch, "gather_rows index out of range");
      out.row(static_cast<Eigen::Index>(i)) = src.row(index[i]);
    }
    return record(std::move(out), {a}, [a, index = std::move(index)](Tape& t, const Matrix& g) {
      Matrix dx = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
      for (std::size_t i = 0; i < index.size(); ++i) dx.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
      t.accumulate(a, dx);
    });
  }

  // out[index[i]] += a[i], with `rows` output rows.
  Var scatter_add_rows(Var a, std::vector<int> index, int rows) {
    const Matrix& src = value(a);
    if (static_cast<Eigen::Index>(index.size()) != src.rows()) {
      throw Error(ErrorCode::kShapeMismatch, "scatter_add_rows needs one index per input row");
    }
    Matrix out = Matrix::Zero(rows, src.cols());
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] < 0 || index[i] >= rows) throw Error(ErrorCode::kShapeMismatch, "scatter_add_rows index out of range");
      out.row(index[i]) += src.row(static_cast<Eigen::Index>(i));
    }
    return record(std::move(out), {a}, [a, index = std::move(index)](Tape& t, const Matrix& g) {
      Matrix dx(static_cast<Eigen::Index>(index.size()), g.cols());
      for (std::size_t i = 0; i < index.size(); ++i) dx.row(static_cast<Eigen::Index>(i)) = g.row(index[i]);
      t.accumulate(a, dx);
    });
  }

  Var sum(Var a) {
    Matrix out(1, 1);
    out(0, 0) = value(a).sum();
    return record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
      t.accumulate(a, Matrix::Constant(t.value(a).rows(), t.value(a).cols(), g(0, 0)));
    });
  }

  // Accumulates d loss / d p into every trainable Tensor reached from `loss`.
  void backward(Var loss) {
    if (value(loss).rows() != 1 || value(loss).cols() != 1) {
      throw Error(ErrorCode::kNonScalarLoss, "loss has shape " + shape_string(loss));
    }
    if (!requires_grad(loss)) return;
    for (Node& n : nodes_)
      if (n.requires_grad) n.grad.setZero(n.value.rows(), n.value.cols());
    nodes_[loss.index].grad(0, 0) = 1.0;
    for (std::size_t i = loss.index + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad) continue;
      if (n.backward) n.backward(*this, n.grad);
      if (n.param != nullptr) n.param->grad += n.grad;
    }
  }

 private:
  using BackwardFn = std::function<void(Tape&, const Matrix&)>;

  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Tensor* param = nullptr;
    BackwardFn backward;
  };

  Var push(Matrix value, bool requires_grad, BackwardFn fn) {
    nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, nullptr, std::move(fn)});
    return Var{nodes_.size() - 1};
  }

  Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn) {
    bool any = false;
    for (Var v : inputs) any |= requires_grad(v);
    return push(std::move(value), any, any ? std::move(fn) : BackwardFn{});
  }

  void set_backward(Var v, BackwardFn fn) {
    if (nodes_[v.index].requires_grad) nodes_[v.index].backward = std::move(fn);
  }

  void accumulate(Var v, const Matrix& g) {
    Node& n = nodes_[v.index];
    if (n.requires_grad) n.grad += g;
  }

  bool same_shape(Var a, Var b) const {
    return value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols();
  }

  std::string shape_string(Var v) const {
    return "(" + std::to_string(value(v).rows()) + "x" + std::to_string(value(v).cols()) + ")";
  }

  void check(bool ok, const char* op, Var a, Var b) const {
    if (!ok) throw Error(ErrorCode::kShapeMismatch, std::string(op) + " " + shape_string(a) + " vs " + shape_string(b));
  }

  std::vector<Node> nodes_;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Holds first/second moment state per parameter.
class Adam {
 public:
  Adam(std::vector<Tensor*> params, AdamConfig cfg = {}) : params_(std::move(params)), cfg_(cfg) {
    for (Tensor* p : params_) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }

  void zero_grad() {
    for (Tensor* p : params_) p->zero_grad();
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Tensor& p = *params_[i];
      if (!p.requires_grad) continue;
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
      p.value.array() -= cfg_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + cfg_.eps);
    }
  }

  const AdamConfig& config() const { return cfg_; }
  long steps() const { return t_; }

 private:
  std::vector<Tensor*> params_;
  AdamConfig cfg_;
  std::vector<Matrix> m_, v_;
  long t_ = 0;
};

}  // namespace dagplace
