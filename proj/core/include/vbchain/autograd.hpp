// core/include/vbchain/autograd.hpp

// Copyright 2026  The vbchain Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VBCHAIN_AUTOGRAD_HPP_
#define VBCHAIN_AUTOGRAD_HPP_

// Minimal reverse-mode differentiation over dense row-major double matrices.
// A Tape records every operation of one forward pass; Backward() walks it in
// reverse and accumulates gradients into the Parameters that were read.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace vbchain {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  static Matrix FromRows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix RowVector(std::span<const double> values);
  static Matrix ColVector(std::span<const double> values);

  double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  bool SameShape(const Matrix &o) const { return rows == o.rows && cols == o.cols; }
  Matrix Transposed() const;
};

/// A named trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}
  void ZeroGrad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the Tape lives.
class Var {
 public:
  Var() = default;
  const Matrix &value() const;
  std::size_t rows() const { return value().rows; }
  std::size_t cols() const { return value().cols; }
  Tape *tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape *t, std::size_t id) : tape_(t), id_(id) {}
  Tape *tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  /// Receives the gradient flowing into the node's output.
  using BackwardFn = std::function<void(Tape &, const Matrix &grad_out)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var Constant(Matrix value);
  Var Leaf(Parameter &param);
  /// Records a derived node. `backward` is only kept (and only invoked) if at
  /// least one of `inputs` requires a gradient.
  Var Record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var Record(Matrix value, std::span<const Var> inputs, BackwardFn backward);

  const Matrix &value(Var v) const { return nodes_[v.id()].value; }
  bool RequiresGrad(Var v) const { return nodes_[v.id()].requires_grad; }
  /// Gradient buffer of `v`, allocated on first access.
  Matrix &grad(Var v);

  /// Seeds d(root)/d(root) = 1 elementwise and propagates; gradients of
  /// Parameters read through Leaf() are added into Parameter::grad.
  void Backward(Var root);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    Parameter *param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

// Generic differentiable operations. Shapes are checked; mismatches throw
// Error(kInvalidArgument).
Var MatMul(Var a, Var b);
/// a + b for equal shapes, or a (r x c) + b (1 x c) broadcast over rows.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double s);
Var AddConst(Var a, const Matrix &c);
Var MulConst(Var a, const Matrix &c);
Var Sigmoid(Var a);
Var Tanh(Var a);
Var Relu(Var a);
/// Row-wise softmax. With a non-empty `mask` (one entry per column), masked
/// columns receive exactly zero probability.
Var SoftmaxRows(Var a, std::span<const bool> mask = {});
Var ConcatCols(std::span<const Var> parts);
Var ConcatRows(std::span<const Var> parts);
Var SliceCols(Var a, std::size_t start, std::size_t count);
Var SelectRows(Var a, std::span<const std::size_t> rows);
Var Transpose(Var a);
Var Sum(Var a);
Var Mean(Var a);

double Sigmoid(double x);

}  // namespace vbchain

#endif  // VBCHAIN_AUTOGRAD_HPP_
