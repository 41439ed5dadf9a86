// core/src/autograd.cpp

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

#include "vbchain/autograd.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "vbchain/error.hpp"

namespace vbchain {

namespace {

std::string Shape(const Matrix &m) {
  std::ostringstream os;
  os << m.rows << "x" << m.cols;
  return os.str();
}

void AddInto(Matrix &dst, const Matrix &src) {
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

// `dfdx` is evaluated at the recorded input.
Var Unary(Var a, Matrix out, double (*dfdx)(double)) {
  Tape &tape = *a.tape();
  return tape.Record(std::move(out), {a},
                     [a, dfdx](Tape &t, const Matrix &g) {
                       const Matrix &x = t.value(a);
                       Matrix &ga = t.grad(a);
                       for (std::size_t i = 0; i < g.data.size(); ++i)
                         ga.data[i] += g.data[i] * dfdx(x.data[i]);
                     });
}

}  // namespace

Matrix Matrix::FromRows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m;
  m.rows = rows.size();
  m.cols = m.rows ? rows.begin()->size() : 0;
  for (const auto &r : rows) {
    Require(r.size() == m.cols, Errc::kInvalidArgument, "ragged matrix literal");
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

Matrix Matrix::RowVector(std::span<const double> values) {
  Matrix m(1, values.size());
  std::copy(values.begin(), values.end(), m.data.begin());
  return m;
}

Matrix Matrix::ColVector(std::span<const double> values) {
  Matrix m(values.size(), 1);
  std::copy(values.begin(), values.end(), m.data.begin());
  return m;
}

Matrix Matrix::Transposed() const {
  Matrix t(cols, rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
  return t;
}

const Matrix &Var::value() const { return tape_->value(*this); }

Var Tape::Constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::Leaf(Parameter &param) {
  nodes_.push_back(Node{param.value, {}, {}, &param, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::Record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return Record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::Record(Matrix value, std::span<const Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var &v : inputs) {
    Require(v.tape() == this, Errc::kInvalidArgument, "operand recorded on a different tape");
    needs = needs || nodes_[v.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : BackwardFn{},
                        nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

Matrix &Tape::grad(Var v) {
  Node &n = nodes_[v.id()];
  if (n.grad.rows != n.value.rows || n.grad.cols != n.value.cols)
    n.grad = Matrix(n.value.rows, n.value.cols);
  return n.grad;
}

void Tape::Backward(Var root) {
  Require(root.tape() == this, Errc::kInvalidArgument, "root belongs to another tape");
  Matrix &seed = grad(root);
  std::fill(seed.data.begin(), seed.data.end(), 1.0);
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node &n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param != nullptr) {
      if (!n.param->grad.SameShape(n.param->value))
        n.param->grad = Matrix(n.param->value.rows, n.param->value.cols);
      AddInto(n.param->grad, n.grad);
    }
  }
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var MatMul(Var a, Var b) {
  const Matrix &A = a.value(), &B = b.value();
  Require(A.cols == B.rows, Errc::kInvalidArgument,
          "MatMul shape mismatch " + Shape(A) + " * " + Shape(B));
  Matrix C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i) {
    double *c = C.data.data() + i * C.cols;
    for (std::size_t k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      const double *brow = B.data.data() + k * B.cols;
      for (std::size_t j = 0; j < B.cols; ++j) c[j] += aik * brow[j];
    }
  }
  return a.tape()->Record(std::move(C), {a, b}, [a, b](Tape &t, const Matrix &g) {
    const Matrix &A = t.value(a), &B = t.value(b);
    if (t.RequiresGrad(a)) {
      Matrix &ga = t.grad(a);  // g * B^T
      for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t k = 0; k < A.cols; ++k) {
          double s = 0.0;
          const double *grow = g.data.data() + i * g.cols;
          const double *brow = B.data.data() + k * B.cols;
          for (std::size_t j = 0; j < B.cols; ++j) s += grow[j] * brow[j];
          ga(i, k) += s;
        }
    }
    if (t.RequiresGrad(b)) {
      Matrix &gb = t.grad(b);  // A^T * g
      for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t k = 0; k < A.cols; ++k) {
          const double aik = A(i, k);
          if (aik == 0.0) continue;
          double *gbrow = gb.data.data() + k * gb.cols;
          const double *grow = g.data.data() + i * g.cols;
          for (std::size_t j = 0; j < B.cols; ++j) gbrow[j] += aik * grow[j];
        }
    }
  });
}

Var Add(Var a, Var b) {
  const Matrix &A = a.value(), &B = b.value();
  const bool broadcast = !A.SameShape(B);
  Require(!broadcast || (B.rows == 1 && B.cols == A.cols), Errc::kInvalidArgument,
          "Add shape mismatch " + Shape(A) + " + " + Shape(B));
  Matrix C = A;
  for (std::size_t i = 0; i < C.data.size(); ++i)
    C.data[i] += broadcast ? B.data[i % B.cols] : B.data[i];
  return a.tape()->Record(std::move(C), {a, b}, [a, b, broadcast](Tape &t, const Matrix &g) {
    if (t.RequiresGrad(a)) AddInto(t.grad(a), g);
    if (t.RequiresGrad(b)) {
      Matrix &gb = t.grad(b);
      if (!broadcast) {
        AddInto(gb, g);
      } else {
        for (std::size_t i = 0; i < g.data.size(); ++i) gb.data[i % gb.cols] += g.data[i];
      }
    }
  });
}

Var Sub(Var a, Var b) { return Add(a, Scale(b, -1.0)); }

Var Mul(Var a, Var b) {
  const Matrix &A = a.value(), &B = b.value();
  Require(A.SameShape(B), Errc::kInvalidArgument,
          "Mul shape mismatch " + Shape(A) + " .* " + Shape(B));
  Matrix C = A;
  for (std::size_t i = 0; i < C.data.size(); ++i) C.data[i] *= B.data[i];
  return a.tape()->Record(std::move(C), {a, b}, [a, b](Tape &t, const Matrix &g) {
    const Matrix &A = t.value(a), &B = t.value(b);
    if (t.RequiresGrad(a)) {
      Matrix &ga = t.grad(a);
      for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * B.data[i];
    }
    if (t.RequiresGrad(b)) {
      Matrix &gb = t.grad(b);
      for (std::size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i] * A.data[i];
    }
  });
}

Var Scale(Var a, double s) {
  Matrix C = a.value();
  for (double &x : C.data) x *= s;
  return a.tape()->Record(std::move(C), {a}, [a, s](Tape &t, const Matrix &g) {
    Matrix &ga = t.grad(a);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += s * g.data[i];
  });
}

Var AddConst(Var a, const Matrix &c) {
  const Matrix &A = a.value();
  const bool broadcast = !A.SameShape(c);
  Require(!broadcast || (c.rows == 1 && c.cols == A.cols), Errc::kInvalidArgument,
          "AddConst shape mismatch " + Shape(A) + " + " + Shape(c));
  Matrix C = A;
  for (std::size_t i = 0; i < C.data.size(); ++i)
    C.data[i] += broadcast ? c.data[i % c.cols] : c.data[i];
  return a.tape()->Record(std::move(C), {a},
                          [a](Tape &t, const Matrix &g) { AddInto(t.grad(a), g); });
}

Var MulConst(Var a, const Matrix &c) {
  Require(a.value().SameShape(c), Errc::kInvalidArgument, "MulConst shape mismatch");
  Matrix C = a.value();
  for (std::size_t i = 0; i < C.data.size(); ++i) C.data[i] *= c.data[i];
  return a.tape()->Record(std::move(C), {a}, [a, c](Tape &t, const Matrix &g) {
    Matrix &ga = t.grad(a);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * c.data[i];
  });
}

Var Sigmoid(Var a) {
  Matrix out = a.value();
  for (double &x : out.data) x = Sigmoid(x);
  return Unary(a, std::move(out), [](double x) {
    const double s = Sigmoid(x);
    return s * (1.0 - s);
  });
}

Var Tanh(Var a) {
  Matrix out = a.value();
  for (double &x : out.data) x = std::tanh(x);
  return Unary(a, std::move(out), [](double x) {
    const double th = std::tanh(x);
    return 1.0 - th * th;
  });
}

Var Relu(Var a) {
  Matrix out = a.value();
  for (double &x : out.data) x = x > 0.0 ? x : 0.0;
  return Unary(a, std::move(out), [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var SoftmaxRows(Var a, std::span<const bool> mask) {
  const Matrix &A = a.value();
  Require(mask.empty() || mask.size() == A.cols, Errc::kInvalidArgument,
          "softmax mask length does not match column count");
  Matrix P(A.rows, A.cols);
  for (std::size_t r = 0; r < A.rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    std::size_t active = 0;
    for (std::size_t c = 0; c < A.cols; ++c)
      if (mask.empty() || mask[c]) {
        mx = std::max(mx, A(r, c));
        ++active;
      }
    Require(active > 0, Errc::kInvalidArgument, "softmax over a row with every column masked");
    // Non-finite scores propagate as NaN so callers see them in the loss.
    if (!std::isfinite(mx)) mx = std::numeric_limits<double>::quiet_NaN();
    double z = 0.0;
    for (std::size_t c = 0; c < A.cols; ++c) {
      if (!mask.empty() && !mask[c]) continue;
      P(r, c) = std::exp(A(r, c) - mx);
      z += P(r, c);
    }
    for (std::size_t c = 0; c < A.cols; ++c) P(r, c) /= z;
  }
  Matrix probs = P;
  return a.tape()->Record(std::move(P), {a}, [a, probs](Tape &t, const Matrix &g) {
    Matrix &ga = t.grad(a);
    for (std::size_t r = 0; r < probs.rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < probs.cols; ++c) dot += g(r, c) * probs(r, c);
      for (std::size_t c = 0; c < probs.cols; ++c)
        ga(r, c) += probs(r, c) * (g(r, c) - dot);
    }
  });
}

Var ConcatCols(std::span<const Var> parts) {
  Require(!parts.empty(), Errc::kInvalidArgument, "ConcatCols of nothing");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var &p : parts) {
    Require(p.rows() == rows, Errc::kInvalidArgument, "ConcatCols row mismatch");
    cols += p.cols();
  }
  Matrix C(rows, cols);
  std::size_t off = 0;
  for (const Var &p : parts) {
    const Matrix &P = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(P.row(r).begin(), P.row(r).end(), C.row(r).begin() + off);
    off += P.cols;
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts.front().tape()->Record(std::move(C), parts, [ins](Tape &t, const Matrix &g) {
    std::size_t off = 0;
    for (const Var &p : ins) {
      const std::size_t pc = p.cols();
      if (t.RequiresGrad(p)) {
        Matrix &gp = t.grad(p);
        for (std::size_t r = 0; r < g.rows; ++r)
          for (std::size_t c = 0; c < pc; ++c) gp(r, c) += g(r, off + c);
      }
      off += pc;
    }
  });
}

Var ConcatRows(std::span<const Var> parts) {
  Require(!parts.empty(), Errc::kInvalidArgument, "ConcatRows of nothing");
  const std::size_t cols = parts.front().cols();
  Matrix C(0, cols);
  for (const Var &p : parts) {
    Require(p.cols() == cols, Errc::kInvalidArgument, "ConcatRows column mismatch");
    C.data.insert(C.data.end(), p.value().data.begin(), p.value().data.end());
    C.rows += p.rows();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts.front().tape()->Record(std::move(C), parts, [ins](Tape &t, const Matrix &g) {
    std::size_t off = 0;
    for (const Var &p : ins) {
      const std::size_t n = p.value().size();
      if (t.RequiresGrad(p)) {
        Matrix &gp = t.grad(p);
        for (std::size_t i = 0; i < n; ++i) gp.data[i] += g.data[off + i];
      }
      off += n;
    }
  });
}

Var SliceCols(Var a, std::size_t start, std::size_t count) {
  const Matrix &A = a.value();
  Require(start + count <= A.cols, Errc::kOutOfRange, "SliceCols beyond column count");
  Matrix C(A.rows, count);
  for (std::size_t r = 0; r < A.rows; ++r)
    for (std::size_t c = 0; c < count; ++c) C(r, c) = A(r, start + c);
  return a.tape()->Record(std::move(C), {a}, [a, start, count](Tape &t, const Matrix &g) {
    Matrix &ga = t.grad(a);
    for (std::size_t r = 0; r < g.rows; ++r)
      for (std::size_t c = 0; c < count; ++c) ga(r, start + c) += g(r, c);
  });
}

Var SelectRows(Var a, std::span<const std::size_t> rows) {
  const Matrix &A = a.value();
  Matrix C(rows.size(), A.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Require(rows[i] < A.rows, Errc::kOutOfRange, "SelectRows index out of range");
    std::copy(A.row(rows[i]).begin(), A.row(rows[i]).end(), C.row(i).begin());
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return a.tape()->Record(std::move(C), {a}, [a, idx](Tape &t, const Matrix &g) {
    Matrix &ga = t.grad(a);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < g.cols; ++c) ga(idx[i], c) += g(i, c);
  });
}

Var Transpose(Var a) {
  return a.tape()->Record(a.value().Transposed(), {a}, [a](Tape &t, const Matrix &g) {
    Matrix &ga = t.grad(a);
    for (std::size_t r = 0; r < g.rows; ++r)
      for (std::size_t c = 0; c < g.cols; ++c) ga(c, r) += g(r, c);
  });
}

Var Sum(Var a) {
  double s = 0.0;
  for (double x : a.value().data) s += x;
  Matrix out(1, 1, s);
  return a.tape()->Record(std::move(out), {a}, [a](Tape &t, const Matrix &g) {
    Matrix &ga = t.grad(a);
    for (double &x : ga.data) x += g.data[0];
  });
}

Var Mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  Require(n > 0, Errc::kInvalidArgument, "Mean of an empty matrix");
  return Scale(Sum(a), 1.0 / n);
}

}  // namespace vbchain
