// core/src/layers.cpp

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

#include "vbchain/layers.hpp"

#include <cmath>

#include "vbchain/error.hpp"

namespace vbchain {

Matrix XavierUniform(std::size_t fan_in, std::size_t fan_out, Rng &rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(fan_in, fan_out);
  for (double &x : m.data) x = rng.Uniform(-limit, limit);
  return m;
}

Linear::Linear(const std::string &name, std::size_t in, std::size_t out, Rng &rng)
    : weight_(name + ".w", XavierUniform(in, out, rng)), bias_(name + ".b", Matrix(1, out)) {}

Var Linear::Forward(Tape &tape, Var x) {
  return Add(MatMul(x, tape.Leaf(weight_)), tape.Leaf(bias_));
}

void Linear::AppendParameters(std::vector<Parameter *> &out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

Var Dropout(Var x, double rate, bool train, Rng *rng) {
  if (!train || rate <= 0.0) return x;
  Require(rng != nullptr, Errc::kInvalidArgument, "training-mode dropout needs an rng");
  Matrix mask(x.rows(), x.cols());
  const double keep = 1.0 - rate;
  for (double &m : mask.data) m = rng->Uniform() < keep ? 1.0 / keep : 0.0;
  return MulConst(x, mask);
}

}  // namespace vbchain
