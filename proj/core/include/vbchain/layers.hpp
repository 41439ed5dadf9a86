// core/include/vbchain/layers.hpp

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

#ifndef VBCHAIN_LAYERS_HPP_
#define VBCHAIN_LAYERS_HPP_

#include <string>
#include <vector>

#include "vbchain/autograd.hpp"
#include "vbchain/rng.hpp"

namespace vbchain {

/// Xavier-uniform initialized matrix.
Matrix XavierUniform(std::size_t fan_in, std::size_t fan_out, Rng &rng);

/// y = x W + b
class Linear {
 public:
  Linear() = default;
  Linear(const std::string &name, std::size_t in, std::size_t out, Rng &rng);

  Var Forward(Tape &tape, Var x);
  std::size_t in() const { return weight_.value.rows; }
  std::size_t out() const { return weight_.value.cols; }
  void AppendParameters(std::vector<Parameter *> &out);
  Parameter &weight() { return weight_; }
  Parameter &bias() { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
};

/// Inverted dropout: in training, zeroes each entry with probability `rate`
/// and rescales survivors by 1 / (1 - rate). Identity otherwise.
Var Dropout(Var x, double rate, bool train, Rng *rng);

}  // namespace vbchain

#endif  // VBCHAIN_LAYERS_HPP_
