// core/include/vbchain/optimizer.hpp

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

#ifndef VBCHAIN_OPTIMIZER_HPP_
#define VBCHAIN_OPTIMIZER_HPP_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "vbchain/autograd.hpp"

namespace vbchain {

struct ParamGroup {
  std::vector<Parameter *> params;
  double lr = 1e-3;
  double weight_decay = 0.0;
};

/// Adam with decoupled weight decay: p <- p * (1 - lr * wd) before the
/// moment-based step, so the decay never passes through the moments.
class AdamW {
 public:
  explicit AdamW(std::vector<ParamGroup> groups, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);

  void Step();
  void ZeroGrad();
  std::size_t steps() const { return steps_; }
  const std::vector<ParamGroup> &groups() const { return groups_; }

  /// First and second moments as "<param>.m" / "<param>.v".
  std::vector<std::pair<std::string, Matrix>> StateTensors() const;
  void RestoreState(std::size_t steps,
                    const std::vector<std::pair<std::string, Matrix>> &tensors);

 private:
  struct Slot {
    Parameter *param;
    Matrix m, v;
  };
  std::vector<ParamGroup> groups_;
  std::vector<std::vector<Slot>> slots_;
  double beta1_, beta2_, eps_;
  std::size_t steps_ = 0;
};

}  // namespace vbchain

#endif  // VBCHAIN_OPTIMIZER_HPP_
