// core/src/optimizer.cpp

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

#include "vbchain/optimizer.hpp"

#include <cmath>
#include <map>

#include "vbchain/error.hpp"

namespace vbchain {

AdamW::AdamW(std::vector<ParamGroup> groups, double beta1, double beta2, double eps)
    : groups_(std::move(groups)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const ParamGroup &g : groups_) {
    Require(g.lr >= 0.0 && std::isfinite(g.lr) && g.weight_decay >= 0.0, Errc::kInvalidArgument,
            "optimizer group needs a finite lr >= 0 and weight_decay >= 0");
    std::vector<Slot> s;
    for (Parameter *p : g.params)
      s.push_back({p, Matrix(p->value.rows, p->value.cols), Matrix(p->value.rows, p->value.cols)});
    slots_.push_back(std::move(s));
  }
}

void AdamW::Step() {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(beta1_, t);
  const double c2 = 1.0 - std::pow(beta2_, t);
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const double lr = groups_[gi].lr;
    const double decay = 1.0 - lr * groups_[gi].weight_decay;
    for (Slot &s : slots_[gi]) {
      Matrix &p = s.param->value;
      const Matrix &g = s.param->grad;
      for (std::size_t i = 0; i < p.size(); ++i) {
        s.m.data[i] = beta1_ * s.m.data[i] + (1.0 - beta1_) * g.data[i];
        s.v.data[i] = beta2_ * s.v.data[i] + (1.0 - beta2_) * g.data[i] * g.data[i];
        p.data[i] *= decay;
        p.data[i] -= lr * (s.m.data[i] / c1) / (std::sqrt(s.v.data[i] / c2) + eps_);
      }
    }
  }
}

void AdamW::ZeroGrad() {
  for (const ParamGroup &g : groups_)
    for (Parameter *p : g.params) p->ZeroGrad();
}

std::vector<std::pair<std::string, Matrix>> AdamW::StateTensors() const {
  std::vector<std::pair<std::string, Matrix>> out;
  for (const auto &group : slots_)
    for (const Slot &s : group) {
      out.emplace_back(s.param->name + ".m", s.m);
      out.emplace_back(s.param->name + ".v", s.v);
    }
  return out;
}

void AdamW::RestoreState(std::size_t steps,
                         const std::vector<std::pair<std::string, Matrix>> &tensors) {
  std::map<std::string, const Matrix *> by_name;
  for (const auto &[n, m] : tensors) by_name[n] = &m;
  for (auto &group : slots_)
    for (Slot &s : group) {
      for (auto [suffix, dst] : {std::pair{".m", &s.m}, std::pair{".v", &s.v}}) {
        auto it = by_name.find(s.param->name + suffix);
        Require(it != by_name.end() && it->second->SameShape(*dst), Errc::kConfigMismatch,
                "optimizer state for '" + s.param->name + "' missing or misshapen");
        *dst = *it->second;
      }
    }
  steps_ = steps;
}

}  // namespace vbchain
