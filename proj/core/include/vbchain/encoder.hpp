// core/include/vbchain/encoder.hpp

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

#ifndef VBCHAIN_ENCODER_HPP_
#define VBCHAIN_ENCODER_HPP_

// High-level feature extractor: softmax-weighted sum over the encoder's
// hidden-state layers, additive attentive pooling over frames, affine
// projection, batch normalization and dropout.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vbchain/autograd.hpp"
#include "vbchain/feature_store.hpp"
#include "vbchain/layers.hpp"
#include "vbchain/rng.hpp"
#include "vbchain/schema.hpp"

namespace vbchain {

struct LayerWeights {
  std::vector<double> logits;
  /// softmax(logits)
  std::vector<double> Effective() const;
};

/// Scorer s_t = u . tanh(W^T h_t); W is D x A, u has A entries.
struct AttentivePoolParams {
  Matrix projection;
  std::vector<double> context;
};

struct PoolResult {
  std::vector<double> pooled;     // D
  std::vector<double> attention;  // T, zero on masked frames
};

struct EncoderOutput {
  std::vector<double> z;          // projection_dim
  std::vector<double> attention;  // T
};

/// out[t, d] = sum_l softmax(logits)[l] * stack[l, t, d]   (T x D)
Matrix AggregateLayers(const FeatureStack &stack, const LayerWeights &weights);
/// An empty mask means every frame is valid.
PoolResult AttentivePool(const Matrix &frames, const AttentivePoolParams &params,
                         std::span<const bool> mask = {});

// Differentiable pieces. `stack` must outlive the tape's Backward() call.
Var AggregateLayersOp(Var layer_logits, const FeatureStack &stack);
struct PoolVars {
  Var pooled;     // 1 x D
  Var attention;  // 1 x T
};
PoolVars AttentivePoolOp(Var frames, Var projection, Var context, std::span<const bool> mask);

struct BatchNormState {
  Matrix running_mean;
  Matrix running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};
/// Batch statistics (biased variance) in training, running statistics
/// otherwise. Training mode rejects a batch of one.
Var BatchNormOp(Var x, Var gamma, Var beta, BatchNormState &state, bool train);

class Encoder {
 public:
  Encoder(const ModelConfig &config, Rng &init);

  struct Forward {
    Var z;                       // B x projection_dim
    std::vector<Var> attention;  // one 1 x T row per sample
  };
  /// `masks` is empty or holds one frame mask per stack (empty = all valid).
  Forward Run(Tape &tape, std::span<const FeatureStack *const> stacks,
              std::span<const std::vector<bool>> masks, bool train, Rng *dropout_rng);

  /// Value-level convenience over Run().
  std::vector<EncoderOutput> Encode(std::span<const FeatureStack *const> stacks, bool train,
                                    Rng *dropout_rng,
                                    std::span<const std::vector<bool>> masks = {});

  LayerWeights layer_weights() const;
  AttentivePoolParams pool_params() const;
  std::vector<Parameter *> Parameters();
  std::vector<std::pair<std::string, Matrix *>> Buffers();
  const ModelConfig &config() const { return config_; }

 private:
  void CheckStack(const FeatureStack &stack) const;

  ModelConfig config_;
  Parameter layer_logits_;
  Parameter attn_projection_;
  Parameter attn_context_;
  Linear projection_;
  Parameter bn_gamma_;
  Parameter bn_beta_;
  BatchNormState bn_;
};

}  // namespace vbchain

#endif  // VBCHAIN_ENCODER_HPP_
