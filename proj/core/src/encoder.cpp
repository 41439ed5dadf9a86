// core/src/encoder.cpp

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

#include "vbchain/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "vbchain/error.hpp"

namespace vbchain {

namespace {

std::vector<double> Softmax(std::span<const double> logits) {
  Require(!logits.empty(), Errc::kInvalidArgument, "softmax of nothing");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> w(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) z += (w[i] = std::exp(logits[i] - mx));
  for (double &x : w) x /= z;
  return w;
}

}  // namespace

std::vector<double> LayerWeights::Effective() const { return Softmax(logits); }

Matrix AggregateLayers(const FeatureStack &stack, const LayerWeights &weights) {
  Require(weights.logits.size() == stack.num_layers, Errc::kInvalidArgument,
          "layer weight count " + std::to_string(weights.logits.size()) +
              " does not match stack layer count " + std::to_string(stack.num_layers));
  const std::vector<double> w = weights.Effective();
  Matrix out(stack.frames, stack.dim);
  for (std::size_t l = 0; l < stack.num_layers; ++l) {
    const auto layer = stack.Layer(l);
    for (std::size_t i = 0; i < layer.size(); ++i) out.data[i] += w[l] * layer[i];
  }
  return out;
}

PoolResult AttentivePool(const Matrix &frames, const AttentivePoolParams &params,
                         std::span<const bool> mask) {
  Tape tape;
  const PoolVars v =
      AttentivePoolOp(tape.Constant(frames), tape.Constant(params.projection),
                      tape.Constant(Matrix::ColVector(params.context)), mask);
  return {v.pooled.value().data, v.attention.value().data};
}

Var AggregateLayersOp(Var layer_logits, const FeatureStack &stack) {
  Require(layer_logits.rows() == 1 && layer_logits.cols() == stack.num_layers,
          Errc::kInvalidArgument,
          "layer weight count " + std::to_string(layer_logits.cols()) +
              " does not match stack layer count " + std::to_string(stack.num_layers));
  Var w = SoftmaxRows(layer_logits);
  const Matrix &wv = w.value();
  Matrix out(stack.frames, stack.dim);
  for (std::size_t l = 0; l < stack.num_layers; ++l) {
    const auto layer = stack.Layer(l);
    for (std::size_t i = 0; i < layer.size(); ++i) out.data[i] += wv.data[l] * layer[i];
  }
  const FeatureStack *s = &stack;
  return w.tape()->Record(std::move(out), {w}, [w, s](Tape &t, const Matrix &g) {
    Matrix &gw = t.grad(w);
    for (std::size_t l = 0; l < s->num_layers; ++l) {
      const auto layer = s->Layer(l);
      double acc = 0.0;
      for (std::size_t i = 0; i < layer.size(); ++i) acc += g.data[i] * layer[i];
      gw.data[l] += acc;
    }
  });
}

PoolVars AttentivePoolOp(Var frames, Var projection, Var context, std::span<const bool> mask) {
  Require(frames.rows() >= 1, Errc::kInvalidArgument, "attentive pooling over zero frames");
  Require(mask.empty() || mask.size() == frames.rows(), Errc::kInvalidArgument,
          "frame mask length does not match frame count");
  Require(mask.empty() || std::any_of(mask.begin(), mask.end(), [](bool b) { return b; }),
          Errc::kInvalidArgument, "attentive pooling with every frame masked");
  Var hidden = Tanh(MatMul(frames, projection));      // T x A
  Var scores = Transpose(MatMul(hidden, context));    // 1 x T
  Var attention = SoftmaxRows(scores, mask);
  return {MatMul(attention, frames), attention};
}

Var BatchNormOp(Var x, Var gamma, Var beta, BatchNormState &state, bool train) {
  const Matrix &X = x.value();
  const std::size_t b = X.rows, d = X.cols;
  Require(gamma.cols() == d && beta.cols() == d, Errc::kInvalidArgument,
          "batch norm parameter width mismatch");
  Require(!train || b >= 2, Errc::kInvalidArgument,
          "batch normalization in training mode needs a batch of at least 2");
  Matrix mean(1, d), var(1, d);
  if (train) {
    for (std::size_t r = 0; r < b; ++r)
      for (std::size_t c = 0; c < d; ++c) mean.data[c] += X(r, c);
    for (double &m : mean.data) m /= static_cast<double>(b);
    for (std::size_t r = 0; r < b; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const double dv = X(r, c) - mean.data[c];
        var.data[c] += dv * dv;
      }
    for (double &v : var.data) v /= static_cast<double>(b);
    const double unbias = static_cast<double>(b) / static_cast<double>(b - 1);
    for (std::size_t c = 0; c < d; ++c) {
      state.running_mean.data[c] =
          (1.0 - state.momentum) * state.running_mean.data[c] + state.momentum * mean.data[c];
      state.running_var.data[c] = (1.0 - state.momentum) * state.running_var.data[c] +
                                  state.momentum * var.data[c] * unbias;
    }
  } else {
    mean = state.running_mean;
    var = state.running_var;
  }
  Matrix inv_std(1, d), xhat(b, d), y(b, d);
  for (std::size_t c = 0; c < d; ++c) inv_std.data[c] = 1.0 / std::sqrt(var.data[c] + state.eps);
  const Matrix &G = gamma.value(), &Bt = beta.value();
  for (std::size_t r = 0; r < b; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      xhat(r, c) = (X(r, c) - mean.data[c]) * inv_std.data[c];
      y(r, c) = G.data[c] * xhat(r, c) + Bt.data[c];
    }
  return x.tape()->Record(
      std::move(y), {x, gamma, beta},
      [x, gamma, beta, xhat, inv_std, train](Tape &t, const Matrix &g) {
        const std::size_t b = g.rows, d = g.cols;
        const Matrix &G = t.value(gamma);
        if (t.RequiresGrad(gamma) || t.RequiresGrad(beta)) {
          Matrix &gg = t.grad(gamma);
          Matrix &gb = t.grad(beta);
          for (std::size_t r = 0; r < b; ++r)
            for (std::size_t c = 0; c < d; ++c) {
              gg.data[c] += g(r, c) * xhat(r, c);
              gb.data[c] += g(r, c);
            }
        }
        if (!t.RequiresGrad(x)) return;
        Matrix &gx = t.grad(x);
        if (!train) {
          for (std::size_t r = 0; r < b; ++r)
            for (std::size_t c = 0; c < d; ++c) gx(r, c) += g(r, c) * G.data[c] * inv_std.data[c];
          return;
        }
        const double n = static_cast<double>(b);
        for (std::size_t c = 0; c < d; ++c) {
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::size_t r = 0; r < b; ++r) {
            const double gh = g(r, c) * G.data[c];
            sum_g += gh;
            sum_gx += gh * xhat(r, c);
          }
          for (std::size_t r = 0; r < b; ++r) {
            const double gh = g(r, c) * G.data[c];
            gx(r, c) += inv_std.data[c] / n * (n * gh - sum_g - xhat(r, c) * sum_gx);
          }
        }
      });
}

Encoder::Encoder(const ModelConfig &config, Rng &init)
    : config_(config),
      layer_logits_("encoder.layer_logits", Matrix(1, config.num_layers)),
      attn_projection_("encoder.attention.w",
                       XavierUniform(config.feature_dim, config.attention_dim, init)),
      attn_context_("encoder.attention.u", XavierUniform(config.attention_dim, 1, init)),
      projection_("encoder.projection", config.feature_dim, config.projection_dim, init),
      bn_gamma_("encoder.bn.gamma", Matrix(1, config.projection_dim, 1.0)),
      bn_beta_("encoder.bn.beta", Matrix(1, config.projection_dim)) {
  config_.Validate();
  bn_.running_mean = Matrix(1, config.projection_dim);
  bn_.running_var = Matrix(1, config.projection_dim, 1.0);
}

void Encoder::CheckStack(const FeatureStack &stack) const {
  Require(stack.num_layers == config_.num_layers && stack.dim == config_.feature_dim,
          Errc::kSchemaMismatch,
          "feature stack '" + stack.file_id + "' has shape " + std::to_string(stack.num_layers) +
              " layers x " + std::to_string(stack.dim) + " dims; model expects " +
              std::to_string(config_.num_layers) + " x " + std::to_string(config_.feature_dim));
  Require(stack.frames >= 1, Errc::kInvalidArgument,
          "feature stack '" + stack.file_id + "' has no frames");
}

Encoder::Forward Encoder::Run(Tape &tape, std::span<const FeatureStack *const> stacks,
                              std::span<const std::vector<bool>> masks, bool train,
                              Rng *dropout_rng) {
  Require(!stacks.empty(), Errc::kInvalidArgument, "encoder called on an empty batch");
  Require(masks.empty() || masks.size() == stacks.size(), Errc::kInvalidArgument,
          "one frame mask per stack expected");
  Var logits = tape.Leaf(layer_logits_);
  Var w = tape.Leaf(attn_projection_);
  Var u = tape.Leaf(attn_context_);
  Forward fwd;
  std::vector<Var> pooled;
  pooled.reserve(stacks.size());
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    CheckStack(*stacks[i]);
    const std::vector<bool> *mask = masks.empty() ? nullptr : &masks[i];
    // std::vector<bool> has no contiguous storage to view.
    std::unique_ptr<bool[]> mask_buf;
    std::span<const bool> mask_view;
    if (mask != nullptr && !mask->empty()) {
      mask_buf = std::make_unique<bool[]>(mask->size());
      std::copy(mask->begin(), mask->end(), mask_buf.get());
      mask_view = {mask_buf.get(), mask->size()};
    }
    Var frames = AggregateLayersOp(logits, *stacks[i]);
    PoolVars p = AttentivePoolOp(frames, w, u, mask_view);
    pooled.push_back(p.pooled);
    fwd.attention.push_back(p.attention);
  }
  Var x = ConcatRows(pooled);
  Var z = projection_.Forward(tape, x);
  z = BatchNormOp(z, tape.Leaf(bn_gamma_), tape.Leaf(bn_beta_), bn_, train);
  fwd.z = Dropout(z, config_.dropout_rate, train, dropout_rng);
  return fwd;
}

std::vector<EncoderOutput> Encoder::Encode(std::span<const FeatureStack *const> stacks, bool train,
                                           Rng *dropout_rng,
                                           std::span<const std::vector<bool>> masks) {
  Tape tape;
  const Forward f = Run(tape, stacks, masks, train, dropout_rng);
  std::vector<EncoderOutput> out(stacks.size());
  const Matrix &z = f.z.value();
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    out[i].z.assign(z.row(i).begin(), z.row(i).end());
    out[i].attention = f.attention[i].value().data;
  }
  return out;
}

LayerWeights Encoder::layer_weights() const { return {layer_logits_.value.data}; }

AttentivePoolParams Encoder::pool_params() const {
  return {attn_projection_.value, attn_context_.value.data};
}

std::vector<Parameter *> Encoder::Parameters() {
  std::vector<Parameter *> out = {&layer_logits_, &attn_projection_, &attn_context_};
  projection_.AppendParameters(out);
  out.push_back(&bn_gamma_);
  out.push_back(&bn_beta_);
  return out;
}

std::vector<std::pair<std::string, Matrix *>> Encoder::Buffers() {
  return {{"encoder.bn.running_mean", &bn_.running_mean},
          {"encoder.bn.running_var", &bn_.running_var}};
}

}  // namespace vbchain
