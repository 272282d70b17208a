// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>

#include "graphinformer/random.hpp"
#include "graphinformer/tape.hpp"
#include "graphinformer/tensor.hpp"

namespace gi {

/// Additive mask value standing in for minus infinity.
inline constexpr double kMaskValue = -1e9;

/// Softmax rows whose maximum lies below this value are treated as fully
/// masked and produce all-zero probabilities.
inline constexpr double kMaskedRowThreshold = 0.5 * kMaskValue;

// Elementwise ----------------------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// a + c where c is a same-shape constant (e.g. an additive mask).
Var add_constant(Var a, const Tensor& c);
/// x[..., d] + bias[d].
Var add_bias(Var x, Var bias);

enum class Elementwise { sigmoid, relu, tanh };
Var elementwise(Elementwise f, Var x);
inline Var sigmoid(Var x) { return elementwise(Elementwise::sigmoid, x); }
inline Var relu(Var x) { return elementwise(Elementwise::relu, x); }
inline Var tanh(Var x) { return elementwise(Elementwise::tanh, x); }

// Reductions and reshaping ---------------------------------------------------

Var sum(Var x);
Var mean(Var x);
Var reshape(Var x, Shape shape);

// Matrix products ------------------------------------------------------------

/// [m,k] x [k,n] -> [m,n].
Var matmul(Var a, Var b);
/// x[..., in] W^T + b, with W of shape [out, in] and optional b of shape [out].
Var linear(Var x, Var weight, std::optional<Var> bias = std::nullopt);
/// Batched [B,m,k] x [B,k,n] -> [B,m,n].
Var bmm(Var a, Var b);
/// Batched a b^T: [B,m,k] x [B,n,k] -> [B,m,n].
Var bmm_nt(Var a, Var b);
/// [B,m,n] -> [B,n,m].
Var transpose_last2(Var x);
/// Per-group linear map x[G,N,in] -> [G,N,out] with weight w[H,out,in]; group g
/// uses w[g % H]. G must be a multiple of H.
Var grouped_linear(Var x, Var weight);

// Route contractions ---------------------------------------------------------
//
// Group layout is g = b * H + h. Operands whose leading axis is B instead of
// B * H are shared by all heads of a sample (index g / H).

/// out[g,k,l] = sum_f q[g,k,f] * r[g',k,l,f]. q: [G,N,F], r: [G',N,N,F].
Var pair_contract(Var q, Var r);
/// out[g,k,v] = sum_l a[g,k,l] * r[g',k,l,v]. a: [G,N,N], r: [G',N,N,V].
Var pair_aggregate(Var a, Var r);

/// [B, ..., H*d] -> [B*H, ..., d] (rank 3 or 4).
Var split_heads(Var x, std::size_t heads);
/// [B*H, N, d] -> [B, N, H*d].
Var merge_heads(Var x, std::size_t heads);

// Normalization and probabilities --------------------------------------------

/// Softmax over the last axis, max-subtracted. With `zero_masked_rows`, a row
/// whose maximum is below kMaskedRowThreshold outputs zeros instead of a
/// uniform distribution over masked entries.
Var softmax_rows(Var x, bool zero_masked_rows = false);

/// Layer normalization over the last axis with affine gamma/beta of size d.
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

enum class DropoutMode { element, channel };
/// Inverted dropout. Channel mode drops a feature channel (last axis) for all
/// nodes (second-to-last axis) of a graph together. Identity when
/// `training` is false or `rate` is 0. Rate outside [0, 1) is a ParameterError.
Var dropout(Var x, double rate, DropoutMode mode, bool training, Rng& rng);

// Node pooling ---------------------------------------------------------------

/// out[b,:] = sum_n w[b,n] * x[b,n,:]. x: [B,N,d], w: [B,N] constant.
Var node_weighted_sum(Var x, const Tensor& weights);
/// out[b,n,:] = indicator[b,n] * vec. vec: [d], indicator: [B,N].
Var place_rows(Var vec, const Tensor& indicator);

}  // namespace gi
