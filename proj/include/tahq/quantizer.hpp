// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tahq/config.hpp"
#include "tahq/tensor.hpp"

namespace tahq {

// Per-tile quantization record. `offset`/`scale` are kept at 32 bits, which is
// also their wire width; codes map back to values as code * scale + offset.
// When `transformed` is set the codes describe the pivot-swapped, Hadamard-
// rotated tile and `pivot` names the coordinate that was swapped with 0.
struct TileMeta {
  bool transformed = false;
  uint16_t pivot = 0;
  float offset = 0.0f;
  float scale = 0.0f;
  uint8_t bits = 0;
};

// A quantized activation tensor. Tiles are ordered (batch, seq, tile), tokens
// by flat index batch * seq_len + seq. `token_bits[t]` is the code width for
// every tile of token t; `payload` holds the packed codes, each tile padded
// to a whole byte.
struct CompressedActivation {
  uint32_t batch = 0;
  uint32_t seq = 0;
  uint32_t channels = 0;
  uint16_t tile_size = 0;
  uint8_t bits_hi = 0;
  uint8_t bits_lo = 0;
  bool adaptive_alloc = false;
  bool hadamard = false;
  std::vector<uint8_t> token_bits;
  std::vector<TileMeta> metas;
  std::vector<uint8_t> payload;

  size_t tokens() const { return static_cast<size_t>(batch) * seq; }
  size_t tiles_per_token() const { return tile_size ? channels / tile_size : 0; }
  size_t tile_count() const { return tokens() * tiles_per_token(); }
  size_t payload_code_bits() const {
    size_t bits = 0;
    for (uint8_t b : token_bits) bits += static_cast<size_t>(b) * channels;
    return bits;
  }
};

struct OutlierDecision {
  bool is_outlier = false;
  uint32_t pivot = 0;
};

// Shannon entropy of each token's normalized magnitude distribution,
// H = -sum_k p_k * log(p_k + log_eps) with p_k = |a_k| / (||a||_1 + norm_eps),
// natural log, clamped at zero. Values lie in [0, log channels].
template <class T>
std::vector<T> token_entropy(const Tensor3<T>& t, const QuantConfig& cfg);

// Width per token: the round(high_bit_frac * tokens) highest-entropy tokens
// get bits_hi (ties go to the lower flat index), the rest bits_lo.
template <class T>
std::vector<uint8_t> allocate_bits(const std::vector<T>& entropy, const QuantConfig& cfg);

// A tile is flagged when its largest magnitude exceeds outlier_threshold
// times the runner-up. The pivot is the argmax (lowest index on ties).
template <class T>
OutlierDecision detect_outlier(std::span<const T> tile, const QuantConfig& cfg);

// In-place x <- swap_0,pivot(x) * H / sqrt(G) with H the Sylvester-ordered
// Hadamard matrix. The inverse applies H / sqrt(G) first, then the swap.
template <class T>
void forward_hadamard(std::span<T> tile, uint32_t pivot);
template <class T>
void inverse_hadamard(std::span<T> tile, uint32_t pivot);

template <class T>
struct TileQuant {
  std::vector<uint8_t> codes;
  T offset = T(0);
  T scale = T(0);
};

// Asymmetric uniform quantizer over [min, max] with 2^bits levels; a constant
// tile yields scale 0 and all-zero codes.
template <class T>
TileQuant<T> quantize_tile(std::span<const T> tile, int bits);

template <class T>
std::vector<T> dequantize_tile(std::span<const uint8_t> codes, T offset, T scale, int bits);

template <class T>
CompressedActivation quantize_activation(const Tensor3<T>& t, const QuantConfig& cfg);

template <class T>
Tensor3<T> dequantize_activation(const CompressedActivation& c);

// Uniform-width baseline: every token at `bits`, no entropy ranking, no
// rotation. Equivalent to quantize_activation with both features disabled.
template <class T>
CompressedActivation naive_quantize(const Tensor3<T>& t, int bits, uint32_t tile_size);

}  // namespace tahq
