// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "tahq/error.hpp"

namespace tahq {

// Knobs for tile-wise activation quantization.
//
// A token's channels are split into tiles of `tile_size` consecutive values.
// Every token is coded at either `bits_hi` or `bits_lo`; the top `high_bit_frac`
// share of tokens (ranked by entropy) receive `bits_hi`. Tiles whose largest
// magnitude dwarfs the runner-up (ratio strictly above `outlier_threshold`)
// are passed through a pivot-swap + normalized Hadamard rotation before the
// affine quantizer to flatten the spike.
struct QuantConfig {
  uint32_t tile_size = 32;
  int bits_hi = 4;
  int bits_lo = 3;
  double high_bit_frac = 0.8;
  double outlier_threshold = 2.0;
  bool adaptive_alloc = true;
  bool hadamard = true;

  // Numerical guards: `norm_eps` keeps the entropy normalizer nonzero,
  // `log_eps` keeps log() finite at p = 0, `ratio_eps` keeps the outlier
  // ratio finite when the runner-up magnitude is zero.
  double norm_eps = 1e-6;
  double log_eps = 1e-12;
  double ratio_eps = 1e-8;

  // Throws Errc::invalid_config / unsupported_tile_size on bad settings.
  // Clamps high_bit_frac into [0, 1].
  void validate(uint32_t channels);
};

inline bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline void QuantConfig::validate(uint32_t channels) {
  if (channels == 0) fail(Errc::invalid_config, "channel count must be positive");
  if (tile_size < 2) fail(Errc::invalid_config, "tile_size must be at least 2");
  if (!is_pow2(tile_size)) fail(Errc::unsupported_tile_size, "tile_size must be a power of two");
  if (tile_size > 65535) fail(Errc::unsupported_tile_size, "tile_size exceeds wire format limit");
  if (channels % tile_size != 0) fail(Errc::invalid_config, "tile_size must divide channel count");
  if (bits_lo < 2 || bits_hi < bits_lo || bits_hi > 8)
    fail(Errc::invalid_config, "bit widths must satisfy 2 <= bits_lo <= bits_hi <= 8");
  if (!(outlier_threshold > 1.0)) fail(Errc::invalid_config, "outlier_threshold must exceed 1");
  if (!(norm_eps > 0.0) || !(log_eps > 0.0) || !(ratio_eps > 0.0))
    fail(Errc::invalid_config, "numerical guards must be positive");
  if (high_bit_frac < 0.0) high_bit_frac = 0.0;
  if (high_bit_frac > 1.0) high_bit_frac = 1.0;
}

}  // namespace tahq
