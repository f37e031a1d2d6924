// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include "tahq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tahq/kernels.hpp"
#include "tahq/packing.hpp"

namespace tahq {

namespace {

template <class T>
const kernels::Table<T>& K() {
  return kernels::active_table<T>();
}

size_t round_half_up_count(double frac, size_t n) {
  return static_cast<size_t>(std::floor(frac * static_cast<double>(n) + 0.5));
}

void check_bits(int bits, const char* who) {
  if (bits < 2 || bits > 8) fail(Errc::invalid_config, std::string(who) + ": bits must be in [2, 8]");
}

}  // namespace

template <class T>
std::vector<T> token_entropy(const Tensor3<T>& t, const QuantConfig& cfg) {
  require_nonempty(t, "token_entropy");
  require_finite(t, "token_entropy");
  QuantConfig c = cfg;
  c.validate(t.channels);

  const T norm_eps = static_cast<T>(c.norm_eps);
  const T log_eps = static_cast<T>(c.log_eps);
  const size_t tokens = t.tokens();
  std::vector<T> out(tokens);
  for (size_t tok = 0; tok < tokens; ++tok) {
    const T* row = t.token_ptr(tok);
    const T denom = K<T>().sum_abs(row, t.channels) + norm_eps;
    T h = T(0);
    for (uint32_t k = 0; k < t.channels; ++k) {
      T p = std::fabs(row[k]) / denom;
      if (p > T(0)) h -= p * std::log(p + log_eps);
    }
    // log_eps can push a one-hot token a hair below zero; the range is
    // documented as [0, log C].
    out[tok] = h > T(0) ? h : T(0);
  }
  return out;
}

template <class T>
std::vector<uint8_t> allocate_bits(const std::vector<T>& entropy, const QuantConfig& cfg) {
  if (entropy.empty()) fail(Errc::invalid_input, "allocate_bits: empty entropy map");
  double frac = std::clamp(cfg.high_bit_frac, 0.0, 1.0);
  const size_t n = entropy.size();
  const size_t n_hi = round_half_up_count(frac, n);

  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    if (entropy[a] != entropy[b]) return entropy[a] > entropy[b];
    return a < b;
  });

  std::vector<uint8_t> bits(n, static_cast<uint8_t>(cfg.bits_lo));
  for (size_t i = 0; i < n_hi; ++i) bits[order[i]] = static_cast<uint8_t>(cfg.bits_hi);
  return bits;
}

template <class T>
OutlierDecision detect_outlier(std::span<const T> tile, const QuantConfig& cfg) {
  const size_t n = tile.size();
  if (n < 2) fail(Errc::invalid_tile, "detect_outlier: tile must hold at least 2 values");

  T top = std::fabs(tile[0]);
  size_t pivot = 0;
  for (size_t i = 1; i < n; ++i) {
    T a = std::fabs(tile[i]);
    if (a > top) {
      top = a;
      pivot = i;
    }
  }
  T second = T(0);
  bool seeded = false;
  for (size_t i = 0; i < n; ++i) {
    if (i == pivot) continue;
    T a = std::fabs(tile[i]);
    if (!seeded || a > second) {
      second = a;
      seeded = true;
    }
  }
  double r = static_cast<double>(top) / (static_cast<double>(second) + cfg.ratio_eps);
  return OutlierDecision{r > cfg.outlier_threshold, static_cast<uint32_t>(pivot)};
}

template <class T>
void forward_hadamard(std::span<T> tile, uint32_t pivot) {
  const size_t n = tile.size();
  if (!is_pow2(n)) fail(Errc::unsupported_tile_size, "forward_hadamard: size must be a power of two");
  if (pivot >= n) fail(Errc::invalid_input, "forward_hadamard: pivot out of range");
  std::swap(tile[0], tile[pivot]);
  K<T>().fwht(tile.data(), n);
  K<T>().scale_by(tile.data(), n, T(1) / std::sqrt(static_cast<T>(n)));
}

template <class T>
void inverse_hadamard(std::span<T> tile, uint32_t pivot) {
  const size_t n = tile.size();
  if (!is_pow2(n)) fail(Errc::unsupported_tile_size, "inverse_hadamard: size must be a power of two");
  if (pivot >= n) fail(Errc::invalid_input, "inverse_hadamard: pivot out of range");
  K<T>().fwht(tile.data(), n);
  K<T>().scale_by(tile.data(), n, T(1) / std::sqrt(static_cast<T>(n)));
  std::swap(tile[0], tile[pivot]);
}

template <class T>
TileQuant<T> quantize_tile(std::span<const T> tile, int bits) {
  check_bits(bits, "quantize_tile");
  if (tile.empty()) fail(Errc::invalid_tile, "quantize_tile: empty tile");
  const uint32_t qmax = (1u << bits) - 1u;

  TileQuant<T> q;
  q.codes.assign(tile.size(), 0);
  T mn, mx;
  K<T>().min_max(tile.data(), tile.size(), &mn, &mx);
  q.offset = mn;
  if (mx == mn) {
    q.scale = T(0);
    return q;
  }
  q.scale = (mx - mn) / static_cast<T>(qmax);
  K<T>().quantize(tile.data(), tile.size(), q.offset, q.scale, qmax, q.codes.data());
  return q;
}

template <class T>
std::vector<T> dequantize_tile(std::span<const uint8_t> codes, T offset, T scale, int bits) {
  check_bits(bits, "dequantize_tile");
  if (!(std::isfinite(static_cast<double>(offset)) && std::isfinite(static_cast<double>(scale))) ||
      scale < T(0))
    fail(Errc::invalid_input, "dequantize_tile: offset/scale invalid");
  const uint32_t limit = 1u << bits;
  for (uint8_t c : codes)
    if (c >= limit) fail(Errc::corrupt_payload, "dequantize_tile: code exceeds bit width");
  std::vector<T> out(codes.size());
  if (!codes.empty()) K<T>().dequantize(codes.data(), codes.size(), offset, scale, out.data());
  return out;
}

namespace {

// Shared tile loop for quantize_activation / naive_quantize. Entropy and
// outlier decisions always read the raw, untransformed values.
template <class T>
CompressedActivation quantize_impl(const Tensor3<T>& t, const QuantConfig& cfg) {
  const uint32_t G = cfg.tile_size;

  CompressedActivation out;
  out.batch = t.batch;
  out.seq = t.seq;
  out.channels = t.channels;
  out.tile_size = static_cast<uint16_t>(G);
  out.bits_hi = static_cast<uint8_t>(cfg.bits_hi);
  out.bits_lo = static_cast<uint8_t>(cfg.bits_lo);
  out.adaptive_alloc = cfg.adaptive_alloc;
  out.hadamard = cfg.hadamard;

  if (cfg.adaptive_alloc) {
    out.token_bits = allocate_bits(token_entropy(t, cfg), cfg);
  } else {
    out.token_bits.assign(t.tokens(), static_cast<uint8_t>(cfg.bits_hi));
  }

  const size_t tiles_per_token = t.channels / G;
  out.metas.reserve(t.tokens() * tiles_per_token);
  out.payload.reserve(t.tokens() * tiles_per_token * codec::packed_size(G, cfg.bits_hi));

  std::vector<T> scratch(G);
  std::vector<uint8_t> codes(G);
  const T inv_root = T(1) / std::sqrt(static_cast<T>(G));

  for (size_t tok = 0; tok < t.tokens(); ++tok) {
    const int bits = out.token_bits[tok];
    const uint32_t qmax = (1u << bits) - 1u;
    const size_t seg = codec::packed_size(G, bits);
    for (size_t ti = 0; ti < tiles_per_token; ++ti) {
      const T* raw = t.token_ptr(tok) + ti * G;

      TileMeta meta;
      meta.bits = static_cast<uint8_t>(bits);
      const T* src = raw;
      if (cfg.hadamard) {
        OutlierDecision d = detect_outlier(std::span<const T>(raw, G), cfg);
        if (d.is_outlier) {
          meta.transformed = true;
          meta.pivot = static_cast<uint16_t>(d.pivot);
          std::copy(raw, raw + G, scratch.begin());
          std::swap(scratch[0], scratch[d.pivot]);
          K<T>().fwht(scratch.data(), G);
          K<T>().scale_by(scratch.data(), G, inv_root);
          src = scratch.data();
        }
      }

      T mn, mx;
      K<T>().min_max(src, G, &mn, &mx);
      meta.offset = static_cast<float>(mn);
      meta.scale = static_cast<float>((mx - mn) / static_cast<T>(qmax));

      size_t base = out.payload.size();
      out.payload.resize(base + seg, 0);
      if (meta.scale > 0.0f) {
        K<T>().quantize(src, G, static_cast<T>(meta.offset), static_cast<T>(meta.scale), qmax,
                        codes.data());
        codec::pack_codes_into(codes.data(), G, bits, out.payload.data() + base);
      }
      out.metas.push_back(meta);
    }
  }
  return out;
}

}  // namespace

template <class T>
CompressedActivation quantize_activation(const Tensor3<T>& t, const QuantConfig& cfg) {
  require_nonempty(t, "quantize_activation");
  require_finite(t, "quantize_activation");
  QuantConfig c = cfg;
  c.validate(t.channels);
  return quantize_impl(t, c);
}

template <class T>
CompressedActivation naive_quantize(const Tensor3<T>& t, int bits, uint32_t tile_size) {
  check_bits(bits, "naive_quantize");
  QuantConfig c;
  c.tile_size = tile_size;
  c.bits_hi = bits;
  c.bits_lo = bits;
  c.adaptive_alloc = false;
  c.hadamard = false;
  return quantize_activation(t, c);
}

namespace {

void check_compressed(const CompressedActivation& c) {
  if (c.batch == 0 || c.seq == 0 || c.channels == 0)
    fail(Errc::invalid_input, "dequantize_activation: empty shape");
  if (c.tile_size < 2 || !is_pow2(c.tile_size))
    fail(Errc::unsupported_tile_size, "dequantize_activation: bad tile size");
  if (c.channels % c.tile_size != 0)
    fail(Errc::shape_mismatch, "dequantize_activation: tile size does not divide channels");
  if (c.bits_lo < 2 || c.bits_hi < c.bits_lo || c.bits_hi > 8)
    fail(Errc::invalid_input, "dequantize_activation: bad bit widths");
  if (c.token_bits.size() != c.tokens())
    fail(Errc::shape_mismatch, "dequantize_activation: token bit map size mismatch");
  for (uint8_t b : c.token_bits)
    if (b != c.bits_hi && b != c.bits_lo)
      fail(Errc::corrupt_payload, "dequantize_activation: token width outside configured pair");
  if (c.metas.size() != c.tile_count())
    fail(Errc::shape_mismatch, "dequantize_activation: tile metadata count mismatch");

  size_t expect = 0;
  const size_t tiles_per_token = c.tiles_per_token();
  for (size_t tok = 0; tok < c.tokens(); ++tok)
    expect += tiles_per_token * codec::packed_size(c.tile_size, c.token_bits[tok]);
  if (c.payload.size() != expect)
    fail(Errc::corrupt_payload, "dequantize_activation: payload size mismatch");

  for (const TileMeta& m : c.metas) {
    if (m.pivot >= c.tile_size)
      fail(Errc::corrupt_payload, "dequantize_activation: pivot out of range");
    if (!(std::isfinite(m.offset) && std::isfinite(m.scale)) || m.scale < 0.0f)
      fail(Errc::corrupt_payload, "dequantize_activation: bad offset/scale");
  }
}

}  // namespace

template <class T>
Tensor3<T> dequantize_activation(const CompressedActivation& c) {
  check_compressed(c);

  Tensor3<T> out(c.batch, c.seq, c.channels);
  const uint32_t G = c.tile_size;
  const size_t tiles_per_token = c.tiles_per_token();
  std::vector<uint8_t> codes(G);
  const T inv_root = T(1) / std::sqrt(static_cast<T>(G));

  size_t cursor = 0;
  size_t tile_index = 0;
  for (size_t tok = 0; tok < c.tokens(); ++tok) {
    const int bits = c.token_bits[tok];
    const size_t seg = codec::packed_size(G, bits);
    for (size_t ti = 0; ti < tiles_per_token; ++ti, ++tile_index) {
      const TileMeta& m = c.metas[tile_index];
      T* dst = out.token_ptr(tok) + ti * G;
      codec::unpack_codes_into(c.payload.data() + cursor, G, bits, codes.data());
      cursor += seg;
      K<T>().dequantize(codes.data(), G, static_cast<T>(m.offset), static_cast<T>(m.scale), dst);
      if (m.transformed) {
        K<T>().fwht(dst, G);
        K<T>().scale_by(dst, G, inv_root);
        std::swap(dst[0], dst[m.pivot]);
      }
    }
  }
  return out;
}

template std::vector<float> token_entropy(const Tensor3<float>&, const QuantConfig&);
template std::vector<double> token_entropy(const Tensor3<double>&, const QuantConfig&);
template std::vector<uint8_t> allocate_bits(const std::vector<float>&, const QuantConfig&);
template std::vector<uint8_t> allocate_bits(const std::vector<double>&, const QuantConfig&);
template OutlierDecision detect_outlier(std::span<const float>, const QuantConfig&);
template OutlierDecision detect_outlier(std::span<const double>, const QuantConfig&);
template void forward_hadamard(std::span<float>, uint32_t);
template void forward_hadamard(std::span<double>, uint32_t);
template void inverse_hadamard(std::span<float>, uint32_t);
template void inverse_hadamard(std::span<double>, uint32_t);
template TileQuant<float> quantize_tile(std::span<const float>, int);
template TileQuant<double> quantize_tile(std::span<const double>, int);
template std::vector<float> dequantize_tile(std::span<const uint8_t>, float, float, int);
template std::vector<double> dequantize_tile(std::span<const uint8_t>, double, double, int);
template CompressedActivation quantize_activation(const Tensor3<float>&, const QuantConfig&);
template CompressedActivation quantize_activation(const Tensor3<double>&, const QuantConfig&);
template Tensor3<float> dequantize_activation(const CompressedActivation&);
template Tensor3<double> dequantize_activation(const CompressedActivation&);
template CompressedActivation naive_quantize(const Tensor3<float>&, int, uint32_t);
template CompressedActivation naive_quantize(const Tensor3<double>&, int, uint32_t);

}  // namespace tahq
