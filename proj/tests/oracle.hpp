// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
//
// Plain-written reference implementations the tests trust instead of the
// library under test. Everything here favors obviousness over speed: matrix
// multiplies instead of butterflies, bit-at-a-time packing, straight
// summation at 64-bit.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline double entropy(const std::vector<double>& a, double norm_eps, double log_eps) {
  double l1 = 0.0;
  for (double v : a) l1 += std::fabs(v);
  double h = 0.0;
  for (double v : a) {
    const double p = std::fabs(v) / (l1 + norm_eps);
    h += p * std::log(p + log_eps);
  }
  return -h;
}

// Sylvester-ordered Hadamard matrix: entry (i,j) is -1 raised to popcount(i&j).
inline std::vector<std::vector<double>> hadamard_matrix(size_t g) {
  std::vector<std::vector<double>> h(g, std::vector<double>(g));
  for (size_t i = 0; i < g; ++i)
    for (size_t j = 0; j < g; ++j)
      h[i][j] = (std::popcount(i & j) & 1) ? -1.0 : 1.0;
  return h;
}

inline std::vector<double> forward_hadamard(std::vector<double> x, size_t pivot) {
  std::swap(x[0], x[pivot]);
  const size_t g = x.size();
  const auto h = hadamard_matrix(g);
  std::vector<double> y(g, 0.0);
  for (size_t i = 0; i < g; ++i)
    for (size_t j = 0; j < g; ++j) y[i] += h[i][j] * x[j];
  const double s = 1.0 / std::sqrt(static_cast<double>(g));
  for (double& v : y) v *= s;
  return y;
}

inline std::vector<double> inverse_hadamard(std::vector<double> y, size_t pivot) {
  const size_t g = y.size();
  const auto h = hadamard_matrix(g);
  std::vector<double> x(g, 0.0);
  for (size_t i = 0; i < g; ++i)
    for (size_t j = 0; j < g; ++j) x[i] += h[i][j] * y[j];
  const double s = 1.0 / std::sqrt(static_cast<double>(g));
  for (double& v : x) v *= s;
  std::swap(x[0], x[pivot]);
  return x;
}

// One bit at a time, least significant bit of byte 0 first.
inline std::vector<uint8_t> pack_bits(const std::vector<uint8_t>& codes, int bits) {
  std::vector<uint8_t> out((codes.size() * bits + 7) / 8, 0);
  size_t pos = 0;
  for (uint8_t c : codes) {
    for (int b = 0; b < bits; ++b, ++pos) {
      if ((c >> b) & 1) out[pos / 8] |= static_cast<uint8_t>(1u << (pos % 8));
    }
  }
  return out;
}

inline std::vector<uint8_t> unpack_bits(const std::vector<uint8_t>& bytes, size_t n, int bits) {
  std::vector<uint8_t> out(n, 0);
  size_t pos = 0;
  for (size_t i = 0; i < n; ++i) {
    for (int b = 0; b < bits; ++b, ++pos) {
      if ((bytes[pos / 8] >> (pos % 8)) & 1) out[i] |= static_cast<uint8_t>(1u << b);
    }
  }
  return out;
}

inline size_t high_token_count(double frac, size_t tokens) {
  return static_cast<size_t>(std::floor(frac * static_cast<double>(tokens) + 0.5));
}

}  // namespace oracle
