// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "tahq/kernels.hpp"

namespace tahq::kernels::scalar {

namespace {

template <class T>
void min_max_impl(const T* x, size_t n, T* mn, T* mx) {
  T lo = x[0];
  T hi = x[0];
  for (size_t i = 1; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  *mn = lo;
  *mx = hi;
}

template <class T>
T abs_max_impl(const T* x, size_t n) {
  T m = std::fabs(x[0]);
  for (size_t i = 1; i < n; ++i) {
    T a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

template <class T>
void quantize_impl(const T* x, size_t n, T offset, T scale, uint32_t qmax, uint8_t* codes) {
  const T top = static_cast<T>(qmax);
  for (size_t i = 0; i < n; ++i) {
    T v = (x[i] - offset) / scale;
    v = std::floor(v + T(0.5));
    if (v < T(0)) v = T(0);
    if (v > top) v = top;
    codes[i] = static_cast<uint8_t>(v);
  }
}

template <class T>
void dequantize_impl(const uint8_t* codes, size_t n, T offset, T scale, T* out) {
  for (size_t i = 0; i < n; ++i) out[i] = static_cast<T>(codes[i]) * scale + offset;
}

template <class T>
void fwht_impl(T* x, size_t n) {
  for (size_t h = 1; h < n; h <<= 1) {
    for (size_t i = 0; i < n; i += h << 1) {
      for (size_t j = i; j < i + h; ++j) {
        T u = x[j];
        T v = x[j + h];
        x[j] = u + v;
        x[j + h] = u - v;
      }
    }
  }
}

template <class T>
void scale_by_impl(T* x, size_t n, T s) {
  for (size_t i = 0; i < n; ++i) x[i] *= s;
}

}  // namespace

void min_max(const float* x, size_t n, float* mn, float* mx) { min_max_impl(x, n, mn, mx); }
void min_max(const double* x, size_t n, double* mn, double* mx) { min_max_impl(x, n, mn, mx); }

float abs_max(const float* x, size_t n) { return abs_max_impl(x, n); }
double abs_max(const double* x, size_t n) { return abs_max_impl(x, n); }

// Lane-blocked accumulation: element i lands in accumulator i mod L, with L
// matching the AVX2 register width for the type, so both builds add the same
// numbers in the same order.
float sum_abs(const float* x, size_t n) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (size_t i = 0; i < n; ++i) acc[i & 7] += std::fabs(x[i]);
  float t0 = acc[0] + acc[4];
  float t1 = acc[1] + acc[5];
  float t2 = acc[2] + acc[6];
  float t3 = acc[3] + acc[7];
  return (t0 + t2) + (t1 + t3);
}

double sum_abs(const double* x, size_t n) {
  double acc[4] = {0, 0, 0, 0};
  for (size_t i = 0; i < n; ++i) acc[i & 3] += std::fabs(x[i]);
  double t0 = acc[0] + acc[2];
  double t1 = acc[1] + acc[3];
  return t0 + t1;
}

void quantize(const float* x, size_t n, float offset, float scale, uint32_t qmax, uint8_t* codes) {
  quantize_impl(x, n, offset, scale, qmax, codes);
}
void quantize(const double* x, size_t n, double offset, double scale, uint32_t qmax, uint8_t* codes) {
  quantize_impl(x, n, offset, scale, qmax, codes);
}

void dequantize(const uint8_t* codes, size_t n, float offset, float scale, float* out) {
  dequantize_impl(codes, n, offset, scale, out);
}
void dequantize(const uint8_t* codes, size_t n, double offset, double scale, double* out) {
  dequantize_impl(codes, n, offset, scale, out);
}

void fwht(float* x, size_t n) { fwht_impl(x, n); }
void fwht(double* x, size_t n) { fwht_impl(x, n); }

void scale_by(float* x, size_t n, float s) { scale_by_impl(x, n, s); }
void scale_by(double* x, size_t n, double s) { scale_by_impl(x, n, s); }

}  // namespace tahq::kernels::scalar

namespace tahq::kernels {

template <>
const Table<float>& scalar_table<float>() {
  static const Table<float> t{
      &scalar::min_max, &scalar::abs_max, &scalar::sum_abs,
      &scalar::quantize, &scalar::dequantize, &scalar::fwht, &scalar::scale_by};
  return t;
}

template <>
const Table<double>& scalar_table<double>() {
  static const Table<double> t{
      &scalar::min_max, &scalar::abs_max, &scalar::sum_abs,
      &scalar::quantize, &scalar::dequantize, &scalar::fwht, &scalar::scale_by};
  return t;
}

}  // namespace tahq::kernels
