// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

// AVX2 kernel variants. Compiled with -mavx2 only; every entry point defers
// ragged tails to the scalar reference so results stay bit-identical.

#include "tahq/kernels.hpp"

#ifdef TAHQ_HAVE_AVX2

#include <immintrin.h>

#include <cstring>

namespace tahq::kernels::avx2 {

namespace {

alignas(32) const int32_t kTailMask32[16] = {-1, -1, -1, -1, -1, -1, -1, -1,
                                             0,  0,  0,  0,  0,  0,  0,  0};
alignas(32) const int64_t kTailMask64[8] = {-1, -1, -1, -1, 0, 0, 0, 0};

inline float reduce_add(__m128 lo, __m128 hi) {
  __m128 s4 = _mm_add_ps(lo, hi);
  __m128 s2 = _mm_add_ps(s4, _mm_movehl_ps(s4, s4));
  __m128 s1 = _mm_add_ss(s2, _mm_shuffle_ps(s2, s2, 0x1));
  return _mm_cvtss_f32(s1);
}

inline double reduce_add(__m128d lo, __m128d hi) {
  __m128d s2 = _mm_add_pd(lo, hi);
  __m128d s1 = _mm_add_sd(s2, _mm_unpackhi_pd(s2, s2));
  return _mm_cvtsd_f64(s1);
}

inline float reduce_min(__m256 v) {
  __m128 m = _mm_min_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
  m = _mm_min_ps(m, _mm_movehl_ps(m, m));
  m = _mm_min_ss(m, _mm_shuffle_ps(m, m, 0x1));
  return _mm_cvtss_f32(m);
}

inline float reduce_max(__m256 v) {
  __m128 m = _mm_max_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
  m = _mm_max_ps(m, _mm_movehl_ps(m, m));
  m = _mm_max_ss(m, _mm_shuffle_ps(m, m, 0x1));
  return _mm_cvtss_f32(m);
}

inline double reduce_min(__m256d v) {
  __m128d m = _mm_min_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  m = _mm_min_sd(m, _mm_unpackhi_pd(m, m));
  return _mm_cvtsd_f64(m);
}

inline double reduce_max(__m256d v) {
  __m128d m = _mm_max_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  m = _mm_max_sd(m, _mm_unpackhi_pd(m, m));
  return _mm_cvtsd_f64(m);
}

}  // namespace

void min_max(const float* x, size_t n, float* mn, float* mx) {
  if (n < 8) {
    scalar::min_max(x, n, mn, mx);
    return;
  }
  __m256 vmin = _mm256_loadu_ps(x);
  __m256 vmax = vmin;
  size_t i = 8;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    vmin = _mm256_min_ps(vmin, v);
    vmax = _mm256_max_ps(vmax, v);
  }
  float lo = reduce_min(vmin);
  float hi = reduce_max(vmax);
  for (; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  *mn = lo;
  *mx = hi;
}

void min_max(const double* x, size_t n, double* mn, double* mx) {
  if (n < 4) {
    scalar::min_max(x, n, mn, mx);
    return;
  }
  __m256d vmin = _mm256_loadu_pd(x);
  __m256d vmax = vmin;
  size_t i = 4;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    vmin = _mm256_min_pd(vmin, v);
    vmax = _mm256_max_pd(vmax, v);
  }
  double lo = reduce_min(vmin);
  double hi = reduce_max(vmax);
  for (; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  *mn = lo;
  *mx = hi;
}

float abs_max(const float* x, size_t n) {
  if (n < 8) return scalar::abs_max(x, n);
  const __m256 mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  __m256 vmax = _mm256_and_ps(_mm256_loadu_ps(x), mask);
  size_t i = 8;
  for (; i + 8 <= n; i += 8)
    vmax = _mm256_max_ps(vmax, _mm256_and_ps(_mm256_loadu_ps(x + i), mask));
  float hi = reduce_max(vmax);
  for (; i < n; ++i) {
    float a = x[i] < 0.0f ? -x[i] : x[i];
    if (a > hi) hi = a;
  }
  return hi;
}

double abs_max(const double* x, size_t n) {
  if (n < 4) return scalar::abs_max(x, n);
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
  __m256d vmax = _mm256_and_pd(_mm256_loadu_pd(x), mask);
  size_t i = 4;
  for (; i + 4 <= n; i += 4)
    vmax = _mm256_max_pd(vmax, _mm256_and_pd(_mm256_loadu_pd(x + i), mask));
  double hi = reduce_max(vmax);
  for (; i < n; ++i) {
    double a = x[i] < 0.0 ? -x[i] : x[i];
    if (a > hi) hi = a;
  }
  return hi;
}

float sum_abs(const float* x, size_t n) {
  const __m256 mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_add_ps(acc, _mm256_and_ps(_mm256_loadu_ps(x + i), mask));
  size_t rem = n - i;
  if (rem) {
    __m256i m = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(kTailMask32 + 8 - rem));
    acc = _mm256_add_ps(acc, _mm256_and_ps(_mm256_maskload_ps(x + i, m), mask));
  }
  return reduce_add(_mm256_castps256_ps128(acc), _mm256_extractf128_ps(acc, 1));
}

double sum_abs(const double* x, size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_loadu_pd(x + i), mask));
  size_t rem = n - i;
  if (rem) {
    __m256i m = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(kTailMask64 + 4 - rem));
    acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_maskload_pd(x + i, m), mask));
  }
  return reduce_add(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
}

void quantize(const float* x, size_t n, float offset, float scale, uint32_t qmax, uint8_t* codes) {
  const __m256 voff = _mm256_set1_ps(offset);
  const __m256 vscale = _mm256_set1_ps(scale);
  const __m256 vhalf = _mm256_set1_ps(0.5f);
  const __m256 vzero = _mm256_setzero_ps();
  const __m256 vtop = _mm256_set1_ps(static_cast<float>(qmax));
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_div_ps(_mm256_sub_ps(_mm256_loadu_ps(x + i), voff), vscale);
    v = _mm256_floor_ps(_mm256_add_ps(v, vhalf));
    v = _mm256_min_ps(_mm256_max_ps(v, vzero), vtop);
    __m256i q = _mm256_cvttps_epi32(v);
    __m128i p16 = _mm_packus_epi32(_mm256_castsi256_si128(q), _mm256_extracti128_si256(q, 1));
    __m128i p8 = _mm_packus_epi16(p16, p16);
    _mm_storel_epi64(reinterpret_cast<__m128i*>(codes + i), p8);
  }
  if (i < n) scalar::quantize(x + i, n - i, offset, scale, qmax, codes + i);
}

void quantize(const double* x, size_t n, double offset, double scale, uint32_t qmax, uint8_t* codes) {
  const __m256d voff = _mm256_set1_pd(offset);
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d vhalf = _mm256_set1_pd(0.5);
  const __m256d vzero = _mm256_setzero_pd();
  const __m256d vtop = _mm256_set1_pd(static_cast<double>(qmax));
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), voff), vscale);
    v = _mm256_floor_pd(_mm256_add_pd(v, vhalf));
    v = _mm256_min_pd(_mm256_max_pd(v, vzero), vtop);
    __m128i q = _mm256_cvttpd_epi32(v);
    __m128i p16 = _mm_packus_epi32(q, q);
    __m128i p8 = _mm_packus_epi16(p16, p16);
    uint32_t four = static_cast<uint32_t>(_mm_cvtsi128_si32(p8));
    std::memcpy(codes + i, &four, 4);
  }
  if (i < n) scalar::quantize(x + i, n - i, offset, scale, qmax, codes + i);
}

void dequantize(const uint8_t* codes, size_t n, float offset, float scale, float* out) {
  const __m256 voff = _mm256_set1_ps(offset);
  const __m256 vscale = _mm256_set1_ps(scale);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m128i b = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(codes + i));
    __m256 f = _mm256_cvtepi32_ps(_mm256_cvtepu8_epi32(b));
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_mul_ps(f, vscale), voff));
  }
  if (i < n) scalar::dequantize(codes + i, n - i, offset, scale, out + i);
}

void dequantize(const uint8_t* codes, size_t n, double offset, double scale, double* out) {
  const __m256d voff = _mm256_set1_pd(offset);
  const __m256d vscale = _mm256_set1_pd(scale);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    uint32_t four;
    std::memcpy(&four, codes + i, 4);
    __m128i b = _mm_cvtsi32_si128(static_cast<int>(four));
    __m256d f = _mm256_cvtepi32_pd(_mm_cvtepu8_epi32(b));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(f, vscale), voff));
  }
  if (i < n) scalar::dequantize(codes + i, n - i, offset, scale, out + i);
}

void fwht(float* x, size_t n) {
  if (n < 8) {
    scalar::fwht(x, n);
    return;
  }
  // Strides 1, 2 and 4 stay inside one register; wider strides stream.
  for (size_t i = 0; i < n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    __m256 t = _mm256_permute_ps(v, 0xB1);
    v = _mm256_blend_ps(_mm256_add_ps(v, t), _mm256_sub_ps(t, v), 0xAA);
    t = _mm256_permute_ps(v, 0x4E);
    v = _mm256_blend_ps(_mm256_add_ps(v, t), _mm256_sub_ps(t, v), 0xCC);
    t = _mm256_permute2f128_ps(v, v, 0x01);
    v = _mm256_blend_ps(_mm256_add_ps(v, t), _mm256_sub_ps(t, v), 0xF0);
    _mm256_storeu_ps(x + i, v);
  }
  for (size_t h = 8; h < n; h <<= 1) {
    for (size_t i = 0; i < n; i += h << 1) {
      for (size_t j = i; j < i + h; j += 8) {
        __m256 u = _mm256_loadu_ps(x + j);
        __m256 w = _mm256_loadu_ps(x + j + h);
        _mm256_storeu_ps(x + j, _mm256_add_ps(u, w));
        _mm256_storeu_ps(x + j + h, _mm256_sub_ps(u, w));
      }
    }
  }
}

void fwht(double* x, size_t n) {
  if (n < 4) {
    scalar::fwht(x, n);
    return;
  }
  for (size_t i = 0; i < n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    __m256d t = _mm256_permute_pd(v, 0x5);
    v = _mm256_blend_pd(_mm256_add_pd(v, t), _mm256_sub_pd(t, v), 0xA);
    t = _mm256_permute2f128_pd(v, v, 0x01);
    v = _mm256_blend_pd(_mm256_add_pd(v, t), _mm256_sub_pd(t, v), 0xC);
    _mm256_storeu_pd(x + i, v);
  }
  for (size_t h = 4; h < n; h <<= 1) {
    for (size_t i = 0; i < n; i += h << 1) {
      for (size_t j = i; j < i + h; j += 4) {
        __m256d u = _mm256_loadu_pd(x + j);
        __m256d w = _mm256_loadu_pd(x + j + h);
        _mm256_storeu_pd(x + j, _mm256_add_pd(u, w));
        _mm256_storeu_pd(x + j + h, _mm256_sub_pd(u, w));
      }
    }
  }
}

void scale_by(float* x, size_t n, float s) {
  const __m256 vs = _mm256_set1_ps(s);
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), vs));
  if (i < n) scalar::scale_by(x + i, n - i, s);
}

void scale_by(double* x, size_t n, double s) {
  const __m256d vs = _mm256_set1_pd(s);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
  if (i < n) scalar::scale_by(x + i, n - i, s);
}

}  // namespace tahq::kernels::avx2

namespace tahq::kernels {

template <>
const Table<float>& avx2_table<float>() {
  static const Table<float> t{
      &avx2::min_max, &avx2::abs_max, &avx2::sum_abs,
      &avx2::quantize, &avx2::dequantize, &avx2::fwht, &avx2::scale_by};
  return t;
}

template <>
const Table<double>& avx2_table<double>() {
  static const Table<double> t{
      &avx2::min_max, &avx2::abs_max, &avx2::sum_abs,
      &avx2::quantize, &avx2::dequantize, &avx2::fwht, &avx2::scale_by};
  return t;
}

}  // namespace tahq::kernels

#endif  // TAHQ_HAVE_AVX2
