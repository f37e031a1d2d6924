// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>

// Hot inner loops behind a runtime-dispatched table. The scalar variants
// define the reference semantics; the AVX2 variants must reproduce them bit
// for bit, which the kernel test suite enforces on random inputs. Two rules
// make that possible:
//   * element-wise kernels perform the same IEEE ops in the same order
//     (divide, add 0.5, floor, clamp -- never a reciprocal or an fma), and
//   * reductions accumulate in fixed lanes: sum_abs uses 8 accumulators for
//     f32 and 4 for f64 (element i goes to lane i mod L) folded by a fixed
//     tree, in both the scalar and the vector build.
namespace tahq::kernels {

template <class T>
struct Table {
  // Smallest and largest element. n >= 1.
  void (*min_max)(const T* x, size_t n, T* mn, T* mx);
  // max_i |x[i]|. n >= 1.
  T (*abs_max)(const T* x, size_t n);
  // sum_i |x[i]| with lane-blocked accumulation (see above).
  T (*sum_abs)(const T* x, size_t n);
  // codes[i] = clamp(floor((x[i] - offset) / scale + 0.5), 0, qmax). scale > 0.
  void (*quantize)(const T* x, size_t n, T offset, T scale, uint32_t qmax, uint8_t* codes);
  // out[i] = codes[i] * scale + offset.
  void (*dequantize)(const uint8_t* codes, size_t n, T offset, T scale, T* out);
  // In-place unnormalized Walsh-Hadamard butterflies; n a power of two.
  void (*fwht)(T* x, size_t n);
  // In-place x[i] *= s.
  void (*scale_by)(T* x, size_t n, T s);
};

namespace scalar {
void min_max(const float* x, size_t n, float* mn, float* mx);
void min_max(const double* x, size_t n, double* mn, double* mx);
float abs_max(const float* x, size_t n);
double abs_max(const double* x, size_t n);
float sum_abs(const float* x, size_t n);
double sum_abs(const double* x, size_t n);
void quantize(const float* x, size_t n, float offset, float scale, uint32_t qmax, uint8_t* codes);
void quantize(const double* x, size_t n, double offset, double scale, uint32_t qmax, uint8_t* codes);
void dequantize(const uint8_t* codes, size_t n, float offset, float scale, float* out);
void dequantize(const uint8_t* codes, size_t n, double offset, double scale, double* out);
void fwht(float* x, size_t n);
void fwht(double* x, size_t n);
void scale_by(float* x, size_t n, float s);
void scale_by(double* x, size_t n, double s);
}  // namespace scalar

#ifdef TAHQ_HAVE_AVX2
namespace avx2 {
void min_max(const float* x, size_t n, float* mn, float* mx);
void min_max(const double* x, size_t n, double* mn, double* mx);
float abs_max(const float* x, size_t n);
double abs_max(const double* x, size_t n);
float sum_abs(const float* x, size_t n);
double sum_abs(const double* x, size_t n);
void quantize(const float* x, size_t n, float offset, float scale, uint32_t qmax, uint8_t* codes);
void quantize(const double* x, size_t n, double offset, double scale, uint32_t qmax, uint8_t* codes);
void dequantize(const uint8_t* codes, size_t n, float offset, float scale, float* out);
void dequantize(const uint8_t* codes, size_t n, double offset, double scale, double* out);
void fwht(float* x, size_t n);
void fwht(double* x, size_t n);
void scale_by(float* x, size_t n, float s);
void scale_by(double* x, size_t n, double s);
}  // namespace avx2

template <class T>
const Table<T>& avx2_table();
#endif

template <class T>
const Table<T>& scalar_table();

// Table picked at startup: AVX2 when the CPU supports it, unless overridden
// with TAHQ_KERNELS=scalar|avx2.
template <class T>
const Table<T>& active_table();

bool avx2_available();
const char* active_name();

}  // namespace tahq::kernels
