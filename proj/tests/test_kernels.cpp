// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include "tahq/kernels.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "tahq/rng.hpp"

using namespace tahq;

namespace {

template <class T>
std::vector<T> random_values(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<T> out(n);
  for (T& v : out) v = static_cast<T>(rng.gaussian() * 3.0);
  return out;
}

template <class T>
bool bit_equal(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

template <class T>
void check_paths_agree(size_t n, uint64_t seed) {
  const kernels::Table<T> s = kernels::scalar_table<T>();
  const kernels::Table<T> v = kernels::avx2_table<T>();
  std::vector<T> x = random_values<T>(n, seed);

  T s_min, s_max, v_min, v_max;
  s.min_max(x.data(), n, &s_min, &s_max);
  v.min_max(x.data(), n, &v_min, &v_max);
  CHECK(s_min == v_min);
  CHECK(s_max == v_max);

  CHECK(s.abs_max(x.data(), n) == v.abs_max(x.data(), n));
  CHECK(s.sum_abs(x.data(), n) == v.sum_abs(x.data(), n));

  const T offset = s_min;
  const T scale = s_max > s_min ? (s_max - s_min) / T(15) : T(1);
  std::vector<uint8_t> cs(n), cv(n);
  s.quantize(x.data(), n, offset, scale, T(15), cs.data());
  v.quantize(x.data(), n, offset, scale, T(15), cv.data());
  CHECK(cs == cv);

  std::vector<T> ds(n), dv(n);
  s.dequantize(cs.data(), n, offset, scale, ds.data());
  v.dequantize(cv.data(), n, offset, scale, dv.data());
  CHECK(bit_equal(ds, dv));

  std::vector<T> ss = x, sv = x;
  s.scale_by(ss.data(), n, T(0.3125));
  v.scale_by(sv.data(), n, T(0.3125));
  CHECK(bit_equal(ss, sv));

  if (std::has_single_bit(n)) {
    std::vector<T> fs = x, fv = x;
    s.fwht(fs.data(), n);
    v.fwht(fv.data(), n);
    CHECK(bit_equal(fs, fv));
  }
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("scalar min/max/abs agree with straightforward loops") {
  auto x = random_values<double>(257, 11);
  const kernels::Table<double> k = kernels::scalar_table<double>();
  double mn, mx;
  k.min_max(x.data(), x.size(), &mn, &mx);
  double ref_mn = x[0], ref_mx = x[0];
  double ref_abs = 0.0;
  for (double v : x) {
    ref_mn = std::min(ref_mn, v);
    ref_mx = std::max(ref_mx, v);
    ref_abs = std::max(ref_abs, std::fabs(v));
  }
  CHECK(mn == ref_mn);
  CHECK(mx == ref_mx);
  CHECK(k.abs_max(x.data(), x.size()) == ref_abs);
}

TEST_CASE("scalar sum_abs matches plain accumulation within rounding slack") {
  auto x = random_values<float>(1001, 12);
  double ref = 0.0;
  for (float v : x) ref += std::fabs(static_cast<double>(v));
  const float got = kernels::scalar_table<float>().sum_abs(x.data(), x.size());
  CHECK(std::fabs(static_cast<double>(got) - ref) < 1e-2);
}

TEST_CASE("scalar transform matches the explicit matrix product") {
  for (size_t g : {2u, 4u, 8u, 32u, 128u}) {
    auto x = random_values<double>(g, 100 + g);
    std::vector<double> fast = x;
    // The kernel applies the raw +-1 matrix; normalization is a separate op.
    kernels::scalar_table<double>().fwht(fast.data(), g);
    const auto h = oracle::hadamard_matrix(g);
    for (size_t i = 0; i < g; ++i) {
      double ref = 0.0;
      for (size_t j = 0; j < g; ++j) ref += h[i][j] * x[j];
      CHECK(fast[i] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("quantize clamps, rounds half up, and honors the degenerate scale") {
  const kernels::Table<float> k = kernels::scalar_table<float>();
  const float x[] = {0.0f, 1.49f, 1.5f, 6.99f, 7.0f, 9.3f, -2.0f};
  uint8_t codes[7];
  k.quantize(x, 7, 0.0f, 1.0f, 7.0f, codes);
  const uint8_t want[] = {0, 1, 2, 7, 7, 7, 0};
  CHECK(std::memcmp(codes, want, 7) == 0);
}

TEST_CASE("vector kernels are bit-identical to the scalar reference") {
  if (!kernels::avx2_available()) {
    MESSAGE("no avx2 on this host, skipping");
    return;
  }
  uint64_t seed = 0;
  for (size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 32u, 33u,
                   64u, 100u, 128u, 255u, 256u, 1000u, 1024u}) {
    CAPTURE(n);
    check_paths_agree<float>(n, ++seed);
    check_paths_agree<double>(n, ++seed);
  }
}

TEST_CASE("kernel dispatch honors the TAHQ_KERNELS override") {
  const kernels::Table<float> active = kernels::active_table<float>();
  const char* forced = std::getenv("TAHQ_KERNELS");
  if (forced && std::string(forced) == "scalar") {
    CHECK(active.quantize == kernels::scalar_table<float>().quantize);
  } else if (kernels::avx2_available()) {
    CHECK(active.quantize == kernels::avx2_table<float>().quantize);
  } else {
    CHECK(active.quantize == kernels::scalar_table<float>().quantize);
  }
}
TEST_SUITE_END();
