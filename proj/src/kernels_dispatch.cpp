// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <cstring>

#include "tahq/error.hpp"
#include "tahq/kernels.hpp"

namespace tahq::kernels {

bool avx2_available() {
#ifdef TAHQ_HAVE_AVX2
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {

bool pick_avx2() {
  const char* env = std::getenv("TAHQ_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return false;
    if (std::strcmp(env, "avx2") == 0) {
      if (!avx2_available())
        fail(Errc::invalid_config, "TAHQ_KERNELS=avx2 but AVX2 is unavailable");
      return true;
    }
    fail(Errc::invalid_config, std::string("unknown TAHQ_KERNELS value: ") + env);
  }
  return avx2_available();
}

bool use_avx2() {
  static const bool v = pick_avx2();
  return v;
}

}  // namespace

template <>
const Table<float>& active_table<float>() {
#ifdef TAHQ_HAVE_AVX2
  if (use_avx2()) return avx2_table<float>();
#endif
  return scalar_table<float>();
}

template <>
const Table<double>& active_table<double>() {
#ifdef TAHQ_HAVE_AVX2
  if (use_avx2()) return avx2_table<double>();
#endif
  return scalar_table<double>();
}

const char* active_name() { return use_avx2() ? "avx2" : "scalar"; }

}  // namespace tahq::kernels
