// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tahq/error.hpp"

namespace tahq {

// Dense row-major activation tensor, shape batch x seq x channels.
// A "token" is one (batch, seq) row of `channels` values.
template <class T>
struct Tensor3 {
  uint32_t batch = 0;
  uint32_t seq = 0;
  uint32_t channels = 0;
  std::vector<T> data;

  Tensor3() = default;
  Tensor3(uint32_t b, uint32_t s, uint32_t c)
      : batch(b), seq(s), channels(c), data(static_cast<size_t>(b) * s * c, T(0)) {}

  size_t size() const { return data.size(); }
  size_t tokens() const { return static_cast<size_t>(batch) * seq; }

  T* token_ptr(size_t flat_token) { return data.data() + flat_token * channels; }
  const T* token_ptr(size_t flat_token) const { return data.data() + flat_token * channels; }

  T& at(uint32_t b, uint32_t s, uint32_t c) {
    return data[(static_cast<size_t>(b) * seq + s) * channels + c];
  }
  const T& at(uint32_t b, uint32_t s, uint32_t c) const {
    return data[(static_cast<size_t>(b) * seq + s) * channels + c];
  }

  bool same_shape(const Tensor3& o) const {
    return batch == o.batch && seq == o.seq && channels == o.channels;
  }
};

template <class T>
bool all_finite(const Tensor3<T>& t) {
  for (T v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <class T>
void require_finite(const Tensor3<T>& t, const char* who) {
  if (!all_finite(t)) fail(Errc::invalid_input, std::string(who) + ": non-finite value in input tensor");
}

template <class T>
void require_nonempty(const Tensor3<T>& t, const char* who) {
  if (t.batch == 0 || t.seq == 0 || t.channels == 0)
    fail(Errc::invalid_input, std::string(who) + ": empty tensor shape");
  if (t.data.size() != static_cast<size_t>(t.batch) * t.seq * t.channels)
    fail(Errc::shape_mismatch, std::string(who) + ": data size does not match shape");
}

}  // namespace tahq
