// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "tahq/error.hpp"

namespace tahq::codec {

// Sub-byte code packing. Code k occupies bits [k*b, (k+1)*b) of the output
// stream, least significant bit of byte 0 first; trailing padding bits in the
// final byte are zero. Kept inline: these sit inside the per-tile encode and
// decode loops.

inline size_t packed_size(size_t n, int bits) { return (n * static_cast<size_t>(bits) + 7) / 8; }

inline void pack_codes_into(const uint8_t* codes, size_t n, int bits, uint8_t* out) {
  if (bits < 1 || bits > 8) fail(Errc::invalid_config, "pack_codes: bits must be in [1, 8]");
  const uint32_t limit = 1u << bits;
  std::memset(out, 0, packed_size(n, bits));
  size_t bitpos = 0;
  for (size_t k = 0; k < n; ++k) {
    uint32_t c = codes[k];
    if (c >= limit) fail(Errc::code_out_of_range, "pack_codes: code does not fit bit width");
    size_t byte = bitpos >> 3;
    unsigned shift = static_cast<unsigned>(bitpos & 7);
    out[byte] = static_cast<uint8_t>(out[byte] | (c << shift));
    unsigned spill = shift + static_cast<unsigned>(bits);
    if (spill > 8) out[byte + 1] = static_cast<uint8_t>(out[byte + 1] | (c >> (8 - shift)));
    bitpos += static_cast<size_t>(bits);
  }
}

inline void unpack_codes_into(const uint8_t* bytes, size_t n, int bits, uint8_t* codes) {
  if (bits < 1 || bits > 8) fail(Errc::invalid_config, "unpack_codes: bits must be in [1, 8]");
  const uint32_t mask = (1u << bits) - 1u;
  size_t bitpos = 0;
  for (size_t k = 0; k < n; ++k) {
    size_t byte = bitpos >> 3;
    unsigned shift = static_cast<unsigned>(bitpos & 7);
    uint32_t v = static_cast<uint32_t>(bytes[byte]) >> shift;
    unsigned spill = shift + static_cast<unsigned>(bits);
    if (spill > 8) v |= static_cast<uint32_t>(bytes[byte + 1]) << (8 - shift);
    codes[k] = static_cast<uint8_t>(v & mask);
    bitpos += static_cast<size_t>(bits);
  }
}

inline std::vector<uint8_t> pack_codes(std::span<const uint8_t> codes, int bits) {
  std::vector<uint8_t> out(packed_size(codes.size(), bits));
  pack_codes_into(codes.data(), codes.size(), bits, out.data());
  return out;
}

inline std::vector<uint8_t> unpack_codes(std::span<const uint8_t> bytes, size_t n, int bits) {
  if (bits < 1 || bits > 8) fail(Errc::invalid_config, "unpack_codes: bits must be in [1, 8]");
  if (bytes.size() < packed_size(n, bits))
    fail(Errc::truncated, "unpack_codes: byte stream shorter than packed size");
  std::vector<uint8_t> codes(n);
  unpack_codes_into(bytes.data(), n, bits, codes.data());
  return codes;
}

}  // namespace tahq::codec
