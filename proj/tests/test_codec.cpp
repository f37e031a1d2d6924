// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include "tahq/blob.hpp"

#include <cstring>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "tahq/packing.hpp"
#include "tahq/quantizer.hpp"
#include "tahq/rng.hpp"

using namespace tahq;

namespace {

CompressedActivation random_compressed(Rng& rng) {
  const uint32_t shapes[][4] = {
      {1, 1, 8, 8}, {2, 3, 16, 4}, {1, 7, 32, 32}, {3, 2, 64, 16}, {2, 5, 128, 64}};
  const auto& pick = shapes[rng.next_below(5)];

  QuantConfig cfg;
  cfg.tile_size = pick[3];
  cfg.high_bit_frac = rng.uniform01();
  cfg.adaptive_alloc = rng.next_below(2) == 0;
  cfg.hadamard = rng.next_below(2) == 0;

  Tensor3<float> t(pick[0], pick[1], pick[2]);
  for (float& v : t.data) v = static_cast<float>(rng.gaussian() * 2.0);
  // Spike some channels so a share of tiles takes the transformed branch.
  for (size_t tok = 0; tok < t.tokens(); ++tok)
    if (rng.next_below(3) == 0) t.token_ptr(tok)[rng.next_below(pick[2])] = 30.0f;
  return quantize_activation(t, cfg);
}

bool same_compressed(const CompressedActivation& a, const CompressedActivation& b) {
  if (a.batch != b.batch || a.seq != b.seq || a.channels != b.channels ||
      a.tile_size != b.tile_size || a.bits_hi != b.bits_hi || a.bits_lo != b.bits_lo ||
      a.adaptive_alloc != b.adaptive_alloc || a.hadamard != b.hadamard)
    return false;
  if (a.token_bits != b.token_bits || a.payload != b.payload) return false;
  if (a.metas.size() != b.metas.size()) return false;
  for (size_t i = 0; i < a.metas.size(); ++i) {
    const TileMeta &x = a.metas[i], &y = b.metas[i];
    if (x.transformed != y.transformed || x.bits != y.bits) return false;
    if (x.transformed && x.pivot != y.pivot) return false;
    if (std::memcmp(&x.offset, &y.offset, 4) != 0 || std::memcmp(&x.scale, &y.scale, 4) != 0)
      return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("codec");

TEST_CASE("packing handles single codes, empties, and the documented example") {
  CHECK(codec::pack_codes(std::vector<uint8_t>{15}, 4) == std::vector<uint8_t>{0x0F});
  CHECK(codec::pack_codes(std::vector<uint8_t>{}, 3).empty());
  CHECK(codec::pack_codes(std::vector<uint8_t>{1, 2, 3}, 3) ==
        std::vector<uint8_t>({0xD1, 0x00}));
  CHECK(codec::unpack_codes(std::vector<uint8_t>{0x0F}, 1, 4) == std::vector<uint8_t>{15});
  CHECK(codec::unpack_codes(std::vector<uint8_t>({0xD1, 0x00}), 3, 3) ==
        std::vector<uint8_t>({1, 2, 3}));
}

TEST_CASE("packing agrees with a bit-at-a-time reference over random inputs") {
  Rng rng(50);
  for (int trial = 0; trial < 500; ++trial) {
    const int bits = 1 + static_cast<int>(rng.next_below(8));
    const size_t n = rng.next_below(40);
    std::vector<uint8_t> codes(n);
    for (uint8_t& c : codes) c = static_cast<uint8_t>(rng.next_below(1u << bits));

    std::vector<uint8_t> packed = codec::pack_codes(codes, bits);
    CHECK(packed == oracle::pack_bits(codes, bits));
    CHECK(codec::unpack_codes(packed, n, bits) == codes);
  }
}

TEST_CASE("pack rejects out-of-range codes; unpack rejects short buffers") {
  CHECK_THROWS_AS(codec::pack_codes(std::vector<uint8_t>{8}, 3), Error);
  CHECK_THROWS_AS(codec::unpack_codes(std::vector<uint8_t>{0xFF}, 3, 3), Error);
}

TEST_CASE("nonzero padding bits are rejected on decode") {
  // 4 codes at 3 bits fill 12 of 16 payload bits; the top 4 are padding.
  Tensor3<float> t(1, 1, 4);
  t.data = {0.0f, 1.0f, 2.0f, 3.0f};
  CompressedActivation small = naive_quantize(t, 3, 4);
  std::vector<uint8_t> small_blob = codec::encode_blob(small);
  small_blob.back() |= 0x80;
  CHECK_THROWS_AS(codec::decode_blob(small_blob), Error);
}

TEST_CASE("blob round trips preserve every field and byte") {
  Rng rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    CompressedActivation c = random_compressed(rng);
    std::vector<uint8_t> blob = codec::encode_blob(c);
    CHECK(blob.size() == codec::encoded_size(c));

    CompressedActivation back = codec::decode_blob(blob);
    CHECK(same_compressed(c, back));
    CHECK(codec::encode_blob(back) == blob);
  }
}

TEST_CASE("blob size follows the closed-form accounting") {
  Rng rng(53);
  CompressedActivation c = random_compressed(rng);
  std::vector<uint8_t> blob = codec::encode_blob(c);

  size_t metas = 0;
  for (const TileMeta& m : c.metas) metas += m.transformed ? 11 : 9;
  size_t payload = 0;
  for (uint8_t b : c.token_bits)
    payload += c.tiles_per_token() * ((c.tile_size * b + 7) / 8);
  const size_t want = 22 + (c.tokens() + 7) / 8 + metas + payload;
  CHECK(blob.size() == want);
}

TEST_CASE("decode rejects bad magic, bad version, and truncation") {
  Rng rng(54);
  CompressedActivation c = random_compressed(rng);
  std::vector<uint8_t> blob = codec::encode_blob(c);

  for (size_t i = 0; i < 4; ++i) {
    std::vector<uint8_t> bad = blob;
    bad[i] ^= 0xFF;
    CHECK_THROWS_WITH_AS(codec::decode_blob(bad), doctest::Contains("magic"), Error);
  }

  std::vector<uint8_t> bad_version = blob;
  bad_version[4] = 99;
  CHECK_THROWS_WITH_AS(codec::decode_blob(bad_version), doctest::Contains("version"), Error);

  for (size_t cut : {3u, 10u, 21u, 22u, 40u}) {
    if (cut >= blob.size()) continue;
    std::vector<uint8_t> truncated(blob.begin(), blob.begin() + cut);
    CHECK_THROWS_AS(codec::decode_blob(truncated), Error);
  }

  std::vector<uint8_t> trailing = blob;
  trailing.push_back(0);
  CHECK_THROWS_AS(codec::decode_blob(trailing), Error);
}

TEST_CASE("decode validates geometry fields against each other") {
  Rng rng(55);
  CompressedActivation c = random_compressed(rng);
  std::vector<uint8_t> blob = codec::encode_blob(c);

  std::vector<uint8_t> bad_tile = blob;
  bad_tile[17] = 0;  // tile size u16
  bad_tile[18] = 0;
  CHECK_THROWS_AS(codec::decode_blob(bad_tile), Error);

  std::vector<uint8_t> bad_flags = blob;
  bad_flags[22 - 1] |= 0xF0;  // undefined flag bits
  CHECK_THROWS_AS(codec::decode_blob(bad_flags), Error);
}

TEST_CASE("compressed blobs beat raw 32-bit storage by a wide margin") {
  QuantConfig cfg;
  cfg.tile_size = 64;
  cfg.high_bit_frac = 0.8;
  Rng rng(56);
  Tensor3<float> t(2, 64, 2048);
  for (float& v : t.data) v = static_cast<float>(rng.gaussian());

  CompressedActivation c = quantize_activation(t, cfg);
  std::vector<uint8_t> blob = codec::encode_blob(c);
  const size_t raw = t.size() * 4;
  CHECK(raw >= blob.size() * 5);
}
TEST_SUITE_END();
