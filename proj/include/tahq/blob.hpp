// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "tahq/quantizer.hpp"

namespace tahq::codec {

// Wire layout, version 1, all integers little-endian:
//   magic "TAHQ" | version u8 | batch u32 | seq u32 | channels u32
//   | tile_size u16 | bits_hi u8 | bits_lo u8 | flags u8
// flags bit 0 = adaptive allocation, bit 1 = hadamard.
// Then one bit per token (1 = bits_hi, flat token order, LSB-first, zero
// padded to a byte), then per tile in (batch, seq, tile) order:
//   flag u8 | offset f32 | scale f32 | pivot u16 present only when flag = 1
// and finally the packed payload, every tile padded to a byte boundary.
inline constexpr char kBlobMagic[4] = {'T', 'A', 'H', 'Q'};
inline constexpr uint8_t kBlobVersion = 1;

size_t encoded_size(const CompressedActivation& c);
std::vector<uint8_t> encode_blob(const CompressedActivation& c);
CompressedActivation decode_blob(std::span<const uint8_t> bytes);

}  // namespace tahq::codec
