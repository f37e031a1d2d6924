// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include "tahq/blob.hpp"

#include <cmath>
#include <cstring>

#include "tahq/packing.hpp"

namespace tahq::codec {

namespace {

struct Writer {
  std::vector<uint8_t>& out;

  void bytes(const void* p, size_t n) {
    const uint8_t* b = static_cast<const uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  void u8(uint8_t v) { out.push_back(v); }
  void u16(uint16_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
};

struct Reader {
  const uint8_t* p;
  size_t left;

  void need(size_t n, const char* what) {
    if (left < n) fail(Errc::truncated, std::string("decode_blob: truncated ") + what);
  }
  const uint8_t* take(size_t n, const char* what) {
    need(n, what);
    const uint8_t* r = p;
    p += n;
    left -= n;
    return r;
  }
  uint8_t u8(const char* what) { return *take(1, what); }
  uint16_t u16(const char* what) {
    const uint8_t* b = take(2, what);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
  }
  uint32_t u32(const char* what) {
    const uint8_t* b = take(4, what);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  }
  float f32(const char* what) {
    uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

size_t bitmap_bytes(size_t tokens) { return (tokens + 7) / 8; }

void check_encodable(const CompressedActivation& c) {
  if (c.batch == 0 || c.seq == 0 || c.channels == 0)
    fail(Errc::invalid_input, "encode_blob: empty shape");
  if (c.tile_size < 2 || !is_pow2(c.tile_size))
    fail(Errc::unsupported_tile_size, "encode_blob: bad tile size");
  if (c.channels % c.tile_size != 0)
    fail(Errc::shape_mismatch, "encode_blob: tile size does not divide channels");
  if (c.bits_lo < 2 || c.bits_hi < c.bits_lo || c.bits_hi > 8)
    fail(Errc::invalid_input, "encode_blob: bad bit widths");
  if (c.token_bits.size() != c.tokens())
    fail(Errc::shape_mismatch, "encode_blob: token bit map size mismatch");
  for (uint8_t b : c.token_bits)
    if (b != c.bits_hi && b != c.bits_lo)
      fail(Errc::invalid_input, "encode_blob: token width outside configured pair");
  if (c.metas.size() != c.tile_count())
    fail(Errc::shape_mismatch, "encode_blob: tile metadata count mismatch");
  for (const TileMeta& m : c.metas) {
    if (m.pivot >= c.tile_size) fail(Errc::invalid_input, "encode_blob: pivot out of range");
    if (!(std::isfinite(m.offset) && std::isfinite(m.scale)) || m.scale < 0.0f)
      fail(Errc::invalid_input, "encode_blob: bad offset/scale");
  }
  size_t expect = 0;
  for (size_t tok = 0; tok < c.tokens(); ++tok)
    expect += c.tiles_per_token() * packed_size(c.tile_size, c.token_bits[tok]);
  if (c.payload.size() != expect)
    fail(Errc::shape_mismatch, "encode_blob: payload size mismatch");
}

}  // namespace

size_t encoded_size(const CompressedActivation& c) {
  size_t metas = 0;
  for (const TileMeta& m : c.metas) metas += m.transformed ? 11 : 9;
  return 22 + bitmap_bytes(c.tokens()) + metas + c.payload.size();
}

std::vector<uint8_t> encode_blob(const CompressedActivation& c) {
  check_encodable(c);

  std::vector<uint8_t> out;
  out.reserve(encoded_size(c));
  Writer w{out};

  w.bytes(kBlobMagic, 4);
  w.u8(kBlobVersion);
  w.u32(c.batch);
  w.u32(c.seq);
  w.u32(c.channels);
  w.u16(c.tile_size);
  w.u8(c.bits_hi);
  w.u8(c.bits_lo);
  w.u8(static_cast<uint8_t>((c.adaptive_alloc ? 1 : 0) | (c.hadamard ? 2 : 0)));

  std::vector<uint8_t> bitmap(bitmap_bytes(c.tokens()), 0);
  for (size_t t = 0; t < c.tokens(); ++t)
    if (c.token_bits[t] == c.bits_hi) bitmap[t >> 3] |= static_cast<uint8_t>(1u << (t & 7));
  w.bytes(bitmap.data(), bitmap.size());

  for (const TileMeta& m : c.metas) {
    w.u8(m.transformed ? 1 : 0);
    w.f32(m.offset);
    w.f32(m.scale);
    if (m.transformed) w.u16(m.pivot);
  }

  w.bytes(c.payload.data(), c.payload.size());
  return out;
}

CompressedActivation decode_blob(std::span<const uint8_t> bytes) {
  Reader r{bytes.data(), bytes.size()};

  const uint8_t* magic = r.take(4, "magic");
  if (std::memcmp(magic, kBlobMagic, 4) != 0) fail(Errc::bad_magic, "decode_blob: bad magic");
  uint8_t version = r.u8("version");
  if (version != kBlobVersion)
    fail(Errc::bad_version, "decode_blob: unsupported version " + std::to_string(version));

  CompressedActivation c;
  c.batch = r.u32("batch");
  c.seq = r.u32("seq");
  c.channels = r.u32("channels");
  c.tile_size = r.u16("tile size");
  c.bits_hi = r.u8("bits_hi");
  c.bits_lo = r.u8("bits_lo");
  uint8_t flags = r.u8("flags");
  c.adaptive_alloc = (flags & 1) != 0;
  c.hadamard = (flags & 2) != 0;
  if (flags & ~3u) fail(Errc::corrupt_payload, "decode_blob: unknown flag bits");

  if (c.batch == 0 || c.seq == 0 || c.channels == 0)
    fail(Errc::corrupt_payload, "decode_blob: empty shape");
  if (c.tile_size < 2 || !is_pow2(c.tile_size) || c.channels % c.tile_size != 0)
    fail(Errc::corrupt_payload, "decode_blob: bad tile geometry");
  if (c.bits_lo < 2 || c.bits_hi < c.bits_lo || c.bits_hi > 8)
    fail(Errc::corrupt_payload, "decode_blob: bad bit widths");
  // An honest header never describes more than ~2 bits per element of input,
  // so element counts wildly beyond the buffer are rejected before any
  // allocation is sized from them.
  uint64_t elems = static_cast<uint64_t>(c.batch) * c.seq;
  if (elems > (uint64_t{1} << 40) / c.channels)
    fail(Errc::corrupt_payload, "decode_blob: implausible shape");
  elems *= c.channels;
  if (elems / 8 > bytes.size())
    fail(Errc::truncated, "decode_blob: header describes more data than present");

  const size_t tokens = c.tokens();
  const uint8_t* bitmap = r.take(bitmap_bytes(tokens), "token bitmap");
  c.token_bits.resize(tokens);
  for (size_t t = 0; t < tokens; ++t) {
    bool hi = (bitmap[t >> 3] >> (t & 7)) & 1;
    c.token_bits[t] = hi ? c.bits_hi : c.bits_lo;
  }
  if (tokens % 8 != 0) {
    uint8_t pad = static_cast<uint8_t>(bitmap[bitmap_bytes(tokens) - 1] >> (tokens & 7));
    if (pad != 0) fail(Errc::corrupt_payload, "decode_blob: nonzero bitmap padding");
  }

  const size_t tile_count = c.tile_count();
  c.metas.resize(tile_count);
  for (size_t i = 0; i < tile_count; ++i) {
    TileMeta& m = c.metas[i];
    uint8_t flag = r.u8("tile flag");
    if (flag > 1) fail(Errc::corrupt_payload, "decode_blob: bad tile flag");
    m.transformed = flag == 1;
    m.offset = r.f32("tile offset");
    m.scale = r.f32("tile scale");
    if (!(std::isfinite(m.offset) && std::isfinite(m.scale)) || m.scale < 0.0f)
      fail(Errc::corrupt_payload, "decode_blob: bad offset/scale");
    if (m.transformed) {
      m.pivot = r.u16("tile pivot");
      if (m.pivot >= c.tile_size) fail(Errc::corrupt_payload, "decode_blob: pivot out of range");
    }
    m.bits = c.token_bits[i / c.tiles_per_token()];
  }

  size_t payload_bytes = 0;
  for (size_t tok = 0; tok < tokens; ++tok)
    payload_bytes += c.tiles_per_token() * packed_size(c.tile_size, c.token_bits[tok]);
  const uint8_t* payload = r.take(payload_bytes, "payload");
  c.payload.assign(payload, payload + payload_bytes);
  if (r.left != 0) fail(Errc::corrupt_payload, "decode_blob: trailing bytes");

  // Padding bits inside each tile segment must be zero.
  size_t cursor = 0;
  size_t tile = 0;
  for (size_t tok = 0; tok < tokens; ++tok) {
    int bits = c.token_bits[tok];
    size_t seg = packed_size(c.tile_size, bits);
    unsigned used = static_cast<unsigned>((static_cast<size_t>(c.tile_size) * bits) & 7);
    for (size_t ti = 0; ti < c.tiles_per_token(); ++ti, ++tile) {
      if (used != 0) {
        uint8_t tail = c.payload[cursor + seg - 1];
        if (static_cast<uint8_t>(tail >> used) != 0)
          fail(Errc::corrupt_payload, "decode_blob: nonzero payload padding");
      }
      cursor += seg;
    }
  }
  return c;
}

}  // namespace tahq::codec
