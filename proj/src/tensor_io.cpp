// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include "tahq/tensor_io.hpp"

#include <cstring>
#include <fstream>

namespace tahq::io {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

template <class T>
std::vector<uint8_t> to_bytes_impl(const Tensor3<T>& t, uint8_t dtype) {
  require_nonempty(t, "tensor_to_bytes");
  std::vector<uint8_t> out;
  out.reserve(18 + t.size() * sizeof(T));
  out.insert(out.end(), kTensorMagic, kTensorMagic + 4);
  out.push_back(kTensorVersion);
  out.push_back(dtype);
  put_u32(out, t.batch);
  put_u32(out, t.seq);
  put_u32(out, t.channels);
  const uint8_t* raw = reinterpret_cast<const uint8_t*>(t.data.data());
  out.insert(out.end(), raw, raw + t.size() * sizeof(T));
  return out;
}

template <class T>
Tensor3<T> values_from(std::span<const uint8_t> bytes, uint32_t b, uint32_t s, uint32_t c) {
  Tensor3<T> t(b, s, c);
  const size_t want = t.size() * sizeof(T);
  if (bytes.size() != want)
    fail(bytes.size() < want ? Errc::truncated : Errc::corrupt_payload,
         "tensor_from_bytes: value section size mismatch");
  std::memcpy(t.data.data(), bytes.data(), want);
  return t;
}

struct TensorHeader {
  uint8_t dtype;
  uint32_t batch, seq, channels;
};

TensorHeader parse_header(std::span<const uint8_t> bytes) {
  if (bytes.size() < 18) fail(Errc::truncated, "tensor_from_bytes: short header");
  if (std::memcmp(bytes.data(), kTensorMagic, 4) != 0)
    fail(Errc::bad_magic, "tensor_from_bytes: bad magic");
  if (bytes[4] != kTensorVersion)
    fail(Errc::bad_version, "tensor_from_bytes: unsupported version " + std::to_string(bytes[4]));
  TensorHeader h;
  h.dtype = bytes[5];
  if (h.dtype != kDtypeF32 && h.dtype != kDtypeF64)
    fail(Errc::corrupt_payload, "tensor_from_bytes: unknown dtype " + std::to_string(h.dtype));
  h.batch = get_u32(bytes.data() + 6);
  h.seq = get_u32(bytes.data() + 10);
  h.channels = get_u32(bytes.data() + 14);
  if (h.batch == 0 || h.seq == 0 || h.channels == 0)
    fail(Errc::corrupt_payload, "tensor_from_bytes: empty shape");
  uint64_t tokens = static_cast<uint64_t>(h.batch) * h.seq;
  if (tokens > (uint64_t{1} << 40) / h.channels)
    fail(Errc::corrupt_payload, "tensor_from_bytes: implausible shape");
  return h;
}

}  // namespace

std::vector<uint8_t> tensor_to_bytes(const Tensor3<float>& t) { return to_bytes_impl(t, kDtypeF32); }
std::vector<uint8_t> tensor_to_bytes(const Tensor3<double>& t) { return to_bytes_impl(t, kDtypeF64); }

AnyTensor tensor_from_bytes(std::span<const uint8_t> bytes) {
  TensorHeader h = parse_header(bytes);
  std::span<const uint8_t> rest = bytes.subspan(18);
  if (h.dtype == kDtypeF32) return values_from<float>(rest, h.batch, h.seq, h.channels);
  return values_from<double>(rest, h.batch, h.seq, h.channels);
}

template <class T>
Tensor3<T> tensor_from_bytes_as(std::span<const uint8_t> bytes) {
  AnyTensor any = tensor_from_bytes(bytes);
  if (!std::holds_alternative<Tensor3<T>>(any))
    fail(Errc::invalid_input, "tensor_from_bytes: stored dtype does not match request");
  return std::get<Tensor3<T>>(std::move(any));
}

template Tensor3<float> tensor_from_bytes_as<float>(std::span<const uint8_t>);
template Tensor3<double> tensor_from_bytes_as<double>(std::span<const uint8_t>);

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open for reading: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(Errc::io_error, "read failed: " + path);
  return bytes;
}

void write_file(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_error, "cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

void save_tensor(const std::string& path, const AnyTensor& t) {
  std::vector<uint8_t> bytes =
      std::visit([](const auto& v) { return tensor_to_bytes(v); }, t);
  write_file(path, bytes);
}

AnyTensor load_tensor(const std::string& path) {
  std::vector<uint8_t> bytes = read_file(path);
  return tensor_from_bytes(bytes);
}

void save_checkpoint(const std::string& path, const std::vector<Tensor3<double>>& tensors) {
  if (tensors.size() > 255) fail(Errc::invalid_input, "save_checkpoint: too many tensors");
  std::vector<uint8_t> out;
  out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + 4);
  out.push_back(kCheckpointVersion);
  out.push_back(static_cast<uint8_t>(tensors.size()));
  for (const auto& t : tensors) {
    std::vector<uint8_t> rec = tensor_to_bytes(t);
    out.insert(out.end(), rec.begin(), rec.end());
  }
  write_file(path, out);
}

std::vector<Tensor3<double>> load_checkpoint(const std::string& path) {
  std::vector<uint8_t> bytes = read_file(path);
  if (bytes.size() < 6) fail(Errc::truncated, "load_checkpoint: short header");
  if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    fail(Errc::bad_magic, "load_checkpoint: bad magic");
  if (bytes[4] != kCheckpointVersion)
    fail(Errc::bad_version, "load_checkpoint: unsupported version");
  size_t count = bytes[5];
  std::vector<Tensor3<double>> tensors;
  tensors.reserve(count);
  std::span<const uint8_t> rest(bytes.data() + 6, bytes.size() - 6);
  for (size_t i = 0; i < count; ++i) {
    if (rest.size() < 18) fail(Errc::truncated, "load_checkpoint: truncated record");
    TensorHeader h = parse_header(rest);
    size_t width = h.dtype == kDtypeF32 ? 4 : 8;
    size_t rec = 18 + static_cast<size_t>(h.batch) * h.seq * h.channels * width;
    if (rest.size() < rec) fail(Errc::truncated, "load_checkpoint: truncated record");
    tensors.push_back(tensor_from_bytes_as<double>(rest.subspan(0, rec)));
    rest = rest.subspan(rec);
  }
  if (!rest.empty()) fail(Errc::corrupt_payload, "load_checkpoint: trailing bytes");
  return tensors;
}

}  // namespace tahq::io
