// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tahq/tensor.hpp"

namespace tahq::io {

// Raw tensor container, little-endian:
//   magic "TAHT" | version u8 | dtype u8 | batch u32 | seq u32 | channels u32
//   | values row-major
// dtype 0 = 32-bit real (4 bytes/value), dtype 1 = 64-bit real (8 bytes/value).
inline constexpr char kTensorMagic[4] = {'T', 'A', 'H', 'T'};
inline constexpr uint8_t kTensorVersion = 1;
inline constexpr uint8_t kDtypeF32 = 0;
inline constexpr uint8_t kDtypeF64 = 1;

using AnyTensor = std::variant<Tensor3<float>, Tensor3<double>>;

std::vector<uint8_t> tensor_to_bytes(const Tensor3<float>& t);
std::vector<uint8_t> tensor_to_bytes(const Tensor3<double>& t);
AnyTensor tensor_from_bytes(std::span<const uint8_t> bytes);

// Typed accessor; throws Errc::invalid_input when the stored dtype differs.
template <class T>
Tensor3<T> tensor_from_bytes_as(std::span<const uint8_t> bytes);

void save_tensor(const std::string& path, const AnyTensor& t);
AnyTensor load_tensor(const std::string& path);

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const uint8_t> bytes);

// Model checkpoint: magic "TAHM" | version u8 | count u8 | `count` tensor
// records in the container format above.
inline constexpr char kCheckpointMagic[4] = {'T', 'A', 'H', 'M'};
inline constexpr uint8_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const std::vector<Tensor3<double>>& tensors);
std::vector<Tensor3<double>> load_checkpoint(const std::string& path);

}  // namespace tahq::io
