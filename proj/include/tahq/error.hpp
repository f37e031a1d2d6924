// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tahq {

enum class Errc {
  invalid_input,
  invalid_config,
  invalid_tile,
  unsupported_tile_size,
  code_out_of_range,
  corrupt_payload,
  truncated,
  bad_magic,
  bad_version,
  shape_mismatch,
  divergence,
  undefined_ratio,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace tahq
