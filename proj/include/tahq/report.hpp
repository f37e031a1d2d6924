// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tahq/measure.hpp"
#include "tahq/pipeline.hpp"
#include "tahq/quantizer.hpp"

namespace tahq::harness {

struct CompressionReport {
  // Payload code bits divided by element count (headers and metadata
  // excluded; the accounting identity for those lives in the codec).
  double bits_per_element = 0.0;
  // Raw fp32 bytes divided by full blob bytes, metadata included.
  double ratio_vs_fp32 = 0.0;
  // Fraction of tiles that took the outlier-suppression transform.
  double transform_fraction = 0.0;
  // Wall-clock codec throughput, elements per second.
  double encode_elems_per_s = 0.0;
  double decode_elems_per_s = 0.0;
  uint64_t raw_bytes = 0;
  uint64_t blob_bytes = 0;
};

// `timing_budget_s` bounds how long each throughput loop runs.
CompressionReport measure_compression(const Tensor3<float>& acts, const QuantConfig& cfg,
                                      double timing_budget_s = 0.5);

struct BenchCase {
  std::string name;
  CompressionReport report;
};

// Runs the compressor over a smooth gaussian activation tensor and over one
// with a handful of channels scaled far out of range.
std::vector<BenchCase> run_bench(uint32_t batch, uint32_t seq, uint32_t channels,
                                 const QuantConfig& cfg, uint64_t seed);

void write_loss_csv(const std::string& path, const std::vector<pipeline::StepRecord>& records);
void write_validation_csv(const std::string& path, const ValidationReport& report);
void write_bench_csv(const std::string& path, const std::vector<BenchCase>& cases);

}  // namespace tahq::harness
