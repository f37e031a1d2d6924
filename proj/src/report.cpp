// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include "tahq/report.hpp"

#include <chrono>
#include <fstream>

#include "tahq/blob.hpp"
#include "tahq/rng.hpp"

namespace tahq::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

CompressionReport measure_compression(const Tensor3<float>& acts, const QuantConfig& cfg,
                                      double timing_budget_s) {
  CompressionReport rep;
  rep.raw_bytes = acts.size() * sizeof(float);

  CompressedActivation comp = quantize_activation(acts, cfg);
  std::vector<uint8_t> blob = codec::encode_blob(comp);
  if (blob.size() != codec::encoded_size(comp))
    fail(Errc::corrupt_payload, "compression report: blob size breaks the accounting identity");
  rep.blob_bytes = blob.size();
  rep.bits_per_element =
      static_cast<double>(comp.payload_code_bits()) / static_cast<double>(acts.size());
  rep.ratio_vs_fp32 = static_cast<double>(rep.raw_bytes) / static_cast<double>(rep.blob_bytes);

  size_t transformed = 0;
  for (const TileMeta& m : comp.metas)
    if (m.transformed) ++transformed;
  rep.transform_fraction =
      comp.metas.empty() ? 0.0 : static_cast<double>(transformed) / comp.metas.size();

  // Repeat until the budget has elapsed so small tensors still get a stable
  // timing.
  const double budget = timing_budget_s;
  const double elems = static_cast<double>(acts.size());
  size_t reps = 0;
  Clock::time_point start = Clock::now();
  double elapsed = 0.0;
  do {
    CompressedActivation c = quantize_activation(acts, cfg);
    std::vector<uint8_t> b = codec::encode_blob(c);
    ++reps;
    elapsed = seconds_since(start);
  } while (elapsed < budget);
  rep.encode_elems_per_s = elems * reps / elapsed;

  reps = 0;
  start = Clock::now();
  do {
    CompressedActivation c = codec::decode_blob(blob);
    Tensor3<float> back = dequantize_activation<float>(c);
    ++reps;
    elapsed = seconds_since(start);
  } while (elapsed < budget);
  rep.decode_elems_per_s = elems * reps / elapsed;
  return rep;
}

std::vector<BenchCase> run_bench(uint32_t batch, uint32_t seq, uint32_t channels,
                                 const QuantConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  Tensor3<float> smooth(batch, seq, channels);
  for (float& v : smooth.data) v = static_cast<float>(rng.gaussian());

  Tensor3<float> spiky = smooth;
  const uint32_t stride = 128;
  const float gain = 20.0f;
  for (size_t tok = 0; tok < spiky.tokens(); ++tok) {
    float* p = spiky.token_ptr(tok);
    for (uint32_t c = 0; c < channels; c += stride) p[c] *= gain;
  }

  std::vector<BenchCase> out;
  out.push_back({"gaussian", measure_compression(smooth, cfg)});
  out.push_back({"outlier", measure_compression(spiky, cfg)});
  return out;
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail(Errc::io_error, "cannot open " + path + " for writing");
  return f;
}

}  // namespace

void write_loss_csv(const std::string& path, const std::vector<pipeline::StepRecord>& records) {
  std::ofstream f = open_csv(path);
  f << "step,loss,bits_fw_mean,bytes_fw,bytes_bw\n";
  for (const pipeline::StepRecord& r : records)
    f << r.step << ',' << r.loss << ',' << r.bits_fw_mean << ',' << r.bytes_fw << ','
      << r.bytes_bw << '\n';
  if (!f) fail(Errc::io_error, "short write to " + path);
}

void write_validation_csv(const std::string& path, const ValidationReport& report) {
  std::ofstream f = open_csv(path);
  f << "step,ratio,loss\n";
  for (const ValidationRow& r : report.rows)
    f << r.step << ',' << r.ratio << ',' << r.loss << '\n';
  if (!f) fail(Errc::io_error, "short write to " + path);
}

void write_bench_csv(const std::string& path, const std::vector<BenchCase>& cases) {
  std::ofstream f = open_csv(path);
  f << "case,bits_per_element,ratio_vs_fp32,transform_fraction,encode_elems_per_s,"
       "decode_elems_per_s\n";
  for (const BenchCase& c : cases)
    f << c.name << ',' << c.report.bits_per_element << ',' << c.report.ratio_vs_fp32 << ','
      << c.report.transform_fraction << ',' << c.report.encode_elems_per_s << ','
      << c.report.decode_elems_per_s << '\n';
  if (!f) fail(Errc::io_error, "short write to " + path);
}

}  // namespace tahq::harness
