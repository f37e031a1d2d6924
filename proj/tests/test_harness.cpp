// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include "tahq/measure.hpp"

#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "tahq/report.hpp"
#include "tahq/rng.hpp"
#include "tahq/tensor_io.hpp"

using namespace tahq;

namespace {

pipeline::SimConfig tiny_config() {
  pipeline::SimConfig cfg;
  cfg.batch = 2;
  cfg.seq = 4;
  cfg.channels = 16;
  cfg.d_in = 3;
  cfg.d_out = 2;
  cfg.quant.tile_size = 8;
  cfg.steps = 20;
  cfg.dataset_batches = 4;
  return cfg;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("tensor files round trip bit for bit in both precisions") {
  Rng rng(70);
  Tensor3<float> tf(2, 3, 5);
  for (float& v : tf.data) v = static_cast<float>(rng.gaussian());
  std::vector<uint8_t> bytes = io::tensor_to_bytes(tf);
  CHECK(bytes.size() == 18 + tf.size() * 4);
  Tensor3<float> backf = io::tensor_from_bytes_as<float>(bytes);
  CHECK(backf.same_shape(tf));
  CHECK(backf.data == tf.data);

  Tensor3<double> td(1, 4, 7);
  for (double& v : td.data) v = rng.gaussian();
  std::vector<uint8_t> bytes64 = io::tensor_to_bytes(td);
  CHECK(bytes64.size() == 18 + td.size() * 8);
  Tensor3<double> backd = io::tensor_from_bytes_as<double>(bytes64);
  CHECK(backd.data == td.data);

  const std::string path = temp_path("tahq_roundtrip.taht");
  io::save_tensor(path, tf);
  io::AnyTensor loaded = io::load_tensor(path);
  CHECK(std::get<Tensor3<float>>(loaded).data == tf.data);
  std::filesystem::remove(path);
}

TEST_CASE("tensor decode rejects malformed headers") {
  Tensor3<float> t(1, 1, 2);
  std::vector<uint8_t> bytes = io::tensor_to_bytes(t);

  std::vector<uint8_t> bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(io::tensor_from_bytes(bad_magic), Error);

  std::vector<uint8_t> bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(io::tensor_from_bytes(bad_version), Error);

  std::vector<uint8_t> bad_dtype = bytes;
  bad_dtype[5] = 7;
  CHECK_THROWS_AS(io::tensor_from_bytes(bad_dtype), Error);

  std::vector<uint8_t> cut(bytes.begin(), bytes.end() - 1);
  CHECK_THROWS_AS(io::tensor_from_bytes(cut), Error);

  std::vector<uint8_t> trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(io::tensor_from_bytes(trailing), Error);
}

TEST_CASE("checkpoints store and recover parameter tensors") {
  Rng rng(71);
  std::vector<Tensor3<double>> tensors;
  tensors.emplace_back(1, 2, 3);
  tensors.emplace_back(1, 1, 4);
  for (auto& t : tensors)
    for (double& v : t.data) v = rng.gaussian();

  const std::string path = temp_path("tahq_ckpt.tahm");
  io::save_checkpoint(path, tensors);
  std::vector<Tensor3<double>> back = io::load_checkpoint(path);
  REQUIRE(back.size() == tensors.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].same_shape(tensors[i]));
    CHECK(back[i].data == tensors[i].data);
  }
  std::filesystem::remove(path);
}

TEST_CASE("relative gradient error is zero for passthrough and one for zeroing") {
  pipeline::SimConfig cfg = tiny_config();
  cfg.validate();
  pipeline::PipelineModel model = pipeline::init_student(cfg);
  std::vector<pipeline::Batch> data = pipeline::make_dataset(cfg);

  CHECK(harness::measure_step_error(model, data[0], cfg, pipeline::WireMode::passthrough) ==
        0.0);
  CHECK(harness::measure_step_error(model, data[0], cfg, pipeline::WireMode::zeroed) == 1.0);
  CHECK(harness::measure_fullbatch_error(model, data, cfg, pipeline::WireMode::passthrough) ==
        0.0);
  CHECK(harness::measure_fullbatch_error(model, data, cfg, pipeline::WireMode::zeroed) == 1.0);
}

TEST_CASE("default compression keeps the gradient error ratio under one") {
  pipeline::SimConfig cfg = tiny_config();
  cfg.validate();
  pipeline::PipelineModel model = pipeline::init_student(cfg);
  std::vector<pipeline::Batch> data = pipeline::make_dataset(cfg);

  const double step = harness::measure_step_error(model, data[0], cfg,
                                                  pipeline::WireMode::quantized);
  CHECK(step >= 0.0);
  CHECK(step < 1.0);
}

TEST_CASE("a zero reference gradient makes the ratio undefined") {
  pipeline::SimConfig cfg = tiny_config();
  cfg.validate();
  pipeline::PipelineModel model = pipeline::init_student(cfg);
  std::vector<double> zeros(model.param_count(), 0.0);
  pipeline::assign_params(model, zeros);

  pipeline::Batch batch;
  batch.inputs = Tensor3<double>(cfg.batch, cfg.seq, cfg.d_in);
  batch.targets = Tensor3<double>(cfg.batch, cfg.seq, cfg.d_out);
  Rng rng(72);
  for (double& v : batch.inputs.data) v = rng.gaussian();

  CHECK_THROWS_AS(
      harness::measure_step_error(model, batch, cfg, pipeline::WireMode::quantized), Error);
}

TEST_CASE("validation trajectory reports sane summary statistics") {
  pipeline::SimConfig cfg = tiny_config();
  cfg.steps = 10;
  harness::ValidationReport rep = harness::run_validation(cfg, harness::ValidateMode::step);
  REQUIRE(rep.rows.size() == 10);
  for (const harness::ValidationRow& r : rep.rows) {
    CHECK(r.ratio >= 0.0);
    CHECK(r.ratio <= rep.max_ratio);
  }
  CHECK(rep.median_ratio <= rep.max_ratio);
  CHECK(rep.implied_delta == doctest::Approx(1.0 - rep.max_ratio));
}

TEST_CASE("compression report accounting matches the blob layout exactly") {
  QuantConfig cfg;
  cfg.tile_size = 64;
  cfg.high_bit_frac = 1.0;
  cfg.hadamard = false;

  Rng rng(73);
  Tensor3<float> t(2, 10, 256);
  for (float& v : t.data) v = static_cast<float>(rng.gaussian());

  harness::CompressionReport rep = harness::measure_compression(t, cfg, 0.01);
  CHECK(rep.bits_per_element == 4.0);

  // Without transforms every tile carries 9 metadata bytes; closed form:
  // header 22 + bitmap ceil(20/8) + 80 tiles * 9 + 80 tiles * 32 payload.
  const size_t tiles = (2 * 10 * 256) / 64;
  const size_t want = 22 + 3 + tiles * 9 + tiles * 32;
  CHECK(rep.blob_bytes == want);
  CHECK(rep.raw_bytes == t.size() * 4);
  CHECK(rep.transform_fraction == 0.0);
  CHECK(rep.encode_elems_per_s > 0.0);
  CHECK(rep.decode_elems_per_s > 0.0);
}

TEST_CASE("the forward payload hits its advertised blended width") {
  QuantConfig cfg;
  cfg.tile_size = 64;
  cfg.high_bit_frac = 0.8;

  Rng rng(74);
  Tensor3<float> t(2, 80, 2048);  // token count divisible by 5
  for (float& v : t.data) v = static_cast<float>(rng.gaussian());

  harness::CompressionReport rep = harness::measure_compression(t, cfg, 0.01);
  CHECK(rep.bits_per_element == 3.8);
  CHECK(rep.ratio_vs_fp32 >= 5.0);
}

TEST_CASE("benchmark cases show the transform reacting to injected outliers") {
  QuantConfig cfg;
  cfg.tile_size = 64;
  // Tiny budget keeps the suite fast; accounting fields are exact either way.
  Rng rng(75);
  Tensor3<float> smooth(2, 8, 512);
  for (float& v : smooth.data) v = static_cast<float>(rng.gaussian());
  harness::CompressionReport plain = harness::measure_compression(smooth, cfg, 0.01);

  Tensor3<float> spiky = smooth;
  for (size_t tok = 0; tok < spiky.tokens(); ++tok)
    for (uint32_t c = 0; c < 512; c += 128) spiky.token_ptr(tok)[c] *= 20.0f;
  harness::CompressionReport hot = harness::measure_compression(spiky, cfg, 0.01);

  CHECK(plain.transform_fraction < 0.05);
  CHECK(hot.transform_fraction > plain.transform_fraction);
}

TEST_CASE("csv writers emit the advertised schemas") {
  std::vector<pipeline::StepRecord> records{{0, 0.5, 3.8125, 100, 120},
                                            {1, 0.25, 3.8125, 100, 120}};
  const std::string loss_path = temp_path("tahq_loss.csv");
  harness::write_loss_csv(loss_path, records);
  std::ifstream f(loss_path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "step,loss,bits_fw_mean,bytes_fw,bytes_bw");
  std::string row;
  std::getline(f, row);
  CHECK(row == "0,0.5,3.8125,100,120");
  f.close();
  std::filesystem::remove(loss_path);

  harness::ValidationReport rep;
  rep.rows = {{0, 0.125, 1.0}};
  rep.max_ratio = 0.125;
  rep.median_ratio = 0.125;
  rep.implied_delta = 0.875;
  const std::string val_path = temp_path("tahq_val.csv");
  harness::write_validation_csv(val_path, rep);
  std::ifstream v(val_path);
  std::getline(v, header);
  CHECK(header == "step,ratio,loss");
  v.close();
  std::filesystem::remove(val_path);
}
TEST_SUITE_END();
