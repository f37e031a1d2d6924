// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <cstdlib>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "tahq/blob.hpp"
#include "tahq/kernels.hpp"
#include "tahq/measure.hpp"
#include "tahq/pipeline.hpp"
#include "tahq/quantizer.hpp"
#include "tahq/report.hpp"
#include "tahq/tensor_io.hpp"

namespace {

using namespace tahq;

pipeline::ExecMode exec_from_env() {
  const char* v = std::getenv("TAHQ_THREADS");
  if (v == nullptr || *v == '\0') return pipeline::ExecMode::sequential;
  const long n = std::strtol(v, nullptr, 10);
  return n >= 2 ? pipeline::ExecMode::two_worker : pipeline::ExecMode::sequential;
}

pipeline::ChannelKind channel_from_env() {
  const char* v = std::getenv("TAHQ_CHANNEL");
  if (v != nullptr && std::string(v) == "socket") return pipeline::ChannelKind::socket;
  return pipeline::ChannelKind::queue;
}

struct ShapeArg {
  uint32_t batch = 0, seq = 0, channels = 0;
};

ShapeArg parse_shape(const std::string& text) {
  ShapeArg s;
  unsigned b = 0, q = 0, c = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%ux%ux%u%c", &b, &q, &c, &extra) != 3 || b == 0 || q == 0 ||
      c == 0)
    fail(Errc::invalid_input, "--shape expects BxSxC with positive integers, got '" + text + "'");
  s.batch = b;
  s.seq = q;
  s.channels = c;
  return s;
}

int cmd_quantize(const std::string& in, const std::string& out, const QuantConfig& qc) {
  io::AnyTensor t = io::load_tensor(in);
  CompressedActivation comp = std::visit(
      [&](const auto& tensor) { return quantize_activation(tensor, qc); }, t);
  std::vector<uint8_t> blob = codec::encode_blob(comp);
  io::write_file(out, blob);
  std::printf("%s: %zu tokens, %zu tiles, %.4f payload bits/elem, %zu bytes\n", out.c_str(),
              static_cast<size_t>(comp.tokens()), static_cast<size_t>(comp.tile_count()),
              static_cast<double>(comp.payload_code_bits()) /
                  static_cast<double>(std::visit([](const auto& x) { return x.size(); }, t)),
              blob.size());
  return 0;
}

int cmd_dequantize(const std::string& in, const std::string& out) {
  std::vector<uint8_t> blob = io::read_file(in);
  CompressedActivation comp = codec::decode_blob(blob);
  Tensor3<float> t = dequantize_activation<float>(comp);
  io::save_tensor(out, t);
  std::printf("%s: %ux%ux%u float32\n", out.c_str(), t.batch, t.seq, t.channels);
  return 0;
}

void save_model_checkpoint(const std::string& path, const pipeline::PipelineModel& m) {
  std::vector<Tensor3<double>> tensors;
  Tensor3<double> w1(1, static_cast<uint32_t>(m.w1.rows), static_cast<uint32_t>(m.w1.cols));
  w1.data = m.w1.v;
  Tensor3<double> b1(1, 1, static_cast<uint32_t>(m.b1.size()));
  b1.data = m.b1;
  Tensor3<double> w2(1, static_cast<uint32_t>(m.w2.rows), static_cast<uint32_t>(m.w2.cols));
  w2.data = m.w2.v;
  tensors.push_back(std::move(w1));
  tensors.push_back(std::move(b1));
  tensors.push_back(std::move(w2));
  io::save_checkpoint(path, tensors);
}

int cmd_train(pipeline::SimConfig cfg, const std::string& csv, const std::string& checkpoint) {
  pipeline::RunResult res = pipeline::run_training(cfg, exec_from_env(), channel_from_env());
  if (!csv.empty()) harness::write_loss_csv(csv, res.records);
  if (!checkpoint.empty()) save_model_checkpoint(checkpoint, res.model);

  const size_t n = res.records.size();
  const size_t window = std::min<size_t>(100, n);
  double tail = 0.0;
  double bits = 0.0;
  uint64_t fw_bytes = 0, bw_bytes = 0;
  for (const pipeline::StepRecord& r : res.records) {
    bits += r.bits_fw_mean;
    fw_bytes += r.bytes_fw;
    bw_bytes += r.bytes_bw;
  }
  for (size_t i = n - window; i < n; ++i) tail += res.records[i].loss;
  std::printf("steps=%zu final_loss(mean last %zu)=%.6f fw_bits_mean=%.4f fw_bytes=%llu "
              "bw_bytes=%llu kernels=%s\n",
              n, window, tail / window, bits / n,
              static_cast<unsigned long long>(fw_bytes),
              static_cast<unsigned long long>(bw_bytes), kernels::active_name());
  return 0;
}

int cmd_validate(pipeline::SimConfig cfg, const std::string& mode, const std::string& csv) {
  harness::ValidateMode m;
  if (mode == "step")
    m = harness::ValidateMode::step;
  else if (mode == "fullbatch")
    m = harness::ValidateMode::fullbatch;
  else
    fail(Errc::invalid_input, "--mode expects 'step' or 'fullbatch'");

  harness::ValidationReport rep = harness::run_validation(cfg, m);
  if (!csv.empty()) harness::write_validation_csv(csv, rep);
  std::printf("mode=%s steps=%zu max_ratio=%.6f median_ratio=%.6f implied_delta=%.6f\n",
              mode.c_str(), rep.rows.size(), rep.max_ratio, rep.median_ratio, rep.implied_delta);
  return 0;
}

int cmd_bench(const ShapeArg& shape, const QuantConfig& qc, uint64_t seed,
              const std::string& csv) {
  std::vector<harness::BenchCase> cases =
      harness::run_bench(shape.batch, shape.seq, shape.channels, qc, seed);
  if (!csv.empty()) harness::write_bench_csv(csv, cases);
  for (const harness::BenchCase& c : cases) {
    std::printf("%-10s bits/elem=%.4f vs_fp32=%.2fx transformed=%.4f encode=%.3g elem/s "
                "decode=%.3g elem/s\n",
                c.name.c_str(), c.report.bits_per_element, c.report.ratio_vs_fp32,
                c.report.transform_fraction, c.report.encode_elems_per_s,
                c.report.decode_elems_per_s);
  }
  std::printf("kernels=%s\n", kernels::active_name());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tile-adaptive activation compressor and training simulator"};
  app.require_subcommand(1);

  std::string in_path, out_path, csv_path, checkpoint_path, mode_arg, shape_arg;
  QuantConfig qc;
  pipeline::SimConfig sim;
  bool no_adaptive = false, no_hadamard = false, baseline = false;
  uint64_t seed = 0;

  CLI::App* quantize = app.add_subcommand("quantize", "compress a tensor file into a blob");
  quantize->add_option("--in", in_path, "input .taht tensor")->required();
  quantize->add_option("--out", out_path, "output .tahq blob")->required();
  quantize->add_option("--tile-size", qc.tile_size, "channels per tile");
  quantize->add_option("--p4", qc.high_bit_frac, "fraction of tokens at the high width");
  quantize->add_option("--tau", qc.outlier_threshold, "outlier ratio threshold");
  quantize->add_option("--bits-hi", qc.bits_hi, "high token width");
  quantize->add_option("--bits-lo", qc.bits_lo, "low token width");
  quantize->add_flag("--no-adaptive", no_adaptive, "give every token the high width");
  quantize->add_flag("--no-hadamard", no_hadamard, "disable outlier suppression");

  CLI::App* dequantize = app.add_subcommand("dequantize", "expand a blob back into a tensor file");
  dequantize->add_option("--in", in_path, "input .tahq blob")->required();
  dequantize->add_option("--out", out_path, "output .taht tensor")->required();

  CLI::App* train = app.add_subcommand("train", "run the two-stage training simulation");
  train->add_option("--steps", sim.steps, "optimizer steps");
  train->add_option("--lr", sim.lr, "learning rate");
  train->add_option("--beta1", sim.beta1, "momentum coefficient");
  train->add_option("--tile-size", sim.quant.tile_size, "channels per tile");
  train->add_option("--p4", sim.quant.high_bit_frac, "fraction of tokens at the high width");
  train->add_option("--tau", sim.quant.outlier_threshold, "outlier ratio threshold");
  train->add_option("--bw-bits", sim.backward_bits, "gradient wire width");
  train->add_option("--fw-bits-hi", sim.quant.bits_hi, "high token width");
  train->add_option("--fw-bits-lo", sim.quant.bits_lo, "low token width");
  train->add_option("--seed", sim.seed, "run seed");
  train->add_option("--task", [&sim](const std::vector<std::string>& vals) {
        if (vals[0] == "standard") sim.task = pipeline::Task::standard;
        else if (vals[0] == "outlier") sim.task = pipeline::Task::outlier;
        else return false;
        return true;
      }, "synthetic task: standard | outlier");
  train->add_flag("--baseline", baseline, "send activations uncompressed");
  train->add_flag("--no-adaptive", no_adaptive, "give every token the high width");
  train->add_flag("--no-hadamard", no_hadamard, "disable outlier suppression");
  train->add_flag("--strict-theory", sim.strict_theory,
                  "reject hyperparameters outside the convergence guard");
  train->add_option("--delta", sim.theory_delta, "guard contraction factor");
  train->add_option("--lsmooth", sim.theory_smooth, "guard smoothness constant");
  train->add_option("--csv", csv_path, "per-step loss CSV");
  train->add_option("--checkpoint", checkpoint_path, "save trained parameters here");

  CLI::App* validate = app.add_subcommand("validate", "measure gradient-error ratios");
  validate->add_option("--mode", mode_arg, "step | fullbatch")->required();
  validate->add_option("--steps", sim.steps, "optimizer steps");
  validate->add_option("--seed", sim.seed, "run seed");
  validate->add_option("--tile-size", sim.quant.tile_size, "channels per tile");
  validate->add_option("--p4", sim.quant.high_bit_frac, "fraction of tokens at the high width");
  validate->add_option("--bw-bits", sim.backward_bits, "gradient wire width");
  validate->add_option("--csv", csv_path, "per-step ratio CSV");

  CLI::App* bench = app.add_subcommand("bench", "codec accounting and throughput");
  bench->add_option("--shape", shape_arg, "activation shape BxSxC")->required();
  bench->add_option("--tile-size", qc.tile_size, "channels per tile");
  bench->add_option("--p4", qc.high_bit_frac, "fraction of tokens at the high width");
  bench->add_option("--tau", qc.outlier_threshold, "outlier ratio threshold");
  bench->add_option("--seed", seed, "input generator seed");
  bench->add_option("--csv", csv_path, "report CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*quantize) {
      qc.adaptive_alloc = !no_adaptive;
      qc.hadamard = !no_hadamard;
      return cmd_quantize(in_path, out_path, qc);
    }
    if (*dequantize) return cmd_dequantize(in_path, out_path);
    if (*train) {
      sim.quant.adaptive_alloc = !no_adaptive;
      sim.quant.hadamard = !no_hadamard;
      if (baseline) sim.wire = pipeline::WireMode::passthrough;
      return cmd_train(sim, csv_path, checkpoint_path);
    }
    if (*validate) return cmd_validate(sim, mode_arg, csv_path);
    if (*bench) return cmd_bench(parse_shape(shape_arg), qc, seed, csv_path);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
