// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "tahq/config.hpp"
#include "tahq/tensor.hpp"

namespace tahq::pipeline {

// Two-stage model partitioned at the activation boundary:
//   stage A: inputs (B x S x d_in) -> w1, b1 -> nonlinearity -> per-channel
//            task scale -> activation (B x S x channels)
//   stage B: activation -> w2 (linear head, no bias) -> squared-error loss
// Stage A ships its activation to stage B over a byte channel; stage B ships
// the activation gradient back. Both directions always travel as encoded
// bytes, even in-process.

enum class Task : uint8_t { standard, outlier };
enum class WireMode : uint8_t { passthrough, quantized, zeroed };
enum class Nonlin : uint8_t { tanh_smooth, identity };
enum class ExecMode : uint8_t { sequential, two_worker };
enum class ChannelKind : uint8_t { queue, socket };

struct SimConfig {
  uint32_t batch = 2;
  uint32_t seq = 8;
  uint32_t channels = 64;
  uint32_t d_in = 8;
  uint32_t d_out = 4;

  QuantConfig quant;       // forward (activation) quantizer
  int backward_bits = 6;   // uniform width for the activation-gradient wire
  WireMode wire = WireMode::quantized;

  Task task = Task::standard;
  Nonlin nonlin = Nonlin::tanh_smooth;
  double outlier_gain = 20.0;    // channel scale applied by the outlier task
  uint32_t outlier_stride = 32;  // every outlier_stride-th channel is scaled

  uint64_t seed = 0;
  uint32_t steps = 500;
  uint32_t dataset_batches = 32;
  double target_noise = 0.12;

  double lr = 0.1;
  double beta1 = 0.2;

  bool strict_theory = false;
  double theory_delta = 0.9;
  double theory_smooth = 1.0;

  // Throws Errc::invalid_config on bad settings; clamps quant.high_bit_frac.
  void validate();
};

struct Mat {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(size_t r, size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& at(size_t r, size_t c) { return v[r * cols + c]; }
  double at(size_t r, size_t c) const { return v[r * cols + c]; }
};

struct PipelineModel {
  Mat w1;                          // d_in x channels
  std::vector<double> b1;          // channels
  Mat w2;                          // channels x d_out
  std::vector<double> chan_scale;  // channels, fixed by the task (not trained)
  Nonlin nonlin = Nonlin::tanh_smooth;

  size_t stage_a_params() const { return w1.v.size() + b1.size(); }
  size_t stage_b_params() const { return w2.v.size(); }
  size_t param_count() const { return stage_a_params() + stage_b_params(); }
};

struct Batch {
  Tensor3<double> inputs;   // B x S x d_in
  Tensor3<double> targets;  // B x S x d_out
};

struct MomentumState {
  std::vector<double> m_a;  // over [w1, b1]
  std::vector<double> m_b;  // over [w2]
};

struct StepRecord {
  uint32_t step = 0;
  double loss = 0.0;
  double bits_fw_mean = 0.0;
  uint64_t bytes_fw = 0;
  uint64_t bytes_bw = 0;
};

struct RunResult {
  std::vector<StepRecord> records;
  PipelineModel model;
  MomentumState momentum;
};

// Fails with Errc::invalid_config unless 0 < beta1 < delta / (24 - 12 delta)
// and lr <= min(1 / (2 L), (beta1 / L) * sqrt(delta / 8)).
void check_theory_guard(double beta1, double lr, double delta, double lsmooth);

PipelineModel init_student(const SimConfig& cfg);
PipelineModel init_teacher(const SimConfig& cfg);

// dataset_batches batches drawn once from the teacher; targets carry
// gaussian noise of width target_noise. Reproducible from cfg.seed.
std::vector<Batch> make_dataset(const SimConfig& cfg);

// Index of the batch used at `step`; both workers derive it independently.
uint32_t batch_index(const SimConfig& cfg, uint32_t step);

struct ForwardA {
  Tensor3<double> activation;  // after nonlinearity and task scale
  Tensor3<double> nonlin;      // nonlinearity output before the task scale
};

ForwardA forward_stage_a(const PipelineModel& m, const Tensor3<double>& inputs);

struct StageBOut {
  double loss = 0.0;
  Tensor3<double> grad_activation;
  Mat grad_w2;
};

// Loss (mean squared error over all target entries, halved) plus gradients
// with respect to the received activation and to w2.
StageBOut stage_b_forward_backward(const PipelineModel& m, const Tensor3<double>& activation,
                                   const Tensor3<double>& targets);

struct StageAGrads {
  Mat grad_w1;
  std::vector<double> grad_b1;
};

StageAGrads backward_stage_a(const PipelineModel& m, const ForwardA& cache,
                             const Tensor3<double>& inputs, const Tensor3<double>& grad_activation);

// m <- (1 - beta1) m + beta1 g; x <- x - lr m.
// Non-finite gradient entries raise Errc::divergence.
void momentum_update(std::span<double> x, std::span<double> m, std::span<const double> g,
                     double beta1, double lr);

// Wire helpers. Quantized mode sends a codec blob (full tile-adaptive path
// forward, uniform backward_bits backward); passthrough sends raw 64-bit
// values; zeroed sends a zero tensor of the right shape. Decoders re-encode
// and compare against the received bytes, so any wire corruption surfaces
// immediately.
std::vector<uint8_t> encode_activation(const Tensor3<double>& a, const SimConfig& cfg);
Tensor3<double> decode_activation(std::span<const uint8_t> bytes, const SimConfig& cfg);
std::vector<uint8_t> encode_gradient(const Tensor3<double>& g, const SimConfig& cfg);
Tensor3<double> decode_gradient(std::span<const uint8_t> bytes, const SimConfig& cfg);

class ByteChannel {
 public:
  virtual ~ByteChannel() = default;
  virtual void send(std::vector<uint8_t> bytes) = 0;
  virtual std::vector<uint8_t> recv() = 0;
};

// Ordered in-process queue.
std::unique_ptr<ByteChannel> make_queue_channel();
// Same contract over a loopback socket pair, length-prefixed frames.
std::unique_ptr<ByteChannel> make_socket_channel();
std::unique_ptr<ByteChannel> make_channel(ChannelKind kind);

// One optimizer step through the byte path (sequential composition).
StepRecord train_step(PipelineModel& model, MomentumState& opt, const Batch& batch,
                      const SimConfig& cfg, ByteChannel& to_b, ByteChannel& to_a);

// Full run: builds dataset/model/optimizer, executes `cfg.steps` steps either
// inline or with stage A and stage B on separate threads. Both layouts
// produce identical results.
RunResult run_training(const SimConfig& cfg, ExecMode exec = ExecMode::sequential,
                       ChannelKind chan = ChannelKind::queue);

// Uncompressed single-process reference (no channels, no encode/decode);
// the passthrough pipeline must reproduce it exactly.
RunResult run_reference(const SimConfig& cfg);

// Gradients of all parameters, flattened [w1, b1, w2], computed through the
// requested wire mode without touching the model.
struct GradEval {
  double loss = 0.0;
  std::vector<double> grad;
};

GradEval eval_gradients(const PipelineModel& model, const Batch& batch, const SimConfig& cfg,
                        WireMode mode);

std::vector<double> flatten_params(const PipelineModel& m);
void assign_params(PipelineModel& m, std::span<const double> flat);

}  // namespace tahq::pipeline
