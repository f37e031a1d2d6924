// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include "tahq/pipeline.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "tahq/blob.hpp"
#include "tahq/quantizer.hpp"
#include "tahq/rng.hpp"
#include "tahq/tensor_io.hpp"

namespace tahq::pipeline {

namespace {

constexpr uint64_t kStudentTag = 0x5354;
constexpr uint64_t kTeacherTag = 0x5443;
constexpr uint64_t kDataTag = 0x4454;
constexpr uint64_t kPickTag = 0x504b;

std::vector<double> make_chan_scale(const SimConfig& cfg) {
  std::vector<double> s(cfg.channels, 1.0);
  if (cfg.task == Task::outlier) {
    for (uint32_t c = 0; c < cfg.channels; c += cfg.outlier_stride) s[c] = cfg.outlier_gain;
  }
  return s;
}

PipelineModel init_model(const SimConfig& cfg, uint64_t stream, bool teacher) {
  Rng rng(stream);
  PipelineModel m;
  m.nonlin = cfg.nonlin;
  m.chan_scale = make_chan_scale(cfg);
  m.w1 = Mat(cfg.d_in, cfg.channels);
  const double w1_std = 1.0 / std::sqrt(static_cast<double>(cfg.d_in));
  for (double& v : m.w1.v) v = rng.gaussian() * w1_std;
  m.b1.assign(cfg.channels, 0.0);
  if (teacher) {
    for (double& v : m.b1) v = rng.gaussian() * 0.2;
  }
  m.w2 = Mat(cfg.channels, cfg.d_out);
  const double w2_std = 1.0 / std::sqrt(static_cast<double>(cfg.channels));
  for (double& v : m.w2.v) v = rng.gaussian() * w2_std;
  return m;
}

Tensor3<double> head_forward(const PipelineModel& m, const Tensor3<double>& act) {
  Tensor3<double> pred(act.batch, act.seq, static_cast<uint32_t>(m.w2.cols));
  const size_t tokens = act.tokens();
  for (size_t tok = 0; tok < tokens; ++tok) {
    const double* a = act.token_ptr(tok);
    double* p = pred.token_ptr(tok);
    for (size_t o = 0; o < m.w2.cols; ++o) {
      double acc = 0.0;
      for (size_t c = 0; c < m.w2.rows; ++c) acc += a[c] * m.w2.at(c, o);
      p[o] = acc;
    }
  }
  return pred;
}

}  // namespace

void SimConfig::validate() {
  if (batch == 0 || seq == 0 || channels == 0 || d_in == 0 || d_out == 0)
    fail(Errc::invalid_config, "pipeline: all dimensions must be positive");
  quant.validate(channels);
  if (backward_bits < 2 || backward_bits > 8)
    fail(Errc::invalid_config, "pipeline: backward_bits must be in [2, 8]");
  if (dataset_batches == 0) fail(Errc::invalid_config, "pipeline: dataset_batches must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail(Errc::invalid_config, "pipeline: lr must be positive");
  if (!(beta1 > 0.0) || beta1 > 1.0)
    fail(Errc::invalid_config, "pipeline: beta1 must lie in (0, 1]");
  if (!(target_noise >= 0.0)) fail(Errc::invalid_config, "pipeline: target_noise must be >= 0");
  if (outlier_stride == 0) fail(Errc::invalid_config, "pipeline: outlier_stride must be positive");
  if (!std::isfinite(outlier_gain)) fail(Errc::invalid_config, "pipeline: outlier_gain must be finite");
}

void check_theory_guard(double beta1, double lr, double delta, double lsmooth) {
  if (!(delta > 0.0 && delta < 1.0))
    fail(Errc::invalid_config, "theory guard: delta must lie in (0, 1)");
  if (!(lsmooth > 0.0)) fail(Errc::invalid_config, "theory guard: smoothness constant must be positive");
  const double beta_cap = delta / (24.0 - 12.0 * delta);
  if (!(beta1 > 0.0 && beta1 < beta_cap))
    fail(Errc::invalid_config,
         "theory guard: beta1 must lie in (0, " + std::to_string(beta_cap) + ")");
  const double lr_cap =
      std::min(1.0 / (2.0 * lsmooth), beta1 / lsmooth * std::sqrt(delta / 8.0));
  if (!(lr > 0.0 && lr <= lr_cap))
    fail(Errc::invalid_config,
         "theory guard: lr must lie in (0, " + std::to_string(lr_cap) + "]");
}

PipelineModel init_student(const SimConfig& cfg) {
  return init_model(cfg, Rng::mix(cfg.seed, kStudentTag), false);
}

PipelineModel init_teacher(const SimConfig& cfg) {
  return init_model(cfg, Rng::mix(cfg.seed, kTeacherTag), true);
}

std::vector<Batch> make_dataset(const SimConfig& cfg) {
  PipelineModel teacher = init_teacher(cfg);
  Rng rng(Rng::mix(cfg.seed, kDataTag));
  std::vector<Batch> out;
  out.reserve(cfg.dataset_batches);
  for (uint32_t i = 0; i < cfg.dataset_batches; ++i) {
    Batch b;
    b.inputs = Tensor3<double>(cfg.batch, cfg.seq, cfg.d_in);
    for (double& v : b.inputs.data) v = rng.gaussian();
    ForwardA fa = forward_stage_a(teacher, b.inputs);
    b.targets = head_forward(teacher, fa.activation);
    for (double& v : b.targets.data) v += cfg.target_noise * rng.gaussian();
    out.push_back(std::move(b));
  }
  return out;
}

uint32_t batch_index(const SimConfig& cfg, uint32_t step) {
  return static_cast<uint32_t>(Rng::mix(Rng::mix(cfg.seed, kPickTag), step) % cfg.dataset_batches);
}

ForwardA forward_stage_a(const PipelineModel& m, const Tensor3<double>& inputs) {
  const uint32_t channels = static_cast<uint32_t>(m.w1.cols);
  ForwardA out;
  out.activation = Tensor3<double>(inputs.batch, inputs.seq, channels);
  out.nonlin = Tensor3<double>(inputs.batch, inputs.seq, channels);
  const size_t tokens = inputs.tokens();
  for (size_t tok = 0; tok < tokens; ++tok) {
    const double* x = inputs.token_ptr(tok);
    double* t = out.nonlin.token_ptr(tok);
    double* a = out.activation.token_ptr(tok);
    for (uint32_t c = 0; c < channels; ++c) {
      double z = m.b1[c];
      for (size_t i = 0; i < m.w1.rows; ++i) z += x[i] * m.w1.at(i, c);
      double v = m.nonlin == Nonlin::tanh_smooth ? std::tanh(z) : z;
      t[c] = v;
      a[c] = v * m.chan_scale[c];
    }
  }
  return out;
}

StageBOut stage_b_forward_backward(const PipelineModel& m, const Tensor3<double>& activation,
                                   const Tensor3<double>& targets) {
  if (activation.tokens() != targets.tokens() || activation.channels != m.w2.rows ||
      targets.channels != m.w2.cols)
    fail(Errc::shape_mismatch, "stage_b: activation/targets/head shapes disagree");

  StageBOut out;
  out.grad_activation = Tensor3<double>(activation.batch, activation.seq, activation.channels);
  out.grad_w2 = Mat(m.w2.rows, m.w2.cols);

  const size_t tokens = activation.tokens();
  const size_t d_out = m.w2.cols;
  const double inv_n = 1.0 / (static_cast<double>(tokens) * static_cast<double>(d_out));
  std::vector<double> dp(d_out);

  double loss = 0.0;
  for (size_t tok = 0; tok < tokens; ++tok) {
    const double* a = activation.token_ptr(tok);
    const double* y = targets.token_ptr(tok);
    double* ga = out.grad_activation.token_ptr(tok);
    for (size_t o = 0; o < d_out; ++o) {
      double acc = 0.0;
      for (size_t c = 0; c < m.w2.rows; ++c) acc += a[c] * m.w2.at(c, o);
      double r = acc - y[o];
      loss += r * r;
      dp[o] = r * inv_n;
    }
    for (size_t c = 0; c < m.w2.rows; ++c) {
      double acc = 0.0;
      for (size_t o = 0; o < d_out; ++o) {
        acc += dp[o] * m.w2.at(c, o);
        out.grad_w2.at(c, o) += a[c] * dp[o];
      }
      ga[c] = acc;
    }
  }
  out.loss = 0.5 * loss * inv_n;
  return out;
}

StageAGrads backward_stage_a(const PipelineModel& m, const ForwardA& cache,
                             const Tensor3<double>& inputs, const Tensor3<double>& grad_activation) {
  if (!grad_activation.same_shape(cache.activation))
    fail(Errc::shape_mismatch, "backward_stage_a: gradient shape mismatch");

  StageAGrads out;
  out.grad_w1 = Mat(m.w1.rows, m.w1.cols);
  out.grad_b1.assign(m.w1.cols, 0.0);

  const size_t tokens = inputs.tokens();
  const size_t channels = m.w1.cols;
  std::vector<double> dz(channels);
  for (size_t tok = 0; tok < tokens; ++tok) {
    const double* x = inputs.token_ptr(tok);
    const double* t = cache.nonlin.token_ptr(tok);
    const double* ga = grad_activation.token_ptr(tok);
    for (size_t c = 0; c < channels; ++c) {
      double g = ga[c] * m.chan_scale[c];
      if (m.nonlin == Nonlin::tanh_smooth) g *= 1.0 - t[c] * t[c];
      dz[c] = g;
      out.grad_b1[c] += g;
    }
    for (size_t i = 0; i < m.w1.rows; ++i) {
      double xi = x[i];
      for (size_t c = 0; c < channels; ++c) out.grad_w1.at(i, c) += xi * dz[c];
    }
  }
  return out;
}

void momentum_update(std::span<double> x, std::span<double> m, std::span<const double> g,
                     double beta1, double lr) {
  if (x.size() != m.size() || x.size() != g.size())
    fail(Errc::shape_mismatch, "momentum_update: span sizes disagree");
  for (double v : g)
    if (!std::isfinite(v)) fail(Errc::divergence, "momentum_update: non-finite gradient");
  const double keep = 1.0 - beta1;
  for (size_t i = 0; i < x.size(); ++i) {
    m[i] = keep * m[i] + beta1 * g[i];
    x[i] -= lr * m[i];
  }
}

namespace {

struct WireMsg {
  std::vector<uint8_t> bytes;
  double payload_bits_per_elem = 0.0;
};

WireMsg encode_activation_msg(const Tensor3<double>& a, const SimConfig& cfg) {
  WireMsg msg;
  switch (cfg.wire) {
    case WireMode::passthrough:
      msg.bytes = io::tensor_to_bytes(a);
      msg.payload_bits_per_elem = 64.0;
      break;
    case WireMode::zeroed: {
      Tensor3<double> z(a.batch, a.seq, a.channels);
      msg.bytes = io::tensor_to_bytes(z);
      msg.payload_bits_per_elem = 64.0;
      break;
    }
    case WireMode::quantized: {
      CompressedActivation c = quantize_activation(a, cfg.quant);
      msg.payload_bits_per_elem =
          static_cast<double>(c.payload_code_bits()) / static_cast<double>(a.size());
      msg.bytes = codec::encode_blob(c);
      break;
    }
  }
  return msg;
}

WireMsg encode_gradient_msg(const Tensor3<double>& g, const SimConfig& cfg) {
  WireMsg msg;
  switch (cfg.wire) {
    case WireMode::passthrough:
      msg.bytes = io::tensor_to_bytes(g);
      msg.payload_bits_per_elem = 64.0;
      break;
    case WireMode::zeroed: {
      Tensor3<double> z(g.batch, g.seq, g.channels);
      msg.bytes = io::tensor_to_bytes(z);
      msg.payload_bits_per_elem = 64.0;
      break;
    }
    case WireMode::quantized: {
      CompressedActivation c = naive_quantize(g, cfg.backward_bits, cfg.quant.tile_size);
      msg.payload_bits_per_elem =
          static_cast<double>(c.payload_code_bits()) / static_cast<double>(g.size());
      msg.bytes = codec::encode_blob(c);
      break;
    }
  }
  return msg;
}

// Decode either wire shape, re-encode, and insist on the exact bytes that
// arrived. Catches any drift between the two codec directions immediately.
Tensor3<double> decode_checked(std::span<const uint8_t> bytes, const SimConfig& cfg) {
  if (cfg.wire == WireMode::quantized) {
    CompressedActivation c = codec::decode_blob(bytes);
    std::vector<uint8_t> again = codec::encode_blob(c);
    if (again.size() != bytes.size() || std::memcmp(again.data(), bytes.data(), bytes.size()) != 0)
      fail(Errc::corrupt_payload, "wire: decoded blob does not re-encode to received bytes");
    return dequantize_activation<double>(c);
  }
  Tensor3<double> t = io::tensor_from_bytes_as<double>(bytes);
  std::vector<uint8_t> again = io::tensor_to_bytes(t);
  if (again.size() != bytes.size() || std::memcmp(again.data(), bytes.data(), bytes.size()) != 0)
    fail(Errc::corrupt_payload, "wire: decoded tensor does not re-encode to received bytes");
  return t;
}

}  // namespace

std::vector<uint8_t> encode_activation(const Tensor3<double>& a, const SimConfig& cfg) {
  return encode_activation_msg(a, cfg).bytes;
}

Tensor3<double> decode_activation(std::span<const uint8_t> bytes, const SimConfig& cfg) {
  return decode_checked(bytes, cfg);
}

std::vector<uint8_t> encode_gradient(const Tensor3<double>& g, const SimConfig& cfg) {
  return encode_gradient_msg(g, cfg).bytes;
}

Tensor3<double> decode_gradient(std::span<const uint8_t> bytes, const SimConfig& cfg) {
  return decode_checked(bytes, cfg);
}

namespace {

class QueueChannel final : public ByteChannel {
 public:
  void send(std::vector<uint8_t> bytes) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      q_.push_back(std::move(bytes));
    }
    cv_.notify_one();
  }
  std::vector<uint8_t> recv() override {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return !q_.empty(); });
    std::vector<uint8_t> out = std::move(q_.front());
    q_.pop_front();
    return out;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<uint8_t>> q_;
};

class SocketChannel final : public ByteChannel {
 public:
  SocketChannel() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0)
      fail(Errc::io_error, "socketpair failed");
    wr_ = fds[0];
    rd_ = fds[1];
  }
  ~SocketChannel() override {
    ::close(wr_);
    ::close(rd_);
  }
  void send(std::vector<uint8_t> bytes) override {
    uint64_t len = bytes.size();
    uint8_t hdr[8];
    for (int i = 0; i < 8; ++i) hdr[i] = static_cast<uint8_t>(len >> (8 * i));
    write_all(hdr, 8);
    write_all(bytes.data(), bytes.size());
  }
  std::vector<uint8_t> recv() override {
    uint8_t hdr[8];
    read_all(hdr, 8);
    uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= static_cast<uint64_t>(hdr[i]) << (8 * i);
    std::vector<uint8_t> out(len);
    read_all(out.data(), len);
    return out;
  }

 private:
  void write_all(const uint8_t* p, size_t n) {
    while (n > 0) {
      ssize_t w = ::write(wr_, p, n);
      if (w < 0) {
        if (errno == EINTR) continue;
        fail(Errc::io_error, "socket write failed");
      }
      p += w;
      n -= static_cast<size_t>(w);
    }
  }
  void read_all(uint8_t* p, size_t n) {
    while (n > 0) {
      ssize_t r = ::read(rd_, p, n);
      if (r < 0) {
        if (errno == EINTR) continue;
        fail(Errc::io_error, "socket read failed");
      }
      if (r == 0) fail(Errc::io_error, "socket closed mid-message");
      p += r;
      n -= static_cast<size_t>(r);
    }
  }

  int wr_ = -1;
  int rd_ = -1;
};

}  // namespace

std::unique_ptr<ByteChannel> make_queue_channel() { return std::make_unique<QueueChannel>(); }
std::unique_ptr<ByteChannel> make_socket_channel() { return std::make_unique<SocketChannel>(); }
std::unique_ptr<ByteChannel> make_channel(ChannelKind kind) {
  return kind == ChannelKind::queue ? make_queue_channel() : make_socket_channel();
}

namespace {

// Per-step stage work, shared verbatim by the sequential composition and the
// two-worker loops so both execute the same arithmetic.

struct AForwardOut {
  ForwardA cache;
  WireMsg msg;
};

AForwardOut a_forward(const PipelineModel& model, const Tensor3<double>& inputs,
                      const SimConfig& cfg) {
  AForwardOut out;
  out.cache = forward_stage_a(model, inputs);
  out.msg = encode_activation_msg(out.cache.activation, cfg);
  return out;
}

struct BStepOut {
  double loss = 0.0;
  std::vector<uint8_t> grad_bytes;
};

BStepOut b_step(PipelineModel& model, MomentumState& opt, const Tensor3<double>& targets,
                std::span<const uint8_t> act_bytes, const SimConfig& cfg) {
  Tensor3<double> act = decode_checked(act_bytes, cfg);
  StageBOut sb = stage_b_forward_backward(model, act, targets);
  if (!std::isfinite(sb.loss)) fail(Errc::divergence, "train: loss is not finite");
  BStepOut out;
  out.loss = sb.loss;
  out.grad_bytes = encode_gradient_msg(sb.grad_activation, cfg).bytes;
  momentum_update(model.w2.v, opt.m_b, sb.grad_w2.v, cfg.beta1, cfg.lr);
  return out;
}

void a_backward(PipelineModel& model, MomentumState& opt, const ForwardA& cache,
                const Tensor3<double>& inputs, std::span<const uint8_t> grad_bytes,
                const SimConfig& cfg) {
  Tensor3<double> ga = decode_checked(grad_bytes, cfg);
  StageAGrads sa = backward_stage_a(model, cache, inputs, ga);
  const size_t n1 = model.w1.v.size();
  momentum_update(std::span<double>(model.w1.v), std::span<double>(opt.m_a.data(), n1),
                  std::span<const double>(sa.grad_w1.v), cfg.beta1, cfg.lr);
  momentum_update(std::span<double>(model.b1),
                  std::span<double>(opt.m_a.data() + n1, model.b1.size()),
                  std::span<const double>(sa.grad_b1), cfg.beta1, cfg.lr);
}

MomentumState init_momentum(const PipelineModel& m) {
  MomentumState s;
  s.m_a.assign(m.stage_a_params(), 0.0);
  s.m_b.assign(m.stage_b_params(), 0.0);
  return s;
}

}  // namespace

StepRecord train_step(PipelineModel& model, MomentumState& opt, const Batch& batch,
                      const SimConfig& cfg, ByteChannel& to_b, ByteChannel& to_a) {
  StepRecord rec;

  AForwardOut fa = a_forward(model, batch.inputs, cfg);
  rec.bytes_fw = fa.msg.bytes.size();
  rec.bits_fw_mean = fa.msg.payload_bits_per_elem;
  to_b.send(std::move(fa.msg.bytes));

  std::vector<uint8_t> act_bytes = to_b.recv();
  BStepOut bs = b_step(model, opt, batch.targets, act_bytes, cfg);
  rec.loss = bs.loss;
  rec.bytes_bw = bs.grad_bytes.size();
  to_a.send(std::move(bs.grad_bytes));

  std::vector<uint8_t> grad_bytes = to_a.recv();
  a_backward(model, opt, fa.cache, batch.inputs, grad_bytes, cfg);
  return rec;
}

RunResult run_training(const SimConfig& cfg, ExecMode exec, ChannelKind chan) {
  SimConfig c = cfg;
  c.validate();
  if (c.strict_theory) check_theory_guard(c.beta1, c.lr, c.theory_delta, c.theory_smooth);

  std::vector<Batch> dataset = make_dataset(c);
  RunResult out;
  out.model = init_student(c);
  out.momentum = init_momentum(out.model);
  out.records.resize(c.steps);

  std::unique_ptr<ByteChannel> to_b = make_channel(chan);
  std::unique_ptr<ByteChannel> to_a = make_channel(chan);

  if (exec == ExecMode::sequential) {
    for (uint32_t t = 0; t < c.steps; ++t) {
      const Batch& b = dataset[batch_index(c, t)];
      StepRecord rec = train_step(out.model, out.momentum, b, c, *to_b, *to_a);
      rec.step = t;
      out.records[t] = rec;
    }
    return out;
  }

  PipelineModel& model = out.model;
  MomentumState& opt = out.momentum;
  std::vector<StepRecord>& records = out.records;
  std::exception_ptr a_err, b_err;

  std::thread worker_a([&] {
    try {
      for (uint32_t t = 0; t < c.steps; ++t) {
        const Batch& b = dataset[batch_index(c, t)];
        AForwardOut fa = a_forward(model, b.inputs, c);
        records[t].step = t;
        records[t].bytes_fw = fa.msg.bytes.size();
        records[t].bits_fw_mean = fa.msg.payload_bits_per_elem;
        to_b->send(std::move(fa.msg.bytes));
        std::vector<uint8_t> grad_bytes = to_a->recv();
        a_backward(model, opt, fa.cache, b.inputs, grad_bytes, c);
      }
    } catch (...) {
      a_err = std::current_exception();
      // Unblock the peer: a zero-length frame will fail its decode.
      to_b->send({});
    }
  });

  std::thread worker_b([&] {
    try {
      for (uint32_t t = 0; t < c.steps; ++t) {
        const Batch& b = dataset[batch_index(c, t)];
        std::vector<uint8_t> act_bytes = to_b->recv();
        BStepOut bs = b_step(model, opt, b.targets, act_bytes, c);
        records[t].loss = bs.loss;
        records[t].bytes_bw = bs.grad_bytes.size();
        to_a->send(std::move(bs.grad_bytes));
      }
    } catch (...) {
      b_err = std::current_exception();
      to_a->send({});
    }
  });

  worker_a.join();
  worker_b.join();
  if (b_err) std::rethrow_exception(b_err);
  if (a_err) std::rethrow_exception(a_err);
  return out;
}

RunResult run_reference(const SimConfig& cfg) {
  SimConfig c = cfg;
  c.validate();
  if (c.strict_theory) check_theory_guard(c.beta1, c.lr, c.theory_delta, c.theory_smooth);

  std::vector<Batch> dataset = make_dataset(c);
  RunResult out;
  out.model = init_student(c);
  out.momentum = init_momentum(out.model);
  out.records.resize(c.steps);

  for (uint32_t t = 0; t < c.steps; ++t) {
    const Batch& b = dataset[batch_index(c, t)];
    ForwardA fa = forward_stage_a(out.model, b.inputs);
    StageBOut sb = stage_b_forward_backward(out.model, fa.activation, b.targets);
    if (!std::isfinite(sb.loss)) fail(Errc::divergence, "train: loss is not finite");
    momentum_update(out.model.w2.v, out.momentum.m_b, sb.grad_w2.v, c.beta1, c.lr);
    StageAGrads sa = backward_stage_a(out.model, fa, b.inputs, sb.grad_activation);
    const size_t n1 = out.model.w1.v.size();
    momentum_update(std::span<double>(out.model.w1.v),
                    std::span<double>(out.momentum.m_a.data(), n1),
                    std::span<const double>(sa.grad_w1.v), c.beta1, c.lr);
    momentum_update(std::span<double>(out.model.b1),
                    std::span<double>(out.momentum.m_a.data() + n1, out.model.b1.size()),
                    std::span<const double>(sa.grad_b1), c.beta1, c.lr);
    out.records[t] = StepRecord{t, sb.loss, 64.0, 0, 0};
  }
  return out;
}

GradEval eval_gradients(const PipelineModel& model, const Batch& batch, const SimConfig& cfg,
                        WireMode mode) {
  SimConfig c = cfg;
  c.wire = mode;
  c.validate();

  ForwardA fa = forward_stage_a(model, batch.inputs);
  WireMsg fw = encode_activation_msg(fa.activation, c);
  Tensor3<double> act = decode_checked(fw.bytes, c);
  StageBOut sb = stage_b_forward_backward(model, act, batch.targets);
  WireMsg bw = encode_gradient_msg(sb.grad_activation, c);
  Tensor3<double> ga = decode_checked(bw.bytes, c);
  StageAGrads sa = backward_stage_a(model, fa, batch.inputs, ga);

  GradEval out;
  out.loss = sb.loss;
  out.grad.reserve(model.param_count());
  out.grad.insert(out.grad.end(), sa.grad_w1.v.begin(), sa.grad_w1.v.end());
  out.grad.insert(out.grad.end(), sa.grad_b1.begin(), sa.grad_b1.end());
  out.grad.insert(out.grad.end(), sb.grad_w2.v.begin(), sb.grad_w2.v.end());
  return out;
}

std::vector<double> flatten_params(const PipelineModel& m) {
  std::vector<double> out;
  out.reserve(m.param_count());
  out.insert(out.end(), m.w1.v.begin(), m.w1.v.end());
  out.insert(out.end(), m.b1.begin(), m.b1.end());
  out.insert(out.end(), m.w2.v.begin(), m.w2.v.end());
  return out;
}

void assign_params(PipelineModel& m, std::span<const double> flat) {
  if (flat.size() != m.param_count())
    fail(Errc::shape_mismatch, "assign_params: parameter count mismatch");
  size_t k = 0;
  for (double& v : m.w1.v) v = flat[k++];
  for (double& v : m.b1) v = flat[k++];
  for (double& v : m.w2.v) v = flat[k++];
}

}  // namespace tahq::pipeline
