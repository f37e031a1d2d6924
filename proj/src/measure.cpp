// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0

#include "tahq/measure.hpp"

#include <algorithm>
#include <cmath>

#include "tahq/error.hpp"

namespace tahq::harness {

using pipeline::Batch;
using pipeline::GradEval;
using pipeline::PipelineModel;
using pipeline::SimConfig;
using pipeline::WireMode;

double relative_error(std::span<const double> approx, std::span<const double> exact) {
  if (approx.size() != exact.size())
    fail(Errc::shape_mismatch, "relative_error: vector sizes disagree");
  double num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < exact.size(); ++i) {
    const double d = approx[i] - exact[i];
    num += d * d;
    den += exact[i] * exact[i];
  }
  if (den == 0.0)
    fail(Errc::undefined_ratio, "relative_error: reference gradient is zero");
  return num / den;
}

double measure_step_error(const PipelineModel& model, const Batch& batch, const SimConfig& cfg,
                          WireMode mode) {
  GradEval exact = pipeline::eval_gradients(model, batch, cfg, WireMode::passthrough);
  GradEval approx = pipeline::eval_gradients(model, batch, cfg, mode);
  return relative_error(approx.grad, exact.grad);
}

double measure_fullbatch_error(const PipelineModel& model, const std::vector<Batch>& dataset,
                               const SimConfig& cfg, WireMode mode) {
  if (dataset.empty()) fail(Errc::invalid_input, "measure_fullbatch_error: empty dataset");
  std::vector<double> exact_mean(model.param_count(), 0.0);
  std::vector<double> approx_mean(model.param_count(), 0.0);
  const double inv = 1.0 / static_cast<double>(dataset.size());
  for (const Batch& b : dataset) {
    GradEval exact = pipeline::eval_gradients(model, b, cfg, WireMode::passthrough);
    GradEval approx = pipeline::eval_gradients(model, b, cfg, mode);
    for (size_t i = 0; i < exact_mean.size(); ++i) {
      exact_mean[i] += inv * exact.grad[i];
      approx_mean[i] += inv * approx.grad[i];
    }
  }
  return relative_error(approx_mean, exact_mean);
}

namespace {

double plain_loss(const PipelineModel& model, const Batch& batch) {
  pipeline::ForwardA fa = pipeline::forward_stage_a(model, batch.inputs);
  return pipeline::stage_b_forward_backward(model, fa.activation, batch.targets).loss;
}

}  // namespace

std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> x, double h) {
  if (!(h > 0.0)) fail(Errc::invalid_input, "finite_diff_gradient: step must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size(), 0.0);
  for (size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      fail(Errc::divergence, "finite_diff_gradient: non-finite loss at probe point");
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> finite_diff_gradient(const PipelineModel& model, const Batch& batch,
                                         double h) {
  PipelineModel shadow = model;
  auto f = [&shadow, &batch](std::span<const double> theta) {
    pipeline::assign_params(shadow, theta);
    return plain_loss(shadow, batch);
  };
  std::vector<double> theta = pipeline::flatten_params(model);
  return finite_diff_gradient(f, theta, h);
}

ValidationReport run_validation(const pipeline::SimConfig& cfg, ValidateMode mode) {
  SimConfig c = cfg;
  c.validate();

  std::vector<Batch> dataset = pipeline::make_dataset(c);
  pipeline::RunResult state;
  state.model = pipeline::init_student(c);
  state.momentum.m_a.assign(state.model.stage_a_params(), 0.0);
  state.momentum.m_b.assign(state.model.stage_b_params(), 0.0);

  std::unique_ptr<pipeline::ByteChannel> to_b = pipeline::make_queue_channel();
  std::unique_ptr<pipeline::ByteChannel> to_a = pipeline::make_queue_channel();

  ValidationReport report;
  report.rows.reserve(c.steps);
  for (uint32_t t = 0; t < c.steps; ++t) {
    const Batch& b = dataset[pipeline::batch_index(c, t)];
    ValidationRow row;
    row.step = t;
    row.ratio = mode == ValidateMode::step
                    ? measure_step_error(state.model, b, c, c.wire)
                    : measure_fullbatch_error(state.model, dataset, c, c.wire);
    pipeline::StepRecord rec =
        pipeline::train_step(state.model, state.momentum, b, c, *to_b, *to_a);
    row.loss = rec.loss;
    report.rows.push_back(row);
  }

  std::vector<double> ratios;
  ratios.reserve(report.rows.size());
  for (const ValidationRow& r : report.rows) ratios.push_back(r.ratio);
  std::sort(ratios.begin(), ratios.end());
  report.max_ratio = ratios.empty() ? 0.0 : ratios.back();
  if (!ratios.empty()) {
    const size_t n = ratios.size();
    report.median_ratio =
        n % 2 == 1 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  }
  report.implied_delta = 1.0 - report.max_ratio;
  return report;
}

}  // namespace tahq::harness
