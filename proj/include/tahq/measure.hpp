// SPDX-FileCopyrightText: 2026 tahq contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tahq/pipeline.hpp"

namespace tahq::harness {

// Squared relative error ||approx - exact||^2 / ||exact||^2.
// Throws Errc::undefined_ratio when the reference vector is all zeros.
double relative_error(std::span<const double> approx, std::span<const double> exact);

// Error of the parameter gradient computed through `mode` against the exact
// gradient at the same parameters, for a single batch. Passthrough scores 0;
// the zeroed wire scores exactly 1.
double measure_step_error(const pipeline::PipelineModel& model, const pipeline::Batch& batch,
                          const pipeline::SimConfig& cfg, pipeline::WireMode mode);

// Same comparison on gradients averaged over the whole dataset.
double measure_fullbatch_error(const pipeline::PipelineModel& model,
                               const std::vector<pipeline::Batch>& dataset,
                               const pipeline::SimConfig& cfg, pipeline::WireMode mode);

// Central differences per coordinate: grad[i] = (f(x+h e_i) - f(x-h e_i)) / 2h.
// Throws Errc::divergence if any probe evaluates non-finite.
std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> x, double h = 1e-5);

// Same oracle applied to the uncompressed training loss as a function of the
// flattened parameters [w1, b1, w2].
std::vector<double> finite_diff_gradient(const pipeline::PipelineModel& model,
                                         const pipeline::Batch& batch, double h = 1e-5);

enum class ValidateMode : uint8_t { step, fullbatch };

struct ValidationRow {
  uint32_t step = 0;
  double ratio = 0.0;
  double loss = 0.0;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  // Largest contraction factor consistent with the observed ratios: every
  // measured gradient kept at least this fraction of the true signal energy.
  double implied_delta = 0.0;
};

// Trains with the configured wire and measures the gradient error at the
// parameters visited by that trajectory, before each update. Step mode
// scores the current batch; fullbatch mode scores the dataset-mean gradient.
ValidationReport run_validation(const pipeline::SimConfig& cfg, ValidateMode mode);

}  // namespace tahq::harness
