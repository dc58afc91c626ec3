// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "las/common.hpp"
#include "las/error_functionals.hpp"
#include "las/target_dist.hpp"

namespace las {

enum class SamplerOrder { kFirst, kSecond };
enum class InitMode { kExactForward, kGaussianPrior };
enum class DenoiserKind { kOracle, kOraclePlusNoise };

struct SamplerConfig {
  SamplerOrder order = SamplerOrder::kFirst;
  InitMode init = InitMode::kExactForward;
  DenoiserKind denoiser = DenoiserKind::kOracle;
  /// Isotropic anchor error std for kOraclePlusNoise: empty (none), one
  /// value for every interval, or one per interval.
  std::vector<double> sigma_err;
  std::size_t n_samples = 20000;
  std::uint64_t seed = 0;
  /// Also jump to m_delta(y) at the end and report that NLL separately.
  bool final_denoise = false;
};

struct SampleReport {
  /// Mean negative log-likelihood under the target density (nats/sample).
  /// Only available for mixtures; discrete targets have no density.
  bool nll_available = false;
  Estimate nll;
  std::optional<Estimate> nll_denoised;
  std::size_t n_samples = 0;
  std::vector<double> schedule;  // gammas used
  SamplerConfig config;
};

struct SampleRun {
  std::size_t dim = 0;
  std::vector<double> samples;   // n x dim, at t = delta
  std::vector<double> denoised;  // n x dim when final_denoise
  SampleReport report;

  std::span<const double> row(std::size_t i) const { return {samples.data() + i * dim, dim}; }
};

/// Exact transition of dY = (c - Y) / t ds + dB from t_prev down to t_next
/// with c frozen:  c + (t_next/t_prev)(y - c) + sqrt(t_next (t_prev - t_next) / t_prev) xi.
/// Throws InvalidArgument unless 0 < t_next < t_prev.
Vec reverse_step(std::span<const double> state, double t_prev, double t_next,
                 std::span<const double> anchor, std::span<const double> noise);

/// Frozen-denoiser sampler. Dispatches on cfg.order.
SampleRun sample(const TargetDistribution& dist, const SnrGrid& grid, const SamplerConfig& cfg);

/// Two-anchor variant: the anchor is extrapolated linearly in ln gamma from
/// the last two denoiser outputs to the interval midpoint. The first
/// interval is first order. Requires K >= 2.
SampleRun second_order_sample(const TargetDistribution& dist, const SnrGrid& grid,
                              const SamplerConfig& cfg);

/// Weight on (D_cur - D_prev) used by second_order_sample for interval k
/// (k >= 2): h_k / (2 h_{k-1}).
double extrapolation_coefficient(const SnrGrid& grid, std::size_t k);

/// Mean NLL of rows under a mixture density.
Estimate mean_nll(const TargetDistribution& dist, std::span<const double> rows);

}  // namespace las
