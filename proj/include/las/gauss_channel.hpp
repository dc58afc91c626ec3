// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <variant>
#include <vector>

#include "las/common.hpp"
#include "las/target_dist.hpp"

namespace las {

/// Observation of the Brownian channel X_t = Z + W_t at time t (SNR 1/t).
struct ChannelPoint {
  double t = 1.0;
  double gamma = 1.0;
  Vec x;

  static ChannelPoint from_time(double t, Vec x);
  static ChannelPoint from_snr(double gamma, Vec x);
};

struct PosteriorSummary {
  Vec weights;  // per atom / component
  Vec mean;     // m_t(x)
  double cov_trace = 0.0;
  double cov_frobenius_sq = 0.0;  // tr(Sigma_t(x)^2)
};

/// Exact posterior of Z given X_t = x. Weights are normalized in the log
/// domain, so large SNRs do not underflow.
PosteriorSummary posterior(const TargetDistribution& dist, const ChannelPoint& point);

/// Reusable posterior evaluator with preallocated buffers. Not thread-safe;
/// use one per worker.
class PosteriorEngine {
 public:
  explicit PosteriorEngine(const TargetDistribution& dist);

  /// Full summary at noise level t.
  const PosteriorSummary& compute(double t, std::span<const double> x);
  /// Posterior mean only.
  void denoise(double t, std::span<const double> x, std::span<double> out);

 private:
  void weights(double t, std::span<const double> x);

  const TargetDistribution* dist_;
  std::size_t dim_;
  PosteriorSummary summary_;
  std::vector<double> log_w_;
  std::vector<double> shrink_;   // per component sigma^2 / (sigma^2 + t)
  std::vector<double> comp_means_;  // per component posterior means, row major
  std::vector<double> cov_;      // d x d scratch
};

/// E_posterior ||Z - a||^4 by enumeration over the atoms (discrete only).
double posterior_fourth_moment_about(const TargetDistribution& dist,
                                     const ChannelPoint& point,
                                     std::span<const double> a);

// ---------------------------------------------------------------------------
// MMSE evaluation policies
// ---------------------------------------------------------------------------

/// Closed form: single Gaussian component or a point mass.
struct ClosedFormPolicy {};
/// Tensor-product Gauss-Hermite over X_t, exact up to the rule (dim <= 2).
struct QuadraturePolicy {
  std::size_t nodes = 200;
};
/// Rao-Blackwellized Monte Carlo over (Z, X_t) with common random numbers
/// across SNRs.
struct MonteCarloPolicy {
  std::size_t n_samples = 100000;
  std::uint64_t seed = 0;
};

using MmsePolicy = std::variant<ClosedFormPolicy, QuadraturePolicy, MonteCarloPolicy>;

bool has_closed_form(const TargetDistribution& dist);
/// Closed form where available, quadrature for dim 1, Monte Carlo otherwise.
MmsePolicy default_policy(const TargetDistribution& dist, std::uint64_t seed = 0);

Estimate mmse(const TargetDistribution& dist, double gamma, const MmsePolicy& policy);
/// mmse'(gamma) = -E tr(Cov(Z | X_{1/gamma})^2); always <= 0.
Estimate mmse_derivative(const TargetDistribution& dist, double gamma,
                         const MmsePolicy& policy);

/// Monte-Carlo estimate of E||Z' - Z||^4 where Z' is an independent posterior
/// draw given X_t.
Estimate posterior_fourth_moment(const TargetDistribution& dist, double t,
                                 std::size_t n_samples, std::uint64_t seed);

struct Theorem1Fit {
  double constant = 0.0;         // max over knots of gamma^2 |mmse'| / H^2
  std::vector<double> ratios;    // per knot
  double entropy = 0.0;
};

/// Fitted constant for |mmse'(gamma)| <= C^2 H^2 / gamma^2 over the knots.
/// Throws DegenerateEntropy when H = 0.
Theorem1Fit theorem1_check(const TargetDistribution& dist,
                           std::span<const double> gamma_knots,
                           const MmsePolicy& policy);

// ---------------------------------------------------------------------------
// Samples of (Z, xi) shared across SNRs for Monte Carlo evaluation.
// ---------------------------------------------------------------------------

struct ChannelSamples {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> z;      // n x dim
  std::vector<double> noise;  // n x dim standard normal

  std::span<const double> z_row(std::size_t i) const { return {z.data() + i * dim, dim}; }
  std::span<const double> noise_row(std::size_t i) const {
    return {noise.data() + i * dim, dim};
  }
};

ChannelSamples draw_channel_samples(const TargetDistribution& dist, std::size_t n,
                                    std::uint64_t seed);

// ---------------------------------------------------------------------------

struct MmseKnot {
  double gamma = 0.0;
  Estimate mmse;
  Estimate derivative;
};

/// mmse(gamma) for one target under one policy, with a knot cache.
/// Thread-safe.
class MmseCurve {
 public:
  MmseCurve(TargetDistribution dist, MmsePolicy policy);

  const TargetDistribution& dist() const { return *dist_; }
  const MmsePolicy& policy() const { return policy_; }

  Estimate value(double gamma) const;
  Estimate derivative(double gamma) const;
  /// Evaluates and caches value and derivative at gamma.
  MmseKnot knot(double gamma) const;
  std::vector<MmseKnot> cached_knots() const;

  /// Integral of mmse over [a, b]; cached per endpoint pair.
  Estimate integral(double a, double b) const;

  /// Sum over consecutive knot pairs of the area gap
  /// int_{g_{k-1}}^{g_k} (mmse(g_{k-1}) - mmse(g)) dg.
  Estimate area_gap_sum(std::span<const double> gammas) const;

 private:
  const ChannelSamples& samples() const;
  double closed_form_value(double gamma) const;
  double closed_form_antiderivative(double gamma) const;

  std::shared_ptr<const TargetDistribution> dist_;
  MmsePolicy policy_;
  mutable std::mutex mu_;
  mutable std::map<double, MmseKnot> knots_;
  mutable std::map<std::pair<double, double>, Estimate> integrals_;
  mutable std::unique_ptr<ChannelSamples> samples_;
};

}  // namespace las
