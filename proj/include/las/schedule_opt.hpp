// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "las/error_functionals.hpp"

namespace las {

// Baseline grids. All return gamma_0 = 1/T and gamma_K = 1/delta exactly.
SnrGrid grid_time_uniform(double T, double delta, std::size_t K);
SnrGrid grid_geometric(double T, double delta, std::size_t K);
/// Karras et al. noise levels sigma_i = (smax^(1/rho) + i/K (smin^(1/rho) -
/// smax^(1/rho)))^rho with smax = sqrt(T), smin = sqrt(delta); gamma = 1/sigma^2.
SnrGrid grid_edm(double T, double delta, std::size_t K, double rho);

/// Regularized SNR axis eta(gamma) = gamma / (1 + lambda^2 gamma).
double eta_axis(double gamma, double lambda);

struct LasConfig {
  std::size_t K = 10;
  double lambda = 1.5;
  double alpha = 0.0;
  std::size_t beam = 16;    // B
  std::size_t window = 4;   // W
  std::size_t extra = 0;    // E
};

/// Candidate SNRs (ascending) with x0 risks and the derived axes.
class CandidateSet {
 public:
  CandidateSet(std::vector<double> gammas, std::vector<double> risks, double lambda);

  /// Uses the profile's own knots (converted to x0), trimmed to
  /// [gamma_lo, gamma_hi].
  static CandidateSet from_profile(const LossProfile& profile, double lambda,
                                   double gamma_lo, double gamma_hi);

  std::size_t size() const { return gammas_.size(); }
  const std::vector<double>& gammas() const { return gammas_; }
  const std::vector<double>& risks() const { return risks_; }
  const std::vector<double>& eta() const { return eta_; }
  const std::vector<double>& ell() const { return ell_; }
  double lambda() const { return lambda_; }

 private:
  std::vector<double> gammas_, risks_, eta_, ell_;
  double lambda_;
};

struct Schedule {
  std::vector<std::size_t> indices;
  std::vector<double> gammas;
  double objective = 0.0;
  std::string algorithm;  // "exact" | "beam"
  LasConfig config;
  std::size_t tie_breaks = 0;

  SnrGrid grid() const { return SnrGrid(gammas); }
};

/// Surrogate objective sum (eta_{i_k} - eta_{i_{k-1}}) L(i_{k-1}) plus
/// alpha sum_{k>=2} (h_k - h_{k-1})^2, accumulated transition by transition
/// in the same order as the dynamic programs.
double schedule_objective(const CandidateSet& cands, std::span<const std::size_t> indices,
                          double alpha);

/// Exact first-order DP (alpha = 0), O(K n^2). Ties go to the smallest
/// predecessor index.
Schedule las_exact(const CandidateSet& cands, const LasConfig& cfg);

/// Beam-pruned windowed DP for alpha > 0.
Schedule las_beam(const CandidateSet& cands, const LasConfig& cfg);

/// Dispatches on cfg.alpha.
Schedule las_optimize(const CandidateSet& cands, const LasConfig& cfg);

/// "999,746,...,0" <-> integers. K = size - 1.
std::vector<long> parse_timestep_list(const std::string& text);
std::string format_timestep_list(std::span<const long> steps);

}  // namespace las
