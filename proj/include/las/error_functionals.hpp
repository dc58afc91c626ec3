// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "las/common.hpp"
#include "las/gauss_channel.hpp"
#include "las/target_dist.hpp"

namespace las {

/// Strictly increasing SNR knots gamma_0 < ... < gamma_K. The reverse-time
/// grid is s_k = T - 1/gamma_k with T = 1/gamma_0 and delta = 1/gamma_K.
class SnrGrid {
 public:
  /// Throws DomainError unless gammas are positive, finite, strictly
  /// increasing and at least two.
  explicit SnrGrid(std::vector<double> gammas);

  const std::vector<double>& gammas() const { return gammas_; }
  std::size_t steps() const { return gammas_.size() - 1; }  // K

  double T() const { return 1.0 / gammas_.front(); }
  double delta() const { return 1.0 / gammas_.back(); }
  double Lambda() const { return gammas_.back() / gammas_.front(); }

  std::vector<double> ratios() const;     // r_k = gamma_k / gamma_{k-1}
  std::vector<double> log_steps() const;  // h_k = ln r_k
  std::vector<double> times() const;      // s_k = T - 1/gamma_k
  std::vector<double> noise_times() const;  // t_k = 1/gamma_k

 private:
  std::vector<double> gammas_;
};

enum class LossKind { kX0, kEps };

struct LossKnot {
  double gamma = 0.0;
  double loss = 0.0;
  LossKind kind = LossKind::kX0;
};

/// Per-SNR model risk. Interpolated (reporting only) linearly in ln gamma
/// after conversion to x0 risk; never extrapolated.
class LossProfile {
 public:
  /// Throws InvalidArgument for non-increasing gammas or negative losses.
  explicit LossProfile(std::vector<LossKnot> knots);

  /// Profile with x0 losses f(gamma) at the given knots.
  template <class F>
  static LossProfile from_function(std::span<const double> gammas, F&& f) {
    std::vector<LossKnot> ks;
    for (double g : gammas) ks.push_back({g, f(g), LossKind::kX0});
    return LossProfile(std::move(ks));
  }

  const std::vector<LossKnot>& knots() const { return knots_; }
  /// Knots converted to x0 kind.
  LossProfile to_x0() const;
  /// x0 risk at gamma. Throws ExtrapolationError outside the knot range.
  double x0_at(double gamma) const;

  double min_gamma() const { return knots_.front().gamma; }
  double max_gamma() const { return knots_.back().gamma; }

 private:
  std::vector<LossKnot> knots_;
};

/// ||x0 error||^2 = ||eps error||^2 / gamma.
double eps_to_x0(double loss_eps, double gamma);
/// SNR of a DDPM marginal with cumulative alpha_bar: alpha_bar / (1 - alpha_bar).
double ddpm_snr(double alpha_bar);

/// E_disc = sum_k int (mmse(gamma_{k-1}) - mmse(gamma)) dgamma.
Estimate disc_error(const MmseCurve& curve, const SnrGrid& grid);

struct ApxResult {
  Estimate value;
  /// (Lambda^{1/K} - 1) * sum eps_k, present for geometric grids.
  std::optional<double> geometric_form;
  std::vector<double> eps_excess;  // eps_k = gamma_{k-1} (L_x0 - mmse)
  std::size_t clamped = 0;         // negative excesses clamped to zero
};

/// E_apx = sum_k (gamma_k - gamma_{k-1}) max(0, L_x0(gamma_{k-1}) - mmse(gamma_{k-1})).
ApxResult apx_error(const LossProfile& loss, const MmseCurve& oracle, const SnrGrid& grid);

/// sum_k (gamma_k - gamma_{k-1}) L_x0(gamma_{k-1}).
double combined_objective(const LossProfile& loss, const SnrGrid& grid);

struct FinalBounds {
  double sum_sq_ratio = 0.0;      // sum (dgamma_k / gamma_{k-1})^2
  double geo_sum_sq_ratio = 0.0;  // K (Lambda^{1/K} - 1)^2
  double disc_bound = 0.0;
  double geo_disc_bound = 0.0;
  std::optional<double> kl_total;  // only when K >= log Lambda
  bool kl_applicable = false;
};

FinalBounds final_bounds(const SnrGrid& grid, double entropy, double c_fit, double eps_bar);

/// True when all step ratios agree within rel_tol.
bool is_geometric(const SnrGrid& grid, double rel_tol = 1e-9);

struct PathwiseConfig {
  std::size_t n_paths = 200000;
  std::size_t substeps = 16;  // M
  std::uint64_t seed = 0;
};

/// Monte-Carlo estimate of (1/2) E int ||delta_s||^2 ds for the exact
/// denoiser (pathwise KL between exact and frozen-denoiser reverse
/// processes). Brownian bridge refinement with M sub-intervals per step,
/// trapezoid rule in s.
Estimate pathwise_kl_mc(const TargetDistribution& dist, const SnrGrid& grid,
                        const PathwiseConfig& cfg);

struct ErrorReport {
  Estimate e_disc;
  Estimate e_apx;
  double kl_path_bound = 0.0;
  double combined = 0.0;         // combined objective, when a loss is given
  Estimate mmse_integral;
  std::optional<FinalBounds> bounds;
  std::string provenance = "mmse_functional";
};

/// Full report for a grid. Without a loss profile the exact denoiser is
/// assumed (E_apx = 0, combined = E_disc + int mmse).
ErrorReport error_report(const MmseCurve& curve, const SnrGrid& grid,
                         const LossProfile* loss);

}  // namespace las
