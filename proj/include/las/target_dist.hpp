// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "las/common.hpp"

namespace las {

struct GmmComponent {
  double weight = 0.0;
  Vec mean;
  double sigma = 0.0;  // isotropic standard deviation
};

struct Atom {
  Vec point;
  double prob = 0.0;
};

struct GaussianMixture {
  std::vector<GmmComponent> components;
};

struct FiniteDiscrete {
  std::vector<Atom> atoms;
};

enum class Variant { kGaussianMixture, kFiniteDiscrete };

/// A target distribution whose Bayes posterior under Gaussian noise is
/// available in closed form. Immutable after construction.
class TargetDistribution {
 public:
  /// Throws InvalidArgument unless weights are positive and sum to 1
  /// (within 1e-12), sigmas are positive and all means share one dimension.
  static TargetDistribution gaussian_mixture(std::vector<GmmComponent> comps);
  /// Throws InvalidArgument unless probs are positive, sum to 1 and atoms
  /// are pairwise distinct.
  static TargetDistribution discrete(std::vector<Atom> atoms);

  static TargetDistribution single_gaussian(Vec mean, double sigma);
  static TargetDistribution point_mass(Vec point);

  Variant variant() const;
  std::size_t dim() const { return dim_; }
  bool is_discrete() const { return variant() == Variant::kFiniteDiscrete; }

  const GaussianMixture& mixture() const;
  const FiniteDiscrete& finite() const;

  /// Number of components (mixture) or atoms (discrete).
  std::size_t size() const;

  Vec mean() const;
  /// Trace of the prior covariance, E||Z - EZ||^2.
  double covariance_trace() const;

  /// log density for mixtures. Discrete targets have no density and throw
  /// UnsupportedVariant.
  double log_density(std::span<const double> x) const;

  /// Draws one sample into out (size dim).
  void sample(Rng& rng, std::span<double> out) const;
  /// Index of the component / atom selected for a uniform u in [0, 1).
  std::size_t pick(double u) const;

 private:
  TargetDistribution(std::size_t dim, std::variant<GaussianMixture, FiniteDiscrete> v);

  std::size_t dim_ = 0;
  std::variant<GaussianMixture, FiniteDiscrete> rep_;
  std::vector<double> cumulative_;  // selection CDF over components/atoms
};

/// Surprisal, Shannon/Renyi-1/2 entropies and sub-exponential fit.
struct InfoProfile {
  double shannon = 0.0;     // nats
  double renyi_half = 0.0;  // nats
  double nu_sq = 0.0;       // fitted variance proxy
  double b = 2.0;           // scale; lambda grid covers [-1/b, 1/b]
  bool mgf_ok = false;
  /// H + nu^2 / 2, the bound H_{1/2} must satisfy.
  double renyi_bound = 0.0;
};

double surprisal(const TargetDistribution& dist, std::size_t atom_index);
double shannon_entropy(const TargetDistribution& dist);
double renyi_half_entropy(const TargetDistribution& dist);

/// Fits nu^2 = max over the lambda grid (lambda != 0) of log M(lambda) /
/// lambda^2 where M(lambda) = E exp(lambda (iota(Z) - H)), evaluated exactly.
/// The grid has grid_points evenly spaced points on [-1/b, 1/b] (always
/// including 0 and +-1/2).
InfoProfile fit_subexponential(const TargetDistribution& dist, double b,
                               std::size_t grid_points = 41);

}  // namespace las
