// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace las {

/// Gauss-Hermite rule for expectations under a standard normal:
/// E[f(xi)] ~= sum_i weights[i] * f(nodes[i]), xi ~ N(0, 1).
/// Weights sum to 1.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Builds the n-point rule (Newton iteration on the orthonormal Hermite
/// recurrence). Rules are cached per n; the returned reference stays valid.
const GaussHermiteRule& gauss_hermite(std::size_t n);

/// Adaptive Simpson integration of f over [a, b] to relative tolerance
/// rel_tol (with an absolute floor abs_tol).
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, double abs_tol = 1e-15,
                        int max_depth = 40);

}  // namespace las
