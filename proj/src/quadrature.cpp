// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#include "las/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "las/common.hpp"

namespace las {

namespace {

// Physicists' Hermite rule (weight exp(-x^2)). Roots start from the
// eigenvalues of the Jacobi matrix and are polished by Newton on the
// normalized recurrence, which also yields accurate tail weights.
GaussHermiteRule build_rule(std::size_t n) {
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  const double nn = static_cast<double>(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
  for (Eigen::Index k = 0; k < sub.size(); ++k) sub[k] = std::sqrt(0.5 * static_cast<double>(k + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw Error("gauss_hermite: eigenvalue solve failed");

  std::vector<double> x(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = eig.eigenvalues()[static_cast<Eigen::Index>(i)];
    double pp = 0.0;
    for (int it = 0; it < 8; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jj = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / (jj + 1.0)) * p2 - std::sqrt(jj / (jj + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * nn) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    x[i] = z;
    w[i] = 2.0 / (pp * pp);
  }
  // Symmetrize against rounding.
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double a = 0.5 * (x[n - 1 - i] - x[i]);
    const double b = 0.5 * (w[i] + w[n - 1 - i]);
    x[i] = -a;
    x[n - 1 - i] = a;
    w[i] = w[n - 1 - i] = b;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  // Map to the standard normal: xi = sqrt(2) x, weights / sqrt(pi).
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = std::numbers::sqrt2 * x[i];
    rule.weights[i] = w[i] / std::sqrt(std::numbers::pi);
  }
  return rule;
}

double simpson_step(const std::function<double(double)>& f, double a,
                    double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

const GaussHermiteRule& gauss_hermite(std::size_t n) {
  if (n == 0) throw InvalidConfig("gauss_hermite: need at least one node");
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(n));
  return *slot;
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, double abs_tol,
                        int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

  // Coarse composite pass to scale the relative tolerance.
  double coarse = 0.0;
  constexpr int kPanels = 8;
  for (int i = 0; i < kPanels; ++i) {
    const double x0 = a + (b - a) * i / kPanels;
    const double x1 = a + (b - a) * (i + 1) / kPanels;
    coarse += (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(0.5 * (x0 + x1)) + f(x1));
  }
  const double tol = std::max(abs_tol, rel_tol * std::abs(coarse));
  return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

}  // namespace las
