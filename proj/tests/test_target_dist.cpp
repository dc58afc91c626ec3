#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "las/target_dist.hpp"

using namespace las;

namespace {

TargetDistribution two_atom(double p) {
  return TargetDistribution::discrete({{{-1.0}, p}, {{1.0}, 1.0 - p}});
}

double brute_shannon(const std::vector<double>& p) {
  double h = 0;
  for (double x : p) h -= x * std::log(x);
  return h;
}

}  // namespace

TEST_CASE("construction validates inputs") {
  CHECK_THROWS_AS(TargetDistribution::discrete({{{0.0}, 0.5}, {{1.0}, 0.4}}), InvalidArgument);
  CHECK_THROWS_AS(TargetDistribution::discrete({{{0.0}, 0.5}, {{0.0}, 0.5}}), InvalidArgument);
  CHECK_THROWS_AS(TargetDistribution::discrete({{{0.0}, 1.5}, {{1.0}, -0.5}}), InvalidArgument);
  CHECK_THROWS_AS(TargetDistribution::discrete({{{0.0}, 0.5}, {{1.0, 2.0}, 0.5}}), InvalidArgument);
  CHECK_THROWS_AS(TargetDistribution::gaussian_mixture({{1.0, {0.0}, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(TargetDistribution::gaussian_mixture({{0.5, {0.0}, 1.0}, {0.5, {0.0, 1.0}, 1.0}}),
                  InvalidArgument);
  CHECK_NOTHROW(TargetDistribution::discrete({{{0.0}, 0.5}, {{1.0}, 0.5 + 1e-13}}));
}

TEST_CASE("moments") {
  const auto d = TargetDistribution::gaussian_mixture(
      {{0.25, {-2.0, 0.0}, 0.5}, {0.75, {2.0, 1.0}, 1.0}});
  const auto m = d.mean();
  CHECK(m[0] == doctest::Approx(1.0));
  CHECK(m[1] == doctest::Approx(0.75));
  // E||Z||^2 - ||EZ||^2 with E||Z||^2 = sum w (||mu||^2 + d sigma^2)
  const double ez2 = 0.25 * (4.0 + 2 * 0.25) + 0.75 * (5.0 + 2 * 1.0);
  CHECK(d.covariance_trace() == doctest::Approx(ez2 - (1.0 + 0.5625)));
  CHECK(two_atom(0.5).covariance_trace() == doctest::Approx(1.0));
  CHECK(TargetDistribution::point_mass({3.0, 4.0}).covariance_trace() == 0.0);
}

TEST_CASE("log density of a mixture") {
  const auto d = TargetDistribution::gaussian_mixture({{0.3, {0.0}, 1.0}, {0.7, {3.0}, 0.5}});
  const double x = 1.2;
  auto n = [](double x, double m, double s) {
    return std::exp(-0.5 * (x - m) * (x - m) / (s * s)) / (s * std::sqrt(2 * std::numbers::pi));
  };
  const double ref = std::log(0.3 * n(x, 0, 1) + 0.7 * n(x, 3, 0.5));
  CHECK(d.log_density(std::vector<double>{x}) == doctest::Approx(ref).epsilon(1e-14));
  // far tail stays finite
  CHECK(std::isfinite(d.log_density(std::vector<double>{1e3})));
  CHECK_THROWS_AS(two_atom(0.5).log_density(std::vector<double>{0.0}), UnsupportedVariant);
}

TEST_CASE("sampling frequencies follow the weights") {
  const auto d = TargetDistribution::discrete({{{0.0}, 0.1}, {{1.0}, 0.6}, {{2.0}, 0.3}});
  Rng rng(7);
  std::vector<int> count(3);
  std::vector<double> z(1);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    d.sample(rng, z);
    count[static_cast<std::size_t>(z[0])]++;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = d.finite().atoms[i].prob;
    CHECK(std::abs(count[i] / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }
  CHECK(d.pick(0.0) == 0);
  CHECK(d.pick(0.0999) == 0);
  CHECK(d.pick(0.1001) == 1);
  CHECK(d.pick(0.9999) == 2);
}

TEST_CASE("entropies: uniform targets are flat") {
  std::vector<Atom> atoms;
  for (int i = 0; i < 8; ++i) atoms.push_back({{double(i)}, 1.0 / 8.0});
  const auto d = TargetDistribution::discrete(atoms);
  CHECK(shannon_entropy(d) == doctest::Approx(std::log(8.0)).epsilon(1e-15));
  CHECK(std::abs(renyi_half_entropy(d) - std::log(8.0)) < 1e-14);
  const auto info = fit_subexponential(d, 2.0);
  CHECK(info.nu_sq == 0.0);
  CHECK(info.mgf_ok);
}

TEST_CASE("entropies: two atoms in closed form") {
  const double p = 0.9;
  const auto d = two_atom(p);
  CHECK(shannon_entropy(d) == doctest::Approx(brute_shannon({p, 1 - p})).epsilon(1e-14));
  const double r = 2.0 * std::log(std::sqrt(p) + std::sqrt(1 - p));
  CHECK(renyi_half_entropy(d) == doctest::Approx(r).epsilon(1e-13));
  CHECK(surprisal(d, 0) == doctest::Approx(-std::log(p)));
  CHECK(surprisal(d, 1) == doctest::Approx(-std::log(1 - p)));
  CHECK_THROWS_AS(surprisal(d, 2), InvalidArgument);
}

TEST_CASE("point mass has zero entropy") {
  const auto d = TargetDistribution::point_mass({1.0});
  CHECK(shannon_entropy(d) == 0.0);
  CHECK(renyi_half_entropy(d) == 0.0);
}

TEST_CASE("entropy ordering on random targets") {
  Rng rng(11);
  std::exponential_distribution<double> ex(1.0);
  std::uniform_int_distribution<int> sz(2, 30);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = sz(rng);
    std::vector<double> w(m);
    double s = 0;
    for (auto& x : w) s += (x = std::pow(ex(rng), 3.0) + 1e-6);
    std::vector<Atom> atoms;
    double acc = 0;
    for (int i = 0; i < m; ++i) {
      const double p = i + 1 == m ? 1.0 - acc : w[i] / s;
      acc += p;
      atoms.push_back({{double(i)}, p});
    }
    const auto d = TargetDistribution::discrete(atoms);
    const auto info = fit_subexponential(d, 2.0);
    CHECK(info.shannon <= info.renyi_half + 1e-10);
    CHECK(info.renyi_half <= std::log(double(m)) + 1e-10);
    CHECK(info.renyi_half <= info.shannon + 0.5 * info.nu_sq + 1e-10);
    CHECK(info.renyi_bound == doctest::Approx(info.shannon + 0.5 * info.nu_sq));
  }
}

TEST_CASE("sub-exponential fit arguments") {
  const auto d = two_atom(0.3);
  CHECK_THROWS_AS(fit_subexponential(d, 0.0), InvalidArgument);
  CHECK_THROWS_AS(fit_subexponential(d, 2.5), InvalidArgument);
  CHECK_THROWS_AS(shannon_entropy(TargetDistribution::single_gaussian({0.0}, 1.0)),
                  UnsupportedVariant);
  CHECK_THROWS_AS(fit_subexponential(d, 1.0, 2), InvalidConfig);
  const auto wide = fit_subexponential(d, 1.0);
  CHECK(wide.renyi_half <= wide.renyi_bound + 1e-12);
}

TEST_CASE("reference entropy values") {
  const auto d = TargetDistribution::discrete({{{0.0}, 0.5}, {{1.0}, 0.25}, {{2.0}, 0.25}});
  CHECK(surprisal(d, 0) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(shannon_entropy(d) == doctest::Approx(1.5 * std::log(2.0)));
  CHECK(renyi_half_entropy(d) == doctest::Approx(2.0 * std::log(std::sqrt(0.5) + 1.0)).epsilon(1e-14));
  const auto e = two_atom(0.64);
  CHECK(renyi_half_entropy(e) == doctest::Approx(2.0 * std::log(1.4)));
  // exact MGF enumeration over two atoms on the same lambda grid
  const double h = shannon_entropy(e);
  const double s[2] = {-std::log(0.64) - h, -std::log(0.36) - h};
  double nu = 0.0;
  for (int j = 0; j <= 40; ++j) {
    const double lam = -0.5 + j * 0.025;
    if (j == 20) continue;
    const double m = 0.64 * std::exp(lam * s[0]) + 0.36 * std::exp(lam * s[1]);
    nu = std::max(nu, std::log(m) / (lam * lam));
  }
  const auto info = fit_subexponential(e, 2.0);
  CHECK(info.nu_sq == doctest::Approx(nu).epsilon(1e-12));
  CHECK(info.renyi_half <= h + 0.5 * info.nu_sq);
  CHECK(fit_subexponential(TargetDistribution::point_mass({0.0}), 2.0).nu_sq == 0.0);
}
