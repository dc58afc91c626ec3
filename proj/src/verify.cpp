// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#include "las/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace las {

namespace {

constexpr std::uint64_t kTagVerify = 0x766572ULL;  // "ver"

struct Ctx {
  const TargetDistribution* target;
  std::uint64_t seed;
  VerifyReport* report;

  // FNV-1a keeps suite streams identical across standard libraries.
  Rng rng(const std::string& suite) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : suite) h = (h ^ ch) * 0x100000001b3ULL;
    return Rng(derive_seed(seed, kTagVerify, h));
  }
  void add(const std::string& suite, const std::string& name, bool pass, Json stats) const {
    report->checks.push_back({suite, name, pass, std::move(stats)});
  }
};

CandidateSet random_candidates(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> g(n), r(n);
  for (auto& x : g) x = std::exp(-3.0 + 9.0 * u(rng));
  std::sort(g.begin(), g.end());
  for (std::size_t i = 1; i < n; ++i) {
    if (!(g[i] > g[i - 1])) g[i] = std::nextafter(g[i - 1], 1e300);
  }
  for (auto& x : r) x = 0.05 + 2.0 * u(rng);
  return CandidateSet(std::move(g), std::move(r), 1.5);
}

void suite_dp(const Ctx& cx) {
  auto rng = cx.rng("dp");
  std::uniform_int_distribution<std::size_t> kdist(1, 4);
  std::size_t mism_exact = 0, mism_beam = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t K = kdist(rng);
    std::uniform_int_distribution<std::size_t> ndist(K + 1, 10);
    const std::size_t n = ndist(rng);
    const auto cs = random_candidates(rng, n);
    LasConfig cfg;
    cfg.K = K;
    const auto s = las_exact(cs, cfg);
    if (s.indices != exhaustive_schedule(cs, K, 0.0)) ++mism_exact;

    cfg.alpha = (inst % 3 == 0) ? 0.1 : (inst % 3 == 1 ? 1.0 : 12.0);
    cfg.beam = n * n;
    cfg.window = n;
    const auto b = las_beam(cs, cfg);
    if (b.indices != exhaustive_schedule(cs, K, cfg.alpha)) ++mism_beam;
  }
  cx.add("dp", "exact_vs_exhaustive", mism_exact == 0, {{"instances", 100}, {"mismatches", mism_exact}});
  cx.add("dp", "beam_vs_exhaustive", mism_beam == 0, {{"instances", 100}, {"mismatches", mism_beam}});
}

MmsePolicy deterministic_policy(const TargetDistribution& d, std::uint64_t seed) {
  if (has_closed_form(d)) return ClosedFormPolicy{};
  if (d.dim() <= 2) return QuadraturePolicy{d.dim() == 1 ? 200u : 64u};
  return MonteCarloPolicy{200000, seed};
}

void suite_mmse(const Ctx& cx) {
  std::vector<std::pair<std::string, TargetDistribution>> targets;
  if (cx.target) {
    targets.emplace_back("target", *cx.target);
  } else {
    targets.emplace_back("two_atom", load_target("two_atom"));
    targets.emplace_back("circle8_atoms", discrete_companion(build_toy("circle8")));
  }
  for (const auto& [name, dist] : targets) {
    const auto policy = deterministic_policy(dist, cx.seed);
    double worst = 0.0;
    bool ok = true;
    for (double g : {0.25, 1.0, 4.0, 16.0}) {
      const double h = 1e-3 * g;
      const auto hi = mmse(dist, g + h, policy);
      const auto lo = mmse(dist, g - h, policy);
      const double fd = (hi.value - lo.value) / (2.0 * h);
      const auto an = mmse_derivative(dist, g, policy);
      const double diff = std::abs(fd - an.value);
      const double fd_err = std::hypot(hi.std_error, lo.std_error) / (2.0 * h);
      const double tol = std::max(1e-3 * std::abs(an.value), 3.0 * std::hypot(an.std_error, fd_err)) + 1e-12;
      worst = std::max(worst, diff / tol);
      ok = ok && diff <= tol;
    }
    cx.add("mmse", "derivative_fd_" + name, ok, {{"worst_ratio_to_tol", worst}});
  }
}

void check_entropy(const Ctx& cx, const std::string& name, const TargetDistribution& d) {
  const auto info = fit_subexponential(d, 2.0);
  const bool lower = info.shannon <= info.renyi_half + 1e-10;
  const bool upper = info.renyi_half <= info.renyi_bound + 1e-10;
  cx.add("entropy", name, lower && upper,
         {{"H", info.shannon}, {"H_half", info.renyi_half}, {"nu_sq", info.nu_sq}});
}

void suite_entropy(const Ctx& cx) {
  if (cx.target) {
    check_entropy(cx, "target", cx.target->is_discrete() ? *cx.target : discrete_companion(*cx.target));
    return;
  }
  auto rng = cx.rng("entropy");
  std::uniform_int_distribution<int> sz(2, 12);
  std::exponential_distribution<double> ex(1.0);
  for (int i = 0; i < 20; ++i) {
    const int m = sz(rng);
    std::vector<double> w(static_cast<std::size_t>(m));
    for (auto& x : w) x = ex(rng) + 1e-3;
    const double s = pairwise_sum(w);
    std::vector<Atom> atoms;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      const double p = j + 1 == m ? 1.0 - acc : w[static_cast<std::size_t>(j)] / s;
      acc += p;
      atoms.push_back({{static_cast<double>(j)}, p});
    }
    check_entropy(cx, "random_" + std::to_string(i), TargetDistribution::discrete(std::move(atoms)));
  }
}

double sum_sq_ratio(std::span<const double> g) {
  double s = 0.0;
  for (std::size_t k = 1; k < g.size(); ++k) {
    const double r = g[k] / g[k - 1] - 1.0;
    s += r * r;
  }
  return s;
}

void suite_geometric(const Ctx& cx) {
  auto rng = cx.rng("geometric");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t beaten = 0;
  for (int i = 0; i < 20; ++i) {
    const double T = std::exp(3.0 * u(rng));
    const double delta = T * std::exp(-1.0 - 7.0 * u(rng));
    for (std::size_t K : {2u, 3u, 4u}) {
      const auto geo = grid_geometric(T, delta, K);
      const double best = sum_sq_ratio(geo.gammas());
      std::vector<double> g(K + 1);
      for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> inner(K - 1);
        for (auto& x : inner) x = u(rng);
        std::sort(inner.begin(), inner.end());
        g.front() = 1.0 / T;
        g.back() = 1.0 / delta;
        const double l0 = std::log(g.front()), l1 = std::log(g.back());
        for (std::size_t k = 1; k < K; ++k) g[k] = std::exp(l0 + (l1 - l0) * inner[k - 1]);
        if (sum_sq_ratio(g) < best - 1e-9) ++beaten;
      }
    }
  }
  cx.add("geometric", "random_grids", beaten == 0, {{"improvements", beaten}});
}

void suite_area_kl(const Ctx& cx) {
  const TargetDistribution dist = cx.target ? *cx.target : TargetDistribution::single_gaussian({0.0}, 1.0);
  const SnrGrid grid({1.0, 2.0, 4.0});
  const MmseCurve curve(dist, deterministic_policy(dist, cx.seed));
  const auto disc = disc_error(curve, grid);
  PathwiseConfig pc;
  pc.n_paths = 20000;
  pc.seed = derive_seed(cx.seed, kTagVerify, 2);
  const auto kl = pathwise_kl_mc(dist, grid, pc);
  const double diff = std::abs(2.0 * kl.value - disc.value);
  const double sigma = std::hypot(2.0 * kl.std_error, disc.std_error);
  cx.add("area_kl", "area_gap_vs_pathwise_kl", diff <= 4.0 * sigma + 1e-12,
         {{"disc_error", disc.value}, {"twice_kl", 2.0 * kl.value}, {"sigma", sigma}});
}

void suite_identity(const Ctx& cx) {
  const TargetDistribution dist = cx.target ? *cx.target : TargetDistribution::single_gaussian({0.0}, 1.0);
  const bool exact = has_closed_form(dist);
  const MmseCurve curve(dist, deterministic_policy(dist, cx.seed));
  auto rng = cx.rng("identity");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const std::size_t K = 2 + static_cast<std::size_t>(u(rng) * 6.0);
    std::vector<double> g(K + 1);
    for (auto& x : g) x = std::exp(-2.0 + 6.0 * u(rng));
    std::sort(g.begin(), g.end());
    const SnrGrid grid(g);
    std::vector<LossKnot> knots;
    for (double x : g) knots.push_back({x, curve.value(x).value + u(rng), LossKind::kX0});
    const LossProfile loss(knots);
    const double lhs = combined_objective(loss, grid) - curve.integral(g.front(), g.back()).value;
    const double rhs = disc_error(curve, grid).value + apx_error(loss, curve, grid).value.value;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  const double tol = exact ? 1e-9 : 1e-5;
  cx.add("identity", "combined_identity", worst <= tol, {{"worst_rel_error", worst}, {"tol", tol}});
}

void suite_eps(const Ctx& cx) {
  auto rng = cx.rng("eps");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double g = std::exp(-6.0 + 14.0 * u(rng));
    const double x0 = std::exp(-8.0 + 10.0 * u(rng));
    const double eps = x0 * g;
    worst = std::max(worst, std::abs(eps_to_x0(eps, g) - x0) / x0);
  }
  cx.add("eps", "eps_x0_roundtrip", worst <= 1e-12, {{"worst_rel_error", worst}});
}

void suite_sampler(const Ctx& cx) {
  auto rng = cx.rng("sampler");
  std::normal_distribution<double> normal;
  const std::size_t n = 200000;
  const double t_prev = 1.0, t_next = 0.5, y = 2.0, c = 0.0;
  std::vector<double> v(n);
  for (auto& x : v) {
    const double xi = normal(rng);
    x = reverse_step(std::span<const double>(&y, 1), t_prev, t_next, std::span<const double>(&c, 1),
                     std::span<const double>(&xi, 1))[0];
  }
  const auto m = mean_and_stderr(v);
  const double var = 0.25;
  const bool mean_ok = std::abs(m.value - 1.0) <= 4.0 * m.std_error;
  double s2 = 0.0;
  for (double x : v) s2 += (x - 1.0) * (x - 1.0);
  s2 /= static_cast<double>(n);
  const double var_se = var * std::sqrt(2.0 / static_cast<double>(n));
  const bool var_ok = std::abs(s2 - var) <= 4.0 * var_se;
  cx.add("sampler", "reverse_step_moments", mean_ok && var_ok, {{"mean", m.value}, {"var", s2}});

  const TargetDistribution dist = cx.target ? *cx.target : build_toy("circle8");
  SamplerConfig sc;
  sc.n_samples = 500;
  sc.seed = cx.seed;
  const auto grid = grid_geometric(1.0, 1e-3, 8);
  const auto a = sample(dist, grid, sc);
  const auto b = sample(dist, grid, sc);
  cx.add("sampler", "seed_determinism", a.samples == b.samples, {{"n", sc.n_samples}});
}

const std::vector<std::pair<std::string, void (*)(const Ctx&)>>& registry() {
  static const std::vector<std::pair<std::string, void (*)(const Ctx&)>> r = {
      {"dp", suite_dp},         {"mmse", suite_mmse},   {"entropy", suite_entropy},
      {"geometric", suite_geometric}, {"area_kl", suite_area_kl}, {"identity", suite_identity},
      {"eps", suite_eps},       {"sampler", suite_sampler}};
  return r;
}

void enumerate(const CandidateSet& cands, std::size_t K, double alpha, std::vector<std::size_t>& cur,
               std::vector<std::size_t>& best, double& best_cost) {
  const std::size_t end = cands.size() - 1;
  const std::size_t k = cur.size();
  if (k == K) {
    cur.push_back(end);
    const double c = schedule_objective(cands, cur, alpha);
    if (c < best_cost) {
      best_cost = c;
      best = cur;
    }
    cur.pop_back();
    return;
  }
  for (std::size_t i = cur.back() + 1; i + (K - k) <= end; ++i) {
    cur.push_back(i);
    enumerate(cands, K, alpha, cur, best, best_cost);
    cur.pop_back();
  }
}

}  // namespace

bool VerifyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

Json VerifyReport::to_json() const {
  Json arr = Json::array();
  for (const auto& c : checks) {
    arr.push_back({{"suite", c.suite}, {"check", c.name}, {"pass", c.pass}, {"stats", c.stats}});
  }
  return Json{{"pass", all_pass()}, {"checks", arr}};
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, f] : registry()) v.push_back(n);
    return v;
  }();
  return names;
}

VerifyReport run_verify(const std::string& selector, const TargetDistribution* target,
                        std::uint64_t seed) {
  VerifyReport rep;
  const Ctx cx{target, seed, &rep};
  bool found = false;
  for (const auto& [name, fn] : registry()) {
    if (selector == "all" || selector == name) {
      fn(cx);
      found = true;
    }
  }
  if (!found) throw InvalidConfig("unknown verify suite '" + selector + "'");
  return rep;
}

std::vector<std::size_t> exhaustive_schedule(const CandidateSet& cands, std::size_t K,
                                             double alpha) {
  if (K < 1 || cands.size() < K + 1) throw Infeasible("need at least K+1 candidates");
  std::vector<std::size_t> cur{0}, best;
  double best_cost = std::numeric_limits<double>::infinity();
  enumerate(cands, K, alpha, cur, best, best_cost);
  return best;
}

}  // namespace las
