// Acceptance gate. One PASS/FAIL line per criterion; exits nonzero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "las/error_functionals.hpp"
#include "las/experiment.hpp"
#include "las/gauss_channel.hpp"
#include "las/schedule_opt.hpp"
#include "las/target_dist.hpp"

using namespace las;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail, Clock::time_point t0) {
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s criterion %d: %s (%s; %.2f s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Instance {
  std::vector<double> gammas, risks;
};

Instance random_instance(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in;
  double lg = std::log(0.2) + u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    lg += 0.05 + 1.2 * u(rng);
    in.gammas.push_back(std::exp(lg));
    in.risks.push_back(0.01 + 2.0 * u(rng));
  }
  return in;
}

double brute_objective(const Instance& in, double lambda, double alpha,
                       const std::vector<std::size_t>& idx) {
  auto eta = [&](std::size_t i) { return in.gammas[i] / (1.0 + lambda * lambda * in.gammas[i]); };
  double v = 0.0;
  for (std::size_t k = 1; k < idx.size(); ++k) v += (eta(idx[k]) - eta(idx[k - 1])) * in.risks[idx[k - 1]];
  for (std::size_t k = 2; k < idx.size(); ++k) {
    const double d = std::log(in.gammas[idx[k]] / in.gammas[idx[k - 1]]) -
                     std::log(in.gammas[idx[k - 1]] / in.gammas[idx[k - 2]]);
    v += alpha * d * d;
  }
  return v;
}

std::pair<double, std::vector<std::size_t>> brute_force(const Instance& in, double lambda,
                                                       double alpha, std::size_t K) {
  const std::size_t n = in.gammas.size();
  std::vector<std::size_t> cur{0}, arg;
  double best = INFINITY;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (cur.size() == K) {
      cur.push_back(n - 1);
      const double v = brute_objective(in, lambda, alpha, cur);
      if (v < best) {
        best = v;
        arg = cur;
      }
      cur.pop_back();
      return;
    }
    for (std::size_t i = from; i + (K - cur.size()) < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(1);
  return {best, arg};
}

double ratio_sum(const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t k = 1; k < g.size(); ++k) s += std::pow(g[k] / g[k - 1] - 1.0, 2);
  return s;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(x.size());
  my /= double(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += std::pow(std::log(x[i]) - mx, 2);
  }
  return sxy / sxx;
}

TargetDistribution pm1() { return TargetDistribution::discrete({{{-1.0}, 0.5}, {{1.0}, 0.5}}); }

void criterion1() {
  const auto t0 = Clock::now();
  Rng rng(1001);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + trial % 10;
    const std::size_t K = std::min<std::size_t>(1 + trial % 4, n - 1);
    const auto in = random_instance(rng, n);
    LasConfig cfg;
    cfg.K = K;
    const auto s = las_exact(CandidateSet(in.gammas, in.risks, 1.5), cfg);
    const auto [v, idx] = brute_force(in, 1.5, 0.0, K);
    if (s.indices != idx || std::abs(s.objective - v) > 1e-12 * std::max(1.0, v)) ++mismatches;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(1, "exact DP equals exhaustive search", mismatches == 0 && secs < 5.0,
         fmt("200 instances, %.0f mismatches", double(mismatches)), t0);
}

void criterion2() {
  const auto t0 = Clock::now();
  Rng rng(1002);
  std::size_t mismatches = 0;
  const double alphas[] = {0.1, 1.0, 12.0};
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4 + trial % 7;
    const std::size_t K = std::min<std::size_t>(2 + trial % 3, n - 1);
    const double alpha = alphas[trial % 3];
    const auto in = random_instance(rng, n);
    LasConfig cfg;
    cfg.K = K;
    cfg.alpha = alpha;
    cfg.beam = n * n;
    cfg.window = n;
    const auto s = las_beam(CandidateSet(in.gammas, in.risks, 1.5), cfg);
    const auto [v, idx] = brute_force(in, 1.5, alpha, K);
    if (s.indices != idx || std::abs(s.objective - v) > 1e-12 * std::max(1.0, v)) ++mismatches;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(2, "beam DP with full window equals exhaustive second-order search",
         mismatches == 0 && secs < 30.0, fmt("50 instances, %.0f mismatches", double(mismatches)), t0);
}

void criterion3() {
  const auto t0 = Clock::now();
  MmseCurve cf(TargetDistribution::single_gaussian({0.0}, 1.0), ClosedFormPolicy{});
  const SnrGrid g({1.0, 2.0, 4.0});
  const double e = disc_error(cf, g).value;
  const double closed = 0.5 + 2.0 / 3.0 - std::log(5.0 / 2.0);
  const auto kl = pathwise_kl_mc(cf.dist(), g, PathwiseConfig{200000, 16, 7});
  const double z = std::abs(2.0 * kl.value - e) / (2.0 * kl.std_error);
  const bool pass = std::abs(e - 0.250376) < 1e-6 && std::abs(e - closed) < 1e-9 && z < 3.0 &&
                    std::chrono::duration<double>(Clock::now() - t0).count() < 60.0;
  report(3, "discretisation error equals twice the pathwise KL", pass,
         fmt("disc %.9f, 2*KL %.6f +- %.6f, %.2f sigma", e, 2 * kl.value, 2 * kl.std_error, z), t0);
}

void criterion4() {
  const auto t0 = Clock::now();
  const auto eight = TargetDistribution::discrete({{{-3.1}, 0.05},
                                                   {{-2.0}, 0.2},
                                                   {{-0.7}, 0.1},
                                                   {{0.0}, 0.15},
                                                   {{0.4}, 0.1},
                                                   {{1.3}, 0.2},
                                                   {{2.5}, 0.12},
                                                   {{4.0}, 0.08}});
  struct Case {
    const TargetDistribution* d;
    double gamma;
  };
  const auto two = pm1();
  const Case cases[] = {{&two, 0.25}, {&two, 1.0}, {&two, 4.0},   {&two, 16.0},  {&two, 50.0},
                        {&eight, 0.1}, {&eight, 1.0}, {&eight, 5.0}, {&eight, 20.0}, {&eight, 80.0}};
  double worst = 0.0;
  bool pass = true;
  for (const auto& c : cases) {
    const double h = 1e-4 * c.gamma;
    const QuadraturePolicy q;
    const double fd = (mmse(*c.d, c.gamma + h, q).value - mmse(*c.d, c.gamma - h, q).value) / (2 * h);
    const double an = mmse_derivative(*c.d, c.gamma, q).value;
    const double rel = std::abs(an - fd) / std::abs(fd);
    worst = std::max(worst, rel);
    if (rel > 1e-3) pass = false;
  }
  report(4, "derivative identity against finite differences", pass,
         fmt("10 cases, worst relative gap %.2e", worst), t0);
}

void criterion5() {
  const auto t0 = Clock::now();
  Rng rng(1005);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t beaten = 0;
  double worst_local = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const double lo = std::exp(-4.0 + 4.0 * u(rng));
    const double hi = lo * std::exp(0.5 + 8.0 * u(rng));
    for (std::size_t K : {2u, 3u, 4u}) {
      std::vector<double> geo;
      for (std::size_t k = 0; k <= K; ++k) geo.push_back(lo * std::pow(hi / lo, double(k) / double(K)));
      geo.back() = hi;
      const double best = ratio_sum(geo);
      for (int trial = 0; trial < 10000; ++trial) {
        std::vector<double> g{lo, hi};
        for (std::size_t k = 1; k < K; ++k) g.push_back(lo + (hi - lo) * u(rng));
        std::sort(g.begin(), g.end());
        if (std::adjacent_find(g.begin(), g.end()) != g.end()) continue;
        if (ratio_sum(g) < best - 1e-9) ++beaten;
      }
      // local refinement: nudge each interior knot in log scale
      for (std::size_t k = 1; k < K; ++k) {
        for (double eps : {1e-3, -1e-3, 1e-5, -1e-5}) {
          auto g = geo;
          g[k] *= std::exp(eps);
          worst_local = std::max(worst_local, best - ratio_sum(g));
        }
      }
    }
  }
  report(5, "geometric grid minimises the squared-ratio sum", beaten == 0 && worst_local <= 1e-9,
         fmt("%.0f random grids beat geometric, best local gain %.2e", double(beaten), worst_local), t0);
}

void criterion6() {
  const auto t0 = Clock::now();
  MmseCurve q(pm1(), QuadraturePolicy{});
  std::vector<double> ks, es, es_wide;
  for (std::size_t K : {4u, 8u, 16u, 32u, 64u}) {
    ks.push_back(double(K));
    es.push_back(disc_error(q, grid_geometric(2.0, 0.125, K)).value);
    es_wide.push_back(disc_error(q, grid_geometric(1.0, 1e-3, K)).value);
  }
  const double s = slope(ks, es);
  const double s_wide = slope(ks, es_wide);
  report(6, "discretisation error decays like 1/K on geometric grids", std::abs(s + 1.0) <= 0.15,
         fmt("gamma in [0.5, 8]: slope %.3f; for reference gamma in [1, 1000]: slope %.3f", s, s_wide),
         t0);
}

void criterion7() {
  const auto t0 = Clock::now();
  Rng rng(1007);
  std::exponential_distribution<double> ex(1.0);
  std::size_t violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial;
    std::vector<double> w(m);
    double s = 0;
    for (auto& x : w) s += (x = std::pow(ex(rng), 2.0 + trial % 3) + 1e-4);
    std::vector<Atom> atoms;
    double acc = 0;
    for (int i = 0; i < m; ++i) {
      const double p = i + 1 == m ? 1.0 - acc : w[i] / s;
      acc += p;
      atoms.push_back({{double(i)}, p});
    }
    const auto info = fit_subexponential(TargetDistribution::discrete(atoms), 2.0);
    if (info.shannon > info.renyi_half + 1e-10) ++violations;
    if (info.renyi_half > info.shannon + 0.5 * info.nu_sq + 1e-10) ++violations;
  }
  report(7, "entropy inequalities", violations == 0, fmt("20 distributions, %.0f violations", double(violations)), t0);
}

void criterion8() {
  const auto t0 = Clock::now();
  std::vector<double> knots;
  for (double g = 0.25; g < 64.0 * 1.0001; g *= std::sqrt(2.0)) knots.push_back(g);
  knots.back() = 64.0;
  const auto fit = theorem1_check(pm1(), knots, QuadraturePolicy{});
  const double at64 = fit.ratios.back();
  const double rest = *std::max_element(fit.ratios.begin(), fit.ratios.end() - 1);
  report(8, "scaled derivative stays bounded", std::isfinite(fit.constant) && at64 <= 1.2 * rest,
         fmt("fitted constant %.4f, value at 64 %.3e", fit.constant, at64), t0);
}

void criterion9() {
  const auto t0 = Clock::now();
  ToyConfig cfg;
  cfg.sampler.n_samples = 20000;
  cfg.sampler.seed = 2024;
  bool pass = true;
  std::string detail;
  for (const char* toy : {"circle8", "grid8"}) {
    const auto d = build_toy(toy);
    const auto rows = run_toy(d, cfg, {ScheduleKind::kLas, ScheduleKind::kTimeUniform, ScheduleKind::kEdm},
                              {5, 7});
    for (std::size_t K : {5u, 7u}) {
      Estimate v[3];
      for (const auto& r : rows) {
        if (r.K != K) continue;
        const int slot = r.kind == ScheduleKind::kLas ? 0 : r.kind == ScheduleKind::kTimeUniform ? 1 : 2;
        v[slot] = r.report.nll;
      }
      auto gap_ok = [](const Estimate& a, const Estimate& b) {
        return b.value - a.value > 3.0 * std::hypot(a.std_error, b.std_error);
      };
      const bool ok = gap_ok(v[0], v[1]) && gap_ok(v[1], v[2]);
      pass = pass && ok;
      if (!detail.empty()) detail += "; ";
      detail += std::string(toy) + " K=" + std::to_string(K) +
                fmt(" las %.3f, uniform %.3f, edm %.3f (se %.3f)", v[0].value, v[1].value, v[2].value,
                    std::max({v[0].std_error, v[1].std_error, v[2].std_error}));
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(9, "toy NLL ordering las < time-uniform < edm", pass && secs < 600.0, detail, t0);
}

void criterion10() {
  const auto t0 = Clock::now();
  Rng rng(1010);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MmseCurve cf(TargetDistribution::single_gaussian({0.0}, 1.0), ClosedFormPolicy{});
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> g{std::exp(-2.0 + u(rng))};
    const int K = 2 + trial % 6;
    for (int k = 0; k < K; ++k) g.push_back(g.back() * std::exp(0.1 + 2.0 * u(rng)));
    std::vector<LossKnot> knots;
    for (double x : g) knots.push_back({x, 1.0 / (1.0 + x) + 0.3 * u(rng), LossKind::kX0});
    const LossProfile loss(knots);
    const SnrGrid grid(g);
    const double lhs = combined_objective(loss, grid) - cf.integral(g.front(), g.back()).value;
    const double rhs = disc_error(cf, grid).value + apx_error(loss, cf, grid).value.value;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  report(10, "combined objective splits into discretisation and approximation", worst <= 1e-9,
         fmt("10 pairs, worst gap %.2e", worst), t0);
}

void criterion11() {
  const auto t0 = Clock::now();
  Rng rng(1011);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double gamma = std::exp(-8.0 + 16.0 * u(rng));
    const double x0 = std::exp(-6.0 + 8.0 * u(rng));
    const double back = eps_to_x0(gamma * x0, gamma);
    worst = std::max(worst, std::abs(back - x0) / x0);
    const double eps = std::exp(-6.0 + 8.0 * u(rng));
    worst = std::max(worst, std::abs(eps_to_x0(eps, gamma) * gamma - eps) / eps);
  }
  report(11, "eps to x0 conversion", worst <= 1e-12, fmt("1000 pairs, worst relative error %.2e", worst), t0);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  std::printf("%d of 11 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
