// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#include "las/gauss_channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "las/quadrature.hpp"

namespace las {

namespace {

constexpr std::uint64_t kTagChannel = 0x6368616e6e656cULL;   // "channel"
constexpr std::uint64_t kTagFourth = 0x666f75727468ULL;      // "fourth"
constexpr std::size_t kChunk = 4096;

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("channel time must be positive and finite");
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("SNR must be positive and finite");
}

struct Pair {
  Estimate trace;
  Estimate frob;
};

// d = 1: the posterior variance concentrates in narrow bumps between
// centers at high SNR, which a Hermite rule undersamples. Integrate the
// marginal density times the summary over x instead, with breakpoints at
// centers and midpoints.
Pair adaptive_expect_1d(PosteriorEngine& engine,
                        const std::vector<std::pair<double, Vec>>& centers,
                        const std::vector<double>& scales, double t) {
  std::vector<double> mu;
  double smax = 0.0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    mu.push_back(centers[c].second[0]);
    smax = std::max(smax, scales[c]);
  }
  std::sort(mu.begin(), mu.end());
  std::vector<double> brk{mu.front() - 12.0 * smax};
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (i > 0) brk.push_back(0.5 * (mu[i - 1] + mu[i]));
    brk.push_back(mu[i]);
  }
  brk.push_back(mu.back() + 12.0 * smax);

  auto density = [&](double x) {
    double p = 0.0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double z = (x - centers[c].second[0]) / scales[c];
      p += centers[c].first * std::exp(-0.5 * z * z) / (scales[c] * std::sqrt(2.0 * std::numbers::pi));
    }
    return p;
  };
  Vec x(1);
  auto integrate = [&](bool frob) {
    CompensatedSum total;
    for (std::size_t i = 1; i < brk.size(); ++i) {
      if (!(brk[i] > brk[i - 1])) continue;
      total.add(adaptive_simpson(
          [&](double v) {
            x[0] = v;
            const auto& ps = engine.compute(t, x);
            return density(v) * (frob ? ps.cov_frobenius_sq : ps.cov_trace);
          },
          brk[i - 1], brk[i], 1e-11, 1e-300, 30));
    }
    return total.value();
  };
  return {{integrate(false), 0.0}, {integrate(true), 0.0}};
}

// E over X_t of (tr Sigma, tr Sigma^2) by tensor Gauss-Hermite, conditioning
// on the component / atom that generated X_t.
Pair quadrature_expect(const TargetDistribution& dist, double t, std::size_t nodes) {
  const std::size_t d = dist.dim();
  if (d > 2) throw UnsupportedVariant("quadrature policy supports dim <= 2 only");
  const auto& rule = gauss_hermite(nodes);
  PosteriorEngine engine(dist);

  std::vector<std::pair<double, Vec>> centers;
  std::vector<double> scales;
  if (dist.is_discrete()) {
    for (const auto& a : dist.finite().atoms) {
      centers.emplace_back(a.prob, a.point);
      scales.push_back(std::sqrt(t));
    }
  } else {
    for (const auto& c : dist.mixture().components) {
      centers.emplace_back(c.weight, c.mean);
      scales.push_back(std::sqrt(c.sigma * c.sigma + t));
    }
  }

  if (d == 1) return adaptive_expect_1d(engine, centers, scales, t);

  CompensatedSum tr_sum, fr_sum;
  Vec x(d);
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double pc = centers[c].first;
    const Vec& mu = centers[c].second;
    const double s = scales[c];
    if (d == 1) {
      for (std::size_t i = 0; i < nodes; ++i) {
        x[0] = mu[0] + s * rule.nodes[i];
        const auto& ps = engine.compute(t, x);
        const double w = pc * rule.weights[i];
        tr_sum.add(w * ps.cov_trace);
        fr_sum.add(w * ps.cov_frobenius_sq);
      }
    } else {
      for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t j = 0; j < nodes; ++j) {
          x[0] = mu[0] + s * rule.nodes[i];
          x[1] = mu[1] + s * rule.nodes[j];
          const auto& ps = engine.compute(t, x);
          const double w = pc * rule.weights[i] * rule.weights[j];
          tr_sum.add(w * ps.cov_trace);
          fr_sum.add(w * ps.cov_frobenius_sq);
        }
      }
    }
  }
  return {{tr_sum.value(), 0.0}, {fr_sum.value(), 0.0}};
}

Pair monte_carlo_expect(const TargetDistribution& dist, const ChannelSamples& smp,
                        double t) {
  std::vector<double> tr(smp.n), fr(smp.n);
  const double sq = std::sqrt(t);
  parallel_chunks(smp.n, kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
    PosteriorEngine engine(dist);
    Vec x(smp.dim);
    for (std::size_t i = begin; i < end; ++i) {
      const auto z = smp.z_row(i);
      const auto xi = smp.noise_row(i);
      for (std::size_t k = 0; k < smp.dim; ++k) x[k] = z[k] + sq * xi[k];
      const auto& ps = engine.compute(t, x);
      tr[i] = ps.cov_trace;
      fr[i] = ps.cov_frobenius_sq;
    }
  });
  return {mean_and_stderr(tr), mean_and_stderr(fr)};
}

double closed_form_mmse(const TargetDistribution& dist, double gamma) {
  if (dist.is_discrete()) return 0.0;  // point mass
  const auto& c = dist.mixture().components.front();
  const double v = c.sigma * c.sigma;
  return static_cast<double>(dist.dim()) * v / (1.0 + v * gamma);
}

double closed_form_dmmse(const TargetDistribution& dist, double gamma) {
  if (dist.is_discrete()) return 0.0;
  const auto& c = dist.mixture().components.front();
  const double v = c.sigma * c.sigma;
  const double s = v / (1.0 + v * gamma);
  return -static_cast<double>(dist.dim()) * s * s;
}

void require_closed_form(const TargetDistribution& dist) {
  if (!has_closed_form(dist)) {
    throw UnsupportedVariant("closed-form mmse needs a single Gaussian or a point mass");
  }
}

void require_samples(const MonteCarloPolicy& mc) {
  if (mc.n_samples == 0) throw InvalidConfig("monte carlo policy needs n_samples > 0");
}

Pair evaluate(const TargetDistribution& dist, double gamma, const MmsePolicy& policy,
              const ChannelSamples* shared) {
  check_gamma(gamma);
  const double t = 1.0 / gamma;
  if (std::holds_alternative<ClosedFormPolicy>(policy)) {
    require_closed_form(dist);
    return {{closed_form_mmse(dist, gamma), 0.0}, {-closed_form_dmmse(dist, gamma), 0.0}};
  }
  if (const auto* q = std::get_if<QuadraturePolicy>(&policy)) {
    return quadrature_expect(dist, t, q->nodes);
  }
  const auto& mc = std::get<MonteCarloPolicy>(policy);
  require_samples(mc);
  if (shared != nullptr) return monte_carlo_expect(dist, *shared, t);
  const auto smp = draw_channel_samples(dist, mc.n_samples, mc.seed);
  return monte_carlo_expect(dist, smp, t);
}

// Composite Simpson nodes/weights on [ln a, ln b] for integrals in gamma,
// i.e. weights already include the Jacobian e^u.
void simpson_log_nodes(double a, double b, std::vector<double>& gammas,
                       std::vector<double>& weights) {
  const double ua = std::log(a);
  const double ub = std::log(b);
  std::size_t panels = static_cast<std::size_t>(std::ceil(64.0 * (ub - ua)));
  panels = std::max<std::size_t>(panels, 16);
  if (panels % 2 == 1) ++panels;
  const double h = (ub - ua) / static_cast<double>(panels);
  gammas.resize(panels + 1);
  weights.resize(panels + 1);
  for (std::size_t j = 0; j <= panels; ++j) {
    const double u = (j == panels) ? ub : ua + h * static_cast<double>(j);
    const double c = (j == 0 || j == panels) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    gammas[j] = (j == 0) ? a : (j == panels ? b : std::exp(u));
    weights[j] = c * h / 3.0 * gammas[j];
  }
}

void check_knots(std::span<const double> gammas) {
  if (gammas.size() < 2) throw DomainError("need at least two SNR knots");
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    check_gamma(gammas[k]);
    if (k > 0 && !(gammas[k] > gammas[k - 1])) {
      throw DomainError("SNR knots must be strictly increasing");
    }
  }
}

}  // namespace

ChannelPoint ChannelPoint::from_time(double t, Vec x) {
  check_time(t);
  return ChannelPoint{t, 1.0 / t, std::move(x)};
}

ChannelPoint ChannelPoint::from_snr(double gamma, Vec x) {
  check_gamma(gamma);
  return ChannelPoint{1.0 / gamma, gamma, std::move(x)};
}

// ---------------------------------------------------------------------------

PosteriorEngine::PosteriorEngine(const TargetDistribution& dist)
    : dist_(&dist), dim_(dist.dim()) {
  const std::size_t n = dist.size();
  summary_.weights.resize(n);
  summary_.mean.resize(dim_);
  log_w_.resize(n);
  shrink_.resize(n);
  comp_means_.resize(n * dim_);
  cov_.resize(dim_ * dim_);
}

void PosteriorEngine::weights(double t, std::span<const double> x) {
  const std::size_t n = log_w_.size();
  const double d = static_cast<double>(dim_);
  if (dist_->is_discrete()) {
    const auto& atoms = dist_->finite().atoms;
    for (std::size_t i = 0; i < n; ++i) {
      log_w_[i] = std::log(atoms[i].prob) - 0.5 * squared_distance(x, atoms[i].point) / t;
    }
  } else {
    const auto& comps = dist_->mixture().components;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = comps[i].sigma * comps[i].sigma + t;
      log_w_[i] = std::log(comps[i].weight) - 0.5 * d * std::log(v) -
                  0.5 * squared_distance(x, comps[i].mean) / v;
    }
  }
  const double mx = *std::max_element(log_w_.begin(), log_w_.end());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    summary_.weights[i] = std::exp(log_w_[i] - mx);
    total += summary_.weights[i];
  }
  for (double& w : summary_.weights) w /= total;
}

void PosteriorEngine::denoise(double t, std::span<const double> x, std::span<double> out) {
  weights(t, x);
  std::fill(out.begin(), out.end(), 0.0);
  const auto& w = summary_.weights;
  if (dist_->is_discrete()) {
    const auto& atoms = dist_->finite().atoms;
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t k = 0; k < dim_; ++k) out[k] += w[i] * atoms[i].point[k];
  } else {
    const auto& comps = dist_->mixture().components;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double v = comps[i].sigma * comps[i].sigma;
      const double s = v / (v + t);
      for (std::size_t k = 0; k < dim_; ++k) {
        out[k] += w[i] * (comps[i].mean[k] + s * (x[k] - comps[i].mean[k]));
      }
    }
  }
}

const PosteriorSummary& PosteriorEngine::compute(double t, std::span<const double> x) {
  weights(t, x);
  const std::size_t n = log_w_.size();
  const auto& w = summary_.weights;
  auto& m = summary_.mean;
  std::fill(m.begin(), m.end(), 0.0);
  std::fill(cov_.begin(), cov_.end(), 0.0);

  double iso = 0.0;  // isotropic within-component posterior variance
  if (dist_->is_discrete()) {
    const auto& atoms = dist_->finite().atoms;
    for (std::size_t i = 0; i < n; ++i)
      std::copy(atoms[i].point.begin(), atoms[i].point.end(), comp_means_.begin() + i * dim_);
  } else {
    const auto& comps = dist_->mixture().components;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = comps[i].sigma * comps[i].sigma;
      const double s = v / (v + t);
      for (std::size_t k = 0; k < dim_; ++k) {
        comp_means_[i * dim_ + k] = comps[i].mean[k] + s * (x[k] - comps[i].mean[k]);
      }
      iso += w[i] * v * t / (v + t);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim_; ++k) m[k] += w[i] * comp_means_[i * dim_ + k];

  for (std::size_t i = 0; i < n; ++i) {
    const double* c = comp_means_.data() + i * dim_;
    for (std::size_t a = 0; a < dim_; ++a) {
      const double da = c[a] - m[a];
      for (std::size_t b = a; b < dim_; ++b) cov_[a * dim_ + b] += w[i] * da * (c[b] - m[b]);
    }
  }
  double tr = 0.0, fr = 0.0;
  for (std::size_t a = 0; a < dim_; ++a) {
    cov_[a * dim_ + a] += iso;
    tr += cov_[a * dim_ + a];
    fr += cov_[a * dim_ + a] * cov_[a * dim_ + a];
    for (std::size_t b = a + 1; b < dim_; ++b) fr += 2.0 * cov_[a * dim_ + b] * cov_[a * dim_ + b];
  }
  summary_.cov_trace = std::max(tr, 0.0);
  summary_.cov_frobenius_sq = std::max(fr, 0.0);
  return summary_;
}

PosteriorSummary posterior(const TargetDistribution& dist, const ChannelPoint& point) {
  check_time(point.t);
  if (point.x.size() != dist.dim()) throw InvalidArgument("observation dimension mismatch");
  PosteriorEngine engine(dist);
  return engine.compute(point.t, point.x);
}

double posterior_fourth_moment_about(const TargetDistribution& dist,
                                     const ChannelPoint& point,
                                     std::span<const double> a) {
  const auto ps = posterior(dist, point);
  const auto& atoms = dist.finite().atoms;
  double s = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double r2 = squared_distance(atoms[i].point, a);
    s += ps.weights[i] * r2 * r2;
  }
  return s;
}

// ---------------------------------------------------------------------------

bool has_closed_form(const TargetDistribution& dist) { return dist.size() == 1; }

MmsePolicy default_policy(const TargetDistribution& dist, std::uint64_t seed) {
  if (has_closed_form(dist)) return ClosedFormPolicy{};
  if (dist.dim() == 1) return QuadraturePolicy{};
  return MonteCarloPolicy{100000, seed};
}

ChannelSamples draw_channel_samples(const TargetDistribution& dist, std::size_t n,
                                    std::uint64_t seed) {
  if (n == 0) throw InvalidConfig("monte carlo needs n_samples > 0");
  ChannelSamples smp;
  smp.n = n;
  smp.dim = dist.dim();
  smp.z.resize(n * smp.dim);
  smp.noise.resize(n * smp.dim);
  parallel_chunks(n, kChunk, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng(derive_seed(seed, kTagChannel, chunk));
    std::normal_distribution<double> normal;
    for (std::size_t i = begin; i < end; ++i) {
      dist.sample(rng, {smp.z.data() + i * smp.dim, smp.dim});
      for (std::size_t k = 0; k < smp.dim; ++k) smp.noise[i * smp.dim + k] = normal(rng);
    }
  });
  return smp;
}

Estimate mmse(const TargetDistribution& dist, double gamma, const MmsePolicy& policy) {
  return evaluate(dist, gamma, policy, nullptr).trace;
}

Estimate mmse_derivative(const TargetDistribution& dist, double gamma,
                         const MmsePolicy& policy) {
  const auto fr = evaluate(dist, gamma, policy, nullptr).frob;
  return {-fr.value, fr.std_error};
}

Estimate posterior_fourth_moment(const TargetDistribution& dist, double t,
                                 std::size_t n_samples, std::uint64_t seed) {
  if (!dist.is_discrete()) {
    throw UnsupportedVariant("posterior_fourth_moment needs a finite discrete target");
  }
  check_time(t);
  if (n_samples == 0) throw InvalidConfig("posterior_fourth_moment needs n_samples > 0");
  const std::size_t d = dist.dim();
  const auto& atoms = dist.finite().atoms;
  std::vector<double> vals(n_samples);
  const double sq = std::sqrt(t);
  parallel_chunks(n_samples, kChunk, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng(derive_seed(seed, kTagFourth, chunk));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    PosteriorEngine engine(dist);
    Vec z(d), x(d);
    for (std::size_t i = begin; i < end; ++i) {
      dist.sample(rng, z);
      for (std::size_t k = 0; k < d; ++k) x[k] = z[k] + sq * normal(rng);
      const auto& ps = engine.compute(t, x);
      const double u = unif(rng);
      double acc = 0.0;
      std::size_t j = 0;
      for (; j + 1 < ps.weights.size(); ++j) {
        acc += ps.weights[j];
        if (u < acc) break;
      }
      const double r2 = squared_distance(atoms[j].point, z);
      vals[i] = r2 * r2;
    }
  });
  return mean_and_stderr(vals);
}

Theorem1Fit theorem1_check(const TargetDistribution& dist,
                           std::span<const double> gamma_knots,
                           const MmsePolicy& policy) {
  Theorem1Fit fit;
  fit.entropy = shannon_entropy(dist);
  if (!(fit.entropy > 0.0)) {
    throw DegenerateEntropy("entropy is zero; the derivative bound is 0/0");
  }
  if (gamma_knots.empty()) throw InvalidArgument("theorem1_check needs at least one knot");
  const double h2 = fit.entropy * fit.entropy;
  for (double g : gamma_knots) {
    check_gamma(g);
    const double r = g * g * std::abs(mmse_derivative(dist, g, policy).value) / h2;
    fit.ratios.push_back(r);
    fit.constant = std::max(fit.constant, r);
  }
  return fit;
}

// ---------------------------------------------------------------------------

MmseCurve::MmseCurve(TargetDistribution dist, MmsePolicy policy)
    : dist_(std::make_shared<const TargetDistribution>(std::move(dist))),
      policy_(std::move(policy)) {
  if (std::holds_alternative<ClosedFormPolicy>(policy_)) require_closed_form(*dist_);
  if (const auto* mc = std::get_if<MonteCarloPolicy>(&policy_)) require_samples(*mc);
}

const ChannelSamples& MmseCurve::samples() const {
  // Caller holds mu_.
  if (!samples_) {
    const auto& mc = std::get<MonteCarloPolicy>(policy_);
    samples_ = std::make_unique<ChannelSamples>(
        draw_channel_samples(*dist_, mc.n_samples, mc.seed));
  }
  return *samples_;
}

MmseKnot MmseCurve::knot(double gamma) const {
  check_gamma(gamma);
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = knots_.find(gamma); it != knots_.end()) return it->second;
  const ChannelSamples* shared =
      std::holds_alternative<MonteCarloPolicy>(policy_) ? &samples() : nullptr;
  const Pair p = evaluate(*dist_, gamma, policy_, shared);
  MmseKnot k{gamma, p.trace, {-p.frob.value, p.frob.std_error}};
  knots_.emplace(gamma, k);
  return k;
}

Estimate MmseCurve::value(double gamma) const { return knot(gamma).mmse; }
Estimate MmseCurve::derivative(double gamma) const { return knot(gamma).derivative; }

std::vector<MmseKnot> MmseCurve::cached_knots() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<MmseKnot> out;
  for (const auto& [g, k] : knots_) out.push_back(k);
  return out;
}

double MmseCurve::closed_form_value(double gamma) const {
  return closed_form_mmse(*dist_, gamma);
}

double MmseCurve::closed_form_antiderivative(double gamma) const {
  if (dist_->is_discrete()) return 0.0;
  const auto& c = dist_->mixture().components.front();
  return static_cast<double>(dist_->dim()) * std::log1p(c.sigma * c.sigma * gamma);
}

Estimate MmseCurve::integral(double a, double b) const {
  const double g[2] = {a, b};
  check_knots(g);
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = integrals_.find({a, b}); it != integrals_.end()) return it->second;
  }
  Estimate result;
  if (std::holds_alternative<ClosedFormPolicy>(policy_)) {
    result = {closed_form_antiderivative(b) - closed_form_antiderivative(a), 0.0};
  } else if (const auto* q = std::get_if<QuadraturePolicy>(&policy_)) {
    const std::size_t nodes = q->nodes;
    auto f = [&](double u) {
      const double gg = std::exp(u);
      return quadrature_expect(*dist_, 1.0 / gg, nodes).trace.value * gg;
    };
    result = {adaptive_simpson(f, std::log(a), std::log(b), 1e-6), 0.0};
  } else {
    std::vector<double> gs, ws;
    simpson_log_nodes(a, b, gs, ws);
    std::lock_guard<std::mutex> lock(mu_);
    const auto& smp = samples();
    std::vector<double> acc(smp.n, 0.0);
    for (std::size_t j = 0; j < gs.size(); ++j) {
      const double sq = std::sqrt(1.0 / gs[j]);
      parallel_chunks(smp.n, kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        PosteriorEngine engine(*dist_);
        Vec x(smp.dim);
        for (std::size_t i = begin; i < end; ++i) {
          const auto z = smp.z_row(i);
          const auto xi = smp.noise_row(i);
          for (std::size_t k = 0; k < smp.dim; ++k) x[k] = z[k] + sq * xi[k];
          acc[i] += ws[j] * engine.compute(1.0 / gs[j], x).cov_trace;
        }
      });
    }
    result = mean_and_stderr(acc);
  }
  std::lock_guard<std::mutex> lock(mu_);
  integrals_.emplace(std::make_pair(a, b), result);
  return result;
}

Estimate MmseCurve::area_gap_sum(std::span<const double> gammas) const {
  check_knots(gammas);
  if (std::holds_alternative<ClosedFormPolicy>(policy_)) {
    CompensatedSum s;
    for (std::size_t k = 1; k < gammas.size(); ++k) {
      const double a = gammas[k - 1], b = gammas[k];
      s.add((b - a) * closed_form_value(a) -
            (closed_form_antiderivative(b) - closed_form_antiderivative(a)));
    }
    return {s.value(), 0.0};
  }
  if (const auto* q = std::get_if<QuadraturePolicy>(&policy_)) {
    const std::size_t nodes = q->nodes;
    CompensatedSum s;
    for (std::size_t k = 1; k < gammas.size(); ++k) {
      const double a = gammas[k - 1];
      const double left = quadrature_expect(*dist_, 1.0 / a, nodes).trace.value;
      auto gap = [&](double u) {
        const double gg = std::exp(u);
        return (left - quadrature_expect(*dist_, 1.0 / gg, nodes).trace.value) * gg;
      };
      s.add(adaptive_simpson(gap, std::log(a), std::log(gammas[k]), 1e-6));
    }
    return {s.value(), 0.0};
  }

  // Monte Carlo: per-sample area gaps on shared (Z, xi) draws.
  std::lock_guard<std::mutex> lock(mu_);
  const auto& smp = samples();
  std::vector<double> acc(smp.n, 0.0);
  std::vector<double> gs, ws;
  for (std::size_t k = 1; k < gammas.size(); ++k) {
    const double a = gammas[k - 1], b = gammas[k];
    simpson_log_nodes(a, b, gs, ws);
    parallel_chunks(smp.n, kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
      PosteriorEngine engine(*dist_);
      Vec x(smp.dim);
      for (std::size_t i = begin; i < end; ++i) {
        const auto z = smp.z_row(i);
        const auto xi = smp.noise_row(i);
        auto trace_at = [&](double g) {
          const double sq = std::sqrt(1.0 / g);
          for (std::size_t c = 0; c < smp.dim; ++c) x[c] = z[c] + sq * xi[c];
          return engine.compute(1.0 / g, x).cov_trace;
        };
        const double left = trace_at(a);
        double integral = 0.0;
        for (std::size_t j = 0; j < gs.size(); ++j) integral += ws[j] * trace_at(gs[j]);
        acc[i] += (b - a) * left - integral;
      }
    });
  }
  return mean_and_stderr(acc);
}

}  // namespace las
