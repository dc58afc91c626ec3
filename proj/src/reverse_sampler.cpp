// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#include "las/reverse_sampler.hpp"

#include <cmath>
#include <random>

#include "las/gauss_channel.hpp"

namespace las {

namespace {

constexpr std::uint64_t kTagSampler = 0x73616d70ULL;  // "samp"
constexpr std::size_t kChainChunk = 1024;

void step_into(std::span<const double> state, double t_prev, double t_next,
               std::span<const double> anchor, std::span<const double> noise,
               std::span<double> out) {
  const double shrink = t_next / t_prev;
  const double sd = std::sqrt(t_next * (t_prev - t_next) / t_prev);
  for (std::size_t c = 0; c < state.size(); ++c) {
    out[c] = anchor[c] + shrink * (state[c] - anchor[c]) + sd * noise[c];
  }
}

std::vector<double> per_interval_sigma(const SamplerConfig& cfg, std::size_t K) {
  std::vector<double> s(K, 0.0);
  if (cfg.denoiser == DenoiserKind::kOracle) return s;
  if (cfg.sigma_err.size() == 1) {
    s.assign(K, cfg.sigma_err[0]);
  } else if (cfg.sigma_err.size() == K) {
    s = cfg.sigma_err;
  } else if (!cfg.sigma_err.empty()) {
    throw InvalidConfig("sigma_err needs 1 or K entries");
  }
  return s;
}

void validate(const SamplerConfig& cfg) {
  if (cfg.n_samples < 1) throw InvalidConfig("sampler needs n_samples >= 1");
  for (double s : cfg.sigma_err) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidConfig("sigma_err must be >= 0");
  }
}

SampleRun run(const TargetDistribution& dist, const SnrGrid& grid, const SamplerConfig& cfg,
              bool second_order) {
  validate(cfg);
  const std::size_t d = dist.dim();
  const std::size_t K = grid.steps();
  const std::size_t n = cfg.n_samples;
  if (second_order && K < 2) throw InvalidArgument("second-order sampling needs K >= 2");
  const auto t = grid.noise_times();
  const auto sig = per_interval_sigma(cfg, K);
  std::vector<double> coef(K + 1, 0.0);
  if (second_order) {
    for (std::size_t k = 2; k <= K; ++k) coef[k] = extrapolation_coefficient(grid, k);
  }
  const double prior_sd = std::sqrt(t[0] + dist.covariance_trace() / static_cast<double>(d));

  SampleRun out;
  out.dim = d;
  out.samples.assign(n * d, 0.0);
  if (cfg.final_denoise) out.denoised.assign(n * d, 0.0);

  parallel_chunks(n, kChainChunk, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng(derive_seed(cfg.seed, kTagSampler, chunk));
    std::normal_distribution<double> normal;
    PosteriorEngine engine(dist);
    Vec y(d), z(d), anchor(d), cur(d), prev(d), xi(d), next(d);
    for (std::size_t i = begin; i < end; ++i) {
      if (cfg.init == InitMode::kExactForward) {
        dist.sample(rng, z);
        const double sd = std::sqrt(t[0]);
        for (std::size_t c = 0; c < d; ++c) y[c] = z[c] + sd * normal(rng);
      } else {
        for (std::size_t c = 0; c < d; ++c) y[c] = prior_sd * normal(rng);
      }
      for (std::size_t k = 1; k <= K; ++k) {
        engine.denoise(t[k - 1], y, cur);
        if (sig[k - 1] > 0.0) {
          for (std::size_t c = 0; c < d; ++c) cur[c] += sig[k - 1] * normal(rng);
        }
        if (second_order && k >= 2) {
          for (std::size_t c = 0; c < d; ++c) anchor[c] = cur[c] + coef[k] * (cur[c] - prev[c]);
        } else {
          anchor = cur;
        }
        for (std::size_t c = 0; c < d; ++c) xi[c] = normal(rng);
        step_into(y, t[k - 1], t[k], anchor, xi, next);
        std::swap(y, next);
        std::swap(prev, cur);
      }
      std::copy(y.begin(), y.end(), out.samples.begin() + static_cast<std::ptrdiff_t>(i * d));
      if (cfg.final_denoise) {
        engine.denoise(t[K], y,
                       std::span<double>(out.denoised.data() + i * d, d));
      }
    }
  });

  auto& rep = out.report;
  rep.n_samples = n;
  rep.schedule = grid.gammas();
  rep.config = cfg;
  if (!dist.is_discrete()) {
    rep.nll_available = true;
    rep.nll = mean_nll(dist, out.samples);
    if (cfg.final_denoise) rep.nll_denoised = mean_nll(dist, out.denoised);
  }
  return out;
}

}  // namespace

Vec reverse_step(std::span<const double> state, double t_prev, double t_next,
                 std::span<const double> anchor, std::span<const double> noise) {
  if (!(t_next > 0.0) || !(t_next < t_prev)) {
    throw InvalidArgument("reverse_step needs 0 < t_next < t_prev");
  }
  if (anchor.size() != state.size() || noise.size() != state.size()) {
    throw InvalidArgument("reverse_step dimension mismatch");
  }
  Vec out(state.size());
  step_into(state, t_prev, t_next, anchor, noise, out);
  return out;
}

double extrapolation_coefficient(const SnrGrid& grid, std::size_t k) {
  if (k < 2 || k > grid.steps()) throw InvalidArgument("extrapolation needs 2 <= k <= K");
  const auto h = grid.log_steps();
  return h[k - 1] / (2.0 * h[k - 2]);
}

SampleRun sample(const TargetDistribution& dist, const SnrGrid& grid, const SamplerConfig& cfg) {
  return run(dist, grid, cfg, cfg.order == SamplerOrder::kSecond);
}

SampleRun second_order_sample(const TargetDistribution& dist, const SnrGrid& grid,
                              const SamplerConfig& cfg) {
  SamplerConfig c = cfg;
  c.order = SamplerOrder::kSecond;
  return run(dist, grid, c, true);
}

Estimate mean_nll(const TargetDistribution& dist, std::span<const double> rows) {
  const std::size_t d = dist.dim();
  const std::size_t n = rows.size() / d;
  std::vector<double> nll(n);
  for (std::size_t i = 0; i < n; ++i) nll[i] = -dist.log_density(rows.subspan(i * d, d));
  return mean_and_stderr(nll);
}

}  // namespace las
