// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#include "las/error_functionals.hpp"

#include <algorithm>
#include <cmath>

namespace las {

namespace {

constexpr std::uint64_t kTagPathwise = 0x70617468ULL;  // "path"
constexpr std::size_t kPathChunk = 2048;

}  // namespace

SnrGrid::SnrGrid(std::vector<double> gammas) : gammas_(std::move(gammas)) {
  if (gammas_.size() < 2) throw DomainError("SNR grid needs at least two knots");
  for (std::size_t k = 0; k < gammas_.size(); ++k) {
    if (!(gammas_[k] > 0.0) || !std::isfinite(gammas_[k])) {
      throw DomainError("SNR knots must be positive and finite");
    }
    if (k > 0 && !(gammas_[k] > gammas_[k - 1])) {
      throw DomainError("SNR knots must be strictly increasing");
    }
  }
}

std::vector<double> SnrGrid::ratios() const {
  std::vector<double> r;
  for (std::size_t k = 1; k < gammas_.size(); ++k) r.push_back(gammas_[k] / gammas_[k - 1]);
  return r;
}

std::vector<double> SnrGrid::log_steps() const {
  std::vector<double> h;
  for (std::size_t k = 1; k < gammas_.size(); ++k) {
    h.push_back(std::log(gammas_[k]) - std::log(gammas_[k - 1]));
  }
  return h;
}

std::vector<double> SnrGrid::times() const {
  std::vector<double> s;
  const double T = this->T();
  for (double g : gammas_) s.push_back(T - 1.0 / g);
  s.front() = 0.0;
  return s;
}

std::vector<double> SnrGrid::noise_times() const {
  std::vector<double> t;
  for (double g : gammas_) t.push_back(1.0 / g);
  return t;
}

// ---------------------------------------------------------------------------

LossProfile::LossProfile(std::vector<LossKnot> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw InvalidArgument("loss profile needs at least one knot");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const auto& k = knots_[i];
    if (!(k.gamma > 0.0) || !std::isfinite(k.gamma)) {
      throw InvalidArgument("loss knots need positive finite gamma");
    }
    if (!(k.loss >= 0.0) || !std::isfinite(k.loss)) {
      throw InvalidArgument("losses must be finite and non-negative");
    }
    if (i > 0 && !(k.gamma > knots_[i - 1].gamma)) {
      throw InvalidArgument("loss knots must be strictly ascending in gamma");
    }
  }
}

LossProfile LossProfile::to_x0() const {
  std::vector<LossKnot> out;
  out.reserve(knots_.size());
  for (const auto& k : knots_) {
    out.push_back({k.gamma, k.kind == LossKind::kEps ? eps_to_x0(k.loss, k.gamma) : k.loss,
                   LossKind::kX0});
  }
  return LossProfile(std::move(out));
}

double LossProfile::x0_at(double gamma) const {
  auto x0 = [](const LossKnot& k) {
    return k.kind == LossKind::kEps ? eps_to_x0(k.loss, k.gamma) : k.loss;
  };
  if (!(gamma >= min_gamma() && gamma <= max_gamma())) {
    throw ExtrapolationError("loss profile does not cover gamma = " + format_double(gamma));
  }
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), gamma,
                                   [](const LossKnot& k, double g) { return k.gamma < g; });
  if (it->gamma == gamma) return x0(*it);
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (std::log(gamma) - std::log(lo.gamma)) /
                   (std::log(hi.gamma) - std::log(lo.gamma));
  return (1.0 - w) * x0(lo) + w * x0(hi);
}

double eps_to_x0(double loss_eps, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("eps_to_x0 needs gamma > 0");
  return loss_eps / gamma;
}

double ddpm_snr(double alpha_bar) {
  if (!(alpha_bar > 0.0 && alpha_bar < 1.0)) throw DomainError("alpha_bar must lie in (0, 1)");
  return alpha_bar / (1.0 - alpha_bar);
}

// ---------------------------------------------------------------------------

Estimate disc_error(const MmseCurve& curve, const SnrGrid& grid) {
  return curve.area_gap_sum(grid.gammas());
}

ApxResult apx_error(const LossProfile& loss, const MmseCurve& oracle, const SnrGrid& grid) {
  const auto& g = grid.gammas();
  ApxResult out;
  CompensatedSum total;
  double err = 0.0;
  for (std::size_t k = 1; k < g.size(); ++k) {
    const double a = g[k - 1];
    const double l = loss.x0_at(a);
    const Estimate m = oracle.value(a);
    double excess = l - m.value;
    if (excess < 0.0) {
      excess = 0.0;
      ++out.clamped;
    }
    total.add((g[k] - a) * excess);
    err += (g[k] - a) * m.std_error;
    out.eps_excess.push_back(a * excess);
  }
  out.value = {total.value(), err};
  if (is_geometric(grid)) {
    const double r1 = std::expm1(std::log(grid.Lambda()) / static_cast<double>(grid.steps()));
    CompensatedSum s;
    for (double e : out.eps_excess) s.add(e);
    out.geometric_form = r1 * s.value();
  }
  return out;
}

double combined_objective(const LossProfile& loss, const SnrGrid& grid) {
  const auto& g = grid.gammas();
  CompensatedSum s;
  for (std::size_t k = 1; k < g.size(); ++k) s.add((g[k] - g[k - 1]) * loss.x0_at(g[k - 1]));
  return s.value();
}

bool is_geometric(const SnrGrid& grid, double rel_tol) {
  const auto r = grid.ratios();
  for (double x : r) {
    if (std::abs(x - r.front()) > rel_tol * r.front()) return false;
  }
  return true;
}

FinalBounds final_bounds(const SnrGrid& grid, double entropy, double c_fit, double eps_bar) {
  FinalBounds b;
  const double K = static_cast<double>(grid.steps());
  const double log_lambda = std::log(grid.Lambda());
  CompensatedSum s;
  for (double r : grid.ratios()) s.add((r - 1.0) * (r - 1.0));
  b.sum_sq_ratio = s.value();
  const double r1 = std::expm1(log_lambda / K);
  b.geo_sum_sq_ratio = K * r1 * r1;
  const double ch2 = c_fit * c_fit * entropy * entropy;
  b.disc_bound = 0.5 * ch2 * b.sum_sq_ratio;
  b.geo_disc_bound = 0.5 * ch2 * b.geo_sum_sq_ratio;
  b.kl_applicable = K >= log_lambda;
  if (b.kl_applicable) b.kl_total = log_lambda * (ch2 * log_lambda / K + eps_bar);
  return b;
}

// ---------------------------------------------------------------------------

Estimate pathwise_kl_mc(const TargetDistribution& dist, const SnrGrid& grid,
                        const PathwiseConfig& cfg) {
  if (cfg.n_paths == 0) throw InvalidConfig("pathwise_kl_mc needs n_paths > 0");
  if (cfg.substeps < 4) throw InvalidConfig("pathwise_kl_mc needs at least 4 substeps");
  const std::size_t d = dist.dim();
  const std::size_t K = grid.steps();
  const std::size_t M = cfg.substeps;
  const auto t = grid.noise_times();  // decreasing
  std::vector<double> per_path(cfg.n_paths);

  parallel_chunks(cfg.n_paths, kPathChunk, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng(derive_seed(cfg.seed, kTagPathwise, chunk));
    std::normal_distribution<double> normal;
    PosteriorEngine engine(dist);
    Vec z(d), x(d), anchor(d), m(d), w_sub(d), w_next(d);
    std::vector<double> w_grid((K + 1) * d);
    for (std::size_t p = begin; p < end; ++p) {
      dist.sample(rng, z);
      // Forward Brownian motion at grid times, from the smallest t upward.
      for (std::size_t c = 0; c < d; ++c) w_grid[K * d + c] = std::sqrt(t[K]) * normal(rng);
      for (std::size_t k = K; k-- > 0;) {
        const double sd = std::sqrt(t[k] - t[k + 1]);
        for (std::size_t c = 0; c < d; ++c) {
          w_grid[k * d + c] = w_grid[(k + 1) * d + c] + sd * normal(rng);
        }
      }

      double total = 0.0;
      for (std::size_t k = 1; k <= K; ++k) {
        const double t_hi = t[k - 1];
        const double t_lo = t[k];
        for (std::size_t c = 0; c < d; ++c) {
          w_sub[c] = w_grid[(k - 1) * d + c];
          x[c] = z[c] + w_sub[c];
        }
        engine.denoise(t_hi, x, anchor);

        // Bridge from (t_hi, W(t_hi)) towards (t_lo, W(t_lo)).
        double tau_prev = t_hi;
        double acc = 0.0;  // f_0 = 0
        const double h = (t_hi - t_lo) / static_cast<double>(M);
        for (std::size_t j = 1; j <= M; ++j) {
          const double tau = (j == M) ? t_lo : t_hi + (t_lo - t_hi) * static_cast<double>(j) / static_cast<double>(M);
          if (j == M) {
            for (std::size_t c = 0; c < d; ++c) w_sub[c] = w_grid[k * d + c];
          } else {
            const double frac = (tau - t_lo) / (tau_prev - t_lo);
            const double var = (tau_prev - tau) * (tau - t_lo) / (tau_prev - t_lo);
            const double sd = std::sqrt(std::max(var, 0.0));
            for (std::size_t c = 0; c < d; ++c) {
              const double w_end = w_grid[k * d + c];
              w_sub[c] = w_end + frac * (w_sub[c] - w_end) + sd * normal(rng);
            }
          }
          tau_prev = tau;
          for (std::size_t c = 0; c < d; ++c) x[c] = z[c] + w_sub[c];
          engine.denoise(tau, x, m);
          const double f = squared_distance(m, anchor) / (tau * tau);
          acc += (j == M) ? 0.5 * f : f;
        }
        total += h * acc;
      }
      per_path[p] = 0.5 * total;
    }
  });
  return mean_and_stderr(per_path);
}

ErrorReport error_report(const MmseCurve& curve, const SnrGrid& grid, const LossProfile* loss) {
  ErrorReport r;
  r.e_disc = disc_error(curve, grid);
  r.mmse_integral = curve.integral(grid.gammas().front(), grid.gammas().back());
  if (loss != nullptr) {
    r.e_apx = apx_error(*loss, curve, grid).value;
    r.combined = combined_objective(*loss, grid);
  } else {
    r.combined = r.e_disc.value + r.mmse_integral.value;
  }
  r.kl_path_bound = 0.5 * (r.e_disc.value + r.e_apx.value);
  return r;
}

}  // namespace las
