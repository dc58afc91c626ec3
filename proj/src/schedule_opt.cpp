// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#include "las/schedule_opt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace las {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieRelTol = 1e-12;

void check_endpoints(double T, double delta, std::size_t K) {
  if (!(delta > 0.0) || !(delta < T) || !std::isfinite(T)) {
    throw InvalidArgument("grid endpoints need 0 < delta < T");
  }
  if (K < 1) throw InvalidArgument("grid needs K >= 1");
}

// cand is better than best beyond rounding noise.
bool strictly_better(double cand, double best) {
  if (best == kInf) return cand < kInf;
  const double scale = std::max(std::abs(cand), std::abs(best));
  return cand < best - kTieRelTol * scale;
}

bool ties(double cand, double best) {
  if (best == kInf || cand == kInf) return false;
  const double scale = std::max(std::abs(cand), std::abs(best));
  return std::abs(cand - best) <= kTieRelTol * scale;
}

void check_feasible(const CandidateSet& cands, const LasConfig& cfg) {
  if (cfg.K < 1) throw InvalidConfig("LAS needs K >= 1");
  if (!(cfg.lambda > 0.0)) throw InvalidConfig("LAS needs lambda > 0");
  if (cands.size() < cfg.K + 1) {
    throw Infeasible("need at least K+1 = " + std::to_string(cfg.K + 1) +
                     " candidates, have " + std::to_string(cands.size()));
  }
}

Schedule finish(const CandidateSet& cands, std::vector<std::size_t> idx, const LasConfig& cfg,
                const char* algorithm, std::size_t ties) {
  Schedule s;
  s.indices = std::move(idx);
  for (std::size_t i : s.indices) s.gammas.push_back(cands.gammas()[i]);
  s.objective = schedule_objective(cands, s.indices, cfg.alpha);
  s.algorithm = algorithm;
  s.config = cfg;
  s.tie_breaks = ties;
  return s;
}

double smoothness(const CandidateSet& c, std::size_t a, std::size_t b, std::size_t next,
                  double alpha) {
  const auto& l = c.ell();
  const double d = (l[next] - l[b]) - (l[b] - l[a]);
  return alpha * d * d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

SnrGrid grid_time_uniform(double T, double delta, std::size_t K) {
  check_endpoints(T, delta, K);
  std::vector<double> g(K + 1);
  const double span = T - delta;
  for (std::size_t k = 0; k <= K; ++k) {
    const double s = span * static_cast<double>(k) / static_cast<double>(K);
    g[k] = 1.0 / (T - s);
  }
  g.front() = 1.0 / T;
  g.back() = 1.0 / delta;
  return SnrGrid(std::move(g));
}

SnrGrid grid_geometric(double T, double delta, std::size_t K) {
  check_endpoints(T, delta, K);
  std::vector<double> g(K + 1);
  const double l0 = -std::log(T);
  const double log_lambda = std::log(T / delta);
  for (std::size_t k = 0; k <= K; ++k) {
    g[k] = std::exp(l0 + log_lambda * static_cast<double>(k) / static_cast<double>(K));
  }
  g.front() = 1.0 / T;
  g.back() = 1.0 / delta;
  return SnrGrid(std::move(g));
}

SnrGrid grid_edm(double T, double delta, std::size_t K, double rho) {
  check_endpoints(T, delta, K);
  if (!(rho > 0.0)) throw InvalidArgument("EDM grid needs rho > 0");
  const double smax = std::pow(std::sqrt(T), 1.0 / rho);
  const double smin = std::pow(std::sqrt(delta), 1.0 / rho);
  std::vector<double> g(K + 1);
  for (std::size_t i = 0; i <= K; ++i) {
    const double sigma =
        std::pow(smax + static_cast<double>(i) / static_cast<double>(K) * (smin - smax), rho);
    g[i] = 1.0 / (sigma * sigma);
  }
  g.front() = 1.0 / T;
  g.back() = 1.0 / delta;
  return SnrGrid(std::move(g));
}

double eta_axis(double gamma, double lambda) {
  if (!(gamma >= 0.0)) throw DomainError("eta_axis needs gamma >= 0");
  return gamma / (1.0 + lambda * lambda * gamma);
}

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

CandidateSet::CandidateSet(std::vector<double> gammas, std::vector<double> risks, double lambda)
    : gammas_(std::move(gammas)), risks_(std::move(risks)), lambda_(lambda) {
  if (gammas_.size() != risks_.size()) throw InvalidArgument("one risk per candidate required");
  if (gammas_.size() < 2) throw InvalidArgument("need at least two candidates");
  if (!(lambda_ > 0.0)) throw InvalidConfig("lambda must be positive");
  for (std::size_t i = 0; i < gammas_.size(); ++i) {
    if (!(gammas_[i] > 0.0) || !std::isfinite(gammas_[i])) {
      throw InvalidArgument("candidate SNRs must be positive and finite");
    }
    if (i > 0 && !(gammas_[i] > gammas_[i - 1])) {
      throw InvalidArgument("candidate SNRs must be strictly ascending");
    }
    if (!(risks_[i] >= 0.0) || !std::isfinite(risks_[i])) {
      throw InvalidArgument("candidate risks must be finite and non-negative");
    }
    eta_.push_back(eta_axis(gammas_[i], lambda_));
    ell_.push_back(std::log(gammas_[i]));
  }
}

CandidateSet CandidateSet::from_profile(const LossProfile& profile, double lambda,
                                        double gamma_lo, double gamma_hi) {
  std::vector<double> g, r;
  const LossProfile x0 = profile.to_x0();
  for (const auto& k : x0.knots()) {
    // Endpoints often come back from exp/log with an ulp of drift.
    if (k.gamma < gamma_lo * (1.0 - 1e-12) || k.gamma > gamma_hi * (1.0 + 1e-12)) continue;
    g.push_back(k.gamma);
    r.push_back(k.loss);
  }
  return CandidateSet(std::move(g), std::move(r), lambda);
}

double schedule_objective(const CandidateSet& cands, std::span<const std::size_t> idx,
                          double alpha) {
  const auto& eta = cands.eta();
  const auto& L = cands.risks();
  double cost = 0.0;
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const double base = (eta[idx[k]] - eta[idx[k - 1]]) * L[idx[k - 1]];
    if (k == 1) {
      cost = base;
    } else {
      cost = cost + base + smoothness(cands, idx[k - 2], idx[k - 1], idx[k], alpha);
    }
  }
  return cost;
}

// ---------------------------------------------------------------------------
// Exact first-order DP
// ---------------------------------------------------------------------------

Schedule las_exact(const CandidateSet& cands, const LasConfig& cfg) {
  check_feasible(cands, cfg);
  if (cfg.alpha != 0.0) throw InvalidConfig("las_exact requires alpha = 0");
  const std::size_t K = cfg.K;
  const std::size_t end = cands.size() - 1;
  const auto& eta = cands.eta();
  const auto& L = cands.risks();
  if (K == 1) return finish(cands, {0, end}, cfg, "exact", 0);

  // dp[k][j]: best cost reaching j in exactly k transitions from 0.
  std::vector<std::vector<double>> dp(K, std::vector<double>(end + 1, kInf));
  std::vector<std::vector<std::size_t>> par(K, std::vector<std::size_t>(end + 1, 0));
  std::size_t n_ties = 0;

  for (std::size_t j = 1; j <= end - (K - 1); ++j) {
    dp[1][j] = (eta[j] - eta[0]) * L[0];
    par[1][j] = 0;
  }
  for (std::size_t k = 2; k <= K - 1; ++k) {
    const std::size_t max_j = end - (K - k);
    for (std::size_t j = k; j <= max_j; ++j) {
      double best = kInf;
      std::size_t arg = 0;
      for (std::size_t i = k - 1; i < j; ++i) {
        if (dp[k - 1][i] == kInf) continue;
        const double cand = dp[k - 1][i] + (eta[j] - eta[i]) * L[i];
        if (strictly_better(cand, best)) {
          best = cand;
          arg = i;
        } else if (ties(cand, best)) {
          ++n_ties;
        }
      }
      dp[k][j] = best;
      par[k][j] = arg;
    }
  }

  double best = kInf;
  std::size_t last = 0;
  for (std::size_t i = K - 1; i < end; ++i) {
    if (dp[K - 1][i] == kInf) continue;
    const double cand = dp[K - 1][i] + (eta[end] - eta[i]) * L[i];
    if (strictly_better(cand, best)) {
      best = cand;
      last = i;
    } else if (ties(cand, best)) {
      ++n_ties;
    }
  }
  if (best == kInf) throw Infeasible("no feasible schedule");

  std::vector<std::size_t> idx(K + 1);
  idx[K] = end;
  idx[K - 1] = last;
  for (std::size_t k = K - 1; k >= 2; --k) idx[k - 1] = par[k][idx[k]];
  idx[0] = 0;
  return finish(cands, std::move(idx), cfg, "exact", n_ties);
}

// ---------------------------------------------------------------------------
// Beam-and-window DP
// ---------------------------------------------------------------------------

namespace {

struct BeamState {
  std::size_t a = 0;
  std::size_t b = 0;
  double cost = 0.0;
  std::ptrdiff_t parent = -1;  // index into the previous stage
};

bool by_cost(const BeamState& x, const BeamState& y) {
  if (x.cost != y.cost) return x.cost < y.cost;
  if (x.a != y.a) return x.a < y.a;
  return x.parent < y.parent;
}

}  // namespace

Schedule las_beam(const CandidateSet& cands, const LasConfig& cfg) {
  check_feasible(cands, cfg);
  if (!(cfg.alpha > 0.0)) throw InvalidConfig("las_beam requires alpha > 0");
  if (cfg.beam < 1 || cfg.window < 1) throw InvalidConfig("las_beam requires B >= 1 and W >= 1");
  const std::size_t K = cfg.K;
  const std::size_t n = cands.size();
  const std::size_t end = n - 1;
  const auto& eta = cands.eta();
  const auto& ell = cands.ell();
  const auto& L = cands.risks();
  if (K == 1) return finish(cands, {0, end}, cfg, "beam", 0);

  std::vector<std::size_t> extras;
  for (std::size_t e = 1; e <= cfg.extra; ++e) {
    const double pos = static_cast<double>(e) * static_cast<double>(end) /
                       static_cast<double>(cfg.extra + 1);
    extras.push_back(static_cast<std::size_t>(std::lround(pos)));
  }

  // stages[k-1] holds the states after k transitions, grouped by b ascending.
  std::vector<std::vector<BeamState>> stages;
  {
    std::vector<BeamState> s1;
    for (std::size_t b = 1; b <= end - (K - 1); ++b) {
      s1.push_back({0, b, (eta[b] - eta[0]) * L[0], -1});
    }
    stages.push_back(std::move(s1));
  }

  std::size_t n_ties = 0;
  std::vector<std::size_t> window;
  for (std::size_t k = 2; k <= K - 1; ++k) {
    const std::size_t max_idx = end - (K - k);
    const auto& prev = stages.back();
    std::vector<BeamState> generated;
    for (std::size_t p = 0; p < prev.size(); ++p) {
      const auto& st = prev[p];
      const double pred = 2.0 * ell[st.b] - ell[st.a];
      std::size_t j = static_cast<std::size_t>(
          std::lower_bound(ell.begin(), ell.end(), pred) - ell.begin());
      if (j == n) j = max_idx;
      const std::size_t lo = std::max(st.b + 1, j > cfg.window ? j - cfg.window : 0);
      const std::size_t hi = std::min(max_idx, j + cfg.window);
      window.clear();
      for (std::size_t c = lo; c <= hi; ++c) window.push_back(c);
      for (std::size_t c : extras) {
        if (c > st.b && c <= max_idx) window.push_back(c);
      }
      std::sort(window.begin(), window.end());
      window.erase(std::unique(window.begin(), window.end()), window.end());
      for (std::size_t c : window) {
        const double base = (eta[c] - eta[st.b]) * L[st.b];
        const double sm = smoothness(cands, st.a, st.b, c, cfg.alpha);
        // State (b, c) keeps a backpointer to its parent (a, b).
        generated.push_back({st.b, c, st.cost + base + sm, static_cast<std::ptrdiff_t>(p)});
      }
    }
    if (generated.empty()) {
      throw SearchExhausted("beam emptied at stage " + std::to_string(k) +
                            "; increase the window radius");
    }

    // One state per (b, c): keep the cheapest history. Then prune per c.
    std::sort(generated.begin(), generated.end(), [](const BeamState& x, const BeamState& y) {
      if (x.b != y.b) return x.b < y.b;  // new endpoint c
      if (x.a != y.a) return x.a < y.a;  // predecessor b
      return by_cost(x, y);
    });
    std::vector<BeamState> unique;
    for (const auto& s : generated) {
      if (!unique.empty() && unique.back().b == s.b && unique.back().a == s.a) {
        if (s.cost == unique.back().cost) ++n_ties;
        continue;
      }
      unique.push_back(s);
    }
    std::vector<BeamState> kept;
    for (std::size_t i = 0; i < unique.size();) {
      std::size_t e = i;
      while (e < unique.size() && unique[e].b == unique[i].b) ++e;
      std::sort(unique.begin() + static_cast<std::ptrdiff_t>(i),
                unique.begin() + static_cast<std::ptrdiff_t>(e), by_cost);
      const std::size_t take = std::min(cfg.beam, e - i);
      kept.insert(kept.end(), unique.begin() + static_cast<std::ptrdiff_t>(i),
                  unique.begin() + static_cast<std::ptrdiff_t>(i + take));
      i = e;
    }
    stages.push_back(std::move(kept));
  }

  // Terminal transition into end, with the closing smoothness term.
  const auto& last = stages.back();
  double best = kInf;
  std::ptrdiff_t arg = -1;
  for (std::size_t p = 0; p < last.size(); ++p) {
    const auto& st = last[p];
    if (st.b >= end) continue;
    const double total = st.cost + (eta[end] - eta[st.b]) * L[st.b] +
                         smoothness(cands, st.a, st.b, end, cfg.alpha);
    if (total < best) {
      best = total;
      arg = static_cast<std::ptrdiff_t>(p);
    } else if (total == best) {
      ++n_ties;
    }
  }
  if (arg < 0) throw SearchExhausted("no state reaches the final candidate");

  std::vector<std::size_t> idx(K + 1);
  idx[K] = end;
  std::ptrdiff_t cur = arg;
  for (std::size_t k = K - 1; k >= 1; --k) {
    const auto& st = stages[k - 1][static_cast<std::size_t>(cur)];
    idx[k] = st.b;
    idx[k - 1] = st.a;
    cur = st.parent;
  }
  return finish(cands, std::move(idx), cfg, "beam", n_ties);
}

Schedule las_optimize(const CandidateSet& cands, const LasConfig& cfg) {
  return cfg.alpha > 0.0 ? las_beam(cands, cfg) : las_exact(cands, cfg);
}

// ---------------------------------------------------------------------------

std::vector<long> parse_timestep_list(const std::string& text) {
  std::string cleaned;
  for (char ch : text) {
    if (ch == '[' || ch == ']') continue;
    cleaned.push_back(ch);
  }
  std::vector<long> out;
  std::stringstream ss(cleaned);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t\r\n");
    const auto e = item.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) throw InvalidArgument("empty entry in timestep list");
    const std::string tok = item.substr(b, e - b + 1);
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("bad timestep '" + tok + "'");
    }
    if (used != tok.size()) throw InvalidArgument("bad timestep '" + tok + "'");
    out.push_back(v);
  }
  if (out.size() < 2) throw InvalidArgument("timestep list needs at least two entries");
  return out;
}

std::string format_timestep_list(std::span<const long> steps) {
  std::string s;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(steps[i]);
  }
  return s;
}

}  // namespace las
