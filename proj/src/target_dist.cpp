// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#include "las/target_dist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace las {

namespace {

constexpr double kProbSumTol = 1e-12;

void check_probability_sum(const std::vector<double>& ps, const char* what) {
  CompensatedSum s;
  for (double p : ps) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw InvalidArgument(std::string(what) + " must be strictly positive");
    }
    s.add(p);
  }
  if (std::abs(s.value() - 1.0) > kProbSumTol) {
    throw InvalidArgument(std::string(what) + " must sum to 1 (got " +
                          format_double(s.value()) + ")");
  }
}

std::size_t check_dims(std::size_t dim, std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("points must have dimension >= 1");
  if (dim != 0 && v.size() != dim) {
    throw InvalidArgument("inconsistent dimensions in target distribution");
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument("non-finite coordinate");
  }
  return v.size();
}

// Probabilities in ascending order; all entropy sums run in this order.
std::vector<double> sorted_probs(const TargetDistribution& dist) {
  const auto& atoms = dist.finite().atoms;
  std::vector<double> ps;
  ps.reserve(atoms.size());
  for (const auto& a : atoms) ps.push_back(a.prob);
  std::sort(ps.begin(), ps.end());
  return ps;
}

// Surprisal deviations iota_i - H computed relative to a reference atom so
// that equal probabilities give exactly zero deviation.
struct CenteredSurprisal {
  std::vector<double> probs;
  std::vector<double> dev;
  double shannon = 0.0;
};

CenteredSurprisal centered_surprisal(const TargetDistribution& dist) {
  CenteredSurprisal out;
  out.probs = sorted_probs(dist);
  const double ref = -std::log(out.probs.front());
  std::vector<double> rel(out.probs.size());
  CompensatedSum s;
  for (std::size_t i = 0; i < out.probs.size(); ++i) {
    rel[i] = -std::log(out.probs[i]) - ref;
    s.add(out.probs[i] * rel[i]);
  }
  const double shift = s.value();
  out.shannon = ref + shift;
  out.dev.resize(rel.size());
  for (std::size_t i = 0; i < rel.size(); ++i) out.dev[i] = rel[i] - shift;
  return out;
}

double log_mgf(const CenteredSurprisal& cs, double lambda) {
  CompensatedSum s;
  for (std::size_t i = 0; i < cs.probs.size(); ++i) {
    s.add(cs.probs[i] * std::expm1(lambda * cs.dev[i]));
  }
  return std::log1p(s.value());
}

const FiniteDiscrete& require_discrete(const TargetDistribution& dist,
                                       const char* op) {
  if (!dist.is_discrete()) {
    throw UnsupportedVariant(std::string(op) +
                             " is only defined for finite discrete targets");
  }
  return dist.finite();
}

}  // namespace

TargetDistribution::TargetDistribution(
    std::size_t dim, std::variant<GaussianMixture, FiniteDiscrete> v)
    : dim_(dim), rep_(std::move(v)) {
  CompensatedSum c;
  std::visit(
      [&](const auto& r) {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, GaussianMixture>) {
          for (const auto& comp : r.components) {
            c.add(comp.weight);
            cumulative_.push_back(c.value());
          }
        } else {
          for (const auto& atom : r.atoms) {
            c.add(atom.prob);
            cumulative_.push_back(c.value());
          }
        }
      },
      rep_);
  cumulative_.back() = 1.0;
}

TargetDistribution TargetDistribution::gaussian_mixture(
    std::vector<GmmComponent> comps) {
  if (comps.empty()) throw InvalidArgument("mixture needs at least one component");
  std::size_t dim = 0;
  std::vector<double> ws;
  for (const auto& c : comps) {
    dim = check_dims(dim, c.mean);
    if (!(c.sigma > 0.0) || !std::isfinite(c.sigma)) {
      throw InvalidArgument("mixture sigmas must be strictly positive");
    }
    ws.push_back(c.weight);
  }
  check_probability_sum(ws, "mixture weights");
  return TargetDistribution(dim, GaussianMixture{std::move(comps)});
}

TargetDistribution TargetDistribution::discrete(std::vector<Atom> atoms) {
  if (atoms.empty()) throw InvalidArgument("discrete target needs at least one atom");
  std::size_t dim = 0;
  std::vector<double> ps;
  for (const auto& a : atoms) {
    dim = check_dims(dim, a.point);
    ps.push_back(a.prob);
  }
  check_probability_sum(ps, "atom probabilities");
  std::set<Vec> seen;
  for (const auto& a : atoms) {
    if (!seen.insert(a.point).second) {
      throw InvalidArgument("discrete atoms must be pairwise distinct");
    }
  }
  return TargetDistribution(dim, FiniteDiscrete{std::move(atoms)});
}

TargetDistribution TargetDistribution::single_gaussian(Vec mean, double sigma) {
  return gaussian_mixture({GmmComponent{1.0, std::move(mean), sigma}});
}

TargetDistribution TargetDistribution::point_mass(Vec point) {
  return discrete({Atom{std::move(point), 1.0}});
}

Variant TargetDistribution::variant() const {
  return std::holds_alternative<GaussianMixture>(rep_) ? Variant::kGaussianMixture
                                                       : Variant::kFiniteDiscrete;
}

const GaussianMixture& TargetDistribution::mixture() const {
  if (const auto* g = std::get_if<GaussianMixture>(&rep_)) return *g;
  throw UnsupportedVariant("target is not a Gaussian mixture");
}

const FiniteDiscrete& TargetDistribution::finite() const {
  if (const auto* f = std::get_if<FiniteDiscrete>(&rep_)) return *f;
  throw UnsupportedVariant("target is not finite discrete");
}

std::size_t TargetDistribution::size() const { return cumulative_.size(); }

Vec TargetDistribution::mean() const {
  Vec m(dim_, 0.0);
  std::visit(
      [&](const auto& r) {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, GaussianMixture>) {
          for (const auto& c : r.components)
            for (std::size_t i = 0; i < dim_; ++i) m[i] += c.weight * c.mean[i];
        } else {
          for (const auto& a : r.atoms)
            for (std::size_t i = 0; i < dim_; ++i) m[i] += a.prob * a.point[i];
        }
      },
      rep_);
  return m;
}

double TargetDistribution::covariance_trace() const {
  const Vec m = mean();
  double tr = 0.0;
  std::visit(
      [&](const auto& r) {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, GaussianMixture>) {
          for (const auto& c : r.components) {
            tr += c.weight * (static_cast<double>(dim_) * c.sigma * c.sigma +
                              squared_distance(c.mean, m));
          }
        } else {
          for (const auto& a : r.atoms) tr += a.prob * squared_distance(a.point, m);
        }
      },
      rep_);
  return tr;
}

double TargetDistribution::log_density(std::span<const double> x) const {
  const auto* g = std::get_if<GaussianMixture>(&rep_);
  if (g == nullptr) {
    throw UnsupportedVariant("log density is undefined for discrete targets");
  }
  const double d = static_cast<double>(dim_);
  std::vector<double> terms;
  terms.reserve(g->components.size());
  double max_term = -std::numeric_limits<double>::infinity();
  for (const auto& c : g->components) {
    const double var = c.sigma * c.sigma;
    const double t = std::log(c.weight) - 0.5 * d * std::log(2.0 * std::numbers::pi * var) -
                     0.5 * squared_distance(x, c.mean) / var;
    terms.push_back(t);
    max_term = std::max(max_term, t);
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - max_term);
  return max_term + std::log(s);
}

std::size_t TargetDistribution::pick(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
}

void TargetDistribution::sample(Rng& rng, std::span<double> out) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t k = pick(unif(rng));
  if (const auto* g = std::get_if<GaussianMixture>(&rep_)) {
    std::normal_distribution<double> normal;
    const auto& c = g->components[k];
    for (std::size_t i = 0; i < dim_; ++i) out[i] = c.mean[i] + c.sigma * normal(rng);
  } else {
    const auto& a = std::get<FiniteDiscrete>(rep_).atoms[k];
    std::copy(a.point.begin(), a.point.end(), out.begin());
  }
}

// ---------------------------------------------------------------------------

double surprisal(const TargetDistribution& dist, std::size_t atom_index) {
  const auto& f = require_discrete(dist, "surprisal");
  if (atom_index >= f.atoms.size()) throw InvalidArgument("atom index out of range");
  return -std::log(f.atoms[atom_index].prob);
}

double shannon_entropy(const TargetDistribution& dist) {
  require_discrete(dist, "shannon_entropy");
  return centered_surprisal(dist).shannon;
}

double renyi_half_entropy(const TargetDistribution& dist) {
  require_discrete(dist, "renyi_half_entropy");
  // H_{1/2} = 2 log sum sqrt(p) = H + 2 log E exp((iota - H) / 2).
  const auto cs = centered_surprisal(dist);
  return cs.shannon + 2.0 * log_mgf(cs, 0.5);
}

InfoProfile fit_subexponential(const TargetDistribution& dist, double b,
                               std::size_t grid_points) {
  require_discrete(dist, "fit_subexponential");
  if (!(b > 0.0 && b <= 2.0)) throw InvalidArgument("sub-exponential scale b must lie in (0, 2]");
  if (grid_points < 3) throw InvalidConfig("lambda grid needs at least 3 points");

  const auto cs = centered_surprisal(dist);
  const double lmax = 1.0 / b;
  std::vector<double> grid;
  for (std::size_t j = 0; j < grid_points; ++j) {
    grid.push_back(-lmax + 2.0 * lmax * static_cast<double>(j) /
                               static_cast<double>(grid_points - 1));
  }
  grid.push_back(0.5);
  grid.push_back(-0.5);
  std::sort(grid.begin(), grid.end());

  double nu_sq = 0.0;
  for (double lambda : grid) {
    if (std::abs(lambda) < 1e-300) continue;
    nu_sq = std::max(nu_sq, log_mgf(cs, lambda) / (lambda * lambda));
  }

  InfoProfile out;
  out.shannon = cs.shannon;
  out.renyi_half = cs.shannon + 2.0 * log_mgf(cs, 0.5);
  out.nu_sq = nu_sq;
  out.b = b;
  out.mgf_ok = std::isfinite(nu_sq);
  out.renyi_bound = cs.shannon + 0.5 * nu_sq;
  return out;
}

}  // namespace las
