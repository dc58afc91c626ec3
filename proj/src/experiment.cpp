// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#include "las/experiment.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace las {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTagToy = 0x746f79ULL;  // "toy"

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& tok, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("bad " + what + " '" + tok + "'");
  }
  if (used != tok.size()) throw InvalidArgument("bad " + what + " '" + tok + "'");
  return v;
}

Json estimate_json(const Estimate& e) { return Json{{"value", e.value}, {"stderr", e.std_error}}; }

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> default_toy_weights() {
  std::vector<double> w;
  for (int j = 8; j >= 1; --j) w.push_back(j / 36.0);
  return w;
}

TargetDistribution build_toy(const std::string& name, const std::optional<std::vector<double>>& weights,
                             double sigma0, double scale) {
  if (!(sigma0 > 0.0)) throw InvalidArgument("toy sigma0 must be positive");
  const std::vector<double> w = weights ? *weights : default_toy_weights();
  if (w.size() != 8) throw InvalidArgument("toy targets need exactly 8 weights");
  std::vector<Vec> means;
  if (name == "circle8") {
    const double r = scale > 0.0 ? scale : 4.0;
    for (int j = 0; j < 8; ++j) {
      const double a = 2.0 * std::numbers::pi * j / 8.0;
      means.push_back({r * std::cos(a), r * std::sin(a)});
    }
  } else if (name == "grid8") {
    const double s = scale > 0.0 ? scale : 2.0;
    for (int row = 0; row < 2; ++row) {
      for (int col = 0; col < 4; ++col) {
        means.push_back({(col - 1.5) * s, (row - 0.5) * s});
      }
    }
  } else {
    throw InvalidArgument("unknown toy '" + name + "' (circle8 | grid8)");
  }
  std::vector<GmmComponent> comps;
  for (std::size_t j = 0; j < 8; ++j) comps.push_back({w[j], means[j], sigma0});
  return TargetDistribution::gaussian_mixture(std::move(comps));
}

TargetDistribution discrete_companion(const TargetDistribution& gmm) {
  std::vector<Atom> atoms;
  for (const auto& c : gmm.mixture().components) atoms.push_back({c.mean, c.weight});
  return TargetDistribution::discrete(std::move(atoms));
}

// ---------------------------------------------------------------------------

Json target_to_json(const TargetDistribution& dist) {
  Json j;
  j["dim"] = dist.dim();
  if (dist.is_discrete()) {
    j["variant"] = "discrete";
    Json atoms = Json::array();
    for (const auto& a : dist.finite().atoms) atoms.push_back({{"p", a.prob}, {"x", a.point}});
    j["atoms"] = atoms;
  } else {
    j["variant"] = "gmm";
    Json comps = Json::array();
    for (const auto& c : dist.mixture().components) {
      comps.push_back({{"w", c.weight}, {"mean", c.mean}, {"sigma", c.sigma}});
    }
    j["components"] = comps;
  }
  return j;
}

TargetDistribution target_from_json(const Json& j) {
  try {
    const std::string variant = j.at("variant").get<std::string>();
    const std::size_t dim = j.at("dim").get<std::size_t>();
    auto check_dim = [dim](const Vec& v) {
      if (v.size() != dim) throw InvalidArgument("point dimension does not match dim");
    };
    if (variant == "gmm") {
      std::vector<GmmComponent> comps;
      for (const auto& c : j.at("components")) {
        GmmComponent g{c.at("w").get<double>(), c.at("mean").get<Vec>(), c.at("sigma").get<double>()};
        check_dim(g.mean);
        comps.push_back(std::move(g));
      }
      return TargetDistribution::gaussian_mixture(std::move(comps));
    }
    if (variant == "discrete") {
      std::vector<Atom> atoms;
      for (const auto& a : j.at("atoms")) {
        Atom at{a.at("x").get<Vec>(), a.at("p").get<double>()};
        check_dim(at.point);
        atoms.push_back(std::move(at));
      }
      return TargetDistribution::discrete(std::move(atoms));
    }
    throw InvalidArgument("unknown target variant '" + variant + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed target JSON: ") + e.what());
  }
}

TargetDistribution load_target(const std::string& file_or_name) {
  if (file_or_name == "circle8" || file_or_name == "grid8") return build_toy(file_or_name);
  if (file_or_name == "two_atom") {
    return TargetDistribution::discrete({{{-1.0}, 0.5}, {{1.0}, 0.5}});
  }
  if (file_or_name == "gaussian") return TargetDistribution::single_gaussian({0.0}, 1.0);
  std::ifstream in(file_or_name);
  if (!in) throw InvalidConfig("cannot read target '" + file_or_name + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("target file is not JSON: " + std::string(e.what()));
  }
  return target_from_json(j);
}

LossProfile parse_loss_csv(std::istream& in) {
  std::vector<LossKnot> knots;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (knots.empty() && !cols.empty() && cols[0] == "gamma") continue;
    if (cols.size() < 2 || cols.size() > 3) {
      throw InvalidArgument("loss CSV line " + std::to_string(line_no) + ": expected gamma,loss[,kind]");
    }
    LossKnot k;
    k.gamma = parse_number(cols[0], "gamma");
    k.loss = parse_number(cols[1], "loss");
    if (cols.size() == 3 && !cols[2].empty()) {
      if (cols[2] == "x0") {
        k.kind = LossKind::kX0;
      } else if (cols[2] == "eps") {
        k.kind = LossKind::kEps;
      } else {
        throw InvalidArgument("loss CSV line " + std::to_string(line_no) + ": kind must be x0 or eps");
      }
    }
    knots.push_back(k);
  }
  return LossProfile(std::move(knots));
}

LossProfile read_loss_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read loss CSV '" + path + "'");
  return parse_loss_csv(in);
}

void write_loss_csv(std::ostream& out, const LossProfile& profile) {
  out << "gamma,loss,kind\n";
  for (const auto& k : profile.knots()) {
    out << format_double(k.gamma) << ',' << format_double(k.loss) << ','
        << (k.kind == LossKind::kEps ? "eps" : "x0") << '\n';
  }
}

Json schedule_to_json(const Schedule& s) {
  Json j;
  j["algorithm"] = s.algorithm;
  j["K"] = s.config.K;
  j["lambda"] = s.config.lambda;
  j["alpha"] = s.config.alpha;
  if (s.algorithm == "beam") {
    j["beam"] = s.config.beam;
    j["window"] = s.config.window;
    j["extra"] = s.config.extra;
  }
  j["objective"] = s.objective;
  j["tie_breaks"] = s.tie_breaks;
  j["indices"] = s.indices;
  j["gammas"] = s.gammas;
  j["log_steps"] = s.grid().log_steps();
  return j;
}

SnrGrid grid_from_json(const Json& j) {
  try {
    return SnrGrid(j.at("gammas").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("schedule JSON lacks gammas: ") + e.what());
  }
}

Json grid_to_json(const std::string& name, const SnrGrid& grid) {
  return Json{{"name", name},
              {"K", grid.steps()},
              {"T", grid.T()},
              {"delta", grid.delta()},
              {"gammas", grid.gammas()}};
}

Json final_bounds_to_json(const FinalBounds& b) {
  Json j{{"sum_sq_ratio", b.sum_sq_ratio},
         {"geo_sum_sq_ratio", b.geo_sum_sq_ratio},
         {"disc_bound", b.disc_bound},
         {"geo_disc_bound", b.geo_disc_bound},
         {"kl_applicable", b.kl_applicable}};
  j["kl_total"] = b.kl_total ? Json(*b.kl_total) : Json(nullptr);
  return j;
}

Json error_report_to_json(const ErrorReport& r) {
  Json j{{"e_disc", estimate_json(r.e_disc)},
         {"e_apx", estimate_json(r.e_apx)},
         {"kl_path_bound", r.kl_path_bound},
         {"combined", r.combined},
         {"mmse_integral", estimate_json(r.mmse_integral)},
         {"provenance", r.provenance}};
  j["bounds"] = r.bounds ? final_bounds_to_json(*r.bounds) : Json(nullptr);
  return j;
}

Json sample_report_to_json(const SampleReport& r) {
  Json j;
  j["n_samples"] = r.n_samples;
  j["nll"] = r.nll_available ? estimate_json(r.nll) : Json(nullptr);
  j["nll_denoised"] = r.nll_denoised ? estimate_json(*r.nll_denoised) : Json(nullptr);
  j["schedule"] = r.schedule;
  const auto& c = r.config;
  j["config"] = {{"order", c.order == SamplerOrder::kFirst ? "first" : "second"},
                 {"init", c.init == InitMode::kExactForward ? "exact_forward" : "gaussian_prior"},
                 {"denoiser", c.denoiser == DenoiserKind::kOracle ? "oracle" : "oracle_plus_noise"},
                 {"sigma_err", c.sigma_err},
                 {"seed", c.seed},
                 {"final_denoise", c.final_denoise}};
  return j;
}

void write_samples_csv(std::ostream& out, const SampleRun& run) {
  for (std::size_t c = 0; c < run.dim; ++c) out << (c ? ",x" : "x") << c;
  out << '\n';
  const std::size_t n = run.dim ? run.samples.size() / run.dim : 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = run.row(i);
    for (std::size_t c = 0; c < run.dim; ++c) out << (c ? "," : "") << format_double(r[c]);
    out << '\n';
  }
}

void write_mmse_table(std::ostream& out, const MmseCurve& curve, std::span<const double> gammas) {
  out << "gamma,mmse,stderr,dmmse,stderr\n";
  for (double g : gammas) {
    const auto k = curve.knot(g);
    out << format_double(g) << ',' << format_double(k.mmse.value) << ','
        << format_double(k.mmse.std_error) << ',' << format_double(k.derivative.value) << ','
        << format_double(k.derivative.std_error) << '\n';
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfig("cannot write '" + path + "'");
  out << text;
  if (!out) throw InvalidConfig("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot hash '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

void RunManifest::begin_stage(const std::string& name) {
  if (!current_.empty()) end_stage();
  current_ = name;
  started_ = std::chrono::steady_clock::now();
}

void RunManifest::end_stage() {
  if (current_.empty()) return;
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - started_;
  stages_.emplace_back(current_, dt.count());
  current_.clear();
}

void RunManifest::add_file(const std::string& dir, const std::string& name) {
  files_.emplace_back(name, sha256_file((fs::path(dir) / name).string()));
}

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command_;
  j["version"] = "0.1.0";
  j["compiler"] = __VERSION__;
  j["config"] = config_;
  Json files = Json::array();
  for (const auto& [name, hash] : files_) files.push_back({{"path", name}, {"sha256", hash}});
  j["files"] = files;
  Json stages = Json::array();
  for (const auto& [name, sec] : stages_) stages.push_back({{"stage", name}, {"seconds", sec}});
  j["stages"] = stages;
  return j;
}

void RunManifest::write(const std::string& dir) const {
  write_text_file((fs::path(dir) / "manifest.json").string(), dump_json(to_json()));
}

bool RunManifest::verify(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) return false;
  const Json j = Json::parse(in);
  for (const auto& f : j.at("files")) {
    const auto p = fs::path(dir) / f.at("path").get<std::string>();
    if (!fs::exists(p)) return false;
    if (sha256_file(p.string()) != f.at("sha256").get<std::string>()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

std::string schedule_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::kTimeUniform: return "time_uniform";
    case ScheduleKind::kGeometric: return "geometric";
    case ScheduleKind::kEdm: return "edm";
    case ScheduleKind::kLas: return "las";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "time_uniform" || s == "uniform") return ScheduleKind::kTimeUniform;
  if (s == "geometric") return ScheduleKind::kGeometric;
  if (s == "edm") return ScheduleKind::kEdm;
  if (s == "las") return ScheduleKind::kLas;
  throw InvalidConfig("unknown schedule '" + s + "'");
}

LossProfile oracle_loss_profile(const TargetDistribution& dist, std::span<const double> gammas,
                                const MmsePolicy& policy) {
  std::vector<LossKnot> knots(gammas.size());
  parallel_chunks(gammas.size(), 4, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      knots[i] = {gammas[i], std::max(0.0, mmse(dist, gammas[i], policy).value), LossKind::kX0};
    }
  });
  return LossProfile(std::move(knots));
}

SnrGrid build_schedule(ScheduleKind kind, const TargetDistribution& dist, const ToyConfig& cfg) {
  const std::size_t K = cfg.las.K;
  switch (kind) {
    case ScheduleKind::kTimeUniform: return grid_time_uniform(cfg.T, cfg.delta, K);
    case ScheduleKind::kGeometric: return grid_geometric(cfg.T, cfg.delta, K);
    case ScheduleKind::kEdm: return grid_edm(cfg.T, cfg.delta, K, cfg.rho);
    case ScheduleKind::kLas: break;
  }
  const auto cand = grid_geometric(cfg.T, cfg.delta, cfg.n_candidates - 1);
  MmsePolicy policy = default_policy(dist);
  if (!has_closed_form(dist) && dist.dim() <= 2) policy = QuadraturePolicy{cfg.quadrature_nodes};
  const auto profile = oracle_loss_profile(dist, cand.gammas(), policy);
  const auto cs = CandidateSet::from_profile(profile, cfg.las.lambda, cand.gammas().front(),
                                             cand.gammas().back());
  return las_optimize(cs, cfg.las).grid();
}

std::vector<ToyRow> run_toy(const TargetDistribution& dist, const ToyConfig& cfg,
                            const std::vector<ScheduleKind>& kinds,
                            const std::vector<std::size_t>& Ks) {
  std::vector<ToyRow> rows;
  for (std::size_t K : Ks) {
    ToyConfig c = cfg;
    c.las.K = K;
    for (ScheduleKind kind : kinds) {
      SnrGrid grid = build_schedule(kind, dist, c);
      SamplerConfig sc = cfg.sampler;
      sc.seed = derive_seed(cfg.sampler.seed, kTagToy + static_cast<std::uint64_t>(kind), K);
      auto run = sample(dist, grid, sc);
      rows.push_back({kind, K, std::move(grid), std::move(run.report)});
    }
  }
  return rows;
}

}  // namespace las
