// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0
//
// las: schedule optimization and toy-experiment front end.
//
// Exit codes: 0 success, 2 configuration or I/O error, 3 infeasible
// optimization, 4 verification failure, 5 malformed input data.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "las/experiment.hpp"
#include "las/verify.hpp"

namespace fs = std::filesystem;
using namespace las;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitVerify = 4;
constexpr int kExitData = 5;

struct Common {
  std::string out = "las_out";
  std::uint64_t seed = 0;
  double T = 1.0;
  double delta = 1e-3;
  double rho = 7.0;
};

struct LasFlags {
  std::size_t K = 10;
  double lambda = 1.5;
  double alpha = 0.0;
  std::size_t beam = 16;
  std::size_t window = 4;
  std::size_t extra = 0;

  LasConfig config() const { return {K, lambda, alpha, beam, window, extra}; }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "Root seed")->capture_default_str();
  app->add_option("--T", c.T, "Horizon T (gamma_0 = 1/T)")->capture_default_str();
  app->add_option("--delta", c.delta, "Terminal time delta (gamma_K = 1/delta)")->capture_default_str();
  app->add_option("--rho", c.rho, "EDM rho")->capture_default_str();
}

void add_las(CLI::App* app, LasFlags& f) {
  app->add_option("--K", f.K, "Number of steps")->capture_default_str();
  app->add_option("--lambda", f.lambda, "SNR-axis regularization")->capture_default_str();
  app->add_option("--alpha", f.alpha, "Smoothness weight (0 = exact DP)")->capture_default_str();
  app->add_option("--beam", f.beam, "Beam width B")->capture_default_str();
  app->add_option("--window", f.window, "Window radius W")->capture_default_str();
  app->add_option("--extra", f.extra, "Extra global candidates E")->capture_default_str();
}

Json common_json(const Common& c) {
  return {{"seed", c.seed}, {"T", c.T}, {"delta", c.delta}, {"rho", c.rho}};
}

Json las_json(const LasFlags& f) {
  return {{"K", f.K}, {"lambda", f.lambda}, {"alpha", f.alpha},
          {"beam", f.beam}, {"window", f.window}, {"extra", f.extra}};
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidConfig("cannot create output directory '" + dir + "'");
}

void emit(RunManifest& m, const std::string& dir, const std::string& name, const std::string& text) {
  write_text_file((fs::path(dir) / name).string(), text);
  m.add_file(dir, name);
}

std::string join_doubles(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

// ---------------------------------------------------------------------------

struct ScheduleCmd {
  Common c;
  LasFlags las;
  std::string loss;
  bool trim = false;

  int run() const {
    RunManifest m("schedule");
    m.set_config({{"common", common_json(c)}, {"las", las_json(las)}, {"loss", loss}, {"trim", trim}});
    ensure_dir(c.out);
    m.begin_stage("load");
    if (!fs::exists(loss)) throw InvalidConfig("cannot read loss CSV '" + loss + "'");
    const auto profile = read_loss_csv(loss);
    m.begin_stage("optimize");
    const double lo = trim ? 1.0 / c.T : profile.min_gamma();
    const double hi = trim ? 1.0 / c.delta : profile.max_gamma();
    const auto cands = CandidateSet::from_profile(profile, las.lambda, lo, hi);
    const auto s = las_optimize(cands, las.config());
    m.begin_stage("write");
    emit(m, c.out, "schedule.json", dump_json(schedule_to_json(s)));
    m.end_stage();
    m.write(c.out);
    std::cout << "algorithm " << s.algorithm << "\nobjective " << format_double(s.objective)
              << "\ngammas " << join_doubles(s.gammas) << "\nh " << join_doubles(s.grid().log_steps())
              << "\n";
    return 0;
  }
};

struct GridsCmd {
  Common c;
  std::size_t K = 10;

  int run() const {
    RunManifest m("grids");
    m.set_config({{"common", common_json(c)}, {"K", K}});
    ensure_dir(c.out);
    Json arr = Json::array();
    arr.push_back(grid_to_json("time_uniform", grid_time_uniform(c.T, c.delta, K)));
    arr.push_back(grid_to_json("geometric", grid_geometric(c.T, c.delta, K)));
    arr.push_back(grid_to_json("edm", grid_edm(c.T, c.delta, K, c.rho)));
    emit(m, c.out, "grids.json", dump_json(arr));
    m.write(c.out);
    for (const auto& g : arr) {
      std::cout << g["name"].get<std::string>() << ' '
                << join_doubles(g["gammas"].get<std::vector<double>>()) << '\n';
    }
    return 0;
  }
};

struct ReportCmd {
  Common c;
  std::string target = "gaussian";
  std::vector<std::string> schedules;
  std::vector<std::string> kinds{"time_uniform", "geometric", "edm"};
  std::vector<std::size_t> Ks{8};
  std::string loss;
  bool check_endpoints = false;

  int run() const {
    RunManifest m("report");
    m.set_config({{"common", common_json(c)},
                  {"target", target},
                  {"schedules", schedules},
                  {"kinds", kinds},
                  {"K", Ks},
                  {"loss", loss}});
    ensure_dir(c.out);
    m.begin_stage("load");
    const auto dist = load_target(target);
    std::optional<LossProfile> profile;
    if (!loss.empty()) profile = read_loss_csv(loss);

    std::vector<std::pair<std::string, SnrGrid>> grids;
    for (const auto& path : schedules) {
      std::ifstream in(path);
      if (!in) throw InvalidConfig("cannot read schedule '" + path + "'");
      auto g = grid_from_json(Json::parse(in));
      if (check_endpoints) {
        const bool ok = std::abs(g.T() - c.T) <= 1e-9 * c.T && std::abs(g.delta() - c.delta) <= 1e-9 * c.delta;
        if (!ok) throw InvalidConfig("schedule '" + path + "' endpoints do not match --T/--delta");
      }
      grids.emplace_back(fs::path(path).stem().string(), std::move(g));
    }
    if (schedules.empty()) {
      ToyConfig tc;
      tc.T = c.T;
      tc.delta = c.delta;
      tc.rho = c.rho;
      for (std::size_t K : Ks) {
        tc.las.K = K;
        for (const auto& k : kinds) {
          const auto kind = parse_schedule_kind(k);
          if (kind == ScheduleKind::kLas) {
            throw InvalidConfig("report builds baseline grids only; pass LAS schedules with --schedule");
          }
          grids.emplace_back(k, build_schedule(kind, dist, tc));
        }
      }
    }

    m.begin_stage("evaluate");
    const MmseCurve curve(dist, default_policy(dist, c.seed));
    std::optional<double> entropy, c_fit;
    if (dist.is_discrete() && dist.size() > 1) {
      entropy = shannon_entropy(dist);
      std::vector<double> knots;
      for (double l = std::log(1.0 / c.T); l <= std::log(1.0 / c.delta) + 1e-12; l += 0.25) {
        knots.push_back(std::exp(l));
      }
      c_fit = std::sqrt(theorem1_check(dist, knots, curve.policy()).constant);
    }
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "schedule,K,e_disc,e_disc_stderr,e_apx,e_apx_stderr,combined,kl_path_bound,disc_bound\n";
    for (const auto& [name, grid] : grids) {
      auto r = error_report(curve, grid, profile ? &*profile : nullptr);
      if (entropy) {
        double eps_bar = 0.0;
        if (profile) {
          const auto apx = apx_error(*profile, curve, grid);
          eps_bar = apx.eps_excess.empty() ? 0.0 : pairwise_sum(apx.eps_excess) / static_cast<double>(apx.eps_excess.size());
        }
        r.bounds = final_bounds(grid, *entropy, *c_fit, eps_bar);
      }
      Json j = error_report_to_json(r);
      j["schedule"] = name;
      j["K"] = grid.steps();
      j["gammas"] = grid.gammas();
      rows.push_back(j);
      csv << name << ',' << grid.steps() << ',' << format_double(r.e_disc.value) << ','
          << format_double(r.e_disc.std_error) << ',' << format_double(r.e_apx.value) << ','
          << format_double(r.e_apx.std_error) << ',' << format_double(r.combined) << ','
          << format_double(r.kl_path_bound) << ','
          << (r.bounds ? format_double(r.bounds->disc_bound) : std::string()) << '\n';
    }
    m.begin_stage("write");
    emit(m, c.out, "report.json", dump_json(rows));
    emit(m, c.out, "report.csv", csv.str());
    m.end_stage();
    m.write(c.out);
    std::cout << csv.str();
    return 0;
  }
};

struct SimulateCmd {
  Common c;
  LasFlags las;
  std::string target = "circle8";
  std::vector<std::string> kinds{"las", "time_uniform", "edm"};
  std::vector<std::size_t> Ks{5, 7};
  std::size_t samples = 20000;
  std::string order = "first";
  std::string init = "exact_forward";
  std::vector<double> sigma_err;
  bool final_denoise = false;
  bool write_samples = false;
  std::size_t candidates = 256;

  int run() const {
    RunManifest m("simulate");
    m.set_config({{"common", common_json(c)},
                  {"las", las_json(las)},
                  {"target", target},
                  {"kinds", kinds},
                  {"K", Ks},
                  {"samples", samples},
                  {"order", order},
                  {"init", init},
                  {"sigma_err", sigma_err},
                  {"final_denoise", final_denoise},
                  {"candidates", candidates}});
    ensure_dir(c.out);
    const auto dist = load_target(target);
    ToyConfig tc;
    tc.T = c.T;
    tc.delta = c.delta;
    tc.rho = c.rho;
    tc.las = las.config();
    tc.n_candidates = candidates;
    auto& sc = tc.sampler;
    sc.n_samples = samples;
    sc.seed = c.seed;
    sc.sigma_err = sigma_err;
    sc.final_denoise = final_denoise;
    if (!sigma_err.empty()) sc.denoiser = DenoiserKind::kOraclePlusNoise;
    if (order == "second") {
      sc.order = SamplerOrder::kSecond;
    } else if (order != "first") {
      throw InvalidConfig("--order must be first or second");
    }
    if (init == "gaussian_prior") {
      sc.init = InitMode::kGaussianPrior;
    } else if (init != "exact_forward") {
      throw InvalidConfig("--init must be exact_forward or gaussian_prior");
    }
    std::vector<ScheduleKind> sk;
    for (const auto& k : kinds) sk.push_back(parse_schedule_kind(k));

    m.begin_stage("sample");
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "schedule,K,nll,nll_stderr,n_samples\n";
    for (std::size_t K : Ks) {
      ToyConfig k_cfg = tc;
      k_cfg.las.K = K;
      for (ScheduleKind kind : sk) {
        const auto grid = build_schedule(kind, dist, k_cfg);
        SamplerConfig s = sc;
        s.seed = derive_seed(c.seed, 0x73696dULL + static_cast<std::uint64_t>(kind), K);
        const auto run = sample(dist, grid, s);
        Json j = sample_report_to_json(run.report);
        j["schedule_kind"] = schedule_name(kind);
        j["K"] = K;
        rows.push_back(j);
        csv << schedule_name(kind) << ',' << K << ','
            << (run.report.nll_available ? format_double(run.report.nll.value) : "") << ','
            << (run.report.nll_available ? format_double(run.report.nll.std_error) : "") << ','
            << run.report.n_samples << '\n';
        if (write_samples) {
          std::ostringstream sm;
          write_samples_csv(sm, run);
          emit(m, c.out, "samples_" + schedule_name(kind) + "_K" + std::to_string(K) + ".csv", sm.str());
        }
      }
    }
    m.begin_stage("write");
    emit(m, c.out, "simulate.json", dump_json(rows));
    emit(m, c.out, "simulate.csv", csv.str());
    m.end_stage();
    m.write(c.out);
    std::cout << csv.str();
    return 0;
  }
};

struct VerifyCmd {
  Common c;
  std::string suite = "all";
  std::string target;

  int run() const {
    RunManifest m("verify");
    m.set_config({{"common", common_json(c)}, {"suite", suite}, {"target", target}});
    ensure_dir(c.out);
    std::optional<TargetDistribution> dist;
    if (!target.empty()) dist = load_target(target);
    m.begin_stage("verify");
    const auto rep = run_verify(suite, dist ? &*dist : nullptr, c.seed);
    m.begin_stage("write");
    emit(m, c.out, "verify.json", dump_json(rep.to_json()));
    m.end_stage();
    m.write(c.out);
    for (const auto& chk : rep.checks) {
      std::cout << (chk.pass ? "PASS " : "FAIL ") << chk.suite << '/' << chk.name << ' '
                << chk.stats.dump() << '\n';
    }
    return rep.all_pass() ? 0 : kExitVerify;
  }
};

struct MmseTableCmd {
  Common c;
  std::string target = "gaussian";
  std::size_t points = 33;
  std::string policy = "auto";
  std::size_t mc_samples = 100000;

  int run() const {
    RunManifest m("mmse-table");
    m.set_config({{"common", common_json(c)},
                  {"target", target},
                  {"points", points},
                  {"policy", policy},
                  {"mc_samples", mc_samples}});
    ensure_dir(c.out);
    const auto dist = load_target(target);
    MmsePolicy p = default_policy(dist, c.seed);
    if (policy == "closed") {
      p = ClosedFormPolicy{};
    } else if (policy == "quadrature") {
      p = QuadraturePolicy{};
    } else if (policy == "mc") {
      p = MonteCarloPolicy{mc_samples, c.seed};
    } else if (policy != "auto") {
      throw InvalidConfig("--policy must be auto, closed, quadrature or mc");
    }
    if (points < 2) throw InvalidConfig("--points must be >= 2");
    const auto grid = grid_geometric(c.T, c.delta, points - 1);
    const MmseCurve curve(dist, p);
    std::ostringstream csv;
    write_mmse_table(csv, curve, grid.gammas());
    emit(m, c.out, "mmse.csv", csv.str());
    m.write(c.out);
    std::cout << csv.str();
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loss-adaptive diffusion step schedules"};
  app.require_subcommand(1);

  ScheduleCmd schedule;
  auto* s = app.add_subcommand("schedule", "Optimize a schedule from a loss CSV");
  add_common(s, schedule.c);
  add_las(s, schedule.las);
  s->add_option("--loss", schedule.loss, "gamma,loss,kind CSV")->required();
  s->add_flag("--trim", schedule.trim, "Restrict candidates to [1/T, 1/delta] (implied by --T/--delta)");

  GridsCmd grids;
  auto* g = app.add_subcommand("grids", "Emit baseline grids");
  add_common(g, grids.c);
  g->add_option("--K", grids.K, "Number of steps")->capture_default_str();

  ReportCmd report;
  auto* r = app.add_subcommand("report", "Error functionals per schedule");
  add_common(r, report.c);
  r->add_option("--target", report.target, "Target JSON or toy name")->capture_default_str();
  r->add_option("--schedule", report.schedules, "Schedule or grid JSON files");
  r->add_option("--kinds", report.kinds, "Baseline grids when no --schedule")->delimiter(',');
  r->add_option("--K", report.Ks, "Step counts for baseline grids")->delimiter(',');
  r->add_option("--loss", report.loss, "Model loss CSV");
  r->add_flag("--check-endpoints", report.check_endpoints, "Require schedules to match --T/--delta");

  SimulateCmd sim;
  auto* sm = app.add_subcommand("simulate", "Run the sampler on a toy target");
  add_common(sm, sim.c);
  add_las(sm, sim.las);
  sm->add_option("--target", sim.target, "Target JSON or toy name")->capture_default_str();
  sm->add_option("--kinds", sim.kinds, "Schedules")->delimiter(',');
  sm->add_option("--Ks", sim.Ks, "Step counts")->delimiter(',');
  sm->add_option("--samples", sim.samples, "Samples per setting")->capture_default_str();
  sm->add_option("--order", sim.order, "first | second")->capture_default_str();
  sm->add_option("--init", sim.init, "exact_forward | gaussian_prior")->capture_default_str();
  sm->add_option("--sigma-err", sim.sigma_err, "Denoiser error std (1 or K values)")->delimiter(',');
  sm->add_flag("--final-denoise", sim.final_denoise, "Also report NLL after m_delta");
  sm->add_flag("--write-samples", sim.write_samples, "Write per-run sample CSVs");
  sm->add_option("--candidates", sim.candidates, "LAS candidate count")->capture_default_str();

  VerifyCmd verify;
  auto* v = app.add_subcommand("verify", "Run verification suites");
  add_common(v, verify.c);
  v->add_option("--suite", verify.suite, "dp|mmse|entropy|geometric|area_kl|identity|eps|sampler|all")
      ->capture_default_str();
  v->add_option("--target", verify.target, "Target JSON or toy name");

  MmseTableCmd mt;
  auto* t = app.add_subcommand("mmse-table", "Tabulate mmse and its derivative");
  add_common(t, mt.c);
  t->add_option("--target", mt.target, "Target JSON or toy name")->capture_default_str();
  t->add_option("--points", mt.points, "Geometric knots over [1/T, 1/delta]")->capture_default_str();
  t->add_option("--policy", mt.policy, "auto|closed|quadrature|mc")->capture_default_str();
  t->add_option("--mc-samples", mt.mc_samples, "Monte Carlo sample count")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  // Explicit endpoints trim the candidate set to [1/T, 1/delta].
  schedule.trim = schedule.trim || s->count("--T") > 0 || s->count("--delta") > 0;

  try {
    if (*s) return schedule.run();
    if (*g) return grids.run();
    if (*r) return report.run();
    if (*sm) return sim.run();
    if (*v) return verify.run();
    if (*t) return mt.run();
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
