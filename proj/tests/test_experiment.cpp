#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "las/experiment.hpp"
#include "las/verify.hpp"

using namespace las;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("las_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("toy targets") {
  const auto w = default_toy_weights();
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
  CHECK(w.front() == doctest::Approx(8.0 / 36.0));
  const auto c = build_toy("circle8");
  REQUIRE(c.mixture().components.size() == 8);
  for (const auto& comp : c.mixture().components) {
    CHECK(std::hypot(comp.mean[0], comp.mean[1]) == doctest::Approx(4.0));
    CHECK(comp.sigma == 0.25);
  }
  const auto g = build_toy("grid8", std::vector<double>(8, 0.125));
  std::set<std::pair<double, double>> means;
  for (const auto& comp : g.mixture().components) means.insert({comp.mean[0], comp.mean[1]});
  CHECK(means.size() == 8);
  CHECK(means.begin()->first == -3.0);
  CHECK(means.begin()->second == -1.0);
  const auto comp = discrete_companion(g);
  CHECK(shannon_entropy(comp) == doctest::Approx(std::log(8.0)));
  CHECK_THROWS_AS(build_toy("ring"), InvalidArgument);
  CHECK_THROWS_AS(build_toy("circle8", std::vector<double>(7, 1.0 / 7.0)), InvalidArgument);
  CHECK_THROWS_AS(build_toy("circle8", std::nullopt, 0.0), InvalidArgument);
}

TEST_CASE("target JSON round trip") {
  for (const auto& d : {build_toy("circle8"), load_target("two_atom"), load_target("gaussian")}) {
    const auto j = target_to_json(d);
    const auto back = target_from_json(Json::parse(dump_json(j)));
    CHECK(dump_json(target_to_json(back)) == dump_json(j));
  }
  CHECK_THROWS_AS(target_from_json(Json::parse(R"({"dim":1,"variant":"odd"})")), InvalidArgument);
  CHECK_THROWS_AS(target_from_json(Json::parse(R"({"dim":2,"variant":"discrete","atoms":[{"p":1,"x":[0]}]})")),
                  InvalidArgument);
  CHECK_THROWS_AS(load_target("/nonexistent/target.json"), InvalidConfig);
  const auto dir = scratch_dir("target");
  write_text_file((dir / "bad.json").string(), "{not json");
  CHECK_THROWS_AS(load_target((dir / "bad.json").string()), InvalidArgument);
  write_text_file((dir / "t.json").string(), dump_json(target_to_json(load_target("two_atom"))));
  CHECK(load_target((dir / "t.json").string()).size() == 2);
}

TEST_CASE("loss CSV parsing") {
  std::istringstream in("# a comment\ngamma,loss,kind\n1.0,0.5\n2.0, 0.8 ,eps # trailing\n\n4.0,0.1,x0\n");
  const auto p = parse_loss_csv(in);
  REQUIRE(p.knots().size() == 3);
  CHECK(p.knots()[1].kind == LossKind::kEps);
  CHECK(p.x0_at(2.0) == doctest::Approx(0.4));
  std::ostringstream out;
  write_loss_csv(out, p);
  std::istringstream again(out.str());
  const auto q = parse_loss_csv(again);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(q.knots()[i].gamma == p.knots()[i].gamma);
    CHECK(q.knots()[i].loss == p.knots()[i].loss);
    CHECK(q.knots()[i].kind == p.knots()[i].kind);
  }
  for (const char* bad : {"1.0\n", "1.0,abc\n", "1.0,0.5,v\n", "2.0,1\n1.0,1\n", "1,2,x0,4\n"}) {
    std::istringstream b(bad);
    CHECK_THROWS_AS(parse_loss_csv(b), InvalidArgument);
  }
  CHECK_THROWS_AS(read_loss_csv("/nonexistent/loss.csv"), InvalidConfig);
}

TEST_CASE("schedule and grid JSON") {
  std::vector<double> g, r;
  for (int i = 0; i < 10; ++i) {
    g.push_back(std::pow(2.0, i));
    r.push_back(1.0 / (1.0 + g.back()));
  }
  LasConfig cfg;
  cfg.K = 3;
  const auto s = las_exact(CandidateSet(g, r, 1.5), cfg);
  const auto j = schedule_to_json(s);
  CHECK(j.at("K") == 3);
  CHECK(j.at("algorithm") == "exact");
  CHECK(j.at("indices").size() == 4);
  CHECK(grid_from_json(j).gammas() == s.gammas);
  const auto gj = grid_to_json("geometric", grid_geometric(1.0, 0.01, 2));
  CHECK(grid_from_json(Json::parse(dump_json(gj))).gammas() == grid_geometric(1.0, 0.01, 2).gammas());
  CHECK_THROWS_AS(grid_from_json(Json::parse("{}")), InvalidArgument);
  CHECK(dump_json(Json{{"a", 1}}).back() == '\n');
}

TEST_CASE("sha256 and the run manifest") {
  const auto dir = scratch_dir("manifest");
  write_text_file((dir / "abc.txt").string(), "abc");
  CHECK(sha256_file((dir / "abc.txt").string()) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  write_text_file((dir / "empty.txt").string(), "");
  CHECK(sha256_file((dir / "empty.txt").string()) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  RunManifest m("test");
  m.set_config(Json{{"K", 3}});
  m.begin_stage("write");
  m.add_file(dir.string(), "abc.txt");
  m.end_stage();
  m.write(dir.string());
  CHECK(RunManifest::verify(dir.string()));
  const auto j = m.to_json();
  CHECK(j.at("files").size() == 1);
  CHECK(j.at("stages").at(0).at("stage") == "write");
  write_text_file((dir / "abc.txt").string(), "abd");
  CHECK_FALSE(RunManifest::verify(dir.string()));
  fs::remove(dir / "abc.txt");
  CHECK_FALSE(RunManifest::verify(dir.string()));
  CHECK_FALSE(RunManifest::verify((dir / "nowhere").string()));
}

TEST_CASE("error reports on baseline grids") {
  MmseCurve cf(TargetDistribution::single_gaussian({0.0}, 1.0), ClosedFormPolicy{});
  const double geo = disc_error(cf, grid_geometric(1.0, 1e-3, 8)).value;
  const double tu = disc_error(cf, grid_time_uniform(1.0, 1e-3, 8)).value;
  CHECK(geo < tu);
  const auto grid = grid_geometric(1.0, 1e-3, 8);
  const auto exact = oracle_loss_profile(cf.dist(), grid.gammas(), ClosedFormPolicy{});
  CHECK(apx_error(exact, cf, grid).value.value == 0.0);

  // 1/K decay holds once K >= ln Lambda for every K in the sweep; on
  // [0.5, 8] that is from K = 3 on.
  std::vector<double> ks, es;
  for (std::size_t K : {4u, 8u, 16u, 32u}) {
    ks.push_back(double(K));
    es.push_back(disc_error(cf, grid_geometric(2.0, 0.125, K)).value);
  }
  const double slope = loglog_slope(ks, es);
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.15));

  const auto j = error_report_to_json(error_report(cf, grid, &exact));
  CHECK(j.at("e_apx").at("value") == 0.0);
  CHECK(j.at("bounds").is_null());
}

TEST_CASE("schedule builder and toy runs") {
  const auto d = build_toy("circle8");
  ToyConfig cfg;
  cfg.las.K = 5;
  cfg.n_candidates = 64;
  cfg.sampler.n_samples = 2000;
  cfg.sampler.seed = 3;
  for (auto kind : {ScheduleKind::kTimeUniform, ScheduleKind::kGeometric, ScheduleKind::kEdm,
                    ScheduleKind::kLas}) {
    const auto g = build_schedule(kind, d, cfg);
    CHECK(g.steps() == 5);
    CHECK(g.gammas().front() == doctest::Approx(1.0));
    CHECK(g.gammas().back() == doctest::Approx(1000.0));
    CHECK(parse_schedule_kind(schedule_name(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_schedule_kind("cosine"), InvalidConfig);
  const auto rows = run_toy(d, cfg, {ScheduleKind::kLas, ScheduleKind::kEdm}, {3, 5});
  CHECK(rows.size() == 4);
  const auto again = run_toy(d, cfg, {ScheduleKind::kLas, ScheduleKind::kEdm}, {3, 5});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].report.nll.value == again[i].report.nll.value);
    CHECK(std::isfinite(rows[i].report.nll.value));
  }
  const auto sj = sample_report_to_json(rows[0].report);
  CHECK(sj.at("config").at("order") == "first");
  CHECK(sj.at("nll").contains("stderr"));
}

TEST_CASE("LAS on a dense random profile matches exhaustive search on a subset") {
  Rng rng(64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<LossKnot> knots;
  for (int i = 0; i < 64; ++i) {
    const double g = i == 63 ? 1000.0 : std::exp(std::log(1000.0) * i / 63.0);
    knots.push_back({g, 0.01 + u(rng), LossKind::kX0});
  }
  const LossProfile full(knots);
  LasConfig cfg;
  cfg.K = 10;
  CHECK(las_exact(CandidateSet::from_profile(full, 1.5, 1.0, 1000.0), cfg).indices.size() == 11);
  // reduce to every fourth knot so the oracle stays cheap
  std::vector<LossKnot> sub;
  for (std::size_t i = 0; i < 64; i += 4) sub.push_back(knots[i]);
  sub.push_back(knots.back());
  const auto cands = CandidateSet::from_profile(LossProfile(sub), 1.5, 1.0, 1000.0);
  REQUIRE(cands.size() == 17);
  cfg.K = 6;
  const auto s = las_exact(cands, cfg);
  CHECK(s.indices == exhaustive_schedule(cands, 6, 0.0));
}

TEST_CASE("verify suites") {
  CHECK(verify_suites().size() == 8);
  CHECK_THROWS_AS(run_verify("nope", nullptr, 0), InvalidConfig);
  const auto pm = TargetDistribution::point_mass({0.0});
  const auto r = run_verify("all", &pm, 1);
  CHECK(r.all_pass());
  for (const auto& c : r.checks) {
    INFO(c.suite << "/" << c.name << " " << c.stats.dump());
    CHECK(c.pass);
  }
  CHECK(run_verify("dp", nullptr, 2).all_pass());
  CHECK(run_verify("dp", nullptr, 2).to_json().dump() == run_verify("dp", nullptr, 2).to_json().dump());
}
