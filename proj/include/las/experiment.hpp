// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "las/error_functionals.hpp"
#include "las/gauss_channel.hpp"
#include "las/reverse_sampler.hpp"
#include "las/schedule_opt.hpp"
#include "las/target_dist.hpp"

namespace las {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Toy targets
// ---------------------------------------------------------------------------

/// (8, 7, ..., 1) / 36.
std::vector<double> default_toy_weights();

/// circle8: means at radius `scale` (default 4), angles 2 pi j / 8.
/// grid8: 2 x 4 lattice, rows y in {-scale/2, scale/2}, columns
/// x in {-1.5, -0.5, 0.5, 1.5} * scale (default spacing 2); weights row-major.
/// scale <= 0 selects the default.
TargetDistribution build_toy(const std::string& name,
                             const std::optional<std::vector<double>>& weights = std::nullopt,
                             double sigma0 = 0.25, double scale = 0.0);

/// Atoms at the mixture means with the mixture weights.
TargetDistribution discrete_companion(const TargetDistribution& gmm);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Json target_to_json(const TargetDistribution& dist);
TargetDistribution target_from_json(const Json& j);
/// A JSON file path, or one of circle8, grid8, two_atom, gaussian.
TargetDistribution load_target(const std::string& file_or_name);

/// `gamma,loss,kind` rows (kind x0|eps, default x0); '#' starts a comment;
/// an optional header row is skipped. Throws InvalidArgument on bad rows.
LossProfile parse_loss_csv(std::istream& in);
LossProfile read_loss_csv(const std::string& path);
void write_loss_csv(std::ostream& out, const LossProfile& profile);

Json schedule_to_json(const Schedule& s);
/// Reads the "gammas" array of a schedule or grid JSON.
SnrGrid grid_from_json(const Json& j);
Json grid_to_json(const std::string& name, const SnrGrid& grid);
Json error_report_to_json(const ErrorReport& r);
Json final_bounds_to_json(const FinalBounds& b);
Json sample_report_to_json(const SampleReport& r);
void write_samples_csv(std::ostream& out, const SampleRun& run);
/// gamma,mmse,stderr,dmmse,stderr
void write_mmse_table(std::ostream& out, const MmseCurve& curve, std::span<const double> gammas);

/// Serializes with two-space indentation and a trailing newline.
std::string dump_json(const Json& j);
void write_text_file(const std::string& path, const std::string& text);

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

std::string sha256_file(const std::string& path);

class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_config(Json config) { config_ = std::move(config); }
  void begin_stage(const std::string& name);
  void end_stage();
  /// Records a written artifact (path relative to the output directory).
  void add_file(const std::string& dir, const std::string& name);

  Json to_json() const;
  /// Writes manifest.json into dir.
  void write(const std::string& dir) const;
  /// True if every listed file exists and still hashes to the recorded value.
  static bool verify(const std::string& dir);

 private:
  std::string command_;
  Json config_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, sha256
  std::vector<std::pair<std::string, double>> stages_;      // name, seconds
  std::string current_;
  std::chrono::steady_clock::time_point started_;
};

// ---------------------------------------------------------------------------
// Toy experiments
// ---------------------------------------------------------------------------

enum class ScheduleKind { kTimeUniform, kGeometric, kEdm, kLas };

std::string schedule_name(ScheduleKind k);
ScheduleKind parse_schedule_kind(const std::string& s);

struct ToyConfig {
  double T = 1.0;
  double delta = 1e-3;
  double rho = 7.0;
  LasConfig las;
  /// LAS candidates: geometric in gamma over [1/T, 1/delta].
  std::size_t n_candidates = 256;
  std::size_t quadrature_nodes = 48;
  SamplerConfig sampler;
};

/// x0 risk profile of the exact denoiser: L(gamma) = mmse(gamma).
LossProfile oracle_loss_profile(const TargetDistribution& dist, std::span<const double> gammas,
                                const MmsePolicy& policy);

/// Builds the grid of one kind with cfg.las.K steps. LAS uses the oracle
/// loss profile on the candidate set.
SnrGrid build_schedule(ScheduleKind kind, const TargetDistribution& dist, const ToyConfig& cfg);

struct ToyRow {
  ScheduleKind kind;
  std::size_t K = 0;
  SnrGrid grid;
  SampleReport report;
};

/// Samples every (kind, K) pair with cfg.sampler; each pair gets its own
/// stream derived from cfg.sampler.seed.
std::vector<ToyRow> run_toy(const TargetDistribution& dist, const ToyConfig& cfg,
                            const std::vector<ScheduleKind>& kinds,
                            const std::vector<std::size_t>& Ks);

}  // namespace las
