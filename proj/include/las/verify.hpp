// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "las/experiment.hpp"

namespace las {

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  Json stats;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_pass() const;
  Json to_json() const;
};

/// Suites: dp, mmse, entropy, geometric, area_kl, identity, eps, sampler, all.
/// A target, when given, replaces the default targets of the
/// distribution-dependent suites. Throws InvalidConfig for unknown selectors.
VerifyReport run_verify(const std::string& selector, const TargetDistribution* target,
                        std::uint64_t seed);

const std::vector<std::string>& verify_suites();

/// Brute-force minimizer of schedule_objective over all index sequences
/// 0 = i_0 < ... < i_K = n - 1. Returns the first minimizer in lexicographic
/// order.
std::vector<std::size_t> exhaustive_schedule(const CandidateSet& cands, std::size_t K,
                                             double alpha);

}  // namespace las
