// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace las {

using Vec = std::vector<double>;

// Error hierarchy. The CLI maps these onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};
class InvalidConfig : public Error {
 public:
  using Error::Error;
};
class UnsupportedVariant : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class ExtrapolationError : public Error {
 public:
  using Error::Error;
};
class DegenerateEntropy : public Error {
 public:
  using Error::Error;
};
class Infeasible : public Error {
 public:
  using Error::Error;
};
class SearchExhausted : public Infeasible {
 public:
  using Infeasible::Infeasible;
};

/// Value together with its Monte-Carlo standard error (0 for deterministic
/// evaluations).
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// ---------------------------------------------------------------------------
// Seeding. Every random stream is derived from one root seed via splitmix64:
// stream(root, tag, index) = splitmix64(splitmix64(root ^ tag) + index).
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag,
                          std::uint64_t index = 0);

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Summation
// ---------------------------------------------------------------------------

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Fixed-order pairwise summation; result depends only on the input order.
double pairwise_sum(std::span<const double> xs);

/// Mean and standard error of i.i.d. per-sample values, reduced pairwise.
Estimate mean_and_stderr(std::span<const double> xs);

// ---------------------------------------------------------------------------
// Small vector helpers
// ---------------------------------------------------------------------------

double squared_distance(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

/// Runs body(chunk_index, begin, end) over [0, n) in fixed-size chunks,
/// spreading chunks over worker threads. Chunking does not depend on the
/// number of threads, so per-chunk seeding gives reproducible results.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& body);

/// Round-trip decimal formatting (17 significant digits).
std::string format_double(double x);

}  // namespace las
