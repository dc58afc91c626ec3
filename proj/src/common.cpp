// Copyright 2026 The LAS Schedule Authors
// SPDX-License-Identifier: Apache-2.0

#include "las/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace las {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag,
                          std::uint64_t index) {
  return splitmix64(splitmix64(root ^ tag) + index);
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kBlock = 32;
  if (xs.size() <= kBlock) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

Estimate mean_and_stderr(std::span<const double> xs) {
  if (xs.empty()) return {};
  const double n = static_cast<double>(xs.size());
  const double mean = pairwise_sum(xs) / n;
  if (xs.size() < 2) return {mean, 0.0};
  std::vector<double> dev(xs.size());
  std::transform(xs.begin(), xs.end(), dev.begin(),
                 [mean](double x) { return (x - mean) * (x - mean); });
  const double var = pairwise_sum(dev) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double squared_norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& body) {
  if (n == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min(hw, n_chunks);

  auto run = [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    body(c, begin, std::min(n, begin + chunk));
  };
  if (n_workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run(c);
    return;
  }

  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        std::size_t c;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= n_chunks || failure) return;
          c = next++;
        }
        try {
          run(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace las
