#pragma once

// Reference computations used only by tests. Nothing here calls into the fids kernels
// or the CUSUM implementation, so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace fids::testing {

/// Cumulative sums of deviations from the mean in long double, by explicit prefix sums.
inline std::vector<long double> prefix_sum_trace(std::span<const double> y) {
  long double total = 0.0L;
  for (double v : y) {
    total += v;
  }
  const long double mean = total / static_cast<long double>(y.size());
  std::vector<long double> s(y.size() + 1, 0.0L);
  for (std::size_t i = 1; i <= y.size(); ++i) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < i; ++j) {
      acc += static_cast<long double>(y[j]) - mean;
    }
    s[i] = acc;
  }
  return s;
}

inline long double range_of(std::span<const long double> s) {
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  return *hi - *lo;
}

inline long double range_of_order(std::span<const double> y, std::span<const std::size_t> order) {
  std::vector<double> permuted(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    permuted[i] = y[order[i]];
  }
  const auto s = prefix_sum_trace(permuted);
  return range_of(s);
}

/// Tie band matching the documented definition: 1e-12 * sum |y_i - mean|.
inline long double tie_band(std::span<const double> y) {
  long double total = 0.0L;
  for (double v : y) {
    total += v;
  }
  const long double mean = total / static_cast<long double>(y.size());
  long double abs_dev = 0.0L;
  for (double v : y) {
    abs_dev += std::fabs(static_cast<long double>(v) - mean);
  }
  return 1e-12L * abs_dev;
}

/// Exact confidence: share of ALL n! orderings whose range is strictly below the original.
inline double exact_permutation_confidence(std::span<const double> y) {
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const long double original = range_of_order(y, order);
  const long double band = tie_band(y);
  std::size_t below = 0;
  std::size_t total = 0;
  do {
    below += range_of_order(y, order) < original - band ? 1 : 0;
    ++total;
  } while (std::next_permutation(order.begin(), order.end()));
  return 100.0 * static_cast<double>(below) / static_cast<double>(total);
}

/// Second, independent Monte-Carlo bootstrap (mt19937_64 + std::shuffle).
inline double reference_bootstrap_confidence(std::span<const double> y, std::size_t n_boot, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const long double original = range_of_order(y, order);
  const long double band = tie_band(y);
  std::size_t below = 0;
  for (std::size_t r = 0; r < n_boot; ++r) {
    std::shuffle(order.begin(), order.end(), gen);
    below += range_of_order(y, order) < original - band ? 1 : 0;
  }
  return 100.0 * static_cast<double>(below) / static_cast<double>(n_boot);
}

/// Central difference of f at x along coordinate k.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                 std::size_t k, double h) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double up = f(x);
  x[k] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), floor});
}

/// Gaussian noise for building test series (not the library generator).
inline std::vector<double> noise(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> v(n);
  for (auto& x : v) {
    x = dist(gen);
  }
  return v;
}

inline std::vector<double> step_series(std::size_t before, std::size_t after, double low, double high, double sigma,
                                       std::uint64_t seed) {
  auto v = noise(before + after, sigma, seed);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] += i < before ? low : high;
  }
  return v;
}

} // namespace fids::testing
