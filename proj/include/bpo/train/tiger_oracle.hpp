#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bpo/core/errors.hpp"
#include "bpo/envs/tiger.hpp"

namespace bpo {

struct TigerOracleResult {
  double value_at_uniform = 0.0;
  std::vector<double> grid;    // p = P(tiger left) at each grid point
  std::vector<double> values;  // V*(p)
  std::vector<TigerAction> greedy;
  int iterations = 0;
  double residual = 0.0;

  TigerAction greedy_at(double p) const {
    const auto n = static_cast<double>(grid.size() - 1);
    return greedy[static_cast<std::size_t>(std::lround(std::clamp(p, 0.0, 1.0) * n))];
  }
};

namespace detail {

inline double interpolate(const std::vector<double>& v, double p) {
  const double x = std::clamp(p, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(x), v.size() - 2);
  const double w = x - static_cast<double>(i);
  return (1.0 - w) * v[i] + w * v[i + 1];
}

}  // namespace detail

/// Value iteration on the continuing Tiger belief MDP, with the belief
/// p = P(tiger left) discretized on `resolution` evenly spaced points and
/// values between grid points linearly interpolated. Listening branches on the
/// two observations; opening a door earns its expected reward and resets p to 1/2.
inline TigerOracleResult tiger_value_iteration_oracle(double listen_accuracy, double discount, int resolution = 1001,
                                                      double tolerance = 1e-8, int max_iterations = 100000) {
  if (!(listen_accuracy > 0.5 && listen_accuracy <= 1.0)) throw ConfigError("listen_accuracy must lie in (0.5, 1]");
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount must lie in [0, 1)");
  if (resolution < 3 || resolution % 2 == 0) throw ConfigError("resolution must be odd and >= 3");

  const auto n = static_cast<std::size_t>(resolution);
  TigerOracleResult r;
  r.grid.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.grid[i] = static_cast<double>(i) / static_cast<double>(n - 1);

  // Listening transitions depend only on p, so precompute them.
  std::vector<double> p_left(n), post_left(n), post_right(n);
  const double a = listen_accuracy;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = r.grid[i];
    p_left[i] = p * a + (1.0 - p) * (1.0 - a);
    post_left[i] = p_left[i] > 0.0 ? p * a / p_left[i] : p;
    const double pr = 1.0 - p_left[i];
    post_right[i] = pr > 0.0 ? p * (1.0 - a) / pr : p;
  }

  std::vector<double> v(n, 0.0), next(n);
  r.greedy.assign(n, TigerAction::kListen);
  const std::size_t mid = n / 2;
  for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
    const double reset = discount * v[mid];
    r.residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = r.grid[i];
      const double listen = -1.0 + discount * (p_left[i] * detail::interpolate(v, post_left[i]) +
                                               (1.0 - p_left[i]) * detail::interpolate(v, post_right[i]));
      const double open_left = p * -100.0 + (1.0 - p) * 10.0 + reset;
      const double open_right = p * 10.0 + (1.0 - p) * -100.0 + reset;
      double best = listen;
      TigerAction act = TigerAction::kListen;
      if (open_left > best) best = open_left, act = TigerAction::kOpenLeft;
      if (open_right > best) best = open_right, act = TigerAction::kOpenRight;
      next[i] = best;
      r.greedy[i] = act;
      r.residual = std::max(r.residual, std::abs(best - v[i]));
    }
    v.swap(next);
    if (r.residual < tolerance) break;
  }
  r.iterations = std::min(r.iterations, max_iterations);
  r.values = v;
  r.value_at_uniform = v[mid];
  return r;
}

}  // namespace bpo
