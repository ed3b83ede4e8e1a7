#pragma once

// Brute-force optimum for a single channel state. The convex hull of the
// feasible topologies' indicator vectors is {f in [0,1]^m : sum f <= C}, so
// searching time shares f over that polytope with a refining grid gives an
// answer independent of the Frank-Wolfe solver.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace qnet::testing {

struct GridResult {
  std::vector<double> share;
  std::vector<double> x;
  double objective = -std::numeric_limits<double>::infinity();
};

inline GridResult grid_optimum(const std::vector<double>& skr, double capacity,
                               const std::function<double(double)>& utility, int refinements = 30) {
  const std::size_t m = skr.size();
  std::vector<double> lo(m, 0.0), hi(m, 1.0);
  double step = 0.1;
  GridResult best;
  std::vector<double> f(m);

  std::function<void(std::size_t, double)> sweep = [&](std::size_t k, double used) {
    if (used > capacity + 1e-12) return;
    if (k == m) {
      double obj = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double v = utility(f[i] * skr[i]);
        if (!std::isfinite(v)) return;
        obj += v;
      }
      if (obj > best.objective) {
        best.objective = obj;
        best.share = f;
      }
      return;
    }
    for (double v = lo[k]; v <= hi[k] + 1e-12; v += step) {
      f[k] = std::min(v, 1.0);
      sweep(k + 1, used + f[k]);
    }
  };

  sweep(0, 0.0);
  for (int r = 0; r < refinements; ++r) {
    for (std::size_t i = 0; i < m; ++i) {
      lo[i] = std::max(0.0, best.share[i] - step);
      hi[i] = std::min(1.0, best.share[i] + step);
    }
    step /= 2.0;
    sweep(0, 0.0);
  }
  best.x.resize(m);
  for (std::size_t i = 0; i < m; ++i) best.x[i] = best.share[i] * skr[i];
  return best;
}

/// Rounds to `digits` significant figures.
inline double sig_figs(double v, int digits) {
  if (v == 0.0) return 0.0;
  const double scale = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(v)))));
  return std::round(v * scale) / scale;
}

}  // namespace qnet::testing
