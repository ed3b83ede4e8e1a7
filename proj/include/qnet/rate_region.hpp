#pragma once

// Exact optimum of the long-run utility problem
//
//   maximize  sum_ij U(x_ij)
//   s.t.      x = sum_chi pi_chi sum_G P_{G,chi} S(G, chi),  P_chi in simplex
//
// for the alpha-fair family. Solved by pairwise Frank-Wolfe over the product
// of per-state simplices. The linear subproblem in each state is the same
// weighted topology selection the scheduler runs, with weights U'(x). The
// Frank-Wolfe gap certifies F(x_opt) - F(x) <= gap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnet/network.hpp"
#include "qnet/scheduler.hpp"
#include "qnet/skr.hpp"
#include "qnet/topology.hpp"

namespace qnet {

/// alpha-fair utility U(x) = x^(1-alpha)/(1-alpha), or log x at alpha = 1.
struct AlphaUtility {
  double alpha = 1.0;

  bool is_log() const { return alpha == 1.0; }

  double value(double x) const {
    if (is_log()) return std::log(x);
    if (alpha == 0.0) return x;
    return std::pow(x, 1.0 - alpha) / (1.0 - alpha);
  }
  double derivative(double x) const {
    if (is_log()) return 1.0 / x;
    if (alpha == 0.0) return 1.0;
    return std::pow(x, -alpha);
  }
  /// log and alpha > 1 diverge at zero; alpha < 1 is defined there.
  bool in_domain(double x) const { return alpha >= 1.0 ? x > 0.0 : x >= 0.0; }
};

/// Round robin's utility depends on the instantaneous SKR and has no
/// state-independent optimum, so it is rejected.
inline AlphaUtility utility_of(const Strategy& s) {
  if (std::holds_alternative<ProportionalFair>(s)) return {1.0};
  if (std::holds_alternative<Greedy>(s)) return {0.0};
  if (auto* a = std::get_if<AlphaFair>(&s)) return {a->alpha};
  throw ValidationError("round robin has no rate-region utility");
}

inline double evaluate_objective(std::span<const double> x, const AlphaUtility& u) {
  if (!(u.alpha >= 0.0)) throw ValidationError("alpha must be non-negative");
  double f = 0.0;
  for (double v : x) {
    if (!u.in_domain(v)) throw ValidationError("objective evaluated outside its domain");
    f += u.value(v);
  }
  return f;
}

struct RegionVertex {
  Topology topology;
  std::vector<double> rates;  // canonical pair order
};

/// Per channel state, the SKR vector of every feasible topology.
inline std::vector<std::vector<RegionVertex>> region_vertices(const NetworkConfig& cfg,
                                                              const std::vector<ChannelState>& states) {
  std::vector<std::vector<RegionVertex>> out;
  for (const auto& chi : states) {
    const SymMatrix per_edge = skr_if_pumped(cfg, chi);
    std::vector<RegionVertex> verts;
    for_each_feasible(cfg.n, cfg.capacity, [&](std::span<const std::size_t> idx) {
      RegionVertex v{topology_from_indices(idx, cfg.n, cfg.capacity),
                     std::vector<double>(per_edge.pairs(), 0.0)};
      for (std::size_t k : idx) v.rates[k] = per_edge.values()[k];
      verts.push_back(std::move(v));
    });
    out.push_back(std::move(verts));
  }
  return out;
}

struct StateDistribution {
  std::string state_id;
  double pi = 0.0;
  std::vector<std::pair<Topology, double>> support;
};

struct RateRegionSolution {
  std::vector<double> x_star;
  std::vector<StateDistribution> distributions;
  std::vector<bool> excluded;  // pairs with zero rate in every state
  double objective = 0.0;
  double initial_objective = 0.0;
  double duality_gap = 0.0;
  double gap_tolerance = 0.0;
  double log_sum = 0.0;   // over included pairs
  double geo_mean = 0.0;  // over included pairs
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;
  std::vector<double> gap_history;
};

struct SolveOptions {
  /// Stop when gap <= rel_tol * |F(x0)|.
  double rel_tol = 1e-6;
  std::size_t max_iterations = 100'000;
  bool record_history = false;
};

namespace detail {

using Mask = std::uint64_t;

struct ActiveVertex {
  Mask mask;
  double weight;
};

inline double masked_dot(Mask mask, std::span<const double> g, std::span<const double> s) {
  double v = 0.0;
  for (std::size_t k = 0; mask; ++k, mask >>= 1)
    if (mask & 1u) v += g[k] * s[k];
  return v;
}

inline Topology mask_topology(Mask mask, std::size_t n, std::size_t capacity) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; mask; ++k, mask >>= 1)
    if (mask & 1u) idx.push_back(k);
  return topology_from_indices(idx, n, capacity);
}

}  // namespace detail

/// Frank-Wolfe solve from per-state per-edge SKR matrices.
inline RateRegionSolution solve_utility_optimum(const std::vector<SymMatrix>& per_edge,
                                                const std::vector<double>& pi,
                                                const std::vector<std::string>& state_ids,
                                                std::size_t capacity, const AlphaUtility& u,
                                                const SolveOptions& opt = {}) {
  using detail::ActiveVertex;
  using detail::Mask;
  if (per_edge.empty() || per_edge.size() != pi.size())
    throw ValidationError("states and pi must be non-empty and of equal length");
  if (capacity < 1) throw ValidationError("capacity must be at least 1");
  if (!(u.alpha >= 0.0)) throw ValidationError("alpha must be non-negative");
  const std::size_t n = per_edge.front().nodes();
  const std::size_t m = pair_count(n);
  if (m > 64) throw ValidationError("rate-region oracle supports at most 64 pairs");
  const std::size_t states = per_edge.size();
  double pi_total = 0.0;
  for (double p : pi) {
    if (!(p >= 0.0)) throw ValidationError("pi must be non-negative");
    pi_total += p;
  }
  if (std::abs(pi_total - 1.0) > 1e-12) throw ValidationError("pi must sum to 1");

  RateRegionSolution sol;
  sol.excluded.assign(m, true);
  for (std::size_t c = 0; c < states; ++c)
    for (std::size_t k = 0; k < m; ++k)
      if (pi[c] > 0.0 && per_edge[c].values()[k] > 0.0) sol.excluded[k] = false;

  // start: uniform over the single-edge topologies in every state
  std::vector<std::vector<ActiveVertex>> active(states);
  for (std::size_t c = 0; c < states; ++c)
    for (std::size_t k = 0; k < m; ++k)
      active[c].push_back({Mask{1} << k, 1.0 / static_cast<double>(m)});

  std::vector<double> x(m, 0.0);
  auto recompute_x = [&] {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t c = 0; c < states; ++c) {
      auto s = per_edge[c].values();
      for (const auto& v : active[c]) {
        Mask mask = v.mask;
        for (std::size_t k = 0; mask; ++k, mask >>= 1)
          if (mask & 1u) x[k] += pi[c] * v.weight * s[k];
      }
    }
  };
  auto objective = [&](std::span<const double> y) {
    double f = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      if (!sol.excluded[k]) f += u.value(y[k]);
    return f;
  };

  recompute_x();
  sol.initial_objective = objective(x);
  sol.gap_tolerance = opt.rel_tol * (sol.initial_objective != 0.0 ? std::abs(sol.initial_objective) : 1.0);

  std::vector<double> g(m), d(m), scores(m);
  std::vector<Mask> fw_mask(states);
  std::vector<double> fw_val(states), away_val(states);
  std::vector<std::size_t> away_pos(states);
  double gap = std::numeric_limits<double>::infinity();

  std::size_t it = 0;
  for (;; ++it) {
    for (std::size_t k = 0; k < m; ++k) g[k] = sol.excluded[k] ? 0.0 : u.derivative(x[k]);

    gap = 0.0;
    std::size_t best_state = 0;
    double best_pairwise = -1.0;
    for (std::size_t c = 0; c < states; ++c) {
      auto s = per_edge[c].values();
      for (std::size_t k = 0; k < m; ++k) scores[k] = g[k] * s[k];
      Mask mask = 0;
      for (std::size_t k : top_scores(scores, capacity)) mask |= Mask{1} << k;
      fw_mask[c] = mask;
      fw_val[c] = detail::masked_dot(mask, g, s);
      double current = 0.0;
      away_val[c] = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < active[c].size(); ++a) {
        const double val = detail::masked_dot(active[c][a].mask, g, s);
        current += active[c][a].weight * val;
        if (val < away_val[c]) {
          away_val[c] = val;
          away_pos[c] = a;
        }
      }
      gap += pi[c] * (fw_val[c] - current);
      const double pairwise = pi[c] * (fw_val[c] - away_val[c]);
      if (pairwise > best_pairwise) {
        best_pairwise = pairwise;
        best_state = c;
      }
    }
    gap = std::max(gap, 0.0);
    if (opt.record_history) {
      sol.objective_history.push_back(objective(x));
      sol.gap_history.push_back(gap);
    }
    if (gap <= sol.gap_tolerance) {
      sol.converged = true;
      break;
    }
    if (it >= opt.max_iterations || best_pairwise <= 0.0) break;

    // pairwise step in the chosen state: move mass from the away vertex to
    // the Frank-Wolfe vertex
    const std::size_t c = best_state;
    auto s = per_edge[c].values();
    const Mask to = fw_mask[c];
    const Mask from = active[c][away_pos[c]].mask;
    for (std::size_t k = 0; k < m; ++k) {
      const double in_to = (to >> k) & 1u ? s[k] : 0.0;
      const double in_from = (from >> k) & 1u ? s[k] : 0.0;
      d[k] = pi[c] * (in_to - in_from);
    }
    const double gamma_max = active[c][away_pos[c]].weight;
    auto slope = [&](double gam) {
      double v = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        if (sol.excluded[k] || d[k] == 0.0) continue;
        const double y = x[k] + gam * d[k];
        if (!(y > 0.0)) return d[k] < 0.0 ? -std::numeric_limits<double>::infinity() : v;
        v += u.derivative(y) * d[k];
      }
      return v;
    };
    double step = gamma_max;
    if (slope(gamma_max) < 0.0) {
      double lo = 0.0, hi = gamma_max;
      for (int i = 0; i < 64 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) >= 0.0 ? lo : hi) = mid;
      }
      step = lo;
    }

    if (step >= gamma_max) {
      active[c].erase(active[c].begin() + static_cast<std::ptrdiff_t>(away_pos[c]));
      step = gamma_max;
    } else {
      active[c][away_pos[c]].weight -= step;
    }
    auto hit = std::find_if(active[c].begin(), active[c].end(),
                            [&](const ActiveVertex& v) { return v.mask == to; });
    if (hit != active[c].end()) hit->weight += step;
    else active[c].push_back({to, step});

    if ((it & 255u) == 255u) recompute_x();
    else
      for (std::size_t k = 0; k < m; ++k) x[k] += step * d[k];
  }

  recompute_x();
  sol.iterations = it;
  sol.duality_gap = gap;
  sol.x_star = x;
  sol.objective = objective(x);
  std::size_t included = 0;
  for (std::size_t k = 0; k < m; ++k)
    if (!sol.excluded[k] && x[k] > 0.0) {
      sol.log_sum += std::log(x[k]);
      ++included;
    }
  sol.geo_mean = included ? std::exp(sol.log_sum / static_cast<double>(included)) : 0.0;

  for (std::size_t c = 0; c < states; ++c) {
    StateDistribution dist;
    dist.state_id = c < state_ids.size() ? state_ids[c] : "state" + std::to_string(c);
    dist.pi = pi[c];
    double total = 0.0;
    for (const auto& v : active[c]) total += v.weight;
    for (const auto& v : active[c])
      if (v.weight > 0.0) dist.support.emplace_back(detail::mask_topology(v.mask, n, capacity), v.weight / total);
    std::sort(dist.support.begin(), dist.support.end(), [](const auto& l, const auto& r) {
      return l.first.size() != r.first.size() ? l.first.size() < r.first.size()
                                              : l.first.edges() < r.first.edges();
    });
    sol.distributions.push_back(std::move(dist));
  }
  return sol;
}

inline RateRegionSolution solve_utility_optimum(const NetworkConfig& cfg,
                                                const std::vector<ChannelState>& states,
                                                const std::vector<double>& pi, const AlphaUtility& u,
                                                const SolveOptions& opt = {}) {
  cfg.validate();
  std::vector<SymMatrix> per_edge;
  std::vector<std::string> ids;
  for (const auto& chi : states) {
    per_edge.push_back(skr_if_pumped(cfg, chi));
    ids.push_back(chi.id);
  }
  return solve_utility_optimum(per_edge, pi, ids, cfg.capacity, u, opt);
}

}  // namespace qnet
