#pragma once

// Weighted topology selection: argmax over {E : |E| <= C} of
// sum_{(i,j) in E} w_ij * S_ij. Per-edge SKR does not depend on the rest of
// E, so the argmax is the top-C positive scores. The exhaustive search is
// kept as a reference.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "qnet/network.hpp"

namespace qnet {

using WeightMatrix = SymMatrix;

/// Pair indices of the top-`capacity` strictly positive scores, ties
/// broken by canonical index, returned in canonical order.
inline std::vector<std::size_t> top_scores(std::span<const double> scores, std::size_t capacity) {
  std::vector<std::size_t> idx;
  idx.reserve(scores.size());
  for (std::size_t k = 0; k < scores.size(); ++k)
    if (scores[k] > 0.0) idx.push_back(k);
  const std::size_t take = std::min(capacity, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                    [&](std::size_t l, std::size_t r) {
                      return scores[l] != scores[r] ? scores[l] > scores[r] : l < r;
                    });
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Topology topology_from_indices(std::span<const std::size_t> idx, std::size_t n,
                                      std::size_t capacity) {
  const auto pairs = enumerate_pairs(n);
  std::vector<Pair> edges;
  edges.reserve(idx.size());
  for (std::size_t k : idx) edges.push_back(pairs[k]);
  return Topology::from_edges(std::move(edges), n, capacity);
}

inline std::vector<double> edge_scores(const WeightMatrix& weights, const SymMatrix& skr_per_edge) {
  if (weights.nodes() != skr_per_edge.nodes())
    throw ValidationError("weight and SKR matrices differ in size");
  std::vector<double> scores(weights.pairs());
  for (std::size_t k = 0; k < scores.size(); ++k)
    scores[k] = weights.values()[k] * skr_per_edge.values()[k];
  return scores;
}

/// Feasible topology maximizing sum of w * S over its edges. Zero-score
/// pairs are never pumped, even when capacity is left over.
inline Topology select_topology(const WeightMatrix& weights, const SymMatrix& skr_per_edge,
                                std::size_t capacity) {
  if (capacity < 1) throw ValidationError("capacity must be at least 1");
  const auto scores = edge_scores(weights, skr_per_edge);
  return topology_from_indices(top_scores(scores, capacity), weights.nodes(), capacity);
}

inline constexpr std::uint64_t kFeasibleGuard = 1'000'000;

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > kFeasibleGuard * 1000) return r;  // saturating: only compared to the guard
  }
  return r;
}

/// Number of edge sets of size 0..C over n nodes.
inline std::uint64_t feasible_count(std::size_t n, std::size_t capacity) {
  const std::uint64_t m = pair_count(n);
  std::uint64_t total = 0;
  for (std::uint64_t k = 0; k <= std::min<std::uint64_t>(capacity, m); ++k) {
    total += binomial(m, k);
    if (total > kFeasibleGuard) break;
  }
  return total;
}

/// Calls `fn(std::span<const std::size_t>)` with the canonical pair indices
/// of every feasible topology: by size ascending, then lexicographically.
/// That order makes "first maximizer wins" reproduce the top-C tie-break.
template <class Fn>
void for_each_feasible(std::size_t n, std::size_t capacity, Fn&& fn) {
  if (n < 2) throw ValidationError("node count must be at least 2");
  if (feasible_count(n, capacity) > kFeasibleGuard)
    throw ValidationError("feasible topology count exceeds enumeration guard");
  const std::size_t m = pair_count(n);
  const std::size_t kmax = std::min(capacity, m);
  std::vector<std::size_t> comb;
  for (std::size_t k = 0; k <= kmax; ++k) {
    comb.resize(k);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    while (true) {
      fn(std::span<const std::size_t>(comb));
      // advance to the next k-combination of {0..m-1}
      std::size_t i = k;
      while (i > 0 && comb[i - 1] == m - k + i - 1) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
}

inline std::vector<Topology> enumerate_feasible(std::size_t n, std::size_t capacity) {
  std::vector<Topology> out;
  for_each_feasible(n, capacity, [&](std::span<const std::size_t> idx) {
    out.push_back(topology_from_indices(idx, n, capacity));
  });
  return out;
}

/// Brute-force argmax over every feasible topology.
inline Topology select_topology_exhaustive(const WeightMatrix& weights, const SymMatrix& skr_per_edge,
                                           std::size_t capacity) {
  const auto scores = edge_scores(weights, skr_per_edge);
  std::vector<std::size_t> best;
  double best_score = 0.0;
  bool have = false;
  for_each_feasible(weights.nodes(), capacity, [&](std::span<const std::size_t> idx) {
    double s = 0.0;
    for (std::size_t k : idx) s += scores[k];
    if (!have || s > best_score) {
      have = true;
      best_score = s;
      best.assign(idx.begin(), idx.end());
    }
  });
  return topology_from_indices(best, weights.nodes(), capacity);
}

}  // namespace qnet
