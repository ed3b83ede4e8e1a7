#pragma once

// Secret-key-rate model: S_ij = eta_ij * r * (1 - h(Qb_ij)) with
// eta_ij = 10^(-beta * L_ij / 10). Pairs that are not pumped get zero.

#include <cmath>

#include "qnet/network.hpp"

namespace qnet {

/// Base-2 binary entropy, with h(0) = h(1) = 0.
inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("binary entropy argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Fraction of photons surviving `length_km` of fiber.
inline double transmissivity(double length_km, double attenuation_db_per_km) {
  if (length_km < 0.0) throw ValidationError("fiber length must be non-negative");
  if (!(attenuation_db_per_km > 0.0)) throw ValidationError("attenuation must be positive");
  return std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
}

inline double raw_key_rate(double eta, double repetition_rate_hz) {
  return eta * repetition_rate_hz;
}

inline double link_skr(double length_km, double qber, double attenuation_db_per_km,
                       double repetition_rate_hz) {
  const double raw =
      raw_key_rate(transmissivity(length_km, attenuation_db_per_km), repetition_rate_hz);
  // (1 - h) can round to a tiny negative near Qb = 0.5
  return std::max(0.0, raw * (1.0 - binary_entropy(qber)));
}

/// Rate every pair would get if it were pumped under channel state `chi`.
/// Per-edge SKR does not depend on which other pairs are pumped.
inline SymMatrix skr_if_pumped(const NetworkConfig& cfg, const ChannelState& chi) {
  if (cfg.direct_mode()) return *cfg.direct_skr;
  if (chi.qber.nodes() != cfg.n) throw ValidationError("channel state size does not match network");
  SymMatrix rates(cfg.n);
  const auto pairs = enumerate_pairs(cfg.n);
  for (std::size_t k = 0; k < pairs.size(); ++k)
    rates.values()[k] = link_skr((*cfg.distances_km)[pairs[k]], chi.qber[pairs[k]],
                                 cfg.attenuation_db_per_km, cfg.repetition_rate_hz);
  return rates;
}

/// S(G, chi): the per-edge rate on pumped pairs, zero elsewhere.
inline SymMatrix restrict_to(const SymMatrix& per_edge, const Topology& topology) {
  SymMatrix out(per_edge.nodes());
  for (Pair p : topology.edges()) out[p] = per_edge[p];
  return out;
}

inline SymMatrix instantaneous_skr(const NetworkConfig& cfg, const ChannelState& chi,
                                   const Topology& topology) {
  if (topology.size() > cfg.capacity) throw ValidationError("topology exceeds source capacity");
  for (Pair p : topology.edges())
    if (p.b >= cfg.n) throw ValidationError("topology references a node outside the network");
  return restrict_to(skr_if_pumped(cfg, chi), topology);
}

}  // namespace qnet
