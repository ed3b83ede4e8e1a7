#pragma once

// Gradient-based pumping: each step observes the channel, weights every
// pair by the utility derivative at its running-average SKR, pumps the
// weighted-argmax topology and folds the served rates into the averages.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qnet/channel.hpp"
#include "qnet/network.hpp"
#include "qnet/skr.hpp"
#include "qnet/topology.hpp"

namespace qnet {

struct ProportionalFair {};
struct Greedy {};
struct RoundRobin {};
struct AlphaFair {
  double alpha = 1.0;
};

using Strategy = std::variant<ProportionalFair, Greedy, RoundRobin, AlphaFair>;

/// CLI token: pf, greedy, rr, alpha:<a>.
inline std::string to_string(const Strategy& s) {
  if (std::holds_alternative<ProportionalFair>(s)) return "pf";
  if (std::holds_alternative<Greedy>(s)) return "greedy";
  if (std::holds_alternative<RoundRobin>(s)) return "rr";
  char buf[64];
  std::snprintf(buf, sizeof buf, "alpha:%g", std::get<AlphaFair>(s).alpha);
  return buf;
}

inline Strategy parse_strategy(const std::string& token) {
  if (token == "pf") return ProportionalFair{};
  if (token == "greedy") return Greedy{};
  if (token == "rr") return RoundRobin{};
  if (token.rfind("alpha:", 0) == 0) {
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(token.substr(6), &used);
    } catch (const std::exception&) {
      throw ValidationError("bad alpha in strategy: " + token);
    }
    if (used != token.size() - 6 || !(a >= 0.0) || !std::isfinite(a))
      throw ValidationError("alpha must be a finite number >= 0: " + token);
    return AlphaFair{a};
  }
  throw ValidationError("unknown strategy: " + token);
}

/// Step size gamma(t): a fixed constant or the harmonic 1/(t+1).
class StepSchedule {
 public:
  static StepSchedule fixed(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("fixed step size must be in (0, 1]");
    return StepSchedule(gamma);
  }
  static StepSchedule harmonic() { return StepSchedule(std::nullopt); }

  bool is_harmonic() const { return !gamma_; }
  double gamma(std::size_t t) const { return gamma_ ? *gamma_ : 1.0 / static_cast<double>(t + 1); }

  std::string to_string() const {
    if (!gamma_) return "harmonic";
    char buf[64];
    std::snprintf(buf, sizeof buf, "fixed:%g", *gamma_);
    return buf;
  }

 private:
  explicit StepSchedule(std::optional<double> g) : gamma_(g) {}
  std::optional<double> gamma_;
};

inline StepSchedule parse_schedule(const std::string& token) {
  if (token == "harmonic") return StepSchedule::harmonic();
  if (token.rfind("fixed:", 0) == 0) {
    try {
      std::size_t used = 0;
      const double g = std::stod(token.substr(6), &used);
      if (used == token.size() - 6) return StepSchedule::fixed(g);
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
  }
  throw ValidationError("unknown schedule: " + token);
}

struct AvgSkrState {
  SymMatrix xbar;
  std::size_t t = 0;
};

inline void require_positive(const SymMatrix& x) {
  for (double v : x.values())
    if (!(v > 0.0)) throw ValidationError("average SKR entries must be strictly positive");
}

/// w_ij = U'(xbar_ij). Round robin uses 1/(S*xbar) so that its score w*S
/// is 1/xbar; pairs with S = 0 are ineligible (weight 0).
inline WeightMatrix gradient_weights(const Strategy& strategy, const SymMatrix& xbar,
                                     const SymMatrix& skr_if_pumped) {
  require_positive(xbar);
  WeightMatrix w(xbar.nodes());
  auto out = w.values();
  auto x = xbar.values();
  auto s = skr_if_pumped.values();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::visit(
        [&](const auto& st) -> double {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, ProportionalFair>) return 1.0 / x[k];
          else if constexpr (std::is_same_v<T, Greedy>) return 1.0;
          else if constexpr (std::is_same_v<T, RoundRobin>) return s[k] > 0.0 ? 1.0 / (s[k] * x[k]) : 0.0;
          else return std::pow(x[k], -st.alpha);
        },
        strategy);
  }
  return w;
}

/// xbar + gamma * (served - xbar), floored at `floor`.
inline double update_average(double xbar, double served, double gamma, double floor = 0.0) {
  return std::max(xbar + gamma * (served - xbar), floor);
}

/// Applies one update to every pair: selected pairs are served their
/// per-edge rate, all others 0.
inline void apply_selection(AvgSkrState& state, const Topology& selected,
                            const SymMatrix& skr_if_pumped, double gamma, double floor = 0.0) {
  const std::size_t n = state.xbar.nodes();
  auto x = state.xbar.values();
  std::vector<double> served(x.size(), 0.0);
  for (Pair p : selected.edges()) served[pair_index(p, n)] = skr_if_pumped[p];
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = update_average(x[k], served[k], gamma, floor);
  ++state.t;
}

struct Metrics {
  double log_sum = 0.0;
  double geo_mean = 0.0;
  double total = 0.0;
  double jain = 0.0;
};

/// Log-sum utility, geometric mean over pairs, total and Jain index.
inline Metrics metrics(std::span<const double> xbar) {
  Metrics m;
  double sq = 0.0;
  for (double v : xbar) {
    if (!(v > 0.0)) throw ValidationError("average SKR entries must be strictly positive");
    m.log_sum += std::log(v);
    m.total += v;
    sq += v * v;
  }
  const auto count = static_cast<double>(xbar.size());
  m.geo_mean = std::exp(m.log_sum / count);
  m.jain = m.total * m.total / (count * sq);
  return m;
}

inline Metrics metrics(const SymMatrix& xbar) { return metrics(xbar.values()); }

struct TraceRecord {
  std::size_t t = 0;
  std::string channel_id;
  Topology selected;
  std::vector<double> served;  // one entry per selected edge
  SymMatrix xbar;
  Metrics metrics;
};

struct RunOptions {
  Strategy strategy = ProportionalFair{};
  StepSchedule schedule = StepSchedule::harmonic();
  std::size_t horizon = 1000;
  std::uint64_t seed = 0;
  /// Uniform initial average; defaults to 1e-6 times the largest
  /// achievable per-edge SKR.
  std::optional<double> xbar_init;
  std::optional<SymMatrix> xbar_init_matrix;
  /// Keep only the initial and final records (long verification runs).
  bool final_only = false;
};

inline constexpr double kInitFraction = 1e-6;
inline constexpr double kFloorFraction = 1e-12;

/// Largest per-edge SKR over the states the process exposes up front.
inline double max_achievable_skr(const NetworkConfig& cfg, const ChannelProcess& process) {
  double best = 0.0;
  for (const auto& chi : process.support()) best = std::max(best, skr_if_pumped(cfg, chi).max());
  return best;
}

/// Runs the pumping loop for t = 1..horizon. Record 0 holds the initial
/// averages; record t holds the state after step t.
inline std::vector<TraceRecord> run(const NetworkConfig& cfg, const RunOptions& opt,
                                    ChannelProcess process) {
  if (opt.horizon < 1) throw ValidationError("horizon must be at least 1");
  cfg.validate();
  Rng rng(opt.seed);
  const double smax = max_achievable_skr(cfg, process);
  const double floor = kFloorFraction * smax;

  AvgSkrState state{SymMatrix(cfg.n), 0};
  if (opt.xbar_init_matrix) {
    if (opt.xbar_init_matrix->nodes() != cfg.n) throw ValidationError("initial average has wrong size");
    state.xbar = *opt.xbar_init_matrix;
  } else {
    const double init = opt.xbar_init.value_or(kInitFraction * smax);
    if (!(init > 0.0) || !std::isfinite(init)) throw ValidationError("initial average must be positive");
    state.xbar = SymMatrix(cfg.n, init);
  }
  require_positive(state.xbar);

  std::vector<TraceRecord> trace;
  trace.reserve(opt.final_only ? 2 : opt.horizon + 1);
  trace.push_back(TraceRecord{0, "", Topology{}, {}, state.xbar, metrics(state.xbar)});

  for (std::size_t t = 1; t <= opt.horizon; ++t) {
    const ChannelState chi = process.sample(t, rng);
    const SymMatrix per_edge = skr_if_pumped(cfg, chi);
    const WeightMatrix w = gradient_weights(opt.strategy, state.xbar, per_edge);
    const Topology g = select_topology(w, per_edge, cfg.capacity);
    apply_selection(state, g, per_edge, opt.schedule.gamma(t), floor);

    if (opt.final_only && t != opt.horizon) continue;
    TraceRecord rec{t, chi.id, g, {}, state.xbar, metrics(state.xbar)};
    rec.served.reserve(g.size());
    for (Pair p : g.edges()) rec.served.push_back(per_edge[p]);
    trace.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace qnet
