#pragma once

// Channel-state processes: a fixed state, a finite-state i.i.d. process, and
// the periodic QBER perturbation walk used for the time-varying experiments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "qnet/network.hpp"

namespace qnet {

/// Seeded 64-bit generator. Uniform doubles take the top 53 bits of a
/// std::mt19937_64 draw, so sequences are identical across standard
/// libraries (unlike std::uniform_real_distribution).
class Rng {
 public:
  static constexpr const char* algorithm_id = "mt19937_64/u53";

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double operator()() { return uniform01(); }

  /// Independent stream for parallel runs.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

/// Adds one uniform draw delta in [-delta_max, +delta_max] to every pair, in
/// canonical order, and clips to [0, 0.5]. `uniform01` is any callable
/// returning values in [0, 1]; `Rng` qualifies.
template <class Uniform01>
SymMatrix perturb_qber(const SymMatrix& qber, double delta_max, Uniform01&& uniform01) {
  SymMatrix out = qber;
  for (double& q : out.values()) {
    const double delta = delta_max * (2.0 * uniform01() - 1.0);
    q = std::clamp(q + delta, 0.0, 0.5);
  }
  return out;
}

/// FNV-1a over the raw bytes of the QBER entries; labels walk states.
inline std::string state_hash(const SymMatrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : m.values()) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct FixedChannel {
  ChannelState state;
};

struct FiniteIidChannel {
  std::vector<ChannelState> states;
  std::vector<double> pi;
};

struct PerturbationWalk {
  ChannelState initial;
  double delta_max = 0.005;
  std::size_t period = 100;
};

class ChannelProcess {
 public:
  using Variant = std::variant<FixedChannel, FiniteIidChannel, PerturbationWalk>;

  explicit ChannelProcess(Variant v) : spec_(std::move(v)) {
    std::visit([this](auto& p) { check(p); }, spec_);
    if (auto* walk = std::get_if<PerturbationWalk>(&spec_)) {
      current_ = walk->initial;
      if (current_.id.empty()) current_.id = state_hash(current_.qber);
    }
  }

  static ChannelProcess fixed(ChannelState s) { return ChannelProcess(FixedChannel{std::move(s)}); }
  static ChannelProcess finite_iid(std::vector<ChannelState> states, std::vector<double> pi) {
    return ChannelProcess(FiniteIidChannel{std::move(states), std::move(pi)});
  }
  static ChannelProcess perturbation_walk(ChannelState initial, double delta_max,
                                          std::size_t period) {
    return ChannelProcess(PerturbationWalk{std::move(initial), delta_max, period});
  }

  const Variant& spec() const { return spec_; }
  bool is_iid() const { return !std::holds_alternative<PerturbationWalk>(spec_); }

  /// Every state the process can emit up front (the walk only reports its
  /// initial state).
  std::vector<ChannelState> support() const {
    if (auto* f = std::get_if<FixedChannel>(&spec_)) return {f->state};
    if (auto* iid = std::get_if<FiniteIidChannel>(&spec_)) return iid->states;
    return {current_};
  }

  /// Channel state at step t. The walk keeps its state between calls and
  /// perturbs it when t > 0 and t is a multiple of the period.
  ChannelState sample(std::size_t t, Rng& rng) {
    if (auto* f = std::get_if<FixedChannel>(&spec_)) return f->state;
    if (auto* iid = std::get_if<FiniteIidChannel>(&spec_)) return iid->states[draw_index(*iid, rng)];
    auto& walk = std::get<PerturbationWalk>(spec_);
    if (t > 0 && t % walk.period == 0) {
      current_.qber = perturb_qber(current_.qber, walk.delta_max, rng);
      current_.id = state_hash(current_.qber);
    }
    return current_;
  }

 private:
  static void check(const FixedChannel& f) { check_qber_bounds(f.state.qber, "channel state"); }
  static void check(const FiniteIidChannel& iid) {
    if (iid.states.empty()) throw ValidationError("finite_iid: at least one state required");
    if (iid.states.size() != iid.pi.size())
      throw ValidationError("finite_iid: states and pi differ in length");
    double total = 0.0;
    for (double p : iid.pi) {
      if (!(p >= 0.0)) throw ValidationError("finite_iid: negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("finite_iid: pi must sum to 1");
    for (const auto& s : iid.states) {
      check_qber_bounds(s.qber, "channel state");
      if (s.qber.nodes() != iid.states.front().qber.nodes())
        throw ValidationError("finite_iid: states differ in size");
    }
  }
  static void check(const PerturbationWalk& w) {
    if (!(w.delta_max > 0.0)) throw ValidationError("perturbation_walk: delta_max must be positive");
    if (w.period < 1) throw ValidationError("perturbation_walk: period must be at least 1");
    check_qber_bounds(w.initial.qber, "channel state");
  }

  static std::size_t draw_index(const FiniteIidChannel& iid, Rng& rng) {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t k = 0; k < iid.pi.size(); ++k) {
      acc += iid.pi[k];
      if (u < acc) return k;
    }
    // u landed in the rounding slack above the last partial sum
    for (std::size_t k = iid.pi.size(); k-- > 0;)
      if (iid.pi[k] > 0.0) return k;
    return 0;
  }

  Variant spec_;
  ChannelState current_;
};

/// Parses a `channel_process` section. `type_override` (from the CLI) wins
/// over the document's own `type`; missing sections default to a fixed
/// channel at the configured nominal QBER.
inline ChannelProcess process_from_json(const nlohmann::json* section, const NetworkConfig& cfg,
                                        const std::string& type_override = {}) {
  const ChannelState nominal{cfg.nominal_qber(), "nominal"};
  std::string type = type_override;
  if (type.empty()) type = section && section->contains("type") ? section->at("type").get<std::string>() : "fixed";
  if (type == "fixed") return ChannelProcess::fixed(nominal);
  if (type == "walk" || type == "perturbation_walk") {
    double delta_max = 0.005;
    std::size_t period = 100;
    if (section) {
      if (section->contains("delta_max")) delta_max = section->at("delta_max").get<double>();
      if (section->contains("period")) {
        const auto& p = section->at("period");
        if (!p.is_number_integer() || p.get<long long>() < 1)
          throw ValidationError("perturbation_walk: period must be a positive integer");
        period = p.get<std::size_t>();
      }
    }
    return ChannelProcess::perturbation_walk(nominal, delta_max, period);
  }
  if (type == "iid" || type == "finite_iid") {
    if (!section || !section->contains("states") || !section->contains("pi"))
      throw ValidationError("finite_iid: `states` and `pi` are required");
    std::vector<ChannelState> states;
    std::size_t k = 0;
    for (const auto& s : section->at("states")) {
      ChannelState st;
      st.qber = detail::matrix_field(s, "qber");
      if (st.qber.nodes() != cfg.n) throw ValidationError("finite_iid: state size does not match network");
      st.id = s.contains("id") ? s.at("id").get<std::string>() : "state" + std::to_string(k);
      states.push_back(std::move(st));
      ++k;
    }
    return ChannelProcess::finite_iid(std::move(states), section->at("pi").get<std::vector<double>>());
  }
  throw ValidationError("unknown channel process type: " + type);
}

}  // namespace qnet
