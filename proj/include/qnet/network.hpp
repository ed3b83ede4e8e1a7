#pragma once

// Core domain types for a QKD network fed by a single entangled-photon
// source: node pairs, symmetric pair-indexed matrices, the static network
// configuration, channel states and pumped topologies.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qnet {

/// Raised for any input that violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using NodeId = std::size_t;

/// Unordered node pair stored canonically with a < b.
struct Pair {
  NodeId a = 0;
  NodeId b = 1;

  constexpr Pair() = default;
  constexpr Pair(NodeId i, NodeId j) : a(std::min(i, j)), b(std::max(i, j)) {
    if (i == j) throw ValidationError("pair endpoints must differ");
  }

  friend constexpr auto operator<=>(const Pair&, const Pair&) = default;
};

inline std::string to_string(Pair p) {
  return std::to_string(p.a) + "-" + std::to_string(p.b);
}

constexpr std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

/// Position of `p` in the canonical row-major upper-triangle order.
constexpr std::size_t pair_index(Pair p, std::size_t n) {
  // rows 0..a-1 contribute (n-1) + (n-2) + ... + (n-a) entries
  return p.a * (2 * n - p.a - 1) / 2 + (p.b - p.a - 1);
}

/// All n(n-1)/2 pairs in canonical order (0,1),(0,2),...,(n-2,n-1). This
/// order is the tie-break and random-draw order everywhere in the library.
inline std::vector<Pair> enumerate_pairs(std::size_t n) {
  if (n < 2) throw ValidationError("node count must be at least 2");
  std::vector<Pair> pairs;
  pairs.reserve(pair_count(n));
  for (NodeId i = 0; i + 1 < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  return pairs;
}

/// Symmetric n x n matrix with zero diagonal. Only the upper triangle is
/// stored, in canonical pair order, so (i,j) and (j,i) always agree.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n, double fill = 0.0)
      : n_(n), values_(pair_count(n), fill) {}
  SymMatrix(std::size_t n, std::vector<double> upper) : n_(n), values_(std::move(upper)) {
    if (values_.size() != pair_count(n))
      throw ValidationError("upper-triangle length does not match node count");
  }

  /// Builds from full rows, verifying shape, symmetry and a zero diagonal.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows,
                             std::string_view name, double tol = 1e-12) {
    const std::size_t n = rows.size();
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n)
        throw ValidationError(std::string(name) + ": matrix is not square");
      if (std::abs(rows[i][i]) > tol)
        throw ValidationError(std::string(name) + ": diagonal must be zero");
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!std::isfinite(rows[i][j]) || !std::isfinite(rows[j][i]))
          throw ValidationError(std::string(name) + ": non-finite entry");
        if (std::abs(rows[i][j] - rows[j][i]) > tol)
          throw ValidationError(std::string(name) + ": asymmetric matrix at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
        m.set(i, j, rows[i][j]);
      }
    return m;
  }

  std::size_t nodes() const { return n_; }
  std::size_t pairs() const { return values_.size(); }

  double operator()(std::size_t i, std::size_t j) const {
    return i == j ? 0.0 : values_[pair_index(Pair(i, j), n_)];
  }
  double operator[](Pair p) const { return values_[pair_index(p, n_)]; }
  double& operator[](Pair p) { return values_[pair_index(p, n_)]; }
  void set(std::size_t i, std::size_t j, double v) { values_[pair_index(Pair(i, j), n_)] = v; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double max() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
  }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(n_, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) out[i][j] = out[j][i] = (*this)(i, j);
    return out;
  }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

inline void check_qber_bounds(const SymMatrix& q, std::string_view name) {
  for (double v : q.values())
    if (!(v >= 0.0 && v <= 0.5))
      throw ValidationError(std::string(name) + ": QBER out of range [0, 0.5]");
}

/// Static network description.
///
/// Two SKR sources are supported: the physics model (distances, QBER,
/// attenuation, repetition rate) and a directly supplied SKR matrix. The
/// presence of `direct_skr` selects the direct mode.
struct NetworkConfig {
  std::size_t n = 2;
  std::size_t capacity = 1;
  double attenuation_db_per_km = 0.2;
  double repetition_rate_hz = 1e6;
  std::optional<SymMatrix> distances_km;
  std::optional<SymMatrix> base_qber;
  std::optional<SymMatrix> direct_skr;

  bool direct_mode() const { return direct_skr.has_value(); }

  /// QBER of the nominal channel; zero when no QBER matrix is configured.
  SymMatrix nominal_qber() const { return base_qber ? *base_qber : SymMatrix(n); }

  void validate() const {
    if (n < 2) throw ValidationError("node count must be at least 2");
    if (capacity < 1) throw ValidationError("capacity must be at least 1");
    if (!(repetition_rate_hz > 0.0) || !std::isfinite(repetition_rate_hz))
      throw ValidationError("repetition rate must be positive");
    auto check_shape = [&](const std::optional<SymMatrix>& m, std::string_view name) {
      if (m && m->nodes() != n)
        throw ValidationError(std::string(name) + ": expected " + std::to_string(n) + "x" +
                              std::to_string(n) + " matrix");
    };
    check_shape(distances_km, "distances_km");
    check_shape(base_qber, "qber");
    check_shape(direct_skr, "direct_skr");
    if (base_qber) check_qber_bounds(*base_qber, "qber");
    if (distances_km)
      for (double d : distances_km->values())
        if (d < 0.0) throw ValidationError("distances_km: negative distance");
    if (direct_skr) {
      for (double s : direct_skr->values())
        if (!(s >= 0.0) || !std::isfinite(s))
          throw ValidationError("direct_skr: rates must be finite and non-negative");
    } else {
      if (!distances_km) throw ValidationError("missing physics field: distances_km");
      if (!base_qber) throw ValidationError("missing physics field: qber");
      if (!(attenuation_db_per_km > 0.0) || !std::isfinite(attenuation_db_per_km))
        throw ValidationError("attenuation must be positive");
    }
  }
};

namespace detail {

inline SymMatrix matrix_field(const nlohmann::json& raw, const char* key) {
  const auto& node = raw.at(key);
  if (!node.is_array()) throw ValidationError(std::string(key) + ": expected array of arrays");
  std::vector<std::vector<double>> rows;
  for (const auto& row : node) {
    if (!row.is_array()) throw ValidationError(std::string(key) + ": expected array of arrays");
    std::vector<double> r;
    for (const auto& v : row) {
      if (!v.is_number()) throw ValidationError(std::string(key) + ": non-numeric entry");
      r.push_back(v.get<double>());
    }
    rows.push_back(std::move(r));
  }
  return SymMatrix::from_rows(rows, key);
}

inline std::size_t positive_integer(const nlohmann::json& raw, const char* key) {
  if (!raw.contains(key)) throw ValidationError(std::string("missing field: ") + key);
  const auto& v = raw.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ValidationError(std::string(key) + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

inline double number(const nlohmann::json& raw, const char* key) {
  const auto& v = raw.at(key);
  if (!v.is_number()) throw ValidationError(std::string(key) + ": expected a number");
  return v.get<double>();
}

}  // namespace detail

/// Builds a NetworkConfig from a parsed config document and checks every
/// invariant. Unknown keys are ignored so experiment documents can carry
/// extra sections (e.g. `channel_process`).
inline NetworkConfig validate_config(const nlohmann::json& raw) {
  if (!raw.is_object()) throw ValidationError("config must be a JSON object");
  NetworkConfig cfg;
  cfg.n = detail::positive_integer(raw, "n");
  if (cfg.n < 2) throw ValidationError("node count must be at least 2");
  cfg.capacity = detail::positive_integer(raw, "capacity");
  if (cfg.capacity < 1) throw ValidationError("capacity must be at least 1");
  if (raw.contains("attenuation_db_per_km"))
    cfg.attenuation_db_per_km = detail::number(raw, "attenuation_db_per_km");
  else if (!raw.contains("direct_skr"))
    throw ValidationError("missing physics field: attenuation_db_per_km");
  if (raw.contains("repetition_rate_hz"))
    cfg.repetition_rate_hz = detail::number(raw, "repetition_rate_hz");
  if (raw.contains("distances_km")) cfg.distances_km = detail::matrix_field(raw, "distances_km");
  if (raw.contains("qber")) cfg.base_qber = detail::matrix_field(raw, "qber");
  if (raw.contains("direct_skr")) cfg.direct_skr = detail::matrix_field(raw, "direct_skr");
  cfg.validate();
  return cfg;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline NetworkConfig load_config(const std::string& path) {
  return validate_config(read_json_file(path));
}

inline nlohmann::json to_json(const NetworkConfig& cfg) {
  nlohmann::json j;
  j["n"] = cfg.n;
  j["capacity"] = cfg.capacity;
  j["attenuation_db_per_km"] = cfg.attenuation_db_per_km;
  j["repetition_rate_hz"] = cfg.repetition_rate_hz;
  if (cfg.distances_km) j["distances_km"] = cfg.distances_km->rows();
  if (cfg.base_qber) j["qber"] = cfg.base_qber->rows();
  if (cfg.direct_skr) j["direct_skr"] = cfg.direct_skr->rows();
  return j;
}

/// One realization of the per-pair channel conditions.
struct ChannelState {
  SymMatrix qber;
  std::string id;

  friend bool operator==(const ChannelState&, const ChannelState&) = default;
};

/// Set of simultaneously pumped pairs, kept sorted in canonical order.
class Topology {
 public:
  Topology() = default;

  /// Validated construction: endpoints in range, no duplicates, |E| <= C.
  static Topology from_edges(std::vector<Pair> edges, std::size_t n, std::size_t capacity) {
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
      throw ValidationError("topology contains a duplicate pair");
    if (edges.size() > capacity)
      throw ValidationError("topology exceeds source capacity");
    for (Pair p : edges)
      if (p.b >= n) throw ValidationError("topology references a node outside the network");
    Topology t;
    t.edges_ = std::move(edges);
    return t;
  }

  const std::vector<Pair>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  bool contains(Pair p) const { return std::binary_search(edges_.begin(), edges_.end(), p); }

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  std::vector<Pair> edges_;
};

/// `i-j` tokens joined by ';'.
inline std::string edge_list(const Topology& t) {
  std::string out;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k) out += ';';
    out += to_string(t.edges()[k]);
  }
  return out;
}

}  // namespace qnet
