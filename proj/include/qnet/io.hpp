#pragma once

// Trace/summary CSV writers and the rate-region solution document.

#include <charconv>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnet/network.hpp"
#include "qnet/rate_region.hpp"
#include "qnet/scheduler.hpp"

namespace qnet {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline void write_trace_header(std::ostream& os, std::size_t n) {
  os << "t,strategy,seed,edge_list,log_sum,geo_mean,total,jain";
  for (Pair p : enumerate_pairs(n)) os << ",xbar_" << p.a << '_' << p.b;
  os << '\n';
}

inline void write_trace_row(std::ostream& os, const TraceRecord& r, const std::string& strategy,
                            std::uint64_t seed) {
  os << r.t << ',' << strategy << ',' << seed << ',' << edge_list(r.selected) << ','
     << format_double(r.metrics.log_sum) << ',' << format_double(r.metrics.geo_mean) << ','
     << format_double(r.metrics.total) << ',' << format_double(r.metrics.jain);
  for (double v : r.xbar.values()) os << ',' << format_double(v);
  os << '\n';
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace,
                            const std::string& strategy, std::uint64_t seed) {
  if (trace.empty()) return;
  write_trace_header(os, trace.front().xbar.nodes());
  for (const auto& r : trace) write_trace_row(os, r, strategy, seed);
}

struct RunSummary {
  std::string strategy;
  std::string schedule;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  Metrics final_metrics;
};

inline void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& rows) {
  os << "strategy,schedule,seed,horizon,log_sum,geo_mean,total,jain\n";
  for (const auto& r : rows)
    os << r.strategy << ',' << r.schedule << ',' << r.seed << ',' << r.horizon << ','
       << format_double(r.final_metrics.log_sum) << ',' << format_double(r.final_metrics.geo_mean)
       << ',' << format_double(r.final_metrics.total) << ',' << format_double(r.final_metrics.jain)
       << '\n';
}

inline nlohmann::json to_json(const RateRegionSolution& sol, std::size_t n) {
  nlohmann::json j;
  const auto pairs = enumerate_pairs(n);
  nlohmann::json x = nlohmann::json::object();
  nlohmann::json excluded = nlohmann::json::array();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    x[to_string(pairs[k])] = sol.x_star[k];
    if (sol.excluded[k]) excluded.push_back(to_string(pairs[k]));
  }
  j["x_star"] = x;
  j["excluded_pairs"] = excluded;
  nlohmann::json dists = nlohmann::json::array();
  for (const auto& d : sol.distributions) {
    nlohmann::json support = nlohmann::json::array();
    for (const auto& [topo, p] : d.support)
      support.push_back({{"edges", edge_list(topo)}, {"probability", p}});
    dists.push_back({{"state_id", d.state_id}, {"pi", d.pi}, {"support", support}});
  }
  j["distributions"] = dists;
  j["objective"] = sol.objective;
  j["log_sum"] = sol.log_sum;
  j["geo_mean"] = sol.geo_mean;
  j["duality_gap"] = sol.duality_gap;
  j["gap_tolerance"] = sol.gap_tolerance;
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  return j;
}

}  // namespace qnet
