#pragma once

// Built-in scenarios: the four-node worked example with a bare SKR matrix,
// and the five-node network (fiber distances and link QBER) under a fixed
// or a periodically perturbed channel.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnet/network.hpp"
#include "qnet/scheduler.hpp"

namespace qnet {

struct Scenario {
  std::string name;
  NetworkConfig config;
  nlohmann::json channel_process;  // `channel_process` section
  StepSchedule schedule = StepSchedule::harmonic();
  std::optional<double> xbar_init;
  std::size_t horizon = 1000;
};

inline NetworkConfig n4_example_config() {
  NetworkConfig cfg;
  cfg.n = 4;
  cfg.capacity = 2;
  cfg.direct_skr = SymMatrix::from_rows({{0, 100, 200, 300},
                                         {100, 0, 400, 500},
                                         {200, 400, 0, 600},
                                         {300, 500, 600, 0}},
                                        "direct_skr");
  cfg.validate();
  return cfg;
}

inline NetworkConfig n5_network_config() {
  NetworkConfig cfg;
  cfg.n = 5;
  cfg.capacity = 2;
  cfg.attenuation_db_per_km = 0.2;
  cfg.repetition_rate_hz = 1e6;
  cfg.distances_km = SymMatrix::from_rows({{0, 50, 80, 20, 100},
                                           {50, 0, 30, 60, 90},
                                           {80, 30, 0, 70, 40},
                                           {20, 60, 70, 0, 10},
                                           {100, 90, 40, 10, 0}},
                                          "distances_km");
  cfg.base_qber = SymMatrix::from_rows({{0, 0.02, 0.03, 0.005, 0.04},
                                        {0.02, 0, 0.015, 0.025, 0.035},
                                        {0.03, 0.015, 0, 0.03, 0.02},
                                        {0.005, 0.025, 0.03, 0, 0.005},
                                        {0.04, 0.035, 0.02, 0.005, 0}},
                                       "qber");
  cfg.validate();
  return cfg;
}

inline std::vector<std::string> scenario_names() {
  return {"paper-n4", "paper-n5-fixed", "paper-n5-varying"};
}

inline Scenario scenario(const std::string& name) {
  if (name == "paper-n4") {
    Scenario s;
    s.name = name;
    s.config = n4_example_config();
    s.channel_process = {{"type", "fixed"}};
    s.schedule = StepSchedule::fixed(0.5);
    s.xbar_init = 10.0;
    s.horizon = 2;
    return s;
  }
  Scenario s;
  s.name = name;
  s.config = n5_network_config();
  if (name == "paper-n5-fixed") {
    s.channel_process = {{"type", "fixed"}};
    return s;
  }
  if (name == "paper-n5-varying") {
    s.channel_process = {{"type", "perturbation_walk"}, {"delta_max", 0.005}, {"period", 100}};
    return s;
  }
  throw ValidationError("unknown scenario: " + name);
}

}  // namespace qnet
