// qnet: simulate and verify entangled-photon pumping schedules.
//
//   qnet run     --config <file> | --scenario <name>  [options]
//   qnet verify  --config <file> | --scenario <name>  --tol <rel>
//   qnet example-n4
//
// Exit codes: 0 success, 1 validation error, 2 runtime or convergence failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnet/qnet.hpp"

namespace {

constexpr int kValidationExit = 1;
constexpr int kRuntimeExit = 2;

struct Source {
  std::string config_path;
  std::string scenario_name;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* cfg = cmd->add_option("--config", src.config_path, "Network/experiment JSON document");
  auto* sc = cmd->add_option("--scenario", src.scenario_name, "Built-in scenario name")
                 ->check(CLI::IsMember(qnet::scenario_names()));
  cfg->excludes(sc);
}

/// Config, `channel_process` section and scenario defaults for a source.
struct Loaded {
  qnet::NetworkConfig config;
  nlohmann::json channel_process;
  std::optional<qnet::Scenario> scenario;
};

Loaded load(const Source& src) {
  Loaded out;
  if (!src.scenario_name.empty()) {
    out.scenario = qnet::scenario(src.scenario_name);
    out.config = out.scenario->config;
    out.channel_process = out.scenario->channel_process;
    return out;
  }
  if (src.config_path.empty()) throw qnet::ValidationError("one of --config or --scenario is required");
  const auto doc = qnet::read_json_file(src.config_path);
  out.config = qnet::validate_config(doc);
  if (doc.contains("channel_process")) out.channel_process = doc.at("channel_process");
  return out;
}

std::string process_type(const std::string& cli) {
  if (cli.empty()) return {};
  if (cli == "fixed") return "fixed";
  if (cli == "iid") return "finite_iid";
  if (cli == "walk") return "perturbation_walk";
  throw qnet::ValidationError("unknown process: " + cli);
}

int cmd_run(const Source& src, const std::vector<std::string>& strategies, const std::string& schedule,
            const std::string& process, std::size_t horizon, bool horizon_set,
            const std::vector<std::uint64_t>& seeds, std::optional<double> xbar_init,
            const std::string& out_dir) {
  const Loaded in = load(src);
  qnet::ExperimentSpec spec;
  spec.config = in.config;
  spec.channel_process = in.channel_process;
  spec.process_type = process_type(process);
  spec.horizon = horizon_set || !in.scenario ? horizon : in.scenario->horizon;
  spec.seeds = seeds.empty() ? std::vector<std::uint64_t>{0} : seeds;
  spec.out_dir = out_dir;
  const auto sched = !schedule.empty() ? qnet::parse_schedule(schedule)
                     : in.scenario     ? in.scenario->schedule
                                       : qnet::StepSchedule::harmonic();
  if (!xbar_init && in.scenario) xbar_init = in.scenario->xbar_init;
  const std::vector<std::string> tokens =
      strategies.empty() ? std::vector<std::string>{"pf", "greedy", "rr"} : strategies;
  for (const auto& t : tokens) spec.runs.push_back({qnet::parse_strategy(t), sched, xbar_init});
  spec.validate();

  const auto results = qnet::execute(spec);
  try {
    qnet::write_outputs(spec, results);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
  std::cout << "strategy,seed,log_sum,geo_mean,total,jain\n";
  for (const auto& r : results)
    std::cout << r.summary.strategy << ',' << r.summary.seed << ','
              << qnet::format_double(r.summary.final_metrics.log_sum) << ','
              << qnet::format_double(r.summary.final_metrics.geo_mean) << ','
              << qnet::format_double(r.summary.final_metrics.total) << ','
              << qnet::format_double(r.summary.final_metrics.jain) << '\n';
  return 0;
}

int cmd_verify(const Source& src, double tol, std::size_t horizon, const std::string& process,
               std::uint64_t seed, const std::string& solution_out) {
  const Loaded in = load(src);
  const auto proc = qnet::process_from_json(in.channel_process.is_null() ? nullptr : &in.channel_process,
                                            in.config, process_type(process));
  const auto rep = qnet::verify_convergence(in.config, proc, tol, horizon, seed);
  const auto pairs = qnet::enumerate_pairs(in.config.n);
  std::printf("oracle: objective=%.12g gap=%.3g (tolerance %.3g) iterations=%zu %s\n",
              rep.oracle.objective, rep.oracle.duality_gap, rep.oracle.gap_tolerance,
              rep.oracle.iterations, rep.oracle.converged ? "converged" : "NOT CONVERGED");
  std::printf("%-6s %16s %16s %12s\n", "pair", "xbar(T)", "x_star", "rel_error");
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (rep.oracle.excluded[k]) {
      std::printf("%-6s %16.6f %16s %12s\n", qnet::to_string(pairs[k]).c_str(),
                  rep.xbar_final.values()[k], "excluded", "-");
      continue;
    }
    std::printf("%-6s %16.6f %16.6f %12.3e\n", qnet::to_string(pairs[k]).c_str(),
                rep.xbar_final.values()[k], rep.oracle.x_star[k], rep.rel_error[k]);
  }
  std::printf("horizon=%zu max_rel_error=%.3e tol=%.3e -> %s\n", rep.horizon, rep.max_rel_error, rep.tol,
              rep.pass ? "PASS" : "FAIL");
  if (!solution_out.empty()) {
    std::ofstream f(solution_out);
    if (!f) {
      std::cerr << "error: cannot write " << solution_out << '\n';
      return kRuntimeExit;
    }
    f << qnet::to_json(rep.oracle, in.config.n).dump(2) << '\n';
  }
  return rep.pass ? 0 : kRuntimeExit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pumping-schedule simulator for single-source QKD networks"};
  app.require_subcommand(1);

  Source run_src;
  std::vector<std::string> strategies;
  std::string schedule, run_process, out_dir = "out";
  std::size_t horizon = 1000;
  std::vector<std::uint64_t> seeds;
  std::optional<double> xbar_init;
  auto* run = app.add_subcommand("run", "Simulate strategies and write trace CSVs");
  add_source(run, run_src);
  run->add_option("--strategy", strategies, "pf | greedy | rr | alpha:<a> (repeatable)");
  run->add_option("--schedule", schedule, "fixed:<gamma> | harmonic");
  run->add_option("--process", run_process, "fixed | iid | walk")
      ->check(CLI::IsMember({"fixed", "iid", "walk"}));
  auto* horizon_opt = run->add_option("--horizon", horizon, "Number of steps");
  run->add_option("--seed", seeds, "RNG seed (repeatable)");
  run->add_option("--xbar-init", xbar_init, "Uniform initial average SKR");
  run->add_option("--out", out_dir, "Output directory");

  Source verify_src;
  double tol = 0.02;
  std::size_t verify_horizon = 100'000;
  std::string verify_process, solution_out;
  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "Check PF convergence against the rate-region optimum");
  add_source(verify, verify_src);
  verify->add_option("--tol", tol, "Per-pair relative tolerance");
  verify->add_option("--horizon", verify_horizon, "Number of steps");
  verify->add_option("--process", verify_process, "fixed | iid")->check(CLI::IsMember({"fixed", "iid"}));
  verify->add_option("--seed", verify_seed, "RNG seed");
  verify->add_option("--solution-out", solution_out, "Write the optimum as JSON");

  auto* example = app.add_subcommand("example-n4", "Replay the four-node worked example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationExit;
  }

  try {
    if (run->parsed())
      return cmd_run(run_src, strategies, schedule, run_process, horizon, horizon_opt->count() > 0, seeds,
                     xbar_init, out_dir);
    if (verify->parsed())
      return cmd_verify(verify_src, tol, verify_horizon, verify_process, verify_seed, solution_out);
    if (example->parsed()) {
      const auto rep = qnet::example_n4();
      std::cout << rep.table;
      return rep.ok() ? 0 : kRuntimeExit;
    }
  } catch (const qnet::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationExit;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed document: " << e.what() << '\n';
    return kValidationExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
  return 0;
}
