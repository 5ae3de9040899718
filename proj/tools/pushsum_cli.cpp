#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pushsum/experiment.hpp"
#include "pushsum/output.hpp"
#include "pushsum/validate.hpp"

namespace {

using namespace pushsum;

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kInvariant = 3;
constexpr int kNonConvergence = 4;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<Round> horizon;
  std::optional<std::string> out;
  std::optional<std::string> algorithm;
  bool emit_trajectory = false;
  std::size_t jobs = 0;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config (.toml or .json)")->required();
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--trials", o.trials, "number of trials");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--algorithm", o.algorithm, "zo | subgrad")->check(CLI::IsMember({"zo", "subgrad"}));
  cmd->add_option("--jobs", o.jobs, "worker threads (0: hardware concurrency)");
}

ExperimentConfig load(const Overrides& o) {
  ExperimentConfig c = load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.horizon) c.horizon = *o.horizon;
  if (o.out) c.output.dir = *o.out;
  if (o.algorithm) c.algorithm.kind = detail::parse_algorithm(*o.algorithm);
  if (o.emit_trajectory) c.output.emit_trajectory = true;
  if (c.trials == 0) throw ConfigError("trials must be positive");
  return c;
}

std::size_t jobs_for(const Overrides& o) {
  if (o.jobs > 0) return o.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_run(const Overrides& o) {
  const ExperimentConfig c = load(o);
  RunOptions opt;
  opt.jobs = jobs_for(o);
  opt.keep_trajectories = c.output.emit_trajectory;
  const ExperimentResult r = run_experiment(c, c.horizon, opt);
  const auto files = write_run_outputs(c.output.dir, r, c.output.emit_trajectory);
  const auto T = static_cast<Eigen::Index>(r.params.horizon);
  std::cout << c.name << ": " << c.problem << ", " << to_string(c.algorithm.kind) << ", T=" << r.params.horizon
            << ", trials=" << r.trials.size() << '\n'
            << "  max R(T)/T     " << fmt_num(r.aggregate.max_avg(T)) << '\n'
            << "  min R(T)/T     " << fmt_num(r.aggregate.min_avg(T)) << '\n'
            << "  wrote " << files.size() << " files to " << c.output.dir << '\n';
  return kOk;
}

std::vector<Round> parse_horizons(const std::string& text) {
  std::vector<Round> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(pos, end - pos);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<Round>(v));
    } catch (const std::logic_error&) {
      throw ConfigError("--horizons: '" + item + "' is not a positive integer");
    }
    pos = end + 1;
  }
  return out;
}

int cmd_sweep(const Overrides& o, const std::optional<std::string>& horizons_text) {
  const ExperimentConfig c = load(o);
  std::vector<Round> horizons;
  if (horizons_text) {
    horizons = parse_horizons(*horizons_text);
  } else {
    horizons.assign(c.horizons.begin(), c.horizons.end());
  }
  const auto rows = run_sweep(c, horizons, jobs_for(o));
  std::filesystem::create_directories(c.output.dir);
  auto out = detail::open_out(std::filesystem::path(c.output.dir) / "sweep.csv");
  write_sweep_csv(out, rows);
  write_sweep_csv(std::cout, rows);
  return kOk;
}

int cmd_validate(const Overrides& o) {
  const ExperimentConfig c = load(o);
  const ValidationReport rep = validate_config(c, 200);
  for (const CheckResult& r : rep.checks) {
    std::cout << to_string(r.status) << "  " << r.name;
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
    std::cout << '\n';
  }
  if (rep.nonconvergence) return kNonConvergence;
  return rep.ok() ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Push-sum distributed online optimization simulator"};
  app.set_version_flag("--version", std::string(pushsum::kVersion));
  app.require_subcommand(1);

  Overrides run_o, sweep_o, val_o;
  std::optional<std::string> horizons;

  CLI::App* run = app.add_subcommand("run", "run an experiment and write result files");
  add_common(run, run_o);
  run->add_option("--horizon", run_o.horizon, "number of rounds T");
  run->add_flag("--emit-trajectory", run_o.emit_trajectory, "write trajectory_<trial>.csv");

  CLI::App* sweep = app.add_subcommand("sweep", "run at several horizons and write sweep.csv");
  add_common(sweep, sweep_o);
  sweep->add_option("--horizons", horizons, "comma separated horizons, e.g. 250,500,1000");

  CLI::App* val = app.add_subcommand("validate", "check every invariant on a short run");
  add_common(val, val_o);
  val->add_option("--horizon", val_o.horizon, "horizon (validate uses at most 200 rounds)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_o);
    if (*sweep) return cmd_sweep(sweep_o, horizons);
    return cmd_validate(val_o);
  } catch (const pushsum::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const pushsum::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.invariant() << ": " << e.what() << '\n';
    return kInvariant;
  } catch (const pushsum::NonConvergence& e) {
    std::cerr << "solver did not converge: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
