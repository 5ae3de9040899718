#pragma once

// Short-horizon invariant audit behind `pushsum validate`.

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "pushsum/benchmark.hpp"
#include "pushsum/experiment.hpp"
#include "pushsum/output.hpp"

namespace pushsum {

enum class CheckStatus { pass, fail, skip };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::skip;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool nonconvergence = false;

  bool ok() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const CheckResult& c) { return c.status == CheckStatus::fail; });
  }
};

inline const char* to_string(CheckStatus s) {
  return s == CheckStatus::pass ? "PASS" : (s == CheckStatus::fail ? "FAIL" : "SKIP");
}

/// Runs `trials` short trials (horizon min(T, short_horizon)) and reports each
/// invariant separately. Engine-level checks stop at the first violation; the
/// ones not reached are reported as SKIP.
inline ValidationReport validate_config(const ExperimentConfig& config, Round short_horizon = 200,
                                        std::size_t trials = 2) {
  ValidationReport rep;
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, std::move(detail)});
  };
  auto skip = [&](std::string name, std::string why) {
    rep.checks.push_back({std::move(name), CheckStatus::skip, std::move(why)});
  };

  const ConvexSet set = build_set(config.set);
  const GraphSchedule schedule = build_schedule(config.graph);
  const Round T = std::max<Round>(1, std::min(config.horizon, short_horizon));

  const Round window = std::max<Round>(schedule.b_window(), T);
  const bool connected = check_joint_connectivity(schedule, window);
  add("joint-connectivity", connected, "B = " + std::to_string(schedule.b_window()));

  bool columns_ok = true;
  std::string column_detail = "max error ";
  double worst = 0.0;
  for (std::size_t k = 0; k < schedule.weights().size(); ++k) {
    worst = std::max(worst, schedule.weights()[k].column_sum_error());
    if (auto bad = check_weights(schedule.weights()[k], schedule.graphs()[k])) {
      columns_ok = false;
      column_detail = "graph " + std::to_string(k) + ": " + *bad;
      break;
    }
  }
  if (columns_ok) column_detail += fmt_num(worst);
  add("column-stochasticity", columns_ok, column_detail);

  const DerivedParams params = derive(config, set, T);
  if (config.algorithm.kind == Algorithm::zeroth_order) {
    bool chain = true;
    std::string why = "mu = " + fmt_num(params.smoothing.mu) + ", xi = " + fmt_num(params.smoothing.xi);
    try {
      params.smoothing.validate(set);
      Rng rng = make_stream(config.seed, 0, "validate-chain");
      for (int k = 0; k < 2000 && chain; ++k) {
        const Vector x = set.sample(rng, params.smoothing.xi);
        const Vector z = sample_sphere(rng, set.dimension());
        chain = set.contains(x + params.smoothing.mu * z, 0.0, 1e-9);
      }
    } catch (const std::invalid_argument& e) {
      chain = false;
      why = e.what();
    }
    add("feasibility-chain", chain, why);
  }

  static const std::vector<std::string> engine_checks{"row-stochasticity", "phi-conservation", "phi-bounds",
                                                      "feasibility", "oracle-norm-bound", "clairvoyant-audit",
                                                      "perron-decay"};
  if (!connected || !columns_ok) {
    for (const std::string& n : engine_checks) skip(n, "prerequisite failed");
    return rep;
  }

  ExperimentConfig short_cfg = config;
  short_cfg.trials = std::min(config.trials, trials);
  try {
    const ExperimentResult r = run_experiment(short_cfg, T);
    const InvariantSummary& s = r.invariants;
    add("row-stochasticity", true, "max error " + fmt_num(s.row_sum_error));
    add("phi-conservation", true, "max error " + fmt_num(s.phi_sum_error));
    add("phi-bounds", true,
        "phi in [" + fmt_num(s.phi_min) + ", " + fmt_num(s.phi_max) + "] within [" + fmt_num(s.phi_lower_bound) +
            ", " + fmt_num(s.phi_upper_bound) + "]");
    add("feasibility", true, "max |x| " + fmt_num(s.max_abs_coordinate));
    if (config.algorithm.kind == Algorithm::zeroth_order) {
      add("oracle-norm-bound", true, "max ||g||/(mG) " + fmt_num(s.oracle_norm_ratio));
    } else {
      skip("oracle-norm-bound", "subgradient run");
    }
    double audit = -std::numeric_limits<double>::infinity();
    for (const TrialResult& t : r.trials) audit = std::max(audit, t.audit_worst);
    add("clairvoyant-audit", true, "worst F(x*) - F(x) " + fmt_num(audit));
    const bool decay = r.perron.exact || r.perron.slope < 0.0;
    add("perron-decay", decay,
        r.perron.exact ? std::string("residual identically zero") : "log-slope " + fmt_num(r.perron.slope));
  } catch (const InvariantViolation& e) {
    bool seen = false;
    for (const std::string& n : engine_checks) {
      if (n == e.invariant() || (e.invariant() == "divergence-guard" && n == "feasibility") ||
          (e.invariant() == "feasibility-chain" && n == "feasibility")) {
        add(n, false, e.what());
        seen = true;
      } else {
        skip(n, "not reached");
      }
    }
    if (!seen) add(e.invariant(), false, e.what());
  } catch (const NonConvergence& e) {
    rep.nonconvergence = true;
    add("clairvoyant-convergence", false, e.what());
  }
  return rep;
}

}  // namespace pushsum
