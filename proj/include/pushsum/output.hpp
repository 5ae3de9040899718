#pragma once

// Result files: regret.csv, regret_summary.csv, diag.csv, trajectory_<k>.csv,
// sweep.csv and manifest.json. Numbers are printed with %.17g so files are
// byte-identical for identical (config, seed).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pushsum/config.hpp"
#include "pushsum/experiment.hpp"

namespace pushsum {

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

inline std::vector<Round> checkpoints(Round T, std::size_t stride) {
  if (stride == 0) stride = std::max<Round>(1, T / 100);
  std::vector<Round> ts;
  for (Round t = 0; t <= T; t += stride) ts.push_back(t);
  if (ts.back() != T) ts.push_back(T);
  return ts;
}

}  // namespace detail

/// T,node,trial,regret,avg_regret on the stride grid (always including T).
/// Nodes and trials are written 1-based and 0-based respectively.
inline void write_regret_csv(std::ostream& out, const ExperimentResult& r) {
  const Round T = r.params.horizon;
  out << "T,node,trial,regret,avg_regret\n";
  const auto ts = detail::checkpoints(T, r.config.output.regret_stride);
  for (std::size_t k = 0; k < r.trials.size(); ++k) {
    const Matrix& cum = r.trials[k].report.cumulative;
    for (Round t : ts) {
      for (Eigen::Index j = 0; j < cum.cols(); ++j) {
        const double v = cum(static_cast<Eigen::Index>(t), j);
        out << t << ',' << (j + 1) << ',' << k << ',' << fmt_num(v) << ',' << fmt_num(average_at(v, t))
            << '\n';
      }
    }
  }
}

inline void write_summary_csv(std::ostream& out, const ExperimentResult& r) {
  const RegretReport& a = r.aggregate;
  out << "T,max_avg_regret,min_avg_regret,network_avg_regret,max_avg_worst,min_avg_best,path_variation\n";
  for (Round t : detail::checkpoints(r.params.horizon, r.config.output.regret_stride)) {
    const auto i = static_cast<Eigen::Index>(t);
    out << t << ',' << fmt_num(a.max_avg(i)) << ',' << fmt_num(a.min_avg(i)) << ',' << fmt_num(a.network_avg(i))
        << ',' << fmt_num(a.max_avg_worst(i)) << ',' << fmt_num(a.min_avg_best(i)) << ','
        << fmt_num(a.path_variation(i)) << '\n';
  }
}

/// round,disagreement,phi_min,phi_max,perron_residual for every round.
/// Disagreement is the trial mean; perron_residual is max_i |phi_{i,t}/n - pi_{i,t}|.
inline void write_diag_csv(std::ostream& out, const ExperimentResult& r) {
  out << "round,disagreement,phi_min,phi_max,perron_residual\n";
  const Round T = r.params.horizon;
  for (Round t = 0; t <= T; ++t) {
    const Vector& phi = r.phi[t];
    double pr = 0.0;
    if (!r.perron.pi.empty()) {
      pr = (phi / static_cast<double>(phi.size()) - r.perron.pi[t]).cwiseAbs().maxCoeff();
    }
    out << t << ',' << fmt_num(r.aggregate.disagreement(static_cast<Eigen::Index>(t))) << ','
        << fmt_num(phi.minCoeff()) << ',' << fmt_num(phi.maxCoeff()) << ',' << fmt_num(pr) << '\n';
  }
}

/// round,node,coord_0..coord_{m-1},phi
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index m = traj.x.empty() ? 0 : traj.x.front().cols();
  out << "round,node";
  for (Eigen::Index k = 0; k < m; ++k) out << ",coord_" << k;
  out << ",phi\n";
  for (Round t = 0; t < traj.x.size(); ++t) {
    for (Eigen::Index i = 0; i < traj.x[t].rows(); ++i) {
      out << t << ',' << (i + 1);
      for (Eigen::Index k = 0; k < m; ++k) out << ',' << fmt_num(traj.x[t](i, k));
      out << ',' << fmt_num(traj.phi[t](i)) << '\n';
    }
  }
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "T,max_avg_regret,min_avg_regret\n";
  for (const SweepRow& r : rows) {
    out << r.horizon << ',' << fmt_num(r.max_avg_regret) << ',' << fmt_num(r.min_avg_regret) << '\n';
  }
}

inline json invariants_json(const InvariantSummary& s) {
  return {{"rounds", s.rounds},
          {"column_sum_error", s.column_sum_error},
          {"row_sum_error", s.row_sum_error},
          {"phi_sum_error", s.phi_sum_error},
          {"phi_min", s.phi_min},
          {"phi_max", s.phi_max},
          {"phi_lower_bound", s.phi_lower_bound},
          {"phi_upper_bound", s.phi_upper_bound},
          {"oracle_norm_ratio", s.oracle_norm_ratio},
          {"max_abs_coordinate", s.max_abs_coordinate}};
}

inline json manifest_json(const ExperimentResult& r, const std::vector<std::string>& files) {
  const DerivedParams& p = r.params;
  double g = 0.0, resid = 0.0, audit = -std::numeric_limits<double>::infinity();
  std::size_t audits = 0;
  for (const TrialResult& t : r.trials) {
    g = std::max(g, t.lipschitz);
    resid = std::max(resid, t.clairvoyant_residual);
    audit = std::max(audit, t.audit_worst);
    audits += t.audits;
  }
  json derived = {{"horizon", p.horizon},
                  {"step_rule", "alpha_t = step_scale / sqrt(t + 1)"},
                  {"step_scale", p.step_scale},
                  {"lipschitz_G", g},
                  {"gamma_floor", r.gamma_floor},
                  {"phi_bounds", {r.invariants.phi_lower_bound, r.invariants.phi_upper_bound}}};
  if (r.config.algorithm.kind == Algorithm::zeroth_order) {
    derived["mu"] = p.smoothing.mu;
    derived["xi"] = p.smoothing.xi;
  }
  json inv = invariants_json(r.invariants);
  inv["joint_connectivity"] = r.joint_connectivity;
  inv["perron_slope"] = r.perron.exact ? json("exact") : json(r.perron.slope);
  inv["perron_low_confidence"] = r.perron.low_confidence;
  inv["clairvoyant_max_residual"] = resid;
  inv["clairvoyant_audits"] = audits;
  if (audits > 0) inv["clairvoyant_audit_worst"] = audit;
  return {{"code_version", kVersion},
          {"config", config_to_json(r.config)},
          {"config_hash", config_hash(r.config)},
          {"seed", r.config.seed},
          {"trials", r.trials.size()},
          {"derived", derived},
          {"invariants", inv},
          {"outputs", files}};
}

/// Writes every result file of a run into `dir` and returns their names.
inline std::vector<std::string> write_run_outputs(const std::filesystem::path& dir, const ExperimentResult& r,
                                                  bool emit_trajectory) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files{"regret.csv", "regret_summary.csv", "diag.csv"};
  {
    auto out = detail::open_out(dir / "regret.csv");
    write_regret_csv(out, r);
  }
  {
    auto out = detail::open_out(dir / "regret_summary.csv");
    write_summary_csv(out, r);
  }
  {
    auto out = detail::open_out(dir / "diag.csv");
    write_diag_csv(out, r);
  }
  if (emit_trajectory) {
    for (std::size_t k = 0; k < r.trials.size(); ++k) {
      const std::string name = "trajectory_" + std::to_string(k) + ".csv";
      auto out = detail::open_out(dir / name);
      write_trajectory_csv(out, r.trials[k].trajectory);
      files.push_back(name);
    }
  }
  files.push_back("manifest.json");
  auto out = detail::open_out(dir / "manifest.json");
  out << manifest_json(r, files).dump(2) << '\n';
  return files;
}

}  // namespace pushsum
