// Minimal library use: quartic suite on two alternating graphs, both algorithms.
#include <cstdio>

#include "pushsum/benchmark.hpp"
#include "pushsum/problems/quartic.hpp"

int main() {
  using namespace pushsum;
  const Digraph g1(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {2, 3}});
  const Digraph g2(6, {{5, 3}, {3, 0}, {1, 4}, {5, 0}, {0, 2}});
  const GraphSchedule schedule = GraphSchedule::derived({g1, g2}, {}, SchedulePolicy::cyclic, 2);

  const QuarticProblem cost;
  const ConvexSet set = QuarticProblem::domain();
  const Round T = 2000;
  const Clairvoyant clair = compute_clairvoyant(cost, set, T + 2, ClairvoyantMode::analytic);

  for (Algorithm alg : {Algorithm::zeroth_order, Algorithm::subgradient}) {
    RunConfig rc;
    rc.algorithm = alg;
    rc.horizon = T;
    rc.step = StepRule{0.5};
    rc.smoothing = {1e-3, 0.02};
    const Trajectory traj = run(rc, schedule, cost, set);
    const RegretReport rep = regret_report(traj, clair);
    const auto last = static_cast<Eigen::Index>(T);
    std::printf("%-8s  max R(T)/T = %.5f  node 1 ends at (%.4f, %.4f), target (%.4f, %.4f)\n", to_string(alg),
                rep.max_avg(last), traj.x.back()(0, 0), traj.x.back()(0, 1), clair.minimizers[T](0),
                clair.minimizers[T](1));
  }
}
