#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pushsum/graph.hpp"

using namespace pushsum;

namespace {

Digraph two_node() { return Digraph(2, {{0, 1}}); }

}  // namespace

TEST(Digraph, RejectsBadEdges) {
  EXPECT_THROW(Digraph(3, {{0, 3}}), std::invalid_argument);
  EXPECT_THROW(Digraph(3, {{1, 1}}), std::invalid_argument);
  EXPECT_THROW(Digraph(3, {{0, 1}, {0, 1}}), std::invalid_argument);
  EXPECT_THROW(Digraph(0, {}), std::invalid_argument);
}

TEST(ColumnStochastic, SingleNode) {
  const WeightMatrix w = build_column_stochastic(Digraph(1, {}));
  ASSERT_EQ(w.size(), 1u);
  EXPECT_DOUBLE_EQ(w.a(0, 0), 1.0);
}

TEST(ColumnStochastic, TwoNodesOneEdge) {
  const WeightMatrix w = build_column_stochastic(two_node());
  EXPECT_DOUBLE_EQ(w.a(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(w.a(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(w.a(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(w.a(0, 1), 0.0);
  EXPECT_LE(w.column_sum_error(), 1e-12);
  EXPECT_DOUBLE_EQ(w.gamma_floor, 0.5);
}

TEST(ColumnStochastic, CompleteGraphIsUniform) {
  const WeightMatrix w = build_column_stochastic(complete_graph(3));
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(w.a(i, j), 1.0 / 3.0, 1e-15);
}

TEST(ColumnStochastic, MatchesOracleOnRandomGraphs) {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 9;
    const Digraph g = random_strongly_connected(n, 0.3, rng);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const Edge& e : g.edges()) edges.emplace_back(e.from, e.to);
    const oracle::Mat ref = oracle::column_stochastic(n, edges);
    const WeightMatrix w = build_column_stochastic(g);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        EXPECT_NEAR(w.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), ref[i][j], 1e-15);
    EXPECT_LE(w.column_sum_error(), 1e-12);
    EXPECT_FALSE(check_weights(w, g).has_value());
    EXPECT_TRUE(oracle::strongly_connected(n, edges));
  }
}

TEST(CheckWeights, FlagsBadColumnsAndMissingEdges) {
  const Digraph g = two_node();
  Matrix a(2, 2);
  a << 0.6, 0.0, 0.5, 1.0;
  EXPECT_TRUE(check_weights(weights_from_matrix(a), g).has_value());
  a << 0.5, 0.5, 0.5, 0.5;  // weight on 1 -> 0, which is not an edge
  EXPECT_TRUE(check_weights(weights_from_matrix(a), g).has_value());
}

TEST(RowStochastic, HandExample) {
  const WeightMatrix w = build_column_stochastic(two_node());
  const Vector phi = Vector::Ones(2);
  const Vector next = w.a * phi;
  EXPECT_DOUBLE_EQ(next(0), 0.5);
  EXPECT_DOUBLE_EQ(next(1), 1.5);
  const Matrix b = build_row_stochastic(w, phi, next);
  EXPECT_NEAR(b(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(b(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(b(1, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(b(1, 1), 2.0 / 3.0, 1e-15);
}

TEST(RowStochastic, DoublyStochasticLeavesMatrix) {
  const WeightMatrix w = build_column_stochastic(directed_ring(5));
  const Vector phi = Vector::Ones(5);
  const Matrix b = build_row_stochastic(w, phi, w.a * phi);
  EXPECT_LE((b - w.a).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RowStochastic, RowsSumToOneForRandomPhi) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Digraph g = random_strongly_connected(7, 0.25, rng);
    const WeightMatrix w = build_column_stochastic(g);
    Vector phi(7);
    for (Eigen::Index k = 0; k < 7; ++k) phi(k) = u(rng);
    const Matrix b = build_row_stochastic(w, phi, w.a * phi);
    EXPECT_LE((b.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(RowStochastic, RejectsNonPositivePhi) {
  const WeightMatrix w = build_column_stochastic(two_node());
  EXPECT_THROW(build_row_stochastic(w, Vector::Ones(2), Vector{{0.0, 2.0}}), InvariantViolation);
}

TEST(Schedule, ConstantScheduleReturnsSameGraph) {
  const Digraph g = directed_ring(4);
  const GraphSchedule s = GraphSchedule::constant(g);
  for (Round t : {0u, 1u, 17u, 1000u}) EXPECT_EQ(s.graph_at(t).edges(), g.edges());
}

TEST(Schedule, CyclicOrder) {
  const Digraph g1(3, {{0, 1}}), g2(3, {{1, 2}});
  const GraphSchedule s = GraphSchedule::derived({g1, g2}, {}, SchedulePolicy::cyclic, 2);
  EXPECT_EQ(graph_at(s, 0).edges(), g1.edges());
  EXPECT_EQ(graph_at(s, 1).edges(), g2.edges());
  EXPECT_EQ(graph_at(s, 2).edges(), g1.edges());
}

TEST(Schedule, SequenceWithoutWrapEndsAtListLength) {
  const Digraph g = directed_ring(3);
  const GraphSchedule s = GraphSchedule::derived({g}, {0, 0, 0, 0, 0}, SchedulePolicy::sequence, 1, false);
  EXPECT_NO_THROW(s.graph_at(4));
  EXPECT_THROW(s.graph_at(7), std::out_of_range);
}

TEST(JointConnectivity, Examples) {
  EXPECT_TRUE(check_joint_connectivity(GraphSchedule::constant(directed_ring(4)), 10));

  const Digraph cycles(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
  const Digraph cycles_again(6, {{1, 0}, {2, 1}, {0, 2}, {4, 3}, {5, 4}, {3, 5}});
  EXPECT_FALSE(check_joint_connectivity(
      GraphSchedule::derived({cycles, cycles_again}, {}, SchedulePolicy::cyclic, 2), 10));

  const Digraph half1(4, {{0, 1}, {2, 3}}), half2(4, {{1, 2}, {3, 0}});
  const GraphSchedule split = GraphSchedule::derived({half1, half2}, {}, SchedulePolicy::cyclic, 2);
  EXPECT_TRUE(check_joint_connectivity(split, 10));
  const GraphSchedule too_short = GraphSchedule::derived({half1, half2}, {}, SchedulePolicy::cyclic, 1);
  EXPECT_FALSE(check_joint_connectivity(too_short, 10));
}

TEST(PhiBounds, ConservationAndWorstCaseBoundsOnRandomSchedules) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 3 + rep % 5;
    std::vector<Digraph> gs;
    for (int k = 0; k < 3; ++k) gs.push_back(random_strongly_connected(n, 0.2, rng));
    const GraphSchedule s = GraphSchedule::derived(gs, {}, SchedulePolicy::cyclic, 1);
    const auto [lo, hi] = s.phi_bounds();
    Vector phi = Vector::Ones(static_cast<Eigen::Index>(n));
    for (Round t = 0; t < 300; ++t) {
      phi = s.weights_at(t).a * phi;
      EXPECT_NEAR(phi.sum(), static_cast<double>(n), 1e-10);
      EXPECT_GE(phi.minCoeff(), lo);
      EXPECT_LE(phi.maxCoeff(), hi);
    }
  }
}

TEST(PhiBounds, SingleNodeIsExactlyOne) {
  const auto [lo, hi] = GraphSchedule::constant(Digraph(1, {})).phi_bounds();
  EXPECT_EQ(lo, 1.0);
  EXPECT_EQ(hi, 1.0);
}
