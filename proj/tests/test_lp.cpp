#include "fwas/lp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using fwas::lp::LinearProgram;
using fwas::lp::Sense;
using fwas::lp::Status;
using fwas::lp::VarBound;

TEST(SolveLp, MinimiseSingleVariableAboveOne) {
  LinearProgram prog(Sense::minimize, 1);
  prog.cost << 1.0;
  prog.add_ge(Eigen::RowVectorXd::Ones(1), 1.0);
  const auto sol = fwas::lp::solve_lp(prog);
  ASSERT_EQ(sol.status, Status::optimal);
  EXPECT_NEAR(sol.objective, 1.0, 1e-12);
  EXPECT_NEAR(sol.dual_objective, 1.0, 1e-12);
}

TEST(SolveLp, MaximiseUnboundedVariable) {
  LinearProgram prog(Sense::maximize, 1);
  prog.cost << 1.0;
  prog.add_ge(Eigen::RowVectorXd::Ones(1), 0.0);
  EXPECT_EQ(fwas::lp::solve_lp(prog).status, Status::unbounded);
}

TEST(SolveLp, DetectsInfeasibility) {
  LinearProgram prog(Sense::minimize, 2);
  prog.add_eq(Eigen::RowVector2d(1.0, 1.0), -1.0);
  EXPECT_EQ(fwas::lp::solve_lp(prog).status, Status::infeasible);
}

TEST(SolveLp, RedundantEqualityRowsKeepDualsConsistent) {
  LinearProgram prog(Sense::minimize, 2);
  prog.cost << 1.0, 2.0;
  prog.add_eq(Eigen::RowVector2d(1.0, 1.0), 1.0);
  prog.add_eq(Eigen::RowVector2d(2.0, 2.0), 2.0);
  const auto sol = fwas::lp::solve_lp(prog);
  ASSERT_EQ(sol.status, Status::optimal);
  EXPECT_NEAR(sol.objective, 1.0, 1e-12);
  EXPECT_NEAR(sol.dual_objective, 1.0, 1e-12);
}

// Longest-segment LP on A = I_2, x = e_1, z = e_2:
//   max lambda s.t. w_1 a_1 - A y = lambda d, w_1 = 1, 1'y = 1, y >= 0.
// Grid oracle over y = (s, 1 - s): A(w - y) = (1 - s)(1, -1) is parallel to
// d = (1, -1)/sqrt(2) with lambda = sqrt(2)(1 - s), maximised at s = 0.
TEST(SolveLp, LongestSegmentOnTwoSimplexMatchesGridOracle) {
  const double r = 1.0 / std::sqrt(2.0);
  double oracle = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double s = k / 1000.0;
    const Eigen::Vector2d diff(1.0 - s, -(1.0 - s));
    oracle = std::max(oracle, diff.dot(Eigen::Vector2d(r, -r)));
  }
  EXPECT_NEAR(oracle, std::sqrt(2.0), 1e-12);

  // variables: w_1 | y_1 y_2 | lambda
  LinearProgram prog(Sense::maximize, 4);
  prog.cost << 0, 0, 0, 1;
  prog.add_eq((Eigen::RowVectorXd(4) << 1, -1, 0, -r).finished(), 0.0);
  prog.add_eq((Eigen::RowVectorXd(4) << 0, 0, -1, r).finished(), 0.0);
  prog.add_eq((Eigen::RowVectorXd(4) << 1, 0, 0, 0).finished(), 1.0);
  prog.add_eq((Eigen::RowVectorXd(4) << 0, 1, 1, 0).finished(), 1.0);
  const auto sol = fwas::lp::solve_lp(prog);
  ASSERT_EQ(sol.status, Status::optimal);
  EXPECT_NEAR(sol.objective, oracle, 1e-10);
}

TEST(SolveLp, FreeVariablesAndMixedRows) {
  // min |x - 3| style: min t s.t. t >= x - 3, t >= 3 - x, x = 5 (x, t free) -> 2
  LinearProgram prog(Sense::minimize, 2, VarBound::free);
  prog.cost << 0.0, 1.0;
  prog.add_ge(Eigen::RowVector2d(-1.0, 1.0), -3.0);
  prog.add_ge(Eigen::RowVector2d(1.0, 1.0), 3.0);
  prog.add_eq(Eigen::RowVector2d(1.0, 0.0), 5.0);
  const auto sol = fwas::lp::solve_lp(prog);
  ASSERT_EQ(sol.status, Status::optimal);
  EXPECT_NEAR(sol.objective, 2.0, 1e-12);
  EXPECT_NEAR(sol.primal(0), 5.0, 1e-12);
}

TEST(SolveLp, RejectsMalformedProgram) {
  LinearProgram prog(Sense::minimize, 2);
  prog.bounds.pop_back();
  EXPECT_THROW(fwas::lp::solve_lp(prog), fwas::DimensionMismatch);
}

TEST(SolveLp, TableauDumpWhenLogging) {
  LinearProgram prog(Sense::minimize, 1);
  prog.cost << 1.0;
  prog.add_ge(Eigen::RowVectorXd::Ones(1), 1.0);
  std::ostringstream log;
  fwas::lp::SimplexOptions opts;
  opts.log = &log;
  ASSERT_TRUE(fwas::lp::solve_lp(prog, opts).optimal());
  EXPECT_NE(log.str().find("simplex tableau"), std::string::npos);
}

// Property: random feasible, bounded programs satisfy strong duality,
// primal feasibility and complementary slackness.
TEST(SolveLp, RandomProgramsSatisfyStrongDuality) {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 6);
  int solved = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = dim(rng) + 1;
    const int n_eq = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const int n_ge = std::uniform_int_distribution<int>(0, 4)(rng);
    LinearProgram prog(trial % 2 ? Sense::minimize : Sense::maximize, n);
    for (int j = 0; j < n; ++j)
      if (unif(rng) > 0.5) prog.bounds[static_cast<std::size_t>(j)] = VarBound::free;
    Eigen::VectorXd x0(n);
    for (int j = 0; j < n; ++j) x0(j) = std::abs(unif(rng));
    for (int i = 0; i < n_eq; ++i) {
      Eigen::RowVectorXd row(n);
      for (int j = 0; j < n; ++j) row(j) = unif(rng);
      prog.add_eq(row, row.dot(x0));
    }
    for (int i = 0; i < n_ge; ++i) {
      Eigen::RowVectorXd row(n);
      for (int j = 0; j < n; ++j) row(j) = unif(rng);
      prog.add_ge(row, row.dot(x0) - std::abs(unif(rng)));
    }
    // box the free variables so the program stays bounded
    for (int j = 0; j < n; ++j) {
      Eigen::RowVectorXd e = Eigen::RowVectorXd::Unit(n, j);
      prog.add_ge(e, -3.0);
      prog.add_le(e, 3.0);
    }
    for (int j = 0; j < n; ++j) prog.cost(j) = unif(rng);

    const auto sol = fwas::lp::solve_lp(prog);
    ASSERT_EQ(sol.status, Status::optimal) << "trial " << trial;
    EXPECT_LE(fwas::lp::primal_residual(prog, sol.primal), 1e-9) << "trial " << trial;
    EXPECT_LE(std::abs(sol.objective - sol.dual_objective), 1e-8) << "trial " << trial;
    EXPECT_LE(fwas::lp::complementarity_residual(prog, sol), 1e-8) << "trial " << trial;
    ++solved;
  }
  EXPECT_EQ(solved, 300);
}

TEST(SolveLp, CorruptedPivotToleranceBreaksSolves) {
  LinearProgram prog(Sense::minimize, 2);
  prog.cost << 1.0, 1.0;
  prog.add_ge(Eigen::RowVector2d(0.3, 0.2), 1.0);
  fwas::lp::SimplexOptions bad;
  bad.pivot_tol = 10.0;
  EXPECT_NE(fwas::lp::solve_lp(prog, bad).status, Status::optimal);
  EXPECT_EQ(fwas::lp::solve_lp(prog).status, Status::optimal);
}
