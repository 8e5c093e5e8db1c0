#include "fwas/lp.hpp"
#include "fwas/min_norm.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace {

Eigen::MatrixXd cols(std::initializer_list<Eigen::Vector2d> pts) {
  Eigen::MatrixXd m(2, static_cast<Eigen::Index>(pts.size()));
  Eigen::Index j = 0;
  for (const auto& p : pts) m.col(j++) = p;
  return m;
}

double point_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double len2 = d.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - a - s * d).norm();
}

// Exact planar oracle: zero when an LP finds a common point, otherwise the
// smallest distance from a generator of one hull to a segment between two
// generators of the other (disjoint polygons attain their gap that way).
double planar_distance(const Eigen::MatrixXd& S, const Eigen::MatrixXd& T) {
  const Eigen::Index ns = S.cols(), nt = T.cols();
  fwas::lp::LinearProgram prog(fwas::lp::Sense::minimize, ns + nt);
  for (int r = 0; r < 2; ++r) {
    Eigen::RowVectorXd row(ns + nt);
    row << S.row(r), -T.row(r);
    prog.add_eq(row, 0.0);
  }
  Eigen::RowVectorXd one_s = Eigen::RowVectorXd::Zero(ns + nt), one_t = one_s;
  one_s.head(ns).setOnes();
  one_t.tail(nt).setOnes();
  prog.add_eq(one_s, 1.0);
  prog.add_eq(one_t, 1.0);
  if (fwas::lp::solve_lp(prog).optimal()) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  auto scan = [&best](const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q) {
    for (Eigen::Index i = 0; i < P.cols(); ++i)
      for (Eigen::Index a = 0; a < Q.cols(); ++a)
        for (Eigen::Index b = a; b < Q.cols(); ++b)
          best = std::min(best, point_segment(P.col(i), Q.col(a), Q.col(b)));
  };
  scan(S, T);
  scan(T, S);
  return best;
}

}  // namespace

TEST(MinNormPoint, SymmetricSegment) {
  const auto r = fwas::min_norm_point(cols({{1, 0}, {0, 1}}));
  EXPECT_NEAR(r.point(0), 0.5, 1e-14);
  EXPECT_NEAR(r.point(1), 0.5, 1e-14);
  EXPECT_NEAR(r.coefficients.sum(), 1.0, 1e-14);
}

TEST(MinNormPoint, Singleton) {
  const auto r = fwas::min_norm_point(cols({{2, 0}}));
  EXPECT_DOUBLE_EQ(r.point(0), 2.0);
  EXPECT_DOUBLE_EQ(r.point(1), 0.0);
}

// Segment p(s) = (1 + 2s, 1 - 2s), |p(s)|^2 = 2 + 8 s^2, minimised at s = 0.
TEST(MinNormPoint, SegmentEndpointFromCalculus) {
  double best_s = 0.0, best = 1e300;
  for (int k = 0; k <= 100000; ++k) {
    const double s = k / 100000.0;
    const double v = 2.0 + 8.0 * s * s;
    if (v < best) best = v, best_s = s;
  }
  ASSERT_EQ(best_s, 0.0);
  const auto r = fwas::min_norm_point(cols({{1, 1}, {3, -1}}));
  EXPECT_NEAR(r.point(0), 1.0, 1e-14);
  EXPECT_NEAR(r.point(1), 1.0, 1e-14);
}

TEST(MinNormPoint, OptimalityCertificateAndNormBound) {
  std::mt19937 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + trial % 4, k = 1 + trial % 9;
    Eigen::MatrixXd P(m, k);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j) P(i, j) = g(rng) + (i == 0 ? 0.5 : 0.0);
    const auto r = fwas::min_norm_point(P);
    const Eigen::VectorXd& x = r.point;
    EXPECT_GE(r.coefficients.minCoeff(), 0.0);
    EXPECT_NEAR(r.coefficients.sum(), 1.0, 1e-12);
    for (int j = 0; j < k; ++j) {
      EXPECT_GE(x.dot(P.col(j) - x), -1e-8);
      EXPECT_LE(x.norm(), P.col(j).norm() + 1e-12);
    }
  }
}

TEST(PolytopeDistance, OriginToStandardTriangle) {
  const Eigen::MatrixXd S = Eigen::VectorXd::Zero(3);
  const Eigen::MatrixXd T = Eigen::MatrixXd::Identity(3, 3);
  const auto d = fwas::polytope_distance(S, T);
  EXPECT_NEAR(d.distance, 1.0 / std::sqrt(3.0), 1e-14);
  EXPECT_NEAR((d.v - Eigen::Vector3d::Constant(1.0 / 3.0)).norm(), 0.0, 1e-14);
}

TEST(PolytopeDistance, IdenticalHullsHaveZeroDistanceAndCommonWitness) {
  const auto P = cols({{0, 0}, {1, 0}, {0, 1}});
  const auto d = fwas::polytope_distance(P, P);
  EXPECT_EQ(d.distance, 0.0);
  EXPECT_EQ(d.u, d.v);
}

TEST(PolytopeDistance, AdjacentCollinearAtoms) {
  const int n = 5;
  const Eigen::MatrixXd S = Eigen::Vector2d(0.0, 1.0 / n);
  const Eigen::MatrixXd T = Eigen::Vector2d(0.0, 1.0 / (n - 1));
  EXPECT_NEAR(fwas::polytope_distance(S, T).distance, 1.0 / 20.0, 1e-15);
}

TEST(PolytopeDistance, SymmetricAndMatchesPlanarOracle) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> count(1, 4);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::MatrixXd S(2, count(rng)), T(2, count(rng));
    for (Eigen::Index j = 0; j < S.cols(); ++j) S.col(j) = Eigen::Vector2d(u(rng), u(rng));
    for (Eigen::Index j = 0; j < T.cols(); ++j) T.col(j) = Eigen::Vector2d(u(rng) + 0.7, u(rng));
    const auto st = fwas::polytope_distance(S, T);
    const auto ts = fwas::polytope_distance(T, S);
    EXPECT_NEAR(st.distance, ts.distance, 1e-10);
    EXPECT_NEAR(st.distance, planar_distance(S, T), 1e-9) << "trial " << trial;
    EXPECT_NEAR((S * st.s_weights - st.u).norm(), 0.0, 1e-12);
    EXPECT_NEAR((T * st.t_weights - st.v).norm(), 0.0, 1e-12);
  }
}
