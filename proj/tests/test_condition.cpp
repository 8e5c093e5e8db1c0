#include "fwas/condition.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using fwas::AtomMatrix;
using fwas::IndexSet;
using fwas::SimplexPoint;

namespace {

Eigen::MatrixXd cube(int dim) {
  const int n = 1 << dim;
  Eigen::MatrixXd m(dim, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < dim; ++i) m(i, j) = (j >> i) & 1;
  return m;
}

// Random point of the simplex on a random nonempty support.
SimplexPoint random_point(std::mt19937& rng, Eigen::Index n) {
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution keep(0.6);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (keep(rng)) w(i) = expo(rng);
  if (w.sum() == 0.0) w(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng)) = 1.0;
  return SimplexPoint::normalized(w);
}

Eigen::MatrixXd random_atoms(std::mt19937& rng, int m, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd M(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = g(rng);
  return M;
}

// M-example: first row (M, 0, ..., 0), second row (1/2, 1/2, 1/3, ..., 1/n).
Eigen::MatrixXd m_example(double M, int n) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, n);
  A(0, 0) = M;
  A(1, 0) = 0.5;
  for (int j = 1; j < n; ++j) A(1, j) = 1.0 / (j + 1);
  return A;
}

// Example matrices for the scaled measure: Abar = [[t, t, -t], [0, 0, 0], [t, 0, 0]].
Eigen::MatrixXd tight_quadratic_abar(double t) {
  Eigen::MatrixXd A(3, 3);
  A << t, t, -t, 0, 0, 0, t, 0, 0;
  return A;
}

}  // namespace

TEST(PhiPair, TwoSimplexVertexPair) {
  const AtomMatrix A(Eigen::MatrixXd::Identity(2, 2));
  const auto rep = fwas::phi_pair(A, SimplexPoint::vertex(2, 0), SimplexPoint::vertex(2, 1));
  EXPECT_NEAR(rep.value, std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(fwas::phi_pair_dual(A, SimplexPoint::vertex(2, 0), SimplexPoint::vertex(2, 1)), std::sqrt(2.0), 1e-10);
}

TEST(PhiPair, UnitSegment) {
  const AtomMatrix A((Eigen::MatrixXd(1, 2) << 0, 1).finished());
  const auto x = SimplexPoint::vertex(2, 1), z = SimplexPoint::vertex(2, 0);
  EXPECT_NEAR(fwas::phi_pair(A, x, z).value, 1.0, 1e-12);
  EXPECT_NEAR(fwas::phi_pair_dual(A, x, z), 1.0, 1e-12);
}

TEST(PhiPair, WitnessLengthMatchesValue) {
  Eigen::MatrixXd M(2, 4);
  M << 0, 2, 1, 0.3, 0, 0, 1.5, 0.2;
  const AtomMatrix A(M);
  const auto x = SimplexPoint::normalized(Eigen::Vector4d(0.2, 0.5, 0.3, 0.0));
  const auto z = SimplexPoint::vertex(4, 3);
  const auto rep = fwas::phi_pair(A, x, z);
  EXPECT_NEAR(rep.value, (rep.witness.u - rep.witness.v).norm(), 1e-8);
  EXPECT_NEAR(rep.value, fwas::phi_pair_dual(A, x, z), 1e-8);
  for (auto i : rep.witness.w.support())
    EXPECT_TRUE(std::binary_search(x.support().begin(), x.support().end(), i));
}

TEST(PhiPair, DuplicatedAtomsStillPositive) {
  Eigen::MatrixXd M(2, 3);
  M << 1, 1, 0, 0, 0, 1;
  const AtomMatrix A(M);
  const auto x = SimplexPoint::normalized(Eigen::Vector3d(0.5, 0.5, 0.0));
  const auto z = SimplexPoint::vertex(3, 2);
  EXPECT_GE(fwas::phi_pair_dual(A, x, z), std::sqrt(2.0) - 1e-10);
}

TEST(PhiPair, RejectsVanishingDirection) {
  const AtomMatrix A(Eigen::MatrixXd::Identity(2, 2));
  EXPECT_THROW(fwas::phi_pair(A, SimplexPoint::vertex(2, 0), SimplexPoint::vertex(2, 0)), fwas::InvalidArgument);
  EXPECT_THROW(fwas::phi_pair(A, SimplexPoint::vertex(3, 0), SimplexPoint::vertex(2, 0)), fwas::DimensionMismatch);
}

TEST(PhiPair, RandomInstancesAgreeWithLongestSegment) {
  std::mt19937 rng(101);
  int checked = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const int m = 1 + trial % 4, n = 2 + trial % 5;
    const AtomMatrix A(random_atoms(rng, m, n));
    const auto x = random_point(rng, n), z = random_point(rng, n);
    if ((A.matrix() * (x.weights() - z.weights())).norm() <= 1e-8) continue;
    const auto rep = fwas::phi_pair(A, x, z);
    EXPECT_NEAR(rep.value, fwas::phi_pair_dual(A, x, z), 1e-7) << "trial " << trial;
    EXPECT_NEAR(rep.value, (rep.witness.u - rep.witness.v).norm(), 1e-7) << "trial " << trial;
    EXPECT_GT(rep.value, 0.0);
    ++checked;
  }
  EXPECT_GE(checked, 200);
}

TEST(FacialDistance, Cube) {
  for (int m = 2; m <= 3; ++m)
    EXPECT_NEAR(fwas::facial_distance(AtomMatrix(cube(m))).value, 1.0 / std::sqrt(m), 1e-10);
}

TEST(FacialDistance, StandardSimplex) {
  EXPECT_NEAR(fwas::facial_distance(AtomMatrix(Eigen::MatrixXd::Identity(4, 4))).value, 1.0, 1e-10);
  EXPECT_NEAR(fwas::facial_distance(AtomMatrix(Eigen::MatrixXd::Identity(5, 5))).value,
              2.0 / std::sqrt(5.0 - 1.0 / 5.0), 1e-10);
}

TEST(FacialDistance, RejectsTrivialPolytope) {
  EXPECT_THROW(fwas::facial_distance(AtomMatrix(Eigen::MatrixXd::Ones(3, 2))), fwas::DegenerateInstance);
}

TEST(FacialDistance, IsAStrictLowerBoundOnSampledPairsAndAttainedAtWitness) {
  std::mt19937 rng(202);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 1 + trial % 3, n = 3 + trial % 4;
    const AtomMatrix A(random_atoms(rng, m, n));
    const auto phi = fwas::facial_distance(A);
    EXPECT_GT(phi.value, 0.0);
    for (int k = 0; k < 10; ++k) {
      const auto x = random_point(rng, n), z = random_point(rng, n);
      if ((A.matrix() * (x.weights() - z.weights())).norm() <= 1e-8) continue;
      EXPECT_GE(fwas::phi_pair(A, x, z).value, phi.value - 1e-7) << "trial " << trial;
    }
    EXPECT_NEAR(fwas::phi_pair(A, phi.witness.w, phi.witness.y).value, phi.value, 1e-7) << "trial " << trial;
    EXPECT_NEAR((phi.witness.u - phi.witness.v).norm(), phi.value, 1e-9);
  }
}

TEST(Pdirw, UnitSegment) {
  const AtomMatrix A((Eigen::MatrixXd(1, 2) << 0, 1).finished());
  EXPECT_NEAR(fwas::pdirw(A, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)), 1.0, 1e-12);
}

TEST(Pdirw, RejectsBadInput) {
  const AtomMatrix A((Eigen::MatrixXd(1, 2) << 0, 1).finished());
  EXPECT_THROW(fwas::pdirw(A, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)), fwas::InvalidArgument);
  EXPECT_THROW(fwas::pdirw(A, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Constant(1, 2.0)), fwas::InvalidArgument);
}

// Brute force over every subset S with u in conv(S).
TEST(Pdirw, MatchesSubsetEnumeration) {
  std::mt19937 rng(303);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 4;
    const AtomMatrix A(random_atoms(rng, 2, n));
    const Eigen::VectorXd u = fwas::combine(A, random_point(rng, n));
    const Eigen::VectorXd r = random_atoms(rng, 2, 1);
    const Eigen::VectorXd vals = A.matrix().transpose() * r.normalized();
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << n); ++mask) {
      IndexSet S;
      double lo = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j)
        if (mask >> j & 1) S.push_back(j), lo = std::min(lo, vals(j));
      if (fwas::in_hull(A.columns(S), u)) best = std::min(best, vals.maxCoeff() - lo);
    }
    EXPECT_NEAR(fwas::pdirw(A, r, u), best, 1e-10) << "trial " << trial;
  }
}

TEST(Pdirw, BoundedBelowByFacialDistanceWithEqualityAtWitness) {
  std::mt19937 rng(404);
  for (int trial = 0; trial < 15; ++trial) {
    const int m = 1 + trial % 3, n = 3 + trial % 5;
    const AtomMatrix A(random_atoms(rng, m, n));
    const auto phi = fwas::facial_distance(A);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd u = fwas::combine(A, random_point(rng, n));
      const Eigen::VectorXd v = fwas::combine(A, random_point(rng, n));
      if ((u - v).norm() <= 1e-8) continue;
      EXPECT_GE(fwas::pdirw(A, v - u, u), phi.value - 1e-7) << "trial " << trial;
    }
    EXPECT_NEAR(fwas::pdirw(A, phi.witness.v - phi.witness.u, phi.witness.u), phi.value, 1e-6) << "trial " << trial;
  }
}

TEST(SmallestContainingFace, Examples) {
  const AtomMatrix sq(cube(2));
  const auto vtx = fwas::smallest_containing_face(sq, Eigen::Vector2d(1.0, 0.0));
  ASSERT_TRUE(vtx.has_value());
  EXPECT_EQ(vtx->atom_indices, (IndexSet{1}));
  EXPECT_FALSE(fwas::smallest_containing_face(sq, Eigen::Vector2d(0.5, 0.5)).has_value());
  Eigen::MatrixXd edge(2, 2);
  edge << 0.2, 0.7, 1.0, 1.0;
  const auto e = fwas::smallest_containing_face(sq, edge);
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->atom_indices, (IndexSet{2, 3}));
  EXPECT_THROW(fwas::smallest_containing_face(sq, Eigen::Vector2d(2.0, 0.0)), fwas::InvalidArgument);
}

TEST(LocalPhiLowerBound, FarVertexIsWellConditioned) {
  const AtomMatrix A(m_example(100.0, 5));
  EXPECT_GE(fwas::local_phi_lower_bound(A, {SimplexPoint::vertex(5, 0)}).value, 100.0);
}

TEST(LocalPhiLowerBound, WholeSimplexGivesFacialDistance) {
  const AtomMatrix A(cube(2));
  EXPECT_NEAR(fwas::local_phi_lower_bound(A, {SimplexPoint::barycenter(4)}).value,
              fwas::facial_distance(A).value, 1e-12);
}

// Triangle (0,0), (2,0), (0,1) with Z = {vertex 1}: the only face inside the
// minimal face is the vertex itself, so the bound is its distance to the
// opposite edge, 2/sqrt(5).
TEST(LocalPhiLowerBound, TriangleVertex) {
  Eigen::MatrixXd M(2, 3);
  M << 0, 2, 0, 0, 0, 1;
  const AtomMatrix A(M);
  const auto rep = fwas::local_phi_lower_bound(A, {SimplexPoint::vertex(3, 1)});
  const Eigen::Vector2d a1(2, 0), a0(0, 0), a2(0, 1);
  const Eigen::Vector2d dir = (a2 - a0).normalized();
  const double brute = (a1 - a0 - (a1 - a0).dot(dir) * dir).norm();
  EXPECT_NEAR(rep.value, brute, 1e-12);
  EXPECT_EQ(rep.minimizing_face.atom_indices, (IndexSet{1}));
}

TEST(LocalPhiLowerBound, BoundsSampledLocalPairs) {
  std::mt19937 rng(505);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 2, n = 4 + trial % 3;
    const AtomMatrix A(random_atoms(rng, m, n));
    // Z = an edge-like subset: the hull of two atoms
    const auto Zface = fwas::face_closure(A, {0});
    std::vector<SimplexPoint> Z{SimplexPoint::vertex(n, 0)};
    const double bound = fwas::local_phi_lower_bound(A, Z).value;
    for (int k = 0; k < 10; ++k) {
      const auto x = random_point(rng, n);
      if ((A.matrix() * (x.weights() - Z[0].weights())).norm() <= 1e-8) continue;
      EXPECT_LE(bound, fwas::phi_pair(A, x, Z[0]).value + 1e-7) << "trial " << trial;
    }
    EXPECT_FALSE(Zface.atom_indices.empty());
  }
}

TEST(NormG, Examples) {
  const Eigen::VectorXd g0 = Eigen::VectorXd::Zero(2);
  EXPECT_EQ(fwas::norm_g(Eigen::VectorXd::Zero(3), g0), 0.0);
  EXPECT_DOUBLE_EQ(fwas::norm_g(Eigen::Vector3d(3, 4, 0), g0), 5.0);
  EXPECT_DOUBLE_EQ(fwas::norm_g(Eigen::Vector3d(0, 0, 4), g0), 2.0);
  EXPECT_THROW(fwas::norm_g(Eigen::Vector2d(0, 0), g0), fwas::DimensionMismatch);
}

TEST(ScaledInstance, Examples) {
  const auto s2 = fwas::scaled_instance(AtomMatrix(tight_quadratic_abar(5.0)), Eigen::VectorXd::Zero(2));
  EXPECT_EQ(s2.Zg_face, (IndexSet{1, 2}));
  const double t = 7.0;
  const auto s3 = fwas::scaled_instance(AtomMatrix((Eigen::MatrixXd(2, 3) << t, t, -t, t, 0, 0).finished()),
                                        Eigen::VectorXd::Zero(1));
  EXPECT_EQ(s3.Zg_face, (IndexSet{1, 2}));
  EXPECT_DOUBLE_EQ(s3.delta_g, t);
  const auto flat = fwas::scaled_instance(AtomMatrix((Eigen::MatrixXd(2, 3) << 1, 2, 3, -1, -2, -3).finished()),
                                          Eigen::VectorXd::Ones(1));
  EXPECT_EQ(flat.delta_g, 0.0);
  EXPECT_EQ(flat.Zg_face, (IndexSet{0, 1, 2}));
}

TEST(BarPhiPair, ClampExampleValue) {
  const double t = 3.0;
  const AtomMatrix Abar((Eigen::MatrixXd(3, 2) << 0, 1, 0, 0, 0, t).finished());
  const auto rep = fwas::bar_phi_pair(Abar, Eigen::VectorXd::Zero(2), SimplexPoint::vertex(2, 1),
                                      SimplexPoint::vertex(2, 0));
  EXPECT_NEAR(rep.value, 2.0, 1e-10);
}

TEST(BarPhiPair, RejectsZOutsideZg) {
  const AtomMatrix Abar(tight_quadratic_abar(1.0));
  EXPECT_THROW(fwas::bar_phi_pair(Abar, Eigen::VectorXd::Zero(2), SimplexPoint::vertex(3, 1),
                                  SimplexPoint::vertex(3, 0)),
               fwas::InvalidArgument);
}

// With delta(g) = 0 the scaled measure reduces to the plain one on the top rows;
// with delta(g) > 0 it dominates the plain measure on the hat matrix.
TEST(BarPhiPair, ReductionsToPlainMeasure) {
  std::mt19937 rng(606);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 1 + trial % 3, n = 3 + trial % 4;
    const Eigen::MatrixXd top = random_atoms(rng, m, n);
    Eigen::VectorXd g(m);
    for (int i = 0; i < m; ++i) g(i) = gauss(rng);
    Eigen::MatrixXd Abar(m + 1, n);
    Abar.topRows(m) = top;
    const bool flat = trial % 2 == 0;
    for (int j = 0; j < n; ++j) Abar(m, j) = -g.dot(top.col(j)) + (flat ? 0.7 : gauss(rng));
    const auto s = fwas::scaled_instance(AtomMatrix(Abar), g);
    for (int k = 0; k < 5; ++k) {
      const auto x = random_point(rng, n);
      Eigen::VectorXd zw = Eigen::VectorXd::Zero(n);
      std::exponential_distribution<double> expo(1.0);
      for (auto j : s.Zg_face) zw(j) = expo(rng);
      const auto z = SimplexPoint::normalized(zw);
      if (fwas::norm_g(Abar * (x.weights() - z.weights()), g) <= 1e-8) continue;
      const double bar = fwas::bar_phi_pair(AtomMatrix(Abar), g, x, z).value;
      EXPECT_NEAR(bar, fwas::bar_phi_pair_dual(AtomMatrix(Abar), g, x, z), 1e-7) << "trial " << trial;
      if (flat) {
        if ((top * (x.weights() - z.weights())).norm() <= 1e-8) continue;
        EXPECT_NEAR(bar, fwas::phi_pair(AtomMatrix(top), x, z).value, 1e-7) << "trial " << trial;
      } else {
        EXPECT_GE(bar, fwas::phi_pair(fwas::hat_matrix(s), x, z).value - 1e-7) << "trial " << trial;
      }
    }
  }
}

TEST(BarPhiBounds, BracketClosedForms) {
  const auto g = Eigen::VectorXd::Zero(2);
  const auto b1 = fwas::bar_phi_bounds(AtomMatrix(tight_quadratic_abar(1.0)), g);
  EXPECT_LE(b1.lower, std::sqrt(1.0 - 1.0 / 16.0));
  EXPECT_GE(b1.upper, std::sqrt(1.0 - 1.0 / 16.0) - 1e-9);
  const double t = 1.0 / 16.0;
  const auto b2 = fwas::bar_phi_bounds(AtomMatrix(tight_quadratic_abar(t)), g);
  EXPECT_LE(b2.lower, 2.0 * t);
  EXPECT_GE(b2.upper, 2.0 * t - 1e-9);
  EXPECT_GT(b2.lower, 0.0);
}

TEST(BarPhiBounds, HatMatrixLowerBound) {
  const double t = 1000.0;
  const AtomMatrix Abar((Eigen::MatrixXd(2, 3) << t, t, -t, t, 0, 0).finished());
  const auto b = fwas::bar_phi_bounds(Abar, Eigen::VectorXd::Zero(1), 50);
  EXPECT_NEAR(b.lower, 2.0 * t / std::sqrt(4.0 * t + 1.0), 1e-6);
  EXPECT_LE(b.lower, b.upper);
}
