#pragma once

// Randomized consistency suites run by `fwas selftest`.

#include <Eigen/Dense>

#include <chrono>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fwas/condition.hpp"
#include "fwas/experiments.hpp"
#include "fwas/faces.hpp"
#include "fwas/lp.hpp"
#include "fwas/rate.hpp"
#include "fwas/solver.hpp"

namespace fwas {

struct SuiteResult {
  std::string name;
  bool passed = true;
  int checks = 0;
  int failures = 0;
  double seconds = 0.0;
  std::string first_failure;
};

namespace selftest {

inline Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < M.size(); ++i) M(i) = N(rng);
  return M;
}

inline SimplexPoint random_simplex_point(std::mt19937_64& rng, Eigen::Index n) {
  std::exponential_distribution<double> E(1.0);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = E(rng);
  return SimplexPoint::normalized(w);
}

class Recorder {
 public:
  explicit Recorder(SuiteResult& r) : r_(r) {}
  void expect(bool ok, const std::string& what) {
    ++r_.checks;
    if (ok) return;
    ++r_.failures;
    r_.passed = false;
    if (r_.first_failure.empty()) r_.first_failure = what;
  }

 private:
  SuiteResult& r_;
};

// Primal and dual pair measures agree and the witness realizes the value.
inline void lp_duality(Recorder& rec) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dm(1, 4), dn(2, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const AtomMatrix A(gaussian(rng, dm(rng), dn(rng)));
    const SimplexPoint x = random_simplex_point(rng, A.size()), z = random_simplex_point(rng, A.size());
    if ((A.matrix() * (x.weights() - z.weights())).norm() <= 1e-8) continue;
    const std::string tag = "trial " + std::to_string(trial);
    try {
      const PhiReport p = phi_pair(A, x, z);
      const double d = phi_pair_dual(A, x, z);
      rec.expect(std::abs(p.value - d) <= 1e-7, tag + ": primal and dual pair values differ");
      rec.expect(std::abs(p.value - (p.witness.u - p.witness.v).norm()) <= 1e-7, tag + ": witness distance differs");
    } catch (const Error& e) {
      rec.expect(false, tag + ": " + e.what());
    }
  }
}

// Enumerated faces agree with a margin-LP check of every atom subset.
inline void faces(Recorder& rec) {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> dn(3, 7);
  auto exposed = [](const AtomMatrix& A, std::uint64_t mask) {
    const FaceDescriptor f = face_closure(A, detail::from_mask(mask, A.size()));
    return detail::to_mask(f.atom_indices) == mask;
  };
  for (int trial = 0; trial < 20; ++trial) {
    const AtomMatrix A(gaussian(rng, 2, dn(rng)));
    std::vector<std::uint64_t> got;
    for (const auto& f : enumerate_proper_faces(A)) got.push_back(detail::to_mask(f.atom_indices));
    std::sort(got.begin(), got.end());
    std::vector<std::uint64_t> want;
    const std::uint64_t full = (std::uint64_t{1} << A.size()) - 1;
    for (std::uint64_t mask = 1; mask < full; ++mask)
      if (exposed(A, mask)) want.push_back(mask);
    rec.expect(got == want, "trial " + std::to_string(trial) + ": face lists differ");
  }
  for (int m = 2; m <= 3; ++m) {
    const std::size_t expected = m == 2 ? 8 : 26;
    rec.expect(enumerate_proper_faces(instances::cube(m)).size() == expected,
               "cube " + std::to_string(m) + ": wrong face count");
  }
}

// Closed forms, the facial-distance/width sandwich, and the localized bound.
inline void condition(Recorder& rec) {
  for (int m = 2; m <= 4; ++m)
    rec.expect(std::abs(facial_distance(instances::cube(m)).value - instances::cube_phi(m)) <= 1e-8,
               "cube closed form, m = " + std::to_string(m));
  for (int m = 2; m <= 6; ++m)
    rec.expect(std::abs(facial_distance(instances::standard_simplex(m)).value - instances::simplex_phi(m)) <= 1e-8,
               "simplex closed form, m = " + std::to_string(m));
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> dm(1, 3), dn(2, 7);
  for (int trial = 0; trial < 15; ++trial) {
    const AtomMatrix A(gaussian(rng, dm(rng), dn(rng)));
    const PhiReport phi = facial_distance(A);
    const std::string tag = "trial " + std::to_string(trial);
    for (int s = 0; s < 10; ++s) {
      const SimplexPoint x = random_simplex_point(rng, A.size()), z = random_simplex_point(rng, A.size());
      const Eigen::VectorXd u = combine(A, x), v = combine(A, z);
      if ((v - u).norm() <= 1e-8) continue;
      rec.expect(pdirw(A, v - u, u) >= phi.value - 1e-7, tag + ": width below facial distance");
    }
    rec.expect(std::abs(pdirw(A, phi.witness.v - phi.witness.u, phi.witness.u) - phi.value) <= 1e-6,
               tag + ": width at the witness differs from facial distance");
    rec.expect(local_phi_lower_bound(A, {SimplexPoint::barycenter(A.size())}).value >= phi.value - 1e-9,
               tag + ": localized bound below facial distance");
  }
  rec.expect(local_phi_lower_bound(instances::far_vertex(100, 5), {SimplexPoint::vertex(5, 0)}).value >= 100,
             "far-vertex localized bound below 100");
}

// Scaled measure relations on random stacked matrices.
inline void scaled(Recorder& rec) {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> dm(1, 2), dn(3, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = dm(rng);
    const AtomMatrix Abar(gaussian(rng, m + 1, dn(rng)));
    const Eigen::VectorXd g = gaussian(rng, m, 1);
    const ScaledInstance s = scaled_instance(Abar, g);
    const auto b = bar_phi_bounds(Abar, g, 60, 7 + trial);
    rec.expect(b.lower <= b.upper * (1 + 1e-9) + 1e-12, "trial " + std::to_string(trial) + ": bounds cross");
    const SimplexPoint x = random_simplex_point(rng, Abar.size());
    const SimplexPoint z = SimplexPoint::vertex(Abar.size(), s.Zg_face.front());
    if ((Abar.matrix() * (x.weights() - z.weights())).norm() <= 1e-8) continue;
    try {
      const double p = bar_phi_pair(Abar, g, x, z).value, d = bar_phi_pair_dual(Abar, g, x, z);
      rec.expect(std::abs(p - d) <= 1e-7 * std::max(1.0, p), "trial " + std::to_string(trial) + ": scaled duality");
    } catch (const Error&) {
      // x - z may have no component transverse to Z(g); nothing to compare then
    }
  }
}

// Linear rate and drop-step accounting on random strongly convex quadratics.
inline void solver(Recorder& rec) {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> dm(2, 3), dn(3, 7);
  for (int trial = 0; trial < 8; ++trial) {
    auto [A, q] = random_strongly_convex_quadratic(rng, dm(rng), dn(rng), 0.5);
    const LinearRateCase c = check_linear_rate_case(A, q, 5000);
    const std::string tag = "trial " + std::to_string(trial);
    rec.expect(c.report.passed, tag + ": linear rate violated at k = " + std::to_string(c.report.first_violation));
    rec.expect(c.audit.passed, tag + ": " + c.audit.message);
  }
  const RunTrace wedge = run(instances::wedge(instances::kPi / 10),
                             Quadratic{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)},
                             SimplexPoint::vertex(3, 0));
  rec.expect(drop_step_audit(wedge).passed, "wedge drop-step audit");
}

}  // namespace selftest

inline const std::vector<std::pair<std::string, std::function<void(selftest::Recorder&)>>>& selftest_suites() {
  static const std::vector<std::pair<std::string, std::function<void(selftest::Recorder&)>>> suites{
      {"duality", selftest::lp_duality}, {"faces", selftest::faces},   {"condition", selftest::condition},
      {"scaled", selftest::scaled},      {"solver", selftest::solver}};
  return suites;
}

/// Runs one suite by name, or all when `only` is empty. Exceptions count as failures.
inline std::vector<SuiteResult> run_selftest(const std::string& only = "") {
  std::vector<SuiteResult> out;
  for (const auto& [name, body] : selftest_suites()) {
    if (!only.empty() && name != only) continue;
    SuiteResult r;
    r.name = name;
    selftest::Recorder rec(r);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(rec);
    } catch (const std::exception& e) {
      rec.expect(false, std::string("exception: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  if (out.empty()) throw InvalidArgument("unknown selftest suite: " + only);
  return out;
}

}  // namespace fwas
