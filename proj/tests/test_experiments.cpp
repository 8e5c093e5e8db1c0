#include "fwas/experiments.hpp"
#include "fwas/io.hpp"

#include <gtest/gtest.h>

#include <cmath>

using fwas::ExperimentResult;

namespace {

const double kPi = std::acos(-1.0);

void expect_all_pass(const ExperimentResult& r) {
  ASSERT_FALSE(r.checks.empty()) << r.id;
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << r.id << ": " << c.name << " (" << c.detail << ")";
}

double value_of(const ExperimentResult& r, const std::string& key) {
  for (const auto& [k, v] : r.values)
    if (k == key) return v;
  ADD_FAILURE() << "missing value " << key;
  return NAN;
}

}  // namespace

TEST(Instances, ClosedForms) {
  EXPECT_NEAR(fwas::instances::cube_phi(3), 0.5773502691896258, 1e-15);
  EXPECT_DOUBLE_EQ(fwas::instances::simplex_phi(4), 1.0);
  EXPECT_NEAR(fwas::instances::simplex_phi(5), 2.0 / std::sqrt(4.8), 1e-15);
  EXPECT_NEAR(fwas::instances::flat_quadratic_bar_phi(200), std::sqrt(199.9375), 1e-12);
  EXPECT_DOUBLE_EQ(fwas::instances::flat_quadratic_bar_phi(1.0 / 16), 0.125);
  EXPECT_DOUBLE_EQ(fwas::instances::clamp_bar_phi(3), 2.0);
  EXPECT_NEAR(fwas::instances::hat_ratio_local_phi(1000), 2000 / std::sqrt(4001.0), 1e-12);
}

TEST(Instances, WedgeAtomsAndParameterChecks) {
  const auto A = fwas::instances::wedge(kPi / 10);
  EXPECT_NEAR(A.matrix()(0, 0), 0.8090169943749475, 1e-15);
  EXPECT_NEAR(A.matrix()(1, 0), 0.5877852522924731, 1e-15);
  EXPECT_THROW(fwas::instances::flat_quadratic(0.0), fwas::InvalidArgument);
  EXPECT_THROW(fwas::instances::cube(0), fwas::InvalidArgument);
  EXPECT_THROW(fwas::reproduce("ex-strong", {{"theta", kPi / 6}}), fwas::InvalidArgument);
}

TEST(Reproduce, EveryExperimentPassesWithDefaults) {
  for (const auto& id : fwas::experiment_ids()) expect_all_pass(fwas::reproduce(id));
}

TEST(Reproduce, UnknownIdIsRejected) { EXPECT_THROW(fwas::reproduce("ex-none"), fwas::InvalidArgument); }

TEST(Reproduce, StrongBoundLineAndRatioWindow) {
  const auto r = fwas::reproduce("ex-strong", {{"theta", kPi / 10}});
  EXPECT_NEAR(value_of(r, "bound"), 0.859423525312737, 1e-12);
  ASSERT_TRUE(r.trace.has_value());
  // one row per step from k = 1
  EXPECT_EQ(r.rows.size(), static_cast<std::size_t>(r.trace->steps() - 1));
  EXPECT_EQ(r.rows.front().k, 1);
}

TEST(Reproduce, QuadraticWindowEndsAtQuarterT) {
  const auto r = fwas::reproduce("ex-quadratic", {{"t", 200}, {"bounds", 0}});
  ASSERT_FALSE(r.rows.empty());
  EXPECT_EQ(r.rows.front().k, 1);
  EXPECT_EQ(r.rows.back().k, 49);
  EXPECT_DOUBLE_EQ(r.rows.front().bound, 0.02);
  expect_all_pass(r);
}

TEST(Reproduce, QuadraticSmallTHasEmptyWindowAndSecondBranch) {
  const auto r = fwas::reproduce("ex-quadratic", {{"t", 1.0 / 16}});
  EXPECT_TRUE(r.rows.empty());
  EXPECT_DOUBLE_EQ(value_of(r, "bar_phi_closed_form"), 0.125);
  expect_all_pass(r);
}

TEST(Reproduce, ClampAtSevenHasRawRateOne) {
  const auto r = fwas::reproduce("ex-clamp", {{"t", 7}});
  EXPECT_NEAR(value_of(r, "raw_rate"), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(value_of(r, "rate"), 0.5);
  expect_all_pass(r);
}

TEST(Reproduce, HatRatioAtThousand) {
  const auto r = fwas::reproduce("ex-hat-ratio", {{"t", 1000}});
  EXPECT_NEAR(value_of(r, "ratio"), 31.61882450 / 31.62178838, 1e-8);
  expect_all_pass(r);
}

TEST(Reproduce, RunsAreBitDeterministic) {
  for (const char* id : {"ex-strong", "ex-quadratic", "custom"}) {
    const auto a = fwas::reproduce(id), b = fwas::reproduce(id);
    EXPECT_EQ(fwas::ratio_csv(a.rows), fwas::ratio_csv(b.rows)) << id;
    ASSERT_TRUE(a.trace && b.trace);
    EXPECT_EQ(fwas::trace_csv(*a.trace), fwas::trace_csv(*b.trace)) << id;
  }
}

TEST(LinearRateCase, RandomQuadraticsSatisfyRateAndAudit) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 6; ++trial) {
    auto [A, q] = fwas::random_strongly_convex_quadratic(rng, 2 + trial % 2, 4 + trial % 4, 0.3);
    const auto c = fwas::check_linear_rate_case(A, q, 5000);
    EXPECT_TRUE(c.report.passed) << "trial " << trial << " first violation " << c.report.first_violation;
    EXPECT_TRUE(c.audit.passed) << "trial " << trial << ": " << c.audit.message;
    EXPECT_GT(c.rate.r, 0.0);
    EXPECT_LE(c.rate.r, 0.5);
    EXPECT_LE(c.f_lower, c.f_best);
    EXPECT_LE(c.f_best - c.f_lower, 1e-10);
  }
}
