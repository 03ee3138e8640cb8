#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "seasonal/floquet.hpp"
#include "seasonal/insect.hpp"
#include "seasonal/simulator.hpp"
#include "support.hpp"

using namespace seasonal;
using testing_support::kFavorable;
using testing_support::kUnfavorable;

namespace {

SeasonalSystem insect_system(double theta, double period = 1.0) {
  return insect::as_seasonal_system(kUnfavorable, kFavorable, theta, period);
}

VectorXd vec(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Integrate, ZeroStaysZero) {
  const auto traj = integrate(insect_system(0.4), VectorXd::Zero(2), 0.0, 3.0, 0.01);
  for (const auto& x : traj.states) EXPECT_EQ(x.norm(), 0.0);
}

TEST(Integrate, ScalarExponential) {
  const SeasonalSystem sys(SeasonalSchedule(1.0, {0.0, 1.0}), {make_linear_piece(-MatrixXd::Identity(1, 1))});
  VectorXd x0(1);
  x0 << 2.0;
  const auto traj = integrate(sys, x0, 0.5, 3.5, 0.01);
  EXPECT_NEAR(traj.states.back()(0), 2.0 * std::exp(-3.0), 1e-10);
  EXPECT_DOUBLE_EQ(traj.times.back(), 3.5);
}

TEST(Integrate, BoundariesAreSampleTimes) {
  const auto sys = insect_system(0.3, 2.0);
  const auto traj = integrate(sys, vec(1, 1), 0.0, 6.0, 0.07);
  for (std::size_t i = 1; i < traj.times.size(); ++i) EXPECT_GT(traj.times[i], traj.times[i - 1]);
  for (double boundary : {0.6, 2.0, 2.6, 4.0, 4.6, 6.0}) {
    bool found = false;
    for (double t : traj.times) found = found || t == boundary || std::abs(t - boundary) <= 1e-13;
    EXPECT_TRUE(found) << boundary;
  }
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    const double mid = 0.5 * (traj.times[i] + traj.times[i - 1]);
    EXPECT_EQ(traj.season_tags[i], sys.schedule().season_index(mid));
  }
}

TEST(Integrate, FavorableConvergesToSteadyState) {
  const auto sys = insect_system(0.0);
  const auto traj = integrate(sys, vec(1, 1), 0.0, 200.0, 0.01);
  EXPECT_LE((traj.states.back() - vec(2.5, 5)).norm(), 1e-6);
}

TEST(Integrate, RejectsBadInput) {
  const auto sys = insect_system(0.5);
  EXPECT_THROW(integrate(sys, vec(-1, 1), 0, 1, 0.1), InvalidInput);
  EXPECT_THROW(integrate(sys, vec(1, 1), 0, 1, 0.0), InvalidInput);
  EXPECT_THROW(integrate(sys, VectorXd::Ones(3), 0, 1, 0.1), InvalidInput);
  EXPECT_THROW(integrate(sys, vec(1, 1), 2, 1, 0.1), InvalidInput);
}

TEST(Integrate, DivergenceTruncates) {
  const SeasonalSystem sys(SeasonalSchedule(1.0, {0.0, 1.0}), {make_linear_piece(5.0 * MatrixXd::Identity(1, 1))});
  VectorXd x0(1);
  x0 << 1.0;
  const auto traj = integrate(sys, x0, 0, 100, 0.01, 1e6);
  EXPECT_TRUE(traj.diverged);
  EXPECT_LT(traj.times.back(), 100.0);
  EXPECT_THROW(poincare_map(sys, x0, 0.001, 1.0), DivergenceError);
}

TEST(PoincareMap, ZeroAndSingleSeason) {
  EXPECT_EQ(poincare_map(insect_system(0.5), VectorXd::Zero(2)).norm(), 0.0);
  const auto sys = insect_system(0.0, 1.5);
  const auto traj = integrate(sys, vec(0.3, 2), 0.0, 1.5, 1.5 / 2000);
  EXPECT_LE((poincare_map(sys, vec(0.3, 2)) - traj.states.back()).norm(), 1e-14);
}

TEST(PoincareMap, OrderPreserving) {
  const auto sys = insect_system(0.45);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 6.0), bump(0.01, 1.0);
  for (int i = 0; i < 100; ++i) {
    const VectorXd y = vec(u(rng), u(rng));
    const VectorXd x = y + vec(bump(rng), bump(rng));
    EXPECT_TRUE(strictly_below(poincare_map(sys, y, 0.002), poincare_map(sys, x, 0.002)));
  }
}

TEST(PoincareMap, FourthOrderConvergence) {
  const auto sys = insect_system(0.35);
  const VectorXd x = vec(1.2, 0.7);
  const VectorXd coarse = poincare_map(sys, x, 1.0 / 20);
  const VectorXd mid = poincare_map(sys, x, 1.0 / 40);
  const VectorXd fine = poincare_map(sys, x, 1.0 / 80);
  const double order = std::log2((coarse - mid).norm() / (mid - fine).norm());
  EXPECT_GT(order, 3.5);
  EXPECT_LT(order, 4.5);
}

TEST(PoincareJacobian, MatchesMonodromyAtZero) {
  for (double th : {0.0, 0.25, 0.6, 1.0}) {
    const auto sys = insect_system(th, 1.3);
    const auto pj = poincare_jacobian(sys, VectorXd::Zero(2));
    const MatrixXd m = monodromy(insect::linearization(kUnfavorable, kFavorable, 1.3), th);
    EXPECT_LE((pj.jacobian - m).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_GT(pj.jacobian.minCoeff(), 0.0);
  }
}

TEST(PoincareJacobian, MatchesFiniteDifferencesOfMap) {
  const auto sys = insect_system(0.4);
  const VectorXd x = vec(0.8, 1.9);
  const auto pj = poincare_jacobian(sys, x);
  const double h = 1e-6;
  for (int c = 0; c < 2; ++c) {
    VectorXd e = VectorXd::Zero(2);
    e(c) = h;
    const VectorXd fd = (poincare_map(sys, x + e) - poincare_map(sys, x - e)) / (2 * h);
    EXPECT_LE((fd - pj.jacobian.col(c)).norm(), 1e-7);
  }
  EXPECT_LE((pj.image - poincare_map(sys, x)).norm(), 1e-14);
}

TEST(PoincareJacobian, DecreasingAlongOrder) {
  const auto sys = insect_system(0.5);
  const MatrixXd lo = poincare_jacobian(sys, vec(0.5, 0.5)).jacobian;
  const MatrixXd hi = poincare_jacobian(sys, vec(2.0, 3.0)).jacobian;
  EXPECT_GE((lo - hi).minCoeff(), 0.0);
  EXPECT_GT((lo - hi).maxCoeff(), 1e-9);
}

TEST(PeriodicOrbit, PersistentBelowThreshold) {
  const auto sys = insect_system(0.3);
  SimulationOptions opts;
  const auto a = find_periodic_orbit(sys, vec(0.1, 0.1), opts);
  const auto b = find_periodic_orbit(sys, vec(5, 5), opts);
  ASSERT_EQ(a.classification, OrbitClass::PeriodicPositive);
  ASSERT_EQ(b.classification, OrbitClass::PeriodicPositive);
  EXPECT_LE((a.fixed_point - b.fixed_point).norm(), 1e-7);
  EXPECT_GT(a.fixed_point.minCoeff(), 0.0);
  EXPECT_GT(a.multiplier_lambda, 1.0);
  // Two more periods return to the orbit.
  const auto two = integrate(sys, a.fixed_point, 0.0, 2.0, 1.0 / 2000);
  EXPECT_LE((two.states.back() - a.fixed_point).norm(), 10 * opts.tol);
}

TEST(PeriodicOrbit, ExtinctAboveThreshold) {
  const auto sys = insect_system(0.7);
  const auto r = find_periodic_orbit(sys, vec(5, 5));
  EXPECT_EQ(r.classification, OrbitClass::Extinction);
  EXPECT_LT(r.multiplier_lambda, 1.0);
  EXPECT_LT(r.fixed_point.norm(), 1e-9);
}

TEST(PeriodicOrbit, SubcriticalMultiplierMeansExtinction) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> theta(0.55, 1.0), start(0.0, 8.0);
  for (int i = 0; i < 5; ++i) {
    const auto sys = insect_system(theta(rng));
    const auto r = find_periodic_orbit(sys, vec(start(rng), start(rng)));
    if (r.multiplier_lambda <= 1 - 1e-6) EXPECT_EQ(r.classification, OrbitClass::Extinction);
  }
}

TEST(PeriodicOrbit, BudgetExhaustedIsUndecided) {
  SimulationOptions opts;
  opts.max_periods = 3;
  const auto r = find_periodic_orbit(insect_system(0.3), vec(5, 5), opts);
  EXPECT_EQ(r.classification, OrbitClass::Undecided);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_FALSE(r.note.empty());
}

TEST(PeriodicOrbit, DivergentLinearGrowth) {
  const SeasonalSystem sys(SeasonalSchedule(1.0, {0.0, 1.0}), {make_linear_piece(MatrixXd::Identity(1, 1))});
  VectorXd x0(1);
  x0 << 1.0;
  const auto r = find_periodic_orbit(sys, x0);
  EXPECT_EQ(r.classification, OrbitClass::Divergent);
}

TEST(EmpiricalThreshold, EndpointsOfTheFamily) {
  const std::vector<double> grid{0.0, 0.5, 1.0};
  EmpiricalOptions opts;
  opts.simulation.step = 1.0 / 200;
  const SystemFamily always = [](double th) {
    return insect::as_seasonal_system(kFavorable, kFavorable, th, 1.0);
  };
  EXPECT_EQ(empirical_threshold(always, grid, opts).theta_star, 1.0);
  const SystemFamily never = [](double th) {
    return insect::as_seasonal_system(kUnfavorable, kUnfavorable, th, 1.0);
  };
  EXPECT_EQ(empirical_threshold(never, grid, opts).theta_star, 0.0);
  EXPECT_THROW(empirical_threshold(never, std::vector<double>{0.0, 1.0}, opts), InvalidInput);
}

TEST(ComparisonLemmas, InsectPasses) {
  const auto sys = insect_system(0.5);
  const auto samples = default_samples(2, 4);
  const auto rep = verify_appendix_lemmas(sys, samples, 1.0 / 500);
  EXPECT_TRUE(rep.all());
  EXPECT_GT(rep.nonnegativity.margin, 1e-9);
  EXPECT_GT(rep.order.margin, 1e-9);
  EXPECT_GT(rep.jacobian_positive.margin, 1e-9);
  EXPECT_GT(rep.jacobian_decreasing.margin, 1e-9);
  EXPECT_GT(rep.order.checked, 50u);
}

TEST(ComparisonLemmas, LinearSystemIsBoundary) {
  MatrixXd a(2, 2);
  a << -1, 1, 0.5, -1;
  const SeasonalSystem sys(SeasonalSchedule(1.0, {0.0, 1.0}), {make_linear_piece(a)});
  const auto rep = verify_appendix_lemmas(sys, default_samples(2), 1.0 / 200);
  EXPECT_FALSE(rep.jacobian_decreasing.holds);
  EXPECT_TRUE(rep.jacobian_decreasing.boundary);
  EXPECT_TRUE(rep.order.holds);
}

TEST(ComparisonLemmas, NonCooperativePieceBreaksOrder) {
  MatrixXd a(2, 2);
  a << -1, -2, -2, -1;
  const SeasonalSystem sys(SeasonalSchedule(1.0, {0.0, 1.0}), {make_linear_piece(a)});
  std::vector<VectorXd> samples{vec(1, 1), vec(3, 1.01), vec(1.1, 4)};
  const auto rep = verify_appendix_lemmas(sys, samples, 1.0 / 200);
  EXPECT_FALSE(rep.order.holds);
  EXPECT_LT(rep.order.margin, 0.0);
}
