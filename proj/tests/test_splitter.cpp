#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "seasonal/floquet.hpp"
#include "seasonal/splitter.hpp"
#include "support.hpp"

using namespace seasonal;

namespace {

MatrixXd swap2() {
  MatrixXd k(2, 2);
  k << 0, 1, 1, 0;
  return k;
}

}  // namespace

TEST(SplitSchedule, Membership) {
  const SplitSchedule s{{0.1, 0.2}, {0.3, 0.4}};
  EXPECT_TRUE(s.belongs_to(0.3));
  EXPECT_FALSE(s.belongs_to(0.31));
  EXPECT_FALSE((SplitSchedule{{0.1}, {0.3, 0.6}}).belongs_to(0.1));
  EXPECT_FALSE((SplitSchedule{{-0.1, 0.4}, {0.3, 0.4}}).belongs_to(0.3));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const double th = (i % 11) / 10.0;
    EXPECT_TRUE(random_schedule(1 + i % 5, th, rng).belongs_to(th));
  }
}

TEST(SplitMonodromy, SingleBlockIsMonodromy) {
  std::mt19937_64 rng(2);
  const MatrixXd a = testing_support::random_metzler(3, rng);
  const MatrixXd b = testing_support::random_metzler(3, rng);
  const TwoSeasonLinearization lin(a, b, 1.7);
  const MatrixXd scaled = split_monodromy(1.7 * a, 1.7 * b, SplitSchedule::single(0.35));
  EXPECT_LE((scaled - monodromy(lin, 0.35)).cwiseAbs().maxCoeff(), 1e-12 * monodromy(lin, 0.35).norm());
  EXPECT_THROW(split_monodromy(a, b, SplitSchedule{{0.5}, {0.6}}), InvalidInput);
}

TEST(SplitMonodromy, CommutingPairIgnoresSchedule) {
  const MatrixXd id = MatrixXd::Identity(2, 2);
  const MatrixXd m1 = swap2() - 2 * id, m2 = swap2() + id;
  std::mt19937_64 rng(3);
  const MatrixXd reference = mat_exp(MatrixXd(0.6 * m2)) * mat_exp(MatrixXd(0.4 * m1));
  for (int i = 0; i < 20; ++i) {
    const auto s = random_schedule(1 + i % 4, 0.4, rng);
    EXPECT_LE((split_monodromy(m1, m2, s) - reference).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(SplitMonodromy, NonCommutingDiffers) {
  std::mt19937_64 rng(4);
  const MatrixXd a = testing_support::random_positive_metzler(2, rng);
  const MatrixXd b = testing_support::random_positive_metzler(2, rng);
  ASSERT_GT((a * b - b * a).norm(), 1e-3);
  const SplitSchedule halves{{0.25, 0.25}, {0.25, 0.25}};
  EXPECT_GT((split_monodromy(a, b, halves) - split_monodromy(a, b, SplitSchedule::single(0.5))).norm(), 1e-6);
}

TEST(OptimizeSplit, SharedEigenvectorIsFlat) {
  const MatrixXd id = MatrixXd::Identity(2, 2);
  const MatrixXd m1 = swap2() - 2 * id, m2 = swap2() + id;
  const double expected = std::exp(0.5 * -1.0 + 0.5 * 2.0);
  const auto hi = optimize_split(m1, m2, 0.5, 2, SplitMode::Max, 10);
  const auto lo = optimize_split(m1, m2, 0.5, 2, SplitMode::Min, 10);
  EXPECT_NEAR(hi.rho, expected, 1e-12);
  EXPECT_NEAR(lo.rho, expected, 1e-12);
}

TEST(OptimizeSplit, SingleBlock) {
  std::mt19937_64 rng(5);
  const MatrixXd a = testing_support::random_metzler(2, rng);
  const MatrixXd b = testing_support::random_metzler(2, rng);
  const auto hi = optimize_split(a, b, 0.3, 1, SplitMode::Max);
  const auto lo = optimize_split(a, b, 0.3, 1, SplitMode::Min);
  const double single = spectral_radius(split_monodromy(a, b, SplitSchedule::single(0.3)));
  EXPECT_EQ(hi.rho, single);
  EXPECT_EQ(lo.rho, single);
}

TEST(OptimizeSplit, GapForNonCommutingPair) {
  MatrixXd a(2, 2), b(2, 2);
  a << -3, 2.5, 0.1, 0.5;
  b << 0.5, 0.1, 2.5, -3;
  const auto hi = optimize_split(a, b, 0.5, 2, SplitMode::Max, 50);
  const auto lo = optimize_split(a, b, 0.5, 2, SplitMode::Min, 50);
  EXPECT_GT(hi.rho - lo.rho, 1e-6);
  EXPECT_TRUE(hi.schedule.belongs_to(0.5));
  EXPECT_TRUE(lo.schedule.belongs_to(0.5));
  const double single = spectral_radius(split_monodromy(a, b, SplitSchedule::single(0.5)));
  EXPECT_LE(lo.rho, single + 1e-15);
  EXPECT_GE(hi.rho, single - 1e-15);
}

TEST(OptimizeSplit, NestedMaxima) {
  MatrixXd a(2, 2), b(2, 2);
  a << -2, 1.5, 0.2, 0.3;
  b << 0.4, 0.3, 1.8, -2.5;
  double previous = 0;
  for (int k = 1; k <= 3; ++k) {
    const auto best = optimize_split(a, b, 0.4, k, SplitMode::Max, 12);
    EXPECT_GE(best.rho, previous - 1e-14);
    previous = best.rho;
  }
}

TEST(OptimizeSplit, ResolutionLoweredWhenGridTooLarge) {
  std::mt19937_64 rng(6);
  const MatrixXd a = testing_support::random_metzler(2, rng);
  const MatrixXd b = testing_support::random_metzler(2, rng);
  const auto best = optimize_split(a, b, 0.5, 4, SplitMode::Max, 50, 20000);
  EXPECT_LT(best.resolution, 50);
  EXPECT_LE(best.evaluated, 20000u);
  EXPECT_TRUE(best.schedule.belongs_to(0.5));
}

TEST(OptimizeSplit, HeuristicForManyBlocks) {
  std::mt19937_64 rng(7);
  const MatrixXd a = testing_support::random_metzler(2, rng);
  const MatrixXd b = testing_support::random_metzler(2, rng);
  const auto best = optimize_split(a, b, 0.5, 6, SplitMode::Max, 16);
  EXPECT_TRUE(best.heuristic);
  EXPECT_EQ(best.schedule.blocks(), 6u);
  EXPECT_NEAR(best.schedule.theta(), 0.5, 1e-12);
  const SplitSchedule equal{std::vector<double>(6, 0.5 / 6), std::vector<double>(6, 0.5 / 6)};
  EXPECT_GE(best.rho, spectral_radius(split_monodromy(a, b, equal)) * (1 - 1e-12));
}

TEST(Gelfand, CommutingAndSharedPairsAreTight) {
  const MatrixXd id = MatrixXd::Identity(2, 2);
  const MatrixXd m1 = swap2() - 2 * id, m2 = swap2() + id;
  std::mt19937_64 rng(8);
  std::vector<SplitSchedule> schedules;
  for (int i = 0; i < 50; ++i) schedules.push_back(random_schedule(1 + i % 4, 0.1 + 0.016 * i, rng));
  const auto rep = gelfand_bound_probe(m1, m2, schedules);
  EXPECT_TRUE(rep.violations.empty());
  EXPECT_LE(rep.max_relative_gap, 1e-10);
  const auto commuting = gelfand_bound_probe(swap2(), MatrixXd(0.5 * swap2() - id), schedules);
  EXPECT_LE(commuting.max_relative_gap, 1e-10);
}

TEST(Gelfand, RandomSweepReportsViolations) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> th(0.0, 1.0);
  std::size_t rows = 0;
  for (int i = 0; i < 100; ++i) {
    const MatrixXd a = testing_support::random_metzler(2 + i % 3, rng);
    const MatrixXd b = testing_support::random_metzler(2 + i % 3, rng);
    std::vector<SplitSchedule> schedules;
    for (int j = 0; j < 10; ++j) schedules.push_back(random_schedule(1 + j % 4, th(rng), rng));
    const auto rep = gelfand_bound_probe(a, b, schedules);
    rows += rep.rows.size();
    for (auto idx : rep.violations) EXPECT_GT(rep.rows[idx].rho, rep.rows[idx].bound);
  }
  EXPECT_EQ(rows, 1000u);
}

TEST(ConditionAThreshold, Formula) {
  EXPECT_NEAR(condition_a_threshold(-1, 2), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(condition_a_threshold(-1, 1), 0.5, 1e-15);
  EXPECT_THROW(condition_a_threshold(1, 2), InvalidInput);
  EXPECT_THROW(condition_a_threshold(-1, 0), InvalidInput);
  const MatrixXd id = MatrixXd::Identity(2, 2);
  const TwoSeasonLinearization lin(MatrixXd(swap2() - 2 * id), MatrixXd(swap2() + id), 1.0);
  EXPECT_NEAR(find_threshold(lin).theta_star,
              condition_a_threshold(spectral_abscissa(lin.m1()), spectral_abscissa(lin.m2())), 1e-9);
}
