#include <gtest/gtest.h>

#include <random>

#include "seasonal/insect.hpp"
#include "seasonal/seasonal_system.hpp"
#include "support.hpp"

using namespace seasonal;

TEST(SeasonIndex, HalfOpenWindows) {
  const SeasonalSchedule s(1.0, {0.0, 0.3, 1.0});
  EXPECT_EQ(s.season_index(0.1), 0u);
  EXPECT_EQ(s.season_index(0.3), 1u);
  EXPECT_EQ(s.season_index(2.95), 1u);
  EXPECT_EQ(s.season_index(0.0), 0u);
}

TEST(SeasonIndex, SkipsEmptyWindows) {
  const SeasonalSchedule s(2.0, {0.0, 0.0, 0.5, 0.5, 1.0});
  EXPECT_EQ(s.season_index(0.0), 1u);
  EXPECT_EQ(s.season_index(0.99), 1u);
  EXPECT_EQ(s.season_index(1.0), 3u);
  const SeasonalSchedule all_unfavorable(1.0, {0.0, 1.0, 1.0});
  EXPECT_EQ(all_unfavorable.season_index(0.999), 0u);
}

TEST(SeasonIndex, PeriodicAndPartition) {
  const SeasonalSchedule s(3.0, {0.0, 0.2, 0.45, 0.45, 1.0});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> t(0.0, 30.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = t(rng);
    const auto k = s.season_index(x);
    EXPECT_EQ(k, s.season_index(x + 3.0));
    const double frac = x / 3.0 - std::floor(x / 3.0);
    EXPECT_LE(s.breakpoints()[k], frac);
    EXPECT_LT(frac, s.breakpoints()[k + 1]);
  }
  double covered = 0;
  for (std::size_t k = 0; k < s.season_count(); ++k) covered += s.fraction(k);
  EXPECT_DOUBLE_EQ(covered, 1.0);
}

TEST(Schedule, RejectsBadBreakpoints) {
  EXPECT_THROW(SeasonalSchedule(1.0, {0.1, 1.0}), InvalidInput);
  EXPECT_THROW(SeasonalSchedule(1.0, {0.0, 0.9}), InvalidInput);
  EXPECT_THROW(SeasonalSchedule(1.0, {0.0, 0.6, 0.4, 1.0}), InvalidInput);
  EXPECT_THROW(SeasonalSchedule(0.0, {0.0, 1.0}), InvalidInput);
  EXPECT_THROW(SeasonalSchedule(1.0, {0.0}), InvalidInput);
}

TEST(ValidateStructure, InsectSystemPasses) {
  const auto sys = insect::as_seasonal_system(testing_support::kUnfavorable, testing_support::kFavorable, 0.4, 1.0);
  const auto samples = default_samples(2, 3);
  const auto report = validate_structure(sys, samples);
  EXPECT_TRUE(report.metzler_at_samples);
  EXPECT_TRUE(report.positive);
  EXPECT_TRUE(report.concave_at_samples);
  EXPECT_TRUE(report.irreducible_at_zero);
  EXPECT_GT(report.ordered_pairs_checked, 0u);
  EXPECT_TRUE(report.all());
}

TEST(ValidateStructure, LinearMetzlerPasses) {
  MatrixXd a(2, 2);
  a << -1, 2, 1, -3;
  const SeasonalSystem sys(SeasonalSchedule(1.0, {0.0, 1.0}), {make_linear_piece(a)});
  EXPECT_TRUE(validate_structure(sys, default_samples(2)).all());
}

TEST(ValidateStructure, NonMetzlerJacobianCaught) {
  MatrixXd a(2, 2);
  a << -1, -1, 0, -1;
  const SeasonalSystem sys(SeasonalSchedule(1.0, {0.0, 1.0}), {make_linear_piece(a)});
  const auto report = validate_structure(sys, default_samples(2));
  EXPECT_FALSE(report.metzler_at_samples);
  EXPECT_FALSE(report.irreducible_at_zero);
}

TEST(ValidateStructure, DimensionMismatch) {
  const SeasonalSystem sys(SeasonalSchedule(1.0, {0.0, 1.0}), {make_linear_piece(MatrixXd::Identity(2, 2))});
  const std::vector<VectorXd> bad{VectorXd::Zero(3)};
  EXPECT_THROW(validate_structure(sys, bad), InvalidInput);
}

TEST(Piece, ConsistencyCheck) {
  const auto piece = insect::make_piece(testing_support::kFavorable);
  const auto samples = default_samples(2);
  EXPECT_TRUE(piece_is_consistent(piece, samples));
  auto broken = piece;
  broken.jacobian = [](const VectorXd&) { return MatrixXd::Identity(2, 2); };
  EXPECT_FALSE(piece_is_consistent(broken, samples));
}

TEST(System, PiecesMustMatchSchedule) {
  EXPECT_THROW(SeasonalSystem(SeasonalSchedule(1.0, {0.0, 0.5, 1.0}), {make_linear_piece(MatrixXd::Identity(2, 2))}),
               InvalidInput);
  EXPECT_THROW(SeasonalSystem(SeasonalSchedule(1.0, {0.0, 0.5, 1.0}),
                              {make_linear_piece(MatrixXd::Identity(2, 2)), make_linear_piece(MatrixXd::Identity(3, 3))}),
               InvalidInput);
}

TEST(Samples, OrderedPairsAndFaces) {
  const auto samples = default_samples(3, 9);
  EXPECT_TRUE(samples.front().isZero());
  std::size_t pairs = 0, faces = 0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    if (strictly_below(samples[i], samples[i + 1])) ++pairs;
  }
  for (const auto& s : samples) {
    EXPECT_GE(s.minCoeff(), 0.0);
    if (!s.isZero() && (s.array() == 0.0).any()) ++faces;
  }
  EXPECT_GE(pairs, 50u);
  EXPECT_GE(faces, 150u);
}
