#pragma once

// Juvenile/adult insect model with quadratic juvenile competition:
//   dJ/dt = b A - J (h + d_J + c_J J)
//   dA/dt = h J - d_A A

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>

#include "seasonal/floquet.hpp"
#include "seasonal/seasonal_system.hpp"

namespace seasonal::insect {

/// Rates per unit time; c_J is per density per time.
struct InsectParams {
  double b = 0;    // birth
  double h = 0;    // hatching
  double d_J = 0;  // juvenile death
  double c_J = 0;  // juvenile competition
  double d_A = 0;  // adult death

  /// Throws InvalidInput unless every field is finite and nonnegative.
  void validate() const;
  friend bool operator==(const InsectParams&, const InsectParams&) = default;
};

using State = Eigen::Vector2d;

Eigen::Vector2d vector_field(const InsectParams& p, const State& x);
Eigen::Matrix2d jacobian(const InsectParams& p, const State& x);

/// Basic offspring number b h / (d_A (h + d_J)).
double r0(const InsectParams& p);

enum class EquilibriumType { StableNode, Saddle, HigherOrderAttracting };
std::string to_string(EquilibriumType type);

struct EquilibriumReport {
  State s0 = State::Zero();
  EquilibriumType s0_type = EquilibriumType::StableNode;
  std::optional<State> s1;
  std::optional<EquilibriumType> s1_type;
  double r0 = 0;
  std::optional<double> direction_delta1;   // R0 = 1: approach angle at the origin
  std::optional<double> unstable_slope_k1;  // R0 > 1: A/J slope of the unstable manifold
};

/// R0 within 1e-12 of one is treated as the degenerate threshold case.
EquilibriumReport equilibria(const InsectParams& p);

/// Positive steady state (R0 - 1) ((h+d_J)/c_J, h (h+d_J)/(c_J d_A)). Its sign
/// follows R0 - 1, so callers decide whether it is biologically meaningful.
State positive_steady_state(const InsectParams& p);

/// Forward-invariant rectangles [0, L] x [0, tau* L] for L >= max(0, J*).
struct InvariantBox {
  double tau_star = 0;
  double j_star = 0;

  double min_size() const { return std::max(0.0, j_star); }
  /// Upper corner (L, tau* L) of the box of size L; L below min_size() throws.
  State corner(double size) const;
  /// Largest amount by which x lies outside the box of size L (0 if inside).
  double excess(const State& x, double size) const;
};

/// tau* = sup h/d_A and J* = sup (b tau* - h - d_J)/c_J over the parameter
/// sets a season schedule cycles through.
InvariantBox invariant_box(std::span<const InsectParams> schedule);

/// Dulac divergence, the trace of the Jacobian: -(h + d_J + 2 c_J J + d_A).
/// Strictly negative whenever h + d_J + d_A > 0 and x >= 0.
double divergence(const InsectParams& p, const State& x);

AutonomousPiece make_piece(const InsectParams& p);

/// Unfavorable regime on [0, theta T), favorable on [theta T, T).
SeasonalSystem as_seasonal_system(const InsectParams& unfavorable, const InsectParams& favorable, double theta,
                                  double period);

/// Linearizations at the origin of both regimes.
TwoSeasonLinearization linearization(const InsectParams& unfavorable, const InsectParams& favorable,
                                     double period);

}  // namespace seasonal::insect
