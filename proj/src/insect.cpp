#include "seasonal/insect.hpp"

#include <cmath>
#include <limits>

namespace seasonal::insect {

void InsectParams::validate() const {
  for (const double value : {b, h, d_J, c_J, d_A}) {
    if (!std::isfinite(value) || value < 0) throw InvalidInput("insect parameters must be finite and nonnegative");
  }
}

Eigen::Vector2d vector_field(const InsectParams& p, const State& x) {
  const double j = x(0);
  const double a = x(1);
  return {p.b * a - j * (p.h + p.d_J + p.c_J * j), p.h * j - p.d_A * a};
}

Eigen::Matrix2d jacobian(const InsectParams& p, const State& x) {
  Eigen::Matrix2d jac;
  jac << -p.h - p.d_J - 2.0 * p.c_J * x(0), p.b, p.h, -p.d_A;
  return jac;
}

double r0(const InsectParams& p) {
  const double denominator = p.d_A * (p.h + p.d_J);
  if (!(denominator > 0)) throw InvalidInput("r0: d_A (h + d_J) must be positive");
  return p.b * p.h / denominator;
}

std::string to_string(EquilibriumType type) {
  switch (type) {
    case EquilibriumType::StableNode:
      return "stable_node";
    case EquilibriumType::Saddle:
      return "saddle";
    case EquilibriumType::HigherOrderAttracting:
      return "higher_order_attracting";
  }
  return "unknown";
}

State positive_steady_state(const InsectParams& p) {
  const double excess = r0(p) - 1.0;
  const double hd = p.h + p.d_J;
  return {excess * hd / p.c_J, excess * p.h * hd / (p.c_J * p.d_A)};
}

EquilibriumReport equilibria(const InsectParams& p) {
  p.validate();
  EquilibriumReport report;
  if (p.h == 0) {
    // No hatching: nothing reaches the adult stage.
    report.r0 = 0.0;
    report.s0_type = EquilibriumType::StableNode;
    return report;
  }
  report.r0 = r0(p);
  constexpr double band = 1e-12;
  if (report.r0 > 1.0 + band) {
    if (!(p.c_J > 0)) throw InvalidInput("equilibria: c_J must be positive when R0 > 1");
    report.s0_type = EquilibriumType::Saddle;
    report.s1 = positive_steady_state(p);
    report.s1_type = EquilibriumType::StableNode;
    const double shift = p.h + p.d_J - p.d_A;
    report.unstable_slope_k1 = (shift + std::sqrt(shift * shift + 4.0 * p.b * p.h)) / (2.0 * p.b);
  } else if (report.r0 < 1.0 - band) {
    report.s0_type = EquilibriumType::StableNode;
  } else {
    report.s0_type = EquilibriumType::HigherOrderAttracting;
    report.direction_delta1 = std::atan((p.h + p.d_J) / p.b);
  }
  return report;
}

State InvariantBox::corner(double size) const {
  if (size < min_size()) throw InvalidInput("invariant box: size below max(0, J*)");
  return {size, tau_star * size};
}

double InvariantBox::excess(const State& x, double size) const {
  const State top = corner(size);
  double worst = 0.0;
  worst = std::max(worst, -x(0));
  worst = std::max(worst, -x(1));
  worst = std::max(worst, x(0) - top(0));
  worst = std::max(worst, x(1) - top(1));
  return worst;
}

InvariantBox invariant_box(std::span<const InsectParams> schedule) {
  if (schedule.empty()) throw InvalidInput("invariant_box: empty schedule");
  InvariantBox box;
  box.tau_star = -std::numeric_limits<double>::infinity();
  for (const auto& p : schedule) {
    p.validate();
    if (!(p.d_A > 0) || !(p.c_J > 0)) {
      throw InvalidInput("invariant_box: d_A and c_J must be bounded below by a positive constant");
    }
    box.tau_star = std::max(box.tau_star, p.h / p.d_A);
  }
  box.j_star = -std::numeric_limits<double>::infinity();
  for (const auto& p : schedule) {
    box.j_star = std::max(box.j_star, (p.b * box.tau_star - p.h - p.d_J) / p.c_J);
  }
  if (!std::isfinite(box.tau_star) || !std::isfinite(box.j_star)) {
    throw InvalidInput("invariant_box: unbounded schedule");
  }
  return box;
}

double divergence(const InsectParams& p, const State& x) { return -(p.h + p.d_J + 2.0 * p.c_J * x(0) + p.d_A); }

AutonomousPiece make_piece(const InsectParams& p) {
  p.validate();
  return {[p](const VectorXd& x) -> VectorXd { return vector_field(p, State(x(0), x(1))); },
          [p](const VectorXd& x) -> MatrixXd { return jacobian(p, State(x(0), x(1))); },
          jacobian(p, State::Zero())};
}

SeasonalSystem as_seasonal_system(const InsectParams& unfavorable, const InsectParams& favorable, double theta,
                                  double period) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidInput("as_seasonal_system: theta must lie in [0, 1]");
  return SeasonalSystem(SeasonalSchedule(period, {0.0, theta, 1.0}),
                        {make_piece(unfavorable), make_piece(favorable)});
}

TwoSeasonLinearization linearization(const InsectParams& unfavorable, const InsectParams& favorable,
                                     double period) {
  unfavorable.validate();
  favorable.validate();
  return {jacobian(unfavorable, State::Zero()), jacobian(favorable, State::Zero()), period};
}

}  // namespace seasonal::insect
