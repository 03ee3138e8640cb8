#pragma once

#include <Eigen/Dense>

#include <random>

#include "seasonal/insect.hpp"
#include "seasonal/linalg.hpp"

namespace testing_support {

using Eigen::MatrixXd;

/// Off-diagonal entries in [-3, 3] clamped at zero, diagonal in [-3, 3];
/// redrawn until irreducible.
inline MatrixXd random_metzler(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  for (;;) {
    MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = i == j ? entry(rng) : std::max(0.0, entry(rng));
    }
    if (seasonal::is_irreducible(a)) return a;
  }
}

/// Positive matrix (so every product of exponentials stays positive).
inline MatrixXd random_positive_metzler(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> off(0.1, 2.0), diag(-3.0, 1.0);
  MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = i == j ? diag(rng) : off(rng);
  }
  return a;
}

inline const seasonal::insect::InsectParams kUnfavorable{1.0, 0.5, 1.0, 1.0, 1.0};
inline const seasonal::insect::InsectParams kFavorable{2.0, 1.0, 0.5, 1.0, 0.5};

template <typename F>
double central_difference(F f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <typename F>
double second_difference(F f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace testing_support
