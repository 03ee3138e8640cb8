#pragma once

// Dense small-matrix numerics shared by every other module: matrix
// exponential, spectral radius and abscissa, Perron eigenpairs, and the
// Metzler / irreducibility predicates. Everything here is templated on the
// scalar type and accepts any Eigen expression.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "seasonal/errors.hpp"

namespace seasonal {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dominant eigenvalue of a nonnegative irreducible matrix with its strictly
/// positive right and left eigenvectors, normalized so that ||v|| = 1 and
/// <v, v_star> = 1.
template <typename Scalar>
struct PerronPair {
  Scalar rho{};
  Vector<Scalar> v;
  Vector<Scalar> v_star;
  int iterations = 0;
};

/// Principal eigenstructure of an irreducible Metzler matrix. Unlike
/// PerronPair the eigenvalue (the spectral abscissa) may be negative.
template <typename Scalar>
struct PrincipalEigen {
  Scalar abscissa{};
  Vector<Scalar> v;
  Vector<Scalar> v_star;
};

inline constexpr double kDefaultPerronTol = 1e-12;
inline constexpr int kDefaultPerronMaxIter = 10000;

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (a.size() == 0) {
    throw InvalidInput(std::string(what) + ": empty matrix");
  }
  if (!a.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entry");
  }
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* what) {
  require_finite(a, what);
  if (a.rows() != a.cols()) {
    throw InvalidInput(std::string(what) + ": matrix is not square");
  }
}

/// True iff every off-diagonal entry is >= 0.
template <typename Derived>
bool is_metzler(const Eigen::MatrixBase<Derived>& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j && a(i, j) < 0) return false;
    }
  }
  return true;
}

namespace detail {

// Vertices reachable from vertex 0 following i -> j when a(i, j) != 0.
template <typename Derived>
std::size_t reachable_from_first(const Eigen::MatrixBase<Derived>& a, bool transpose) {
  const Eigen::Index n = a.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> queue{0};
  seen[0] = 1;
  std::size_t count = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Eigen::Index i = queue[head];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || seen[static_cast<std::size_t>(j)]) continue;
      const auto entry = transpose ? a(j, i) : a(i, j);
      if (entry != 0) {
        seen[static_cast<std::size_t>(j)] = 1;
        queue.push_back(j);
        ++count;
      }
    }
  }
  return count;
}

}  // namespace detail

/// Strong connectivity of the off-diagonal nonzero pattern. Exact comparison
/// against zero: this is a structural predicate.
template <typename Derived>
bool is_irreducible(const Eigen::MatrixBase<Derived>& a) {
  require_square(a, "is_irreducible");
  const auto n = static_cast<std::size_t>(a.rows());
  if (n == 1) return true;
  return detail::reachable_from_first(a, false) == n &&
         detail::reachable_from_first(a, true) == n;
}

/// e^A by scaling and squaring around a Taylor polynomial. The polynomial
/// order is picked so the truncation error of the scaled problem, amplified
/// by the squarings, stays below `tol`.
template <typename Derived>
Matrix<typename Derived::Scalar> mat_exp(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::Scalar tol = std::numeric_limits<typename Derived::Scalar>::epsilon()) {
  using Scalar = typename Derived::Scalar;
  require_square(a, "mat_exp");
  if (!(tol > 0) || tol > Scalar(1e-6)) {
    throw InvalidInput("mat_exp: tol must lie in (0, 1e-6]");
  }
  const Eigen::Index n = a.rows();
  const Scalar norm = a.cwiseAbs().colwise().sum().maxCoeff();

  int squarings = 0;
  if (norm > Scalar(0.5)) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / Scalar(0.5))));
  }
  const Scalar scale = std::ldexp(Scalar(1), -squarings);
  const Matrix<Scalar> b = a * scale;
  const Scalar x = norm * scale;

  const Scalar target = tol * scale;
  int order = 1;
  Scalar term = x;
  while (order < 40) {
    term *= x / Scalar(order + 1);
    if (term <= target) break;
    ++order;
  }

  const Matrix<Scalar> id = Matrix<Scalar>::Identity(n, n);
  Matrix<Scalar> result = id;
  for (int k = order; k >= 1; --k) {
    result = id + (b * result) / Scalar(k);
  }
  for (int s = 0; s < squarings; ++s) {
    result = (result * result).eval();
  }
  return result;
}

namespace detail {

template <typename Scalar>
std::vector<std::complex<Scalar>> eigenvalues(const Matrix<Scalar>& a) {
  std::vector<std::complex<Scalar>> out;
  if (a.rows() == 1) {
    out.emplace_back(a(0, 0), Scalar(0));
    return out;
  }
  if (a.rows() == 2) {
    const Scalar half_trace = (a(0, 0) + a(1, 1)) / 2;
    const Scalar half_gap = (a(0, 0) - a(1, 1)) / 2;
    const Scalar disc = half_gap * half_gap + a(0, 1) * a(1, 0);
    if (disc >= 0) {
      const Scalar root = std::sqrt(disc);
      out.emplace_back(half_trace + root, Scalar(0));
      out.emplace_back(half_trace - root, Scalar(0));
    } else {
      const Scalar root = std::sqrt(-disc);
      out.emplace_back(half_trace, root);
      out.emplace_back(half_trace, -root);
    }
    return out;
  }
  Eigen::EigenSolver<Matrix<Scalar>> solver(a, false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eigenvalue solver failed", std::numeric_limits<double>::quiet_NaN());
  }
  const auto& values = solver.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) out.push_back(values(i));
  return out;
}

}  // namespace detail

/// max |lambda| over the spectrum.
template <typename Derived>
typename Derived::Scalar spectral_radius(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  require_square(a, "spectral_radius");
  Scalar best = 0;
  for (const auto& lambda : detail::eigenvalues<Scalar>(a.eval())) {
    best = std::max(best, std::abs(lambda));
  }
  return best;
}

/// max Re(lambda) over the spectrum.
template <typename Derived>
typename Derived::Scalar spectral_abscissa(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  require_square(a, "spectral_abscissa");
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (const auto& lambda : detail::eigenvalues<Scalar>(a.eval())) {
    best = std::max(best, lambda.real());
  }
  return best;
}

namespace detail {

// Dominant eigenvector of a nonnegative irreducible matrix by shifted inverse
// iteration. The shift is the upper Collatz-Wielandt bound of the current
// positive iterate, which sits above the Perron root, so (shift*I - m)^{-1}
// is a positive matrix whose dominant direction is the Perron vector. The
// bound tightens every step, giving superlinear convergence even when the
// spectral gap of `m` itself is tiny (monodromies close to the identity).
template <typename Scalar>
Vector<Scalar> dominant_vector(const Matrix<Scalar>& m, Scalar tol, int max_iter, int& iterations) {
  const Eigen::Index n = m.rows();
  const Scalar scale = std::max(Scalar(1), m.norm());
  const Matrix<Scalar> id = Matrix<Scalar>::Identity(n, n);
  Vector<Scalar> v = Vector<Scalar>::Ones(n) / std::sqrt(Scalar(n));
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  Vector<Scalar> accepted;
  Scalar accepted_residual = 0;

  for (iterations = 1; iterations <= max_iter; ++iterations) {
    const Vector<Scalar> w = m * v;
    const Scalar rayleigh = v.dot(w);
    residual = (w - rayleigh * v).norm();
    // Once within tolerance, keep refining while it still pays off: the
    // caller's two-sided Rayleigh quotient needs some headroom.
    if (accepted.size() > 0 && (residual >= Scalar(0.5) * accepted_residual || residual <= Scalar(0.01) * tol * scale)) {
      return residual < accepted_residual ? v : accepted;
    }
    if (residual <= tol * scale) {
      accepted = v;
      accepted_residual = residual;
    }

    const Vector<Scalar> ratios = w.cwiseQuotient(v);
    const Scalar upper = ratios.maxCoeff();
    const Scalar lower = ratios.minCoeff();
    Scalar gap = upper - lower;
    if (!(gap > std::numeric_limits<Scalar>::epsilon() * std::abs(upper))) {
      gap = std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), std::abs(upper));
    }
    const Scalar shift = upper + Scalar(1e-3) * gap;

    Vector<Scalar> next = (shift * id - m).partialPivLu().solve(v);
    if (!next.allFinite() || next.norm() == 0) {
      next = w;  // plain power step
    }
    if (next.sum() < 0) next = -next;
    next /= next.norm();
    // Guard against sign noise once the iterate is essentially converged.
    const Scalar floor = std::numeric_limits<Scalar>::min();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(next(i) > floor)) next(i) = std::max(std::abs(next(i)), floor);
    }
    v = next / next.norm();
  }
  if (accepted.size() > 0) return accepted;
  throw ConvergenceError("perron_pair: no convergence within max_iter", static_cast<double>(residual));
}

}  // namespace detail

/// Perron root and eigenvectors of a nonnegative irreducible matrix.
/// Residuals ||Mv - rho v|| and ||M^T v_star - rho v_star|| are below
/// tol * max(1, ||M||_F). Deterministic for fixed inputs.
template <typename Derived>
PerronPair<typename Derived::Scalar> perron_pair(const Eigen::MatrixBase<Derived>& m_in,
                                                 typename Derived::Scalar tol = kDefaultPerronTol,
                                                 int max_iter = kDefaultPerronMaxIter) {
  using Scalar = typename Derived::Scalar;
  require_square(m_in, "perron_pair");
  if (!(tol > 0) || tol > Scalar(1e-6)) throw InvalidInput("perron_pair: tol must lie in (0, 1e-6]");
  if (max_iter < 1) throw InvalidInput("perron_pair: max_iter must be positive");
  const Matrix<Scalar> m = m_in;
  if ((m.array() < 0).any()) throw StructureError("perron_pair: matrix has negative entries");
  if (!is_irreducible(m)) throw StructureError("perron_pair: matrix is reducible");

  PerronPair<Scalar> out;
  int right_iters = 0;
  int left_iters = 0;
  out.v = detail::dominant_vector<Scalar>(m, tol, max_iter, right_iters);
  Vector<Scalar> left = detail::dominant_vector<Scalar>(m.transpose(), tol, max_iter, left_iters);
  out.iterations = std::max(right_iters, left_iters);

  const Scalar overlap = out.v.dot(left);
  if (!(overlap > 0)) throw StructureError("perron_pair: eigenvectors are orthogonal");
  out.v_star = left / overlap;
  out.rho = out.v_star.dot(m * out.v);
  if (!(out.rho > 0)) throw StructureError("perron_pair: non-positive Perron root");
  if ((out.v.array() <= 0).any() || (out.v_star.array() <= 0).any()) {
    throw StructureError("perron_pair: eigenvector is not strictly positive");
  }

  const Scalar scale = std::max(Scalar(1), m.norm());
  const Scalar r_right = (m * out.v - out.rho * out.v).norm();
  const Scalar r_left = (m.transpose() * out.v_star - out.rho * out.v_star).norm() / out.v_star.norm();
  const Scalar worst = std::max(r_right, r_left);
  if (worst > tol * scale) {
    throw ConvergenceError("perron_pair: residual above tolerance", static_cast<double>(worst));
  }
  return out;
}

/// Principal eigenvalue (spectral abscissa) and positive eigenvectors of an
/// irreducible Metzler matrix, via the Perron pair of a nonnegative shift.
template <typename Derived>
PrincipalEigen<typename Derived::Scalar> principal_eigen(const Eigen::MatrixBase<Derived>& a,
                                                         typename Derived::Scalar tol = kDefaultPerronTol) {
  using Scalar = typename Derived::Scalar;
  require_square(a, "principal_eigen");
  if (!is_metzler(a)) throw StructureError("principal_eigen: matrix is not Metzler");
  const Eigen::Index n = a.rows();
  const Scalar shift = std::max(Scalar(0), -a.diagonal().minCoeff()) + Scalar(1);
  const Matrix<Scalar> shifted = a + shift * Matrix<Scalar>::Identity(n, n);
  const auto pair = perron_pair(shifted, tol);
  return {pair.rho - shift, pair.v, pair.v_star};
}

}  // namespace seasonal
