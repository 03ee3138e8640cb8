#pragma once

// Certificates for the sufficient conditions that make rho(theta) decreasing
// (shared eigenvector, the three P/Q sign conditions), the insect parameter
// hypotheses, the 2x2 left-eigenvector ordering lemma, and the full chain of
// checks behind the insect threshold certificate.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seasonal/floquet.hpp"
#include "seasonal/insect.hpp"

namespace seasonal {

enum class ConditionTag { A, B1, B2, B3, Hyp4, Hyp10, Lemma3, Thm3 };
std::string to_string(ConditionTag tag);

/// Slack a strict inequality needs before it counts as holding.
inline constexpr double kStrictMargin = 1e-9;

struct CertificateStage {
  std::string name;
  bool holds = false;
  double margin = 0;  // positive = satisfied with that much room
  std::string note;
};

struct ConditionCertificate {
  ConditionTag condition = ConditionTag::A;
  bool holds = false;
  std::vector<double> evidence;     // worst margin per grid point (or per entry)
  std::vector<double> theta_grid;   // empty for theta-independent checks
  std::vector<CertificateStage> stages;
  std::string note;

  double worst_margin() const;
};

/// Holds iff the principal right eigenvectors of m1 and m2 agree within `tol`
/// in angle, or the left ones do. Evidence: {tol - right angle, tol - left angle}.
ConditionCertificate check_condition_A(const TwoSeasonLinearization& lin, double tol = 1e-8,
                                       const FloquetOptions& opts = {});

/// Without P: S^T V*(theta) < 0 at every grid theta. With P: P S < 0 and
/// (P^{-1})^T V*(theta) > 0.
ConditionCertificate check_B1(const TwoSeasonLinearization& lin, std::span<const double> theta_grid,
                              const std::optional<MatrixXd>& p = std::nullopt, const FloquetOptions& opts = {});

/// Without P: S V(theta) < 0. With P: S P < 0 and P^{-1} V(theta) > 0.
ConditionCertificate check_B2(const TwoSeasonLinearization& lin, std::span<const double> theta_grid,
                              const std::optional<MatrixXd>& p = std::nullopt, const FloquetOptions& opts = {});

/// S < P^T Q entrywise and ||P V*(theta) + Q V(theta)|| <= tol at every grid theta.
ConditionCertificate check_B3(const TwoSeasonLinearization& lin, std::span<const double> theta_grid,
                              const MatrixXd& p, const MatrixXd& q, double tol = 1e-9,
                              const FloquetOptions& opts = {});

/// Tries the built-in candidates in order: B1 and B2 with P = I, B1 with
/// P = [[1,1],[0,1]] (2-D only), then the eigenvector-sign forms of B1 and B2.
/// Returns the first that holds, or the last one tried.
ConditionCertificate certify_monotone(const TwoSeasonLinearization& lin, std::span<const double> theta_grid,
                                      const FloquetOptions& opts = {});

/// The four entries of the favorable-minus-unfavorable matrix that must be
/// strictly positive: (-d_J^F + d_J^U, b^F - d_A^F - (b^U - d_A^U), h^F - h^U, -d_A^F + d_A^U).
ConditionCertificate check_hyp_parameters(const insect::InsectParams& unfav, const insect::InsectParams& fav);

/// Stronger alternative: (-(h^F + d_J^F) + h^U + d_J^U, b^F - b^U, h^F - h^U, -d_A^F + d_A^U).
ConditionCertificate check_hyp_alternative(const insect::InsectParams& unfav, const insect::InsectParams& fav);

struct Lemma3Result {
  bool eigen_order = false;        // w2 > w1 for the left Perron vector W of s
  bool column_inequality = false;  // s11 + s21 < s12 + s22
  bool boundary = false;           // column sums equal: neither statement applies
};

/// Both sides of the 2x2 left-eigenvector ordering equivalence, computed
/// independently. Requires s entrywise positive.
Lemma3Result lemma3_left_eigenvector_order(const Eigen::Matrix2d& s);

/// Closed-form diagonalization of one season's linearization
/// [[-h-d_J, b], [h, -d_A]] = P diag(lambda+, lambda-) P^{-1}, P = [[1,1],[x+,x-]].
struct DiagonalizationData {
  double lambda_plus = 0;
  double lambda_minus = 0;
  double x_plus = 0;
  double x_minus = 0;
  double reconstruction_residual = 0;
};

DiagonalizationData diagonalize_season(const insect::InsectParams& p);

/// Exponential weights of the two seasons at fraction theta:
/// beta = e^{lambda_F (1-theta) T}, gamma = e^{lambda_U theta T}.
struct SeasonWeights {
  double beta_plus = 0;
  double beta_minus = 0;
  double gamma_plus = 0;
  double gamma_minus = 0;
};

SeasonWeights season_weights(const DiagonalizationData& unfav, const DiagonalizationData& fav, double theta,
                             double period);

/// b^U b^F / sqrt(disc_U disc_F). Reported only.
double diagonalization_alpha(const insect::InsectParams& unfav, const insect::InsectParams& fav);

/// Bilinear function whose sign at (beta+/beta-, gamma+/gamma-) decides the
/// column-sum ordering of the monodromy.
class PsiFunction {
 public:
  PsiFunction(const DiagonalizationData& unfav, const DiagonalizationData& fav);

  double operator()(double beta, double gamma) const;
  double d_beta(double gamma) const;
  double d_gamma(double beta) const;
  /// Upper bound of d_beta for gamma > 1: (xU- - xU+)(1 + xF-)(1 + xF+).
  double d_beta_bound() const;
  /// Upper bound of d_gamma for beta > 1: (xF- - xF+)(1 + xU-)(1 + xU+).
  double d_gamma_bound() const;

 private:
  double xu_p_, xu_m_, xf_p_, xf_m_;
};

/// Stage-by-stage certificate: (i) parameter hypothesis, (ii) R0 ordering,
/// (iii) b^U + d_J^U > d_A^U, (iv) slope inequalities, (v) Psi(1,1) = 0,
/// (vi) negative partial derivatives, (vii) Psi < 0 on the grid, (viii) the
/// Psi sign agrees with the monodromy column sums.
ConditionCertificate theorem3_certificate(const insect::InsectParams& unfav, const insect::InsectParams& fav,
                                          double period, std::span<const double> theta_grid);

}  // namespace seasonal
