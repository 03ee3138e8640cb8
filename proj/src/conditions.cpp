#include "seasonal/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace seasonal {

std::string to_string(ConditionTag tag) {
  switch (tag) {
    case ConditionTag::A: return "A";
    case ConditionTag::B1: return "B1";
    case ConditionTag::B2: return "B2";
    case ConditionTag::B3: return "B3";
    case ConditionTag::Hyp4: return "HYP4";
    case ConditionTag::Hyp10: return "HYP10";
    case ConditionTag::Lemma3: return "LEMMA3";
    case ConditionTag::Thm3: return "THM3";
  }
  return "?";
}

double ConditionCertificate::worst_margin() const {
  double worst = std::numeric_limits<double>::infinity();
  for (double e : evidence) worst = std::min(worst, e);
  for (const auto& s : stages) worst = std::min(worst, s.margin);
  return worst;
}

namespace {

// Angle between two unit vectors, accurate for nearly parallel inputs.
double angle_between(const VectorXd& a, const VectorXd& b) {
  const VectorXd ua = a.normalized();
  const VectorXd ub = b.normalized();
  return 2.0 * std::asin(std::min(1.0, 0.5 * (ua - ub).norm()));
}

void require_grid(std::span<const double> grid, const char* what) {
  for (double t : grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput(std::string(what) + ": grid fractions must lie in [0, 1]");
  }
}

MatrixXd checked_inverse(const MatrixXd& p, Eigen::Index n, const char* what) {
  if (p.rows() != n || p.cols() != n) throw InvalidInput(std::string(what) + ": P has the wrong shape");
  require_finite(p, what);
  Eigen::FullPivLU<MatrixXd> lu(p);
  if (!lu.isInvertible()) throw InvalidInput(std::string(what) + ": P is singular");
  return lu.inverse();
}

bool all_strict(std::span<const double> margins) {
  if (margins.empty()) return false;
  return std::all_of(margins.begin(), margins.end(), [](double m) { return m > kStrictMargin; });
}

enum class Side { Left, Right };

// Shared body of B1 (left vectors, P S, P^{-T}) and B2 (right vectors, S P, P^{-1}).
ConditionCertificate check_b_side(const TwoSeasonLinearization& lin, std::span<const double> grid,
                                  const std::optional<MatrixXd>& p, const FloquetOptions& opts, Side side) {
  const char* what = side == Side::Left ? "check_B1" : "check_B2";
  require_grid(grid, what);
  const Eigen::Index n = lin.dimension();
  const MatrixXd& s = lin.s();

  ConditionCertificate cert;
  cert.condition = side == Side::Left ? ConditionTag::B1 : ConditionTag::B2;
  cert.theta_grid.assign(grid.begin(), grid.end());

  double matrix_margin = std::numeric_limits<double>::infinity();
  MatrixXd transform;
  if (p) {
    const MatrixXd inv = checked_inverse(*p, n, what);
    const MatrixXd product = side == Side::Left ? MatrixXd(*p * s) : MatrixXd(s * *p);
    matrix_margin = -product.maxCoeff();
    transform = side == Side::Left ? MatrixXd(inv.transpose()) : inv;
    cert.stages.push_back({side == Side::Left ? "PS < 0" : "SP < 0", matrix_margin > kStrictMargin, matrix_margin, ""});
    cert.note = "transform supplied";
  } else {
    cert.note = side == Side::Left ? "eigenvector form S^T V* < 0" : "eigenvector form S V < 0";
  }

  for (double theta : grid) {
    const auto eval = rho(lin, theta, opts);
    const VectorXd& vec = side == Side::Left ? eval.pair.v_star : eval.pair.v;
    double margin;
    if (p) {
      margin = std::min(matrix_margin, (transform * vec).minCoeff());
    } else {
      const VectorXd image = side == Side::Left ? VectorXd(s.transpose() * vec) : VectorXd(s * vec);
      margin = -image.maxCoeff();
    }
    cert.evidence.push_back(margin);
  }
  cert.holds = all_strict(cert.evidence);
  return cert;
}

ConditionCertificate entry_certificate(ConditionTag tag, std::initializer_list<double> entries) {
  ConditionCertificate cert;
  cert.condition = tag;
  cert.evidence.assign(entries.begin(), entries.end());
  cert.holds = all_strict(cert.evidence);
  return cert;
}

}  // namespace

ConditionCertificate check_condition_A(const TwoSeasonLinearization& lin, double tol, const FloquetOptions& opts) {
  if (!(tol > 0)) throw InvalidInput("check_condition_A: tol must be positive");
  const auto e1 = principal_eigen(lin.m1(), opts.perron_tol);
  const auto e2 = principal_eigen(lin.m2(), opts.perron_tol);
  const double right = angle_between(e1.v, e2.v);
  const double left = angle_between(e1.v_star, e2.v_star);

  ConditionCertificate cert;
  cert.condition = ConditionTag::A;
  cert.evidence = {tol - right, tol - left};
  cert.stages = {{"shared right eigenvector", right <= tol, tol - right, ""},
                 {"shared left eigenvector", left <= tol, tol - left, ""}};
  cert.holds = right <= tol || left <= tol;
  std::ostringstream note;
  note << "right angle " << right << ", left angle " << left;
  cert.note = note.str();
  return cert;
}

ConditionCertificate check_B1(const TwoSeasonLinearization& lin, std::span<const double> theta_grid,
                              const std::optional<MatrixXd>& p, const FloquetOptions& opts) {
  return check_b_side(lin, theta_grid, p, opts, Side::Left);
}

ConditionCertificate check_B2(const TwoSeasonLinearization& lin, std::span<const double> theta_grid,
                              const std::optional<MatrixXd>& p, const FloquetOptions& opts) {
  return check_b_side(lin, theta_grid, p, opts, Side::Right);
}

ConditionCertificate check_B3(const TwoSeasonLinearization& lin, std::span<const double> theta_grid,
                              const MatrixXd& p, const MatrixXd& q, double tol, const FloquetOptions& opts) {
  require_grid(theta_grid, "check_B3");
  const Eigen::Index n = lin.dimension();
  if (p.rows() != n || p.cols() != n || q.rows() != n || q.cols() != n) {
    throw InvalidInput("check_B3: P and Q must match the system dimension");
  }
  ConditionCertificate cert;
  cert.condition = ConditionTag::B3;
  cert.theta_grid.assign(theta_grid.begin(), theta_grid.end());

  const double order_margin = (p.transpose() * q - lin.s()).minCoeff();
  cert.stages.push_back({"S < P^T Q", order_margin > kStrictMargin, order_margin, ""});
  bool identity_holds = true;
  for (double theta : theta_grid) {
    const auto eval = rho(lin, theta, opts);
    const double residual = (p * eval.pair.v_star + q * eval.pair.v).norm();
    identity_holds = identity_holds && residual <= tol;
    cert.evidence.push_back(std::min(order_margin, tol - residual));
  }
  cert.stages.push_back({"P V* = -Q V", identity_holds, 0.0, ""});
  cert.holds = !theta_grid.empty() && order_margin > kStrictMargin && identity_holds;
  return cert;
}

ConditionCertificate certify_monotone(const TwoSeasonLinearization& lin, std::span<const double> theta_grid,
                                      const FloquetOptions& opts) {
  const Eigen::Index n = lin.dimension();
  const MatrixXd identity = MatrixXd::Identity(n, n);
  ConditionCertificate last = check_B1(lin, theta_grid, identity, opts);
  if (last.holds) return last;
  last = check_B2(lin, theta_grid, identity, opts);
  if (last.holds) return last;
  if (n == 2) {
    MatrixXd shear(2, 2);
    shear << 1, 1, 0, 1;
    last = check_B1(lin, theta_grid, shear, opts);
    if (last.holds) return last;
  }
  last = check_B1(lin, theta_grid, std::nullopt, opts);
  if (last.holds) return last;
  return check_B2(lin, theta_grid, std::nullopt, opts);
}

ConditionCertificate check_hyp_parameters(const insect::InsectParams& u, const insect::InsectParams& f) {
  u.validate();
  f.validate();
  return entry_certificate(ConditionTag::Hyp4,
                           {-f.d_J + u.d_J, f.b - f.d_A - (u.b - u.d_A), f.h - u.h, -f.d_A + u.d_A});
}

ConditionCertificate check_hyp_alternative(const insect::InsectParams& u, const insect::InsectParams& f) {
  u.validate();
  f.validate();
  return entry_certificate(ConditionTag::Hyp10,
                           {-(f.h + f.d_J) + u.h + u.d_J, f.b - u.b, f.h - u.h, -f.d_A + u.d_A});
}

Lemma3Result lemma3_left_eigenvector_order(const Eigen::Matrix2d& s) {
  if (!(s.array() > 0).all()) throw InvalidInput("lemma3: matrix must be entrywise positive");
  // Perron root of a 2x2 positive matrix; the left vector solves
  // (s11 - mu) w1 + s21 w2 = 0.
  const double tr = s.trace();
  const double disc = std::sqrt((s(0, 0) - s(1, 1)) * (s(0, 0) - s(1, 1)) + 4.0 * s(0, 1) * s(1, 0));
  const double mu = 0.5 * (tr + disc);
  const double ratio = (mu - s(0, 0)) / s(1, 0);  // w2 / w1

  Lemma3Result out;
  out.eigen_order = ratio > 1.0;
  const double left_sum = s(0, 0) + s(1, 0);
  const double right_sum = s(0, 1) + s(1, 1);
  out.column_inequality = left_sum < right_sum;
  out.boundary = left_sum == right_sum;
  return out;
}

DiagonalizationData diagonalize_season(const insect::InsectParams& p) {
  p.validate();
  if (!(p.b > 0) || !(p.h > 0)) throw DegenerateError("diagonalize_season: needs b > 0 and h > 0");
  const double lead = p.h + p.d_J;
  const double gap = lead - p.d_A;
  const double root = std::sqrt(gap * gap + 4.0 * p.h * p.b);

  DiagonalizationData d;
  d.lambda_plus = -0.5 * (lead + p.d_A) + 0.5 * root;
  d.lambda_minus = -0.5 * (lead + p.d_A) - 0.5 * root;
  d.x_plus = (gap + root) / (2.0 * p.b);
  d.x_minus = (gap - root) / (2.0 * p.b);

  Eigen::Matrix2d basis;
  basis << 1, 1, d.x_plus, d.x_minus;
  const Eigen::Matrix2d rebuilt =
      basis * Eigen::Vector2d(d.lambda_plus, d.lambda_minus).asDiagonal() * basis.inverse();
  const Eigen::Matrix2d target = insect::jacobian(p, insect::State::Zero());
  d.reconstruction_residual = (rebuilt - target).cwiseAbs().maxCoeff();
  if (!(d.reconstruction_residual <= 1e-10 * std::max(1.0, target.cwiseAbs().maxCoeff()))) {
    throw ConditioningError("diagonalize_season: eigenbasis does not reproduce the Jacobian");
  }
  return d;
}

SeasonWeights season_weights(const DiagonalizationData& u, const DiagonalizationData& f, double theta,
                             double period) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidInput("season_weights: theta must lie in [0, 1]");
  SeasonWeights w;
  w.beta_plus = std::exp(f.lambda_plus * (1.0 - theta) * period);
  w.beta_minus = std::exp(f.lambda_minus * (1.0 - theta) * period);
  w.gamma_plus = std::exp(u.lambda_plus * theta * period);
  w.gamma_minus = std::exp(u.lambda_minus * theta * period);
  return w;
}

double diagonalization_alpha(const insect::InsectParams& u, const insect::InsectParams& f) {
  auto disc = [](const insect::InsectParams& p) {
    const double gap = p.h + p.d_J - p.d_A;
    return gap * gap + 4.0 * p.h * p.b;
  };
  return u.b * f.b / std::sqrt(disc(u) * disc(f));
}

PsiFunction::PsiFunction(const DiagonalizationData& u, const DiagonalizationData& f)
    : xu_p_(u.x_plus), xu_m_(u.x_minus), xf_p_(f.x_plus), xf_m_(f.x_minus) {}

double PsiFunction::operator()(double beta, double gamma) const {
  return beta * gamma * (xf_m_ - xu_p_) * (1 + xf_p_) * (1 + xu_m_) +
         beta * (xu_m_ - xf_m_) * (1 + xf_p_) * (1 + xu_p_) +
         gamma * (xu_p_ - xf_p_) * (1 + xu_m_) * (1 + xf_m_) +
         (xf_p_ - xu_m_) * (1 + xf_m_) * (1 + xu_p_);
}

double PsiFunction::d_beta(double gamma) const {
  return gamma * (xf_m_ - xu_p_) * (1 + xf_p_) * (1 + xu_m_) + (xu_m_ - xf_m_) * (1 + xf_p_) * (1 + xu_p_);
}

double PsiFunction::d_gamma(double beta) const {
  return beta * (xf_m_ - xu_p_) * (1 + xf_p_) * (1 + xu_m_) + (xu_p_ - xf_p_) * (1 + xu_m_) * (1 + xf_m_);
}

double PsiFunction::d_beta_bound() const { return (xu_m_ - xu_p_) * (1 + xf_m_) * (1 + xf_p_); }

double PsiFunction::d_gamma_bound() const { return (xf_m_ - xf_p_) * (1 + xu_m_) * (1 + xu_p_); }

ConditionCertificate theorem3_certificate(const insect::InsectParams& u, const insect::InsectParams& f,
                                          double period, std::span<const double> theta_grid) {
  require_grid(theta_grid, "theorem3_certificate");
  if (!(period > 0) || !std::isfinite(period)) throw InvalidInput("theorem3_certificate: period must be positive");

  ConditionCertificate cert;
  cert.condition = ConditionTag::Thm3;
  cert.theta_grid.assign(theta_grid.begin(), theta_grid.end());
  auto add = [&](std::string name, double margin, std::string note = {}) {
    cert.stages.push_back({std::move(name), margin > kStrictMargin, margin, std::move(note)});
  };

  const auto hyp = check_hyp_parameters(u, f);
  add("(i) parameter hypothesis", hyp.worst_margin());

  const double r0u = insect::r0(u);
  const double r0f = insect::r0(f);
  add("(ii) R0 ordering", std::min(1.0 - r0u, r0f - 1.0));
  add("(iii) unfavorable birth plus juvenile death exceeds adult death", u.b + u.d_J - u.d_A);

  std::optional<DiagonalizationData> du, df;
  std::string diag_error;
  try {
    du = diagonalize_season(u);
    df = diagonalize_season(f);
  } catch (const Error& e) {
    diag_error = e.what();
  }

  if (!du || !df) {
    for (const char* name : {"(iv) slope inequalities", "(v) Psi(1,1) = 0", "(vi) Psi decreasing",
                             "(vii) Psi negative on the grid", "(viii) monodromy column sums agree"}) {
      cert.stages.push_back({name, false, -std::numeric_limits<double>::infinity(), diag_error});
    }
    cert.holds = false;
    cert.note = diag_error;
    return cert;
  }

  double slope_margin = std::numeric_limits<double>::infinity();
  for (const auto* d : {&*du, &*df}) {
    slope_margin = std::min({slope_margin, -d->x_minus, d->x_plus, 1.0 + d->x_minus});
  }
  add("(iv) slope inequalities", slope_margin);

  const PsiFunction psi(*du, *df);
  const double scale = std::max(1.0, std::abs(psi.d_beta(1.0)) + std::abs(psi.d_gamma(1.0)) + std::abs(psi(0.0, 0.0)));
  const double psi_at_one = psi(1.0, 1.0);
  {
    const double margin = 1e-12 * scale - std::abs(psi_at_one);
    cert.stages.push_back({"(v) Psi(1,1) = 0", margin >= 0.0, margin, ""});
  }

  // Weights, Psi and monodromy column sums per grid fraction.
  const auto lin = insect::linearization(u, f, period);
  double derivative_margin = std::min(-psi.d_beta_bound(), -psi.d_gamma_bound());
  bool signs_agree = true;
  double agreement_margin = std::numeric_limits<double>::infinity();
  for (double theta : theta_grid) {
    const auto w = season_weights(*du, *df, theta, period);
    const double beta = w.beta_plus / w.beta_minus;
    const double gamma = w.gamma_plus / w.gamma_minus;
    const double value = psi(beta, gamma);
    cert.evidence.push_back(-value);
    derivative_margin = std::min({derivative_margin, -psi.d_beta(gamma), -psi.d_gamma(beta)});

    const MatrixXd m = monodromy(lin, theta);
    const double column_gap = m(0, 1) + m(1, 1) - m(0, 0) - m(1, 0);
    const double gap_floor = 1e-12 * m.cwiseAbs().maxCoeff();
    const double psi_floor = 1e-12 * scale * std::max(1.0, beta * gamma);
    const bool both_flat = std::abs(column_gap) <= gap_floor && std::abs(value) <= psi_floor;
    const bool agree = both_flat || ((column_gap > 0) == (value < 0) && std::abs(value) > psi_floor);
    signs_agree = signs_agree && agree;
    agreement_margin = std::min(agreement_margin, agree ? std::abs(column_gap) : -std::abs(column_gap));
  }
  add("(vi) Psi decreasing", derivative_margin, "closed-form bounds and sampled partials at the grid ratios");
  {
    double worst = std::numeric_limits<double>::infinity();
    for (double e : cert.evidence) worst = std::min(worst, e);
    add("(vii) Psi negative on the grid", cert.evidence.empty() ? -1.0 : worst);
  }
  cert.stages.push_back({"(viii) monodromy column sums agree", signs_agree && !theta_grid.empty(), agreement_margin,
                         "margin is the smallest column-sum gap"});

  cert.holds = std::all_of(cert.stages.begin(), cert.stages.end(), [](const auto& s) { return s.holds; });
  std::ostringstream note;
  note << "alpha " << diagonalization_alpha(u, f);
  cert.note = note.str();
  return cert;
}

}  // namespace seasonal
