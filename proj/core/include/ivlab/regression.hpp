#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace ivlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative rank tolerance for the pivoted QR used by every least-squares solve.
inline constexpr double kRankTolerance = 1e-10;

/// Ordinary least-squares fit. Coefficient 0 is the intercept when the design
/// carries a leading column of ones.
struct LinearFit {
  Vector coefficients;
  Vector residuals;
  double rss = 0.0;
  Matrix robust_covariance;  // HC1
  std::size_t n = 0;
  std::size_t k = 0;

  double robust_se(Eigen::Index j) const;
};

struct IVEstimate {
  double beta = 0.0;       // effect of the treatment
  double intercept = 0.0;
  double se = 0.0;         // HC1 on structural residuals
  double first_stage_f = 0.0;
  std::size_t n = 0;
};

/// [1, columns...] as an n x (1 + columns) design.
Matrix design_with_intercept(std::span<const std::span<const double>> columns);
Matrix design_with_intercept(const std::vector<std::vector<double>>& columns);

Vector to_vector(std::span<const double> v);

/// Throws InsufficientData when n <= k and Collinearity when X is rank deficient.
LinearFit ols(const Vector& y, const Matrix& X);

/// (X'X)^-1 X' diag(e^2) X (X'X)^-1 * n / (n - k) with e = fit.residuals.
Matrix hc_covariance(const LinearFit& fit, const Matrix& X);

/// Same sandwich with caller-supplied residuals; the 2SLS standard error uses
/// structural residuals against the second-stage design.
Matrix hc_covariance(const Matrix& X, const Vector& residuals);

/// s^2 (X'X)^-1 with s^2 = RSS / (n - k).
Matrix classical_covariance(const LinearFit& fit, const Matrix& X);

/// Robust Wald statistic (b_z / se_HC1(b_z))^2 for the instrument in the
/// regression of t on (1, z, covariates).
double first_stage_f(std::span<const double> t, std::span<const double> z,
                     const std::vector<std::vector<double>>& covariates = {});

/// Just-identified two-stage least squares of y on t instrumented by z.
IVEstimate two_stage_least_squares(std::span<const double> y, std::span<const double> t,
                                   std::span<const double> z,
                                   const std::vector<std::vector<double>>& covariates = {});

/// Wald ratio (E[Y|Z=1] - E[Y|Z=0]) / (E[T|Z=1] - E[T|Z=0]) for binary z and t.
double wald_late(std::span<const double> y, std::span<const double> t, std::span<const double> z);

}  // namespace ivlab
