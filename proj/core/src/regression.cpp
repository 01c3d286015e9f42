#include "ivlab/regression.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ivlab/error.hpp"
#include "ivlab/panel.hpp"

namespace ivlab {

namespace {

struct Decomposition {
  Eigen::ColPivHouseholderQR<Matrix> qr;

  explicit Decomposition(const Matrix& X) : qr(X.rows(), X.cols()) {
    qr.setThreshold(kRankTolerance);
    qr.compute(X);
    if (qr.rank() < X.cols()) {
      throw Error(ErrorCode::Collinearity, "design matrix has rank " + std::to_string(qr.rank()) +
                                               " < " + std::to_string(X.cols()) + " columns");
    }
  }

  // (X'X)^-1 = P R^-1 R^-T P'
  Matrix xtx_inverse() const {
    const Eigen::Index k = qr.cols();
    Matrix r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
    Matrix inner = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    return perm * inner * perm.transpose();
  }
};

void check_shape(const Vector& y, const Matrix& X) {
  if (y.size() != X.rows()) {
    throw Error(ErrorCode::Domain, "response has " + std::to_string(y.size()) + " rows, design has " +
                                       std::to_string(X.rows()));
  }
  if (X.rows() <= X.cols()) {
    throw Error(ErrorCode::InsufficientData, "need more observations (" + std::to_string(X.rows()) +
                                                 ") than regressors (" + std::to_string(X.cols()) + ")");
  }
}

Matrix sandwich(const Matrix& bread, const Matrix& X, const Vector& e) {
  const auto n = static_cast<double>(X.rows());
  const auto k = static_cast<double>(X.cols());
  Matrix weighted = X.array().colwise() * e.array();
  Matrix meat = weighted.transpose() * weighted;
  Matrix cov = bread * meat * bread * (n / (n - k));
  return 0.5 * (cov + cov.transpose());
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::Domain, std::string(what) + ": lengths differ (" + std::to_string(a) + " vs " +
                                       std::to_string(b) + ")");
  }
}

// Stage-1 regression shared by first_stage_f and 2SLS.
struct FirstStage {
  Matrix design;
  LinearFit fit;
  double wald = 0.0;
};

FirstStage run_first_stage(std::span<const double> t, std::span<const double> z,
                           const std::vector<std::vector<double>>& covariates) {
  require_same_length(t.size(), z.size(), "first stage");
  for (const auto& c : covariates) require_same_length(t.size(), c.size(), "first stage covariate");
  if (z.size() < 2) throw Error(ErrorCode::InsufficientData, "instrument needs at least 2 samples");
  try {
    standardize(z);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ZeroVariance) throw Error(ErrorCode::ZeroVariance, "instrument is constant");
    throw;
  }
  std::vector<std::span<const double>> cols{z};
  for (const auto& c : covariates) cols.emplace_back(c);
  FirstStage stage;
  stage.design = design_with_intercept(cols);
  stage.fit = ols(to_vector(t), stage.design);
  const double b = stage.fit.coefficients(1);
  const double se = stage.fit.robust_se(1);
  if (se > 0.0) {
    stage.wald = (b / se) * (b / se);
  } else {
    stage.wald = b == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return stage;
}

}  // namespace

double LinearFit::robust_se(Eigen::Index j) const {
  return std::sqrt(std::max(0.0, robust_covariance(j, j)));
}

Vector to_vector(std::span<const double> v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix design_with_intercept(std::span<const std::span<const double>> columns) {
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size() + 1));
  X.col(0).setOnes();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    require_same_length(n, columns[c].size(), "design column");
    X.col(static_cast<Eigen::Index>(c + 1)) = to_vector(columns[c]);
  }
  return X;
}

Matrix design_with_intercept(const std::vector<std::vector<double>>& columns) {
  std::vector<std::span<const double>> spans(columns.begin(), columns.end());
  return design_with_intercept(std::span<const std::span<const double>>(spans));
}

LinearFit ols(const Vector& y, const Matrix& X) {
  check_shape(y, X);
  Decomposition dec(X);
  LinearFit fit;
  fit.n = static_cast<std::size_t>(X.rows());
  fit.k = static_cast<std::size_t>(X.cols());
  fit.coefficients = dec.qr.solve(y);
  fit.residuals = y - X * fit.coefficients;
  fit.rss = fit.residuals.squaredNorm();
  fit.robust_covariance = sandwich(dec.xtx_inverse(), X, fit.residuals);
  return fit;
}

Matrix hc_covariance(const Matrix& X, const Vector& residuals) {
  if (residuals.size() != X.rows()) throw Error(ErrorCode::Domain, "residuals do not match design rows");
  if (X.rows() <= X.cols()) throw Error(ErrorCode::InsufficientData, "n <= k in covariance estimate");
  Decomposition dec(X);
  return sandwich(dec.xtx_inverse(), X, residuals);
}

Matrix hc_covariance(const LinearFit& fit, const Matrix& X) { return hc_covariance(X, fit.residuals); }

Matrix classical_covariance(const LinearFit& fit, const Matrix& X) {
  Decomposition dec(X);
  const double s2 = fit.rss / static_cast<double>(fit.n - fit.k);
  return s2 * dec.xtx_inverse();
}

double first_stage_f(std::span<const double> t, std::span<const double> z,
                     const std::vector<std::vector<double>>& covariates) {
  return run_first_stage(t, z, covariates).wald;
}

IVEstimate two_stage_least_squares(std::span<const double> y, std::span<const double> t,
                                   std::span<const double> z,
                                   const std::vector<std::vector<double>>& covariates) {
  require_same_length(y.size(), t.size(), "2SLS outcome/treatment");
  const FirstStage first = run_first_stage(t, z, covariates);

  // Relevance on the standardized scale: b_z * sd(z) / sd(t).
  const double sd_t = std::sqrt(sample_variance(t));
  if (!(sd_t > 0.0)) throw Error(ErrorCode::ZeroVariance, "treatment is constant");
  const double standardized = first.fit.coefficients(1) * std::sqrt(sample_variance(z)) / sd_t;
  if (std::abs(standardized) < 1e-12) {
    throw Error(ErrorCode::DivisionHazard, "first stage is degenerate (standardized instrument effect " +
                                               std::to_string(standardized) + ")");
  }

  const Vector t_hat = first.design * first.fit.coefficients;
  Matrix second = first.design;
  second.col(1) = t_hat;
  const Vector yv = to_vector(y);
  const LinearFit fit = ols(yv, second);

  Matrix structural = second;
  structural.col(1) = to_vector(t);
  const Vector residuals = yv - structural * fit.coefficients;

  IVEstimate est;
  est.beta = fit.coefficients(1);
  est.intercept = fit.coefficients(0);
  est.se = std::sqrt(std::max(0.0, hc_covariance(second, residuals)(1, 1)));
  est.first_stage_f = first.wald;
  est.n = y.size();
  return est;
}

double wald_late(std::span<const double> y, std::span<const double> t, std::span<const double> z) {
  require_same_length(y.size(), t.size(), "LATE outcome/treatment");
  require_same_length(y.size(), z.size(), "LATE outcome/instrument");
  double sum_y[2] = {0.0, 0.0}, sum_t[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < y.size(); ++i) {
    if ((z[i] != 0.0 && z[i] != 1.0) || (t[i] != 0.0 && t[i] != 1.0)) {
      throw Error(ErrorCode::Domain, "LATE requires binary instrument and treatment");
    }
    const int g = z[i] == 1.0 ? 1 : 0;
    sum_y[g] += y[i];
    sum_t[g] += t[i];
    ++count[g];
  }
  if (count[0] == 0 || count[1] == 0) {
    throw Error(ErrorCode::InsufficientData, "both instrument groups must be nonempty");
  }
  const double dt = sum_t[1] / count[1] - sum_t[0] / count[0];
  if (std::abs(dt) < 1e-12) {
    throw Error(ErrorCode::ZeroCompliance, "treatment share is identical across instrument groups");
  }
  return (sum_y[1] / count[1] - sum_y[0] / count[0]) / dt;
}

}  // namespace ivlab
