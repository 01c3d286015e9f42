#pragma once

// Reference computations written independently of the library: plain loops in
// long double, no Eigen, no shared helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

inline long double mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return s / static_cast<long double>(v.size());
}

inline long double cov(const std::vector<double>& a, const std::vector<double>& b) {
  const long double ma = mean(a), mb = mean(b);
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<long double>(a.size() - 1);
}

/// Just-identified IV ratio Cov(Z, Y) / Cov(Z, T).
inline double iv_ratio(const std::vector<double>& y, const std::vector<double>& t, const std::vector<double>& z) {
  return static_cast<double>(cov(z, y) / cov(z, t));
}

/// OLS slope of y on x with intercept.
inline double slope(const std::vector<double>& y, const std::vector<double>& x) {
  return static_cast<double>(cov(x, y) / cov(x, x));
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<long double> solve(std::vector<std::vector<long double>> A, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(A[r][c]) > std::fabs(A[p][c])) p = r;
    }
    std::swap(A[c], A[p]);
    std::swap(b[c], b[p]);
    if (A[c][c] == 0) throw std::runtime_error("singular system");
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

/// Inverse of a small symmetric matrix via repeated solves.
inline std::vector<std::vector<long double>> inverse(const std::vector<std::vector<long double>>& A) {
  const std::size_t n = A.size();
  std::vector<std::vector<long double>> inv(n, std::vector<long double>(n));
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<long double> e(n, 0);
    e[c] = 1;
    const auto col = solve(A, e);
    for (std::size_t r = 0; r < n; ++r) inv[r][c] = col[r];
  }
  return inv;
}

struct OlsResult {
  std::vector<double> beta;
  std::vector<double> residuals;
  std::vector<double> hc1_se;
};

/// OLS by normal equations; rows of X include the intercept column.
inline OlsResult ols(const std::vector<double>& y, const std::vector<std::vector<double>>& X) {
  const std::size_t n = y.size(), k = X[0].size();
  std::vector<std::vector<long double>> xtx(k, std::vector<long double>(k, 0));
  std::vector<long double> xty(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] += X[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b) xtx[a][b] += X[i][a] * X[i][b];
    }
  }
  const auto inv = inverse(xtx);
  std::vector<long double> beta(k, 0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) beta[a] += inv[a][b] * xty[b];
  }
  OlsResult out;
  for (auto b : beta) out.beta.push_back(static_cast<double>(b));
  std::vector<std::vector<long double>> meat(k, std::vector<long double>(k, 0));
  for (std::size_t i = 0; i < n; ++i) {
    long double fit = 0;
    for (std::size_t a = 0; a < k; ++a) fit += X[i][a] * beta[a];
    const long double e = y[i] - fit;
    out.residuals.push_back(static_cast<double>(e));
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) meat[a][b] += e * e * X[i][a] * X[i][b];
    }
  }
  const long double scale = static_cast<long double>(n) / static_cast<long double>(n - k);
  for (std::size_t a = 0; a < k; ++a) {
    long double v = 0;
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = 0; q < k; ++q) v += inv[a][p] * meat[p][q] * inv[q][a];
    }
    out.hc1_se.push_back(static_cast<double>(std::sqrt(v * scale)));
  }
  return out;
}

/// Upper 5% critical values of F(1, d) for a few denominators (standard tables).
inline double f_crit_05_df1(int d) {
  switch (d) {
    case 10: return 4.9646;
    case 30: return 4.1709;
    case 60: return 4.0012;
    case 120: return 3.9201;
    default: throw std::runtime_error("no tabulated value");
  }
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace oracle
