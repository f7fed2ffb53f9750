#pragma once

// Reference computations that do not go through the library's FFT, operators or solvers.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cld = std::complex<long double>;

/// Spectral derivative by direct O(m^2) DFT in long double on x_j = -l + 2lj/m.
inline Eigen::VectorXd dft_derivative(const Eigen::VectorXd& v, double l, int order) {
  const int m = static_cast<int>(v.size());
  const long double pi = std::numbers::pi_v<long double>;
  std::vector<cld> hat(m);
  for (int k = 0; k < m; ++k) {
    cld acc = 0;
    for (int j = 0; j < m; ++j) acc += static_cast<long double>(v[j]) * std::polar(1.0L, -2.0L * pi * k * j / m);
    hat[k] = acc;
  }
  for (int k = 0; k < m; ++k) {
    const int kk = k < m / 2 ? k : k - m;
    if (k == m / 2 && order % 2 == 1) {
      hat[k] = 0;
      continue;
    }
    const cld ik(0.0L, kk * pi / static_cast<long double>(l));
    cld f = 1;
    for (int i = 0; i < order; ++i) f *= ik;
    hat[k] *= f;
  }
  Eigen::VectorXd out(m);
  for (int j = 0; j < m; ++j) {
    cld acc = 0;
    for (int k = 0; k < m; ++k) acc += hat[k] * std::polar(1.0L, 2.0L * pi * k * j / m);
    out[j] = static_cast<double>(acc.real() / m);
  }
  return out;
}

/// Cubic-quintic ground state of u'' - mu u + alpha u^3 + beta u^5 = 0 (alpha, beta, mu > 0):
/// u^2 = 4 b mu / alpha / (b + cosh(2 sqrt(mu) x)), b = (1 + 16 beta mu / (3 alpha^2))^{-1/2}.
inline long double cubic_quintic(long double x, long double mu, long double alpha, long double beta) {
  const long double b = 1.0L / std::sqrt(1.0L + 16.0L * beta * mu / (3.0L * alpha * alpha));
  const long double u2 = 4.0L * b * mu / alpha / (b + std::cosh(2.0L * std::sqrt(mu) * x));
  return std::sqrt(u2);
}

/// Central-difference Jacobian of f at x.
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = x.size();
  const Eigen::Index rows = f(x).size();
  Eigen::MatrixXd jac(rows, n);
  Eigen::VectorXd probe = x;
  for (Eigen::Index c = 0; c < n; ++c) {
    probe[c] = x[c] + h;
    const Eigen::VectorXd fp = f(probe);
    probe[c] = x[c] - h;
    const Eigen::VectorXd fm = f(probe);
    probe[c] = x[c];
    jac.col(c) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

/// Central-difference gradient of a scalar function.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    probe[c] = x[c] + h;
    const double fp = f(probe);
    probe[c] = x[c] - h;
    const double fm = f(probe);
    probe[c] = x[c];
    g[c] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Characteristic polynomial coefficients c_0..c_n of det(z I - A) (c_n = 1) by Faddeev-LeVerrier
/// in long double. Only sensible for small n.
inline std::vector<long double> char_poly(const Eigen::MatrixXd& a) {
  using M = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = a.rows();
  const M al = a.cast<long double>();
  std::vector<long double> c(n + 1, 0.0L);
  c[n] = 1.0L;
  M mk = M::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    mk = al * mk + c[n - k + 1] * M::Identity(n, n);
    c[n - k] = -(al * mk).trace() / static_cast<long double>(k);
  }
  return c;
}

inline cld eval_poly(const std::vector<long double>& c, cld z) {
  cld acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

/// Roots of a monic polynomial by Durand-Kerner in long double.
inline std::vector<cld> poly_roots(const std::vector<long double>& c) {
  const std::size_t n = c.size() - 1;
  std::vector<cld> z(n);
  const cld seed(0.4L, 0.9L);
  long double bound = 1.0L;
  for (std::size_t i = 0; i < n; ++i) bound = std::max(bound, 1.0L + std::abs(c[i]));
  z[0] = seed * bound;
  for (std::size_t i = 1; i < n; ++i) z[i] = z[i - 1] * seed;
  for (int it = 0; it < 2000; ++it) {
    long double change = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      cld den = 1;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      const cld step = eval_poly(c, z[i]) / den;
      z[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-17L) break;
  }
  return z;
}

/// Trapezoid rule on a uniform periodic grid.
inline double periodic_integral(const Eigen::VectorXd& v, double h) { return h * v.sum(); }

}  // namespace oracle
