#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <type_traits>
#include <utility>

#include "petv/error.hpp"
#include "petv/fft.hpp"

namespace petv {

/// Periodic collocation grid on (-l, l) with m equispaced nodes x_j = -l + j h.
class GridSpec {
 public:
  GridSpec(double half_length, int num_points) : l_(half_length), m_(num_points) {
    if (!(half_length > 0.0) || !std::isfinite(half_length)) {
      throw ConfigError("grid: half_length must be positive");
    }
    if (num_points % 2 != 0) throw ConfigError("grid: m must be even");
    if (num_points < 8) throw ConfigError("grid: m must be at least 8");
  }

  double half_length() const { return l_; }
  int num_points() const { return m_; }
  double spacing() const { return 2.0 * l_ / m_; }
  double length() const { return 2.0 * l_; }
  double node(int j) const { return -l_ + j * spacing(); }

  Eigen::VectorXd nodes() const {
    Eigen::VectorXd x(m_);
    for (int j = 0; j < m_; ++j) x[j] = node(j);
    return x;
  }

  /// Integer wavenumber of DFT slot j, in {-m/2, ..., m/2 - 1}.
  int wavenumber_index(int j) const { return j < m_ / 2 ? j : j - m_; }
  /// Physical wavenumber k pi / l of DFT slot j.
  double wavenumber(int j) const { return wavenumber_index(j) * std::numbers::pi / l_; }
  bool is_nyquist(int j) const { return j == m_ / 2; }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.l_ == b.l_ && a.m_ == b.m_;
  }

 private:
  double l_;
  int m_;
};

inline GridSpec make_grid(double l, int m) { return GridSpec(l, m); }

/// Grid-attached vector of nodal values.
template <class Scalar>
class Field {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Field(GridSpec grid, Vector values) : grid_(std::move(grid)), values_(std::move(values)) {
    detail::require_size(values_.size(), grid_.num_points(), "Field");
    if (!values_.allFinite()) throw DomainError("Field: non-finite entries");
  }

  explicit Field(const GridSpec& grid) : Field(grid, Vector::Zero(grid.num_points())) {}

  template <class F>
  static Field sample(const GridSpec& grid, F&& f) {
    Vector v(grid.num_points());
    for (int j = 0; j < grid.num_points(); ++j) v[j] = f(grid.node(j));
    return Field(grid, std::move(v));
  }

  const GridSpec& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  Scalar operator[](int j) const { return values_[j]; }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  GridSpec grid_;
  Vector values_;
};

using RealField = Field<double>;
using ComplexField = Field<std::complex<double>>;

namespace detail {

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw DimensionError(std::string(what) + ": fields live on different grids");
}

// Fourier symbol (i k)^order with the Nyquist slot handled as documented on diff_apply.
inline std::complex<double> derivative_symbol(const GridSpec& grid, int j, int order) {
  if (grid.is_nyquist(j) && order % 2 == 1) return 0.0;
  const std::complex<double> ik(0.0, grid.wavenumber(j));
  std::complex<double> s = 1.0;
  for (int q = 0; q < order; ++q) s *= ik;
  return s;
}

}  // namespace detail

/// Applies Fourier multipliers to nodal vectors on one grid.
///
/// Holds the grid and a shared FFT plan; instances are immutable and thread-safe.
class SpectralOps {
 public:
  explicit SpectralOps(GridSpec grid) : grid_(std::move(grid)), fft_(grid_.num_points()) {}

  const GridSpec& grid() const { return grid_; }
  const FourierTransform& fft() const { return fft_; }

  /// v -> IDFT(symbol(j) * DFT(v)).
  template <class Symbol>
  Eigen::VectorXcd apply_symbol(const Eigen::VectorXcd& v, Symbol&& symbol) const {
    const int m = grid_.num_points();
    detail::require_size(v.size(), m, "apply_symbol");
    Eigen::VectorXcd hat = fft_.forward(v);
    for (int j = 0; j < m; ++j) hat[j] *= symbol(j);
    return fft_.inverse(hat);
  }

  template <class Symbol>
  Eigen::VectorXd apply_symbol_real(const Eigen::VectorXd& v, Symbol&& symbol) const {
    return apply_symbol(Eigen::VectorXcd(v.cast<std::complex<double>>()),
                        std::forward<Symbol>(symbol))
        .real();
  }

  Eigen::VectorXd derivative(const Eigen::VectorXd& v, int order) const {
    check_order(order);
    return apply_symbol_real(v, [&](int j) { return detail::derivative_symbol(grid_, j, order); });
  }

  Eigen::VectorXcd derivative(const Eigen::VectorXcd& v, int order) const {
    check_order(order);
    return apply_symbol(v, [&](int j) { return detail::derivative_symbol(grid_, j, order); });
  }

  /// Band-limited translation v(x) -> v(x - d). The Nyquist coefficient gets cos(k d).
  Eigen::VectorXd translate(const Eigen::VectorXd& v, double d) const {
    return apply_symbol_real(v, [&](int j) -> std::complex<double> {
      const double k = grid_.wavenumber(j);
      if (grid_.is_nyquist(j)) return std::cos(k * d);
      return std::polar(1.0, -k * d);
    });
  }

  static void check_order(int order) {
    if (order < 1 || order > 3) throw ConfigError("derivative order must be 1, 2 or 3");
  }

 private:
  GridSpec grid_;
  FourierTransform fft_;
};

/// Spectral derivative of the given order (1..3).
///
/// Multiplies the DFT by (i k pi / l)^order on k in {-m/2, ..., m/2-1}. For odd orders the
/// Nyquist coefficient is zeroed; for even orders it keeps its real symbol. Real input gives
/// real output.
template <class Scalar>
Field<Scalar> diff_apply(const Field<Scalar>& f, int order) {
  SpectralOps ops(f.grid());
  return Field<Scalar>(f.grid(), ops.derivative(f.values(), order));
}

/// Dense pseudospectral differentiation matrix with the same symbol as diff_apply.
///
/// Built from the closed-form periodic sinc-interpolant derivatives, so D^1 is exactly
/// antisymmetric and D^2 exactly symmetric. D^3 is formed as D^1 D^2.
inline Eigen::MatrixXd diff_matrix(const GridSpec& grid, int order) {
  SpectralOps::check_order(order);
  const int m = grid.num_points();
  const double scale = std::numbers::pi / grid.half_length();  // maps [0, 2pi) onto (-l, l)
  const double step = 2.0 * std::numbers::pi / m;
  auto first = [&] {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        const int diff = i - j;
        const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
        d(i, j) = 0.5 * sign / std::tan(0.5 * diff * step) * scale;
      }
    }
    return d;
  };
  auto second = [&] {
    Eigen::MatrixXd d(m, m);
    const double diag = -(std::numbers::pi * std::numbers::pi) / (3.0 * step * step) - 1.0 / 6.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (i == j) {
          d(i, j) = diag * scale * scale;
          continue;
        }
        const int diff = i - j;
        const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
        const double s = std::sin(0.5 * diff * step);
        d(i, j) = -0.5 * sign / (s * s) * scale * scale;
      }
    }
    return d;
  };
  if (order == 1) return first();
  if (order == 2) return second();
  return first() * second();
}

/// Euclidean inner product sum_j u_j conj(v_j); no quadrature weight.
template <class Scalar>
Scalar inner(const Field<Scalar>& u, const Field<Scalar>& v) {
  detail::require_same_grid(u.grid(), v.grid(), "inner");
  if constexpr (std::is_same_v<Scalar, double>) {
    return u.values().dot(v.values());
  } else {
    // Eigen's dot conjugates the first argument.
    return v.values().dot(u.values());
  }
}

/// Elementwise |u_j|^exponent * u_j.
template <class Derived>
auto hadamard_power_product(const Eigen::MatrixBase<Derived>& u, double exponent) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(u.size());
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    out[j] = exponent == 0.0 ? u[j] : std::pow(std::abs(u[j]), exponent) * u[j];
  }
  return out;
}

template <class Scalar>
Field<Scalar> hadamard_power_product(const Field<Scalar>& u, double exponent) {
  if (exponent < 0.0) throw DomainError("hadamard_power_product: exponent must be nonnegative");
  return Field<Scalar>(u.grid(), hadamard_power_product(u.values(), exponent));
}

}  // namespace petv
