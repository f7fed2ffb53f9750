#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "petv/error.hpp"
#include "petv/spectral.hpp"

namespace petv {

/// Nonsingular real linear operator L of the stationary system L x = N(x).
///
/// Implementations are immutable; apply/solve are pure and thread-safe.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual int dim() const = 0;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd solve(const Eigen::VectorXd& b) const = 0;
  virtual Eigen::MatrixXd dense() const = 0;

  /// L^{-1} B, column by column.
  virtual Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
    detail::require_size(b.rows(), dim(), "LinearOperator::solve");
    Eigen::MatrixXd out(b.rows(), b.cols());
    for (Eigen::Index c = 0; c < b.cols(); ++c) out.col(c) = solve(Eigen::VectorXd(b.col(c)));
    return out;
  }
};

/// Dense operator backed by a partial-pivoting LU factorization computed once.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)), lu_(matrix_) {
    if (matrix_.rows() != matrix_.cols()) throw DimensionError("DenseOperator: matrix not square");
    if (!(lu_.rcond() > 1e-14)) throw ConfigError("linear operator is singular or ill-conditioned");
  }

  int dim() const override { return static_cast<int>(matrix_.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override {
    detail::require_size(x.size(), dim(), "DenseOperator::apply");
    return matrix_ * x;
  }
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const override {
    detail::require_size(x.size(), dim(), "DenseOperator::apply_transpose");
    return matrix_.transpose() * x;
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const override {
    detail::require_size(b.size(), dim(), "DenseOperator::solve");
    return lu_.solve(b);
  }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const override {
    detail::require_size(b.rows(), dim(), "DenseOperator::solve");
    return lu_.solve(b);
  }
  Eigen::MatrixXd dense() const override { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// Block-circulant operator on `blocks` stacked grid components.
///
/// Each block (r, c) is a Fourier multiplier a + b * D_h^2 with real a, b, so every
/// wavenumber couples only through a small real matrix. apply and solve run in
/// O(m log m) per component.
class FourierBlockOperator final : public LinearOperator {
 public:
  /// At most 2x2, stack allocated.
  using Block = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

  struct Entry {
    double identity = 0.0;  // coefficient of I
    double laplace = 0.0;   // coefficient of D_h^2
  };

  FourierBlockOperator(GridSpec grid, int blocks, std::vector<Entry> entries)
      : ops_(std::move(grid)), blocks_(blocks), entries_(std::move(entries)) {
    if (blocks_ < 1 || blocks_ > 2) throw ConfigError("FourierBlockOperator: 1 or 2 blocks");
    if (static_cast<int>(entries_.size()) != blocks_ * blocks_) {
      throw DimensionError("FourierBlockOperator: need blocks^2 entries");
    }
    const int m = ops_.grid().num_points();
    double scale = 0.0;
    for (int j = 0; j < m; ++j) scale = std::max(scale, symbol_matrix(j).cwiseAbs().maxCoeff());
    for (int j = 0; j < m; ++j) {
      const double det = symbol_matrix(j).determinant();
      const double ref = std::pow(scale, blocks_);
      if (!(std::abs(det) > 1e-13 * ref)) {
        throw ConfigError("linear operator symbol is singular at wavenumber index " +
                          std::to_string(ops_.grid().wavenumber_index(j)));
      }
    }
  }

  int dim() const override { return blocks_ * ops_.grid().num_points(); }
  const GridSpec& grid() const { return ops_.grid(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override {
    return transform(x, [&](int j) { return symbol_matrix(j); });
  }
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const override {
    return transform(x, [&](int j) { return Block(symbol_matrix(j).transpose()); });
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const override {
    return transform(b, [&](int j) { return Block(symbol_matrix(j).inverse()); });
  }

  Eigen::MatrixXd dense() const override {
    const int m = ops_.grid().num_points();
    const Eigen::MatrixXd d2 = diff_matrix(ops_.grid(), 2);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
    Eigen::MatrixXd out(dim(), dim());
    for (int r = 0; r < blocks_; ++r) {
      for (int c = 0; c < blocks_; ++c) {
        const Entry& e = entries_[r * blocks_ + c];
        out.block(r * m, c * m, m, m) = e.identity * eye + e.laplace * d2;
      }
    }
    return out;
  }

  /// Real blocks x blocks matrix acting on DFT slot j.
  Block symbol_matrix(int j) const {
    const double k = ops_.grid().wavenumber(j);
    Block s(blocks_, blocks_);
    for (int r = 0; r < blocks_; ++r) {
      for (int c = 0; c < blocks_; ++c) {
        const Entry& e = entries_[r * blocks_ + c];
        s(r, c) = e.identity - e.laplace * k * k;
      }
    }
    return s;
  }

 private:
  template <class BlockOf>
  Eigen::VectorXd transform(const Eigen::VectorXd& x, BlockOf&& block_of) const {
    detail::require_size(x.size(), dim(), "FourierBlockOperator");
    const int m = ops_.grid().num_points();
    std::vector<Eigen::VectorXcd> hats;
    hats.reserve(blocks_);
    for (int b = 0; b < blocks_; ++b) {
      hats.push_back(ops_.fft().forward(Eigen::VectorXcd(x.segment(b * m, m).cast<std::complex<double>>())));
    }
    std::vector<Eigen::VectorXcd> outs(blocks_, Eigen::VectorXcd(m));
    for (int j = 0; j < m; ++j) {
      const Block blk = block_of(j);
      for (int r = 0; r < blocks_; ++r) {
        std::complex<double> acc = 0.0;
        for (int c = 0; c < blocks_; ++c) acc += blk(r, c) * hats[c][j];
        outs[r][j] = acc;
      }
    }
    Eigen::VectorXd y(dim());
    for (int b = 0; b < blocks_; ++b) y.segment(b * m, m) = ops_.fft().inverse(outs[b]).real();
    return y;
  }

  SpectralOps ops_;
  int blocks_;
  std::vector<Entry> entries_;
};

}  // namespace petv
