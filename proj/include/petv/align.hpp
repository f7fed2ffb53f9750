#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>

#include "petv/error.hpp"
#include "petv/spectral.hpp"

namespace petv {

/// Result of minimizing a relative error over circular translations.
struct AlignedError {
  double error = 0.0;  // ||T_d x - ref|| / ||ref||
  double shift = 0.0;  // translation d applied to x, in (-l, l]
};

/// Relative error of x against ref minimized over translations x(. - d).
///
/// Both vectors stack `components` grid fields and every component is translated by the
/// same d. The best integer node shift is found by exhaustive search and then refined
/// by golden-section search over the band-limited translation on [d* - h, d* + h].
inline AlignedError aligned_relative_error(const SpectralOps& ops, int components,
                                           const Eigen::VectorXd& x, const Eigen::VectorXd& ref) {
  const int m = ops.grid().num_points();
  detail::require_size(x.size(), components * m, "aligned_relative_error");
  detail::require_size(ref.size(), components * m, "aligned_relative_error");
  const double ref_norm = ref.norm();
  if (!(ref_norm > 0.0)) throw DomainError("aligned_relative_error: zero reference");

  int best_shift = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < m; ++s) {
    double acc = 0.0;
    for (int c = 0; c < components; ++c) {
      const double* xc = x.data() + c * m;
      const double* rc = ref.data() + c * m;
      for (int j = 0; j < m; ++j) {
        int src = j - s;
        if (src < 0) src += m;
        const double d = xc[src] - rc[j];
        acc += d * d;
      }
    }
    if (acc < best) {
      best = acc;
      best_shift = s;
    }
  }

  const double h = ops.grid().spacing();
  auto sq_error = [&](double d) {
    double acc = 0.0;
    for (int c = 0; c < components; ++c) {
      const Eigen::VectorXd moved = ops.translate(Eigen::VectorXd(x.segment(c * m, m)), d);
      acc += (moved - ref.segment(c * m, m)).squaredNorm();
    }
    return acc;
  };

  const double center = best_shift * h;
  double a = center - h, b = center + h;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
  double f1 = sq_error(c1), f2 = sq_error(c2);
  for (int it = 0; it < 80 && (b - a) > 1e-15 * h; ++it) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - phi * (b - a);
      f1 = sq_error(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + phi * (b - a);
      f2 = sq_error(c2);
    }
  }
  double d_best = f1 < f2 ? c1 : c2;
  double f_best = std::min(f1, f2);
  if (best <= f_best) {  // the exact node shift is never worse than the refinement
    d_best = center;
    f_best = best;
  }
  const double period = ops.grid().length();
  d_best = std::remainder(d_best, period);
  return {std::sqrt(f_best) / ref_norm, d_best};
}

}  // namespace petv
