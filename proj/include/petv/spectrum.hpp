#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "petv/error.hpp"
#include "petv/io.hpp"
#include "petv/iteration.hpp"
#include "petv/problems.hpp"

extern "C" void dgeev_(const char* jobvl, const char* jobvr, const int* n, double* a, const int* lda, double* wr,
                       double* wi, double* vl, const int* ldvl, double* vr, const int* ldvr, double* work,
                       const int* lwork, int* info, std::size_t jobvl_len, std::size_t jobvr_len);

namespace petv {

/// L^{-1} N'(x).
inline Eigen::MatrixXd build_S(const Problem& p, const Eigen::VectorXd& x) {
  detail::require_size(x.size(), p.state_dim(), "build_S");
  return p.op().solve(eval_N_jacobian(p, x));
}

/// Gradient of m(x) = <Lx, x> / <N(x), x>.
inline Eigen::VectorXd grad_stabilizing_factor(const Problem& p, const Eigen::VectorXd& x) {
  detail::require_size(x.size(), p.state_dim(), "grad_stabilizing_factor");
  const Eigen::VectorXd lx = p.op().apply(x);
  const Eigen::VectorXd n = eval_N(p, x);
  const double num = lx.dot(x);
  const double den = n.dot(x);
  if (!(std::abs(den) >= 1e-300)) throw DomainError("degenerate iterate: <N(x), x> vanishes");
  const Eigen::VectorXd grad_num = lx + p.op().apply_transpose(x);
  const Eigen::VectorXd grad_den = eval_N_jacobian(p, x).transpose() * x + n;
  return (grad_num * den - num * grad_den) / (den * den);
}

enum class JacobianMode { analytic_general, paper_two_term, paper_itermat2, finite_difference };

inline const char* mode_name(JacobianMode m) {
  switch (m) {
    case JacobianMode::analytic_general: return "analytic";
    case JacobianMode::paper_two_term: return "two-term";
    case JacobianMode::paper_itermat2: return "itermat";
    case JacobianMode::finite_difference: return "finite-difference";
  }
  return "?";
}

/// Jacobian of F(x) = sum_j m(x)^{gamma_j} L^{-1} N_j(x).
///
/// analytic_general is valid at any x. paper_two_term is the closed form for two terms at a
/// fixed point; paper_itermat2 is sum_j gamma_j / <N_j, x> N_j x^T (I - S), evaluated as written.
/// finite_difference uses central differences of extended_step with step 1e-6 max(1, ||x||).
inline Eigen::MatrixXd build_F_jacobian(const Problem& p, const Eigen::VectorXd& x, const std::vector<double>& gammas,
                                        JacobianMode mode) {
  detail::require_size(x.size(), p.state_dim(), "build_F_jacobian");
  detail::require_size(static_cast<long>(gammas.size()), p.num_terms(), "build_F_jacobian gammas");
  const int n = p.state_dim();

  switch (mode) {
    case JacobianMode::analytic_general: {
      const double m = stabilizing_factor(p, x);
      Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
      Eigen::VectorXd dfactor = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < p.num_terms(); ++j) {
        const double g = gammas[j];
        jac += detail::factor_power(m, g) * p.terms()[j].jacobian(x);
        if (g != 0.0) dfactor += g * detail::factor_power(m, g - 1.0) * eval_term(p, j, x);
      }
      Eigen::MatrixXd out = p.op().solve(jac);
      if (dfactor.squaredNorm() > 0.0) {
        out.noalias() += p.op().solve(dfactor) * grad_stabilizing_factor(p, x).transpose();
      }
      return out;
    }
    case JacobianMode::paper_two_term: {
      if (p.num_terms() != 2) throw ConfigError("two-term Jacobian form needs exactly two terms");
      const double p1 = p.terms()[0].degree, p2 = p.terms()[1].degree;
      const double m = stabilizing_factor(p, x);
      const Eigen::VectorXd gm = grad_stabilizing_factor(p, x);
      const Eigen::VectorXd gs1 = gammas[0] * detail::factor_power(m, gammas[0] - 1.0) * gm;
      const Eigen::VectorXd gs2 = gammas[1] * detail::factor_power(m, gammas[1] - 1.0) * gm;
      const Eigen::MatrixXd s = build_S(p, x);
      const Eigen::VectorXd sx = s * x;
      const Eigen::VectorXd a1 = p2 * x - sx;
      const Eigen::VectorXd a2 = p1 * x - sx;
      return s + (a1 * gs1.transpose() - a2 * gs2.transpose()) / (p2 - p1);
    }
    case JacobianMode::paper_itermat2: {
      const Eigen::MatrixXd s = build_S(p, x);
      const Eigen::RowVectorXd row = x.transpose() - x.transpose() * s;  // x^T (I - S)
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
      for (int j = 0; j < p.num_terms(); ++j) {
        const Eigen::VectorXd nj = eval_term(p, j, x);
        const double den = nj.dot(x);
        if (!(std::abs(den) >= 1e-300)) throw DomainError("degenerate iterate: <N_j(x), x> vanishes");
        out.noalias() += (gammas[j] / den) * nj * row;
      }
      return out;
    }
    case JacobianMode::finite_difference: {
      const double h = 1e-6 * std::max(1.0, x.norm());
      Eigen::MatrixXd out(n, n);
      Eigen::VectorXd probe = x;
      for (int c = 0; c < n; ++c) {
        probe[c] = x[c] + h;
        const Eigen::VectorXd fp = extended_step(p, probe, gammas);
        probe[c] = x[c] - h;
        const Eigen::VectorXd fm = extended_step(p, probe, gammas);
        probe[c] = x[c];
        out.col(c) = (fp - fm) / (2.0 * h);
      }
      return out;
    }
  }
  return {};
}

namespace detail {

inline bool eigen_order(const std::complex<double>& a, const std::complex<double>& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (ma != mb) return ma > mb;
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

}  // namespace detail

/// All eigenvalues of a square real matrix, sorted by descending magnitude
/// (ties: descending real part, then descending imaginary part).
inline std::vector<std::complex<double>> all_eigenvalues(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionError("eigenvalues: matrix not square");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return {};
  if (!a.allFinite()) throw NumericalError("eigenvalues: matrix has non-finite entries");
  Eigen::MatrixXd work_matrix = a;
  std::vector<double> wr(n), wi(n);
  const char no = 'N';
  const int one = 1;
  int info = 0;
  int lwork = -1;
  double query = 0.0;
  dgeev_(&no, &no, &n, work_matrix.data(), &n, wr.data(), wi.data(), nullptr, &one, nullptr, &one, &query, &lwork,
         &info, 1, 1);
  if (info != 0) throw NumericalError("eigensolver workspace query failed, info = " + std::to_string(info));
  lwork = std::max(1, static_cast<int>(query));
  std::vector<double> work(lwork);
  dgeev_(&no, &no, &n, work_matrix.data(), &n, wr.data(), wi.data(), nullptr, &one, nullptr, &one, work.data(),
         &lwork, &info, 1, 1);
  if (info > 0) throw NumericalError("eigensolver did not converge, info = " + std::to_string(info));
  if (info < 0) throw NumericalError("eigensolver rejected argument " + std::to_string(-info));
  std::vector<std::complex<double>> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = {wr[i], wi[i]};
  std::sort(ev.begin(), ev.end(), detail::eigen_order);
  return ev;
}

/// The k largest-magnitude eigenvalues; k is clamped to the matrix size.
inline std::vector<std::complex<double>> top_eigenvalues(const Eigen::MatrixXd& a, int k) {
  if (k < 1) throw ConfigError("top_eigenvalues: k must be positive");
  auto ev = all_eigenvalues(a);
  if (static_cast<int>(ev.size()) > k) ev.resize(k);
  return ev;
}

/// Largest |lambda| after removing the one eigenvalue closest to 1, if it lies within `window`.
inline double spectral_radius_excluding_unit(const std::vector<std::complex<double>>& ev, double window = 1e-3) {
  int skip = -1;
  double best = window;
  for (int i = 0; i < static_cast<int>(ev.size()); ++i) {
    const double d = std::abs(ev[i] - 1.0);
    if (d < best) {
      best = d;
      skip = i;
    }
  }
  double r = 0.0;
  for (int i = 0; i < static_cast<int>(ev.size()); ++i) {
    if (i != skip) r = std::max(r, std::abs(ev[i]));
  }
  return r;
}

inline bool has_eigenvalue_near(const std::vector<std::complex<double>>& ev, std::complex<double> z, double tol) {
  return std::any_of(ev.begin(), ev.end(), [&](const auto& l) { return std::abs(l - z) < tol; });
}

struct SpectrumReport {
  std::string kind;   // "S" or "F'(<mode>)"
  std::string point;  // "exact solution" or "final iterate"
  std::vector<double> gammas;
  std::vector<std::complex<double>> eigenvalues;  // top k
  int dim = 0;
  double trace = 0.0;
  double eigenvalue_sum = 0.0;
  bool unit_excluded = false;
  double spectral_radius = 0.0;  // over all eigenvalues, possibly excluding the unit one
  bool has_unit = false;         // an eigenvalue within 1e-3 of 1
};

/// Eigen-analysis of one matrix; `exclude_unit` drops the translation eigenvalue from the radius.
inline SpectrumReport analyze_matrix(const Eigen::MatrixXd& a, int k, std::string kind, std::string point,
                                     bool exclude_unit, std::vector<double> gammas = {}) {
  SpectrumReport r;
  r.kind = std::move(kind);
  r.point = std::move(point);
  r.gammas = std::move(gammas);
  r.dim = static_cast<int>(a.rows());
  const auto ev = all_eigenvalues(a);
  r.trace = a.trace();
  std::complex<double> sum = 0.0;
  for (const auto& l : ev) sum += l;
  r.eigenvalue_sum = sum.real();
  r.has_unit = has_eigenvalue_near(ev, 1.0, 1e-3);
  r.unit_excluded = exclude_unit;
  r.spectral_radius = exclude_unit ? spectral_radius_excluding_unit(ev) : (ev.empty() ? 0.0 : std::abs(ev.front()));
  r.eigenvalues.assign(ev.begin(), ev.begin() + std::min<std::size_t>(ev.size(), std::max(k, 1)));
  return r;
}

inline std::string format_complex(std::complex<double> z) {
  if (z.imag() == 0.0) return io::format_number(z.real());
  std::string s = io::format_number(z.real());
  s += z.imag() < 0.0 ? "-" : "+";
  s += io::format_number(std::abs(z.imag()));
  s += "i";
  return s;
}

inline nlohmann::json spectrum_json(const SpectrumReport& r) {
  nlohmann::json j;
  j["kind"] = r.kind;
  j["point"] = r.point;
  j["gammas"] = r.gammas;
  j["dim"] = r.dim;
  j["trace"] = r.trace;
  j["eigenvalue_sum"] = r.eigenvalue_sum;
  j["has_unit_eigenvalue"] = r.has_unit;
  j["unit_excluded"] = r.unit_excluded;
  j["spectral_radius"] = r.spectral_radius;
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& z : r.eigenvalues) ev.push_back({{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}});
  j["eigenvalues"] = ev;
  return j;
}

/// Side-by-side columns, one per report, one row per eigenvalue rank.
inline std::string spectrum_table(const std::vector<SpectrumReport>& reports) {
  std::vector<std::vector<std::string>> cols;
  std::size_t rows = 0;
  for (const auto& r : reports) {
    std::vector<std::string> c{r.kind};
    for (const auto& z : r.eigenvalues) c.push_back(format_complex(z));
    rows = std::max(rows, c.size());
    cols.push_back(std::move(c));
  }
  std::vector<std::size_t> width;
  for (const auto& c : cols) {
    std::size_t w = 0;
    for (const auto& s : c) w = std::max(w, s.size());
    width.push_back(w);
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::string& s = i < cols[c].size() ? cols[c][i] : std::string();
      os << (c ? "   " : "") << s << std::string(width[c] - s.size(), ' ');
    }
    os << '\n';
    if (i == 0) {
      for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "   " : "") << std::string(width[c], '-');
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace petv
