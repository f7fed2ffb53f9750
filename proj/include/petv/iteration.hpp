#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "petv/align.hpp"
#include "petv/error.hpp"
#include "petv/io.hpp"
#include "petv/problems.hpp"

namespace petv {

/// How the stabilizing factor enters the update.
struct FactorStrategy {
  enum class Variant { none, single, per_term };

  Variant variant = Variant::per_term;
  std::vector<double> gammas;  // empty means "use defaults"

  static FactorStrategy classic() { return {Variant::none, {}}; }
  static FactorStrategy single(double gamma) { return {Variant::single, {gamma}}; }
  static FactorStrategy single_default() { return {Variant::single, {}}; }
  static FactorStrategy per_term(std::vector<double> g) { return {Variant::per_term, std::move(g)}; }
  static FactorStrategy per_term_default() { return {Variant::per_term, {}}; }

  /// Exponents actually used for `p`: one for single, one per term for per_term.
  std::vector<double> resolve(const Problem& p) const;
};

/// p / (p - 1).
inline double default_gamma(double degree) { return degree / (degree - 1.0); }

inline std::vector<double> FactorStrategy::resolve(const Problem& p) const {
  switch (variant) {
    case Variant::none:
      return {};
    case Variant::single:
      if (gammas.empty()) return {default_gamma(p.terms().front().degree)};
      if (gammas.size() != 1) throw ConfigError("single-gamma strategy takes exactly one exponent");
      return gammas;
    case Variant::per_term:
      if (gammas.empty()) {
        std::vector<double> g;
        for (const auto& t : p.terms()) g.push_back(default_gamma(t.degree));
        return g;
      }
      if (static_cast<int>(gammas.size()) != p.num_terms()) {
        throw ConfigError("per-term strategy needs " + std::to_string(p.num_terms()) + " exponents, got " +
                          std::to_string(gammas.size()));
      }
      return gammas;
  }
  return {};
}

inline const char* engine_name(FactorStrategy::Variant v) {
  switch (v) {
    case FactorStrategy::Variant::none: return "classic";
    case FactorStrategy::Variant::single: return "petviashvili";
    case FactorStrategy::Variant::per_term: return "extended";
  }
  return "?";
}

/// Starting state. Gaussian a exp(-((x-c)/w)^2), sech a sech((x-c)/w), or an explicit vector.
/// For two-component problems the second component uses `second_amplitude`.
struct InitialGuess {
  enum class Kind { gaussian, sech, field };

  Kind kind = Kind::gaussian;
  double amplitude = 1.5;
  double width = 2.0;
  double center = 0.0;
  double second_amplitude = 1.5;
  Eigen::VectorXd values;

  static InitialGuess gaussian(double a, double w, double c = 0.0) {
    InitialGuess g;
    g.amplitude = a;
    g.second_amplitude = a;
    g.width = w;
    g.center = c;
    return g;
  }
  static InitialGuess sech(double a, double w, double c = 0.0) {
    InitialGuess g = gaussian(a, w, c);
    g.kind = Kind::sech;
    return g;
  }
  static InitialGuess field(Eigen::VectorXd v) {
    InitialGuess g;
    g.kind = Kind::field;
    g.values = std::move(v);
    return g;
  }

  Eigen::VectorXd build(const Problem& p) const {
    if (kind == Kind::field) {
      detail::require_size(values.size(), p.state_dim(), "initial guess");
      return values;
    }
    if (!(width > 0.0)) throw ConfigError("initial guess: width must be positive");
    const GridSpec& g = p.grid();
    const int m = g.num_points();
    Eigen::VectorXd x(p.state_dim());
    for (int c = 0; c < p.components(); ++c) {
      const double a = c == 0 ? amplitude : second_amplitude;
      for (int j = 0; j < m; ++j) {
        const double z = (g.node(j) - center) / width;
        x[c * m + j] = kind == Kind::gaussian ? a * std::exp(-z * z) : a / std::cosh(z);
      }
    }
    return x;
  }
};

struct IterationConfig {
  int max_iters = 500;
  double residual_tol = 1e-10;
  FactorStrategy factor = FactorStrategy::per_term_default();
  InitialGuess guess;
  bool record_iterates = false;
  bool track_exact_error = true;
  double divergence_factor = 1e6;  // residual growth over its running minimum
  double collapse_ratio = 1e-10;   // ||x_n|| below this times ||x_0||

  void validate() const {
    if (max_iters < 1) throw ConfigError("iteration: max_iters must be at least 1");
    if (!(residual_tol > 0.0)) throw ConfigError("iteration: residual_tol must be positive");
  }
};

/// Entry n of every array refers to the iterate x_n, n = 0, 1, ...
struct IterationTrace {
  enum class Reason { converged, max_iters, diverged, non_finite };

  std::vector<double> residual;
  std::vector<double> factor;  // m(x_n); nan when undefined
  std::vector<double> factor_discrepancy;
  std::vector<double> exact_error;  // empty without an exact solution
  std::vector<Eigen::VectorXd> iterates;
  Eigen::VectorXd final_state;
  Reason reason = Reason::max_iters;
  std::string detail;
  std::vector<double> gammas;
  FactorStrategy::Variant variant = FactorStrategy::Variant::per_term;

  bool converged() const { return reason == Reason::converged; }
  /// Number of updates applied.
  int steps() const { return residual.empty() ? 0 : static_cast<int>(residual.size()) - 1; }
  double final_residual() const {
    return residual.empty() ? std::numeric_limits<double>::quiet_NaN() : residual.back();
  }
};

inline const char* reason_name(IterationTrace::Reason r) {
  switch (r) {
    case IterationTrace::Reason::converged: return "converged";
    case IterationTrace::Reason::max_iters: return "max_iters";
    case IterationTrace::Reason::diverged: return "diverged";
    case IterationTrace::Reason::non_finite: return "non-finite";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Scalar diagnostics

/// m(x) = <Lx, x> / <N(x), x>.
inline double stabilizing_factor(const Problem& p, const Eigen::VectorXd& x) {
  detail::require_size(x.size(), p.state_dim(), "stabilizing_factor");
  const double den = eval_N(p, x).dot(x);
  if (!(std::abs(den) >= 1e-300)) throw DomainError("degenerate iterate: <N(x), x> vanishes");
  return p.op().apply(x).dot(x) / den;
}

/// ||Lx - N(x)|| / ||x~||, x~ the exact profile when attached, else x itself.
inline double residual_error(const Problem& p, const Eigen::VectorXd& x) {
  detail::require_size(x.size(), p.state_dim(), "residual_error");
  const double scale = p.has_exact_solution() ? p.exact_solution()->norm() : x.norm();
  return (p.op().apply(x) - eval_N(p, x)).norm() / scale;
}

/// Relative distance to the exact profile, minimized over translations.
inline double exact_error(const Problem& p, const Eigen::VectorXd& x) {
  if (!p.has_exact_solution()) throw ConfigError("exact_error: problem has no exact solution");
  detail::require_size(x.size(), p.state_dim(), "exact_error");
  SpectralOps ops(p.grid());
  return aligned_relative_error(ops, p.components(), x, *p.exact_solution()).error;
}

// ---------------------------------------------------------------------------
// Single updates

inline Eigen::VectorXd classic_step(const Problem& p, const Eigen::VectorXd& x) {
  return p.op().solve(eval_N(p, x));
}

namespace detail {

inline double factor_power(double m, double gamma) {
  if (gamma == 0.0) return 1.0;
  if (!(m > 0.0) && gamma != std::round(gamma)) {
    throw DomainError("stabilizing factor " + io::format_number(m) + " is not positive");
  }
  return std::pow(m, gamma);
}

}  // namespace detail

inline Eigen::VectorXd petviashvili_step(const Problem& p, const Eigen::VectorXd& x, double gamma) {
  const double s = detail::factor_power(stabilizing_factor(p, x), gamma);
  return s * classic_step(p, x);
}

/// sum_j m(x)^{gamma_j} L^{-1} N_j(x).
inline Eigen::VectorXd extended_step(const Problem& p, const Eigen::VectorXd& x, const std::vector<double>& gammas) {
  detail::require_size(static_cast<long>(gammas.size()), p.num_terms(), "extended_step gammas");
  const double m = stabilizing_factor(p, x);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p.state_dim());
  for (int j = 0; j < p.num_terms(); ++j) rhs += detail::factor_power(m, gammas[j]) * eval_term(p, j, x);
  return p.op().solve(rhs);
}

inline Eigen::VectorXd strategy_step(const Problem& p, const Eigen::VectorXd& x, FactorStrategy::Variant v,
                                     const std::vector<double>& gammas) {
  switch (v) {
    case FactorStrategy::Variant::none: return classic_step(p, x);
    case FactorStrategy::Variant::single: return petviashvili_step(p, x, gammas.at(0));
    case FactorStrategy::Variant::per_term: return extended_step(p, x, gammas);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Engines

/// Runs the fixed-point map selected by `cfg.factor` from `cfg.guess`.
///
/// Stops when the residual drops below tol, after max_iters updates, on non-finite
/// entries, or as "diverged" when the residual exceeds divergence_factor times its running
/// minimum, the iterate collapses to zero, or the stabilizing factor becomes unusable.
inline IterationTrace run_iteration(const Problem& p, const IterationConfig& cfg) {
  cfg.validate();
  IterationTrace tr;
  tr.variant = cfg.factor.variant;
  tr.gammas = cfg.factor.resolve(p);

  Eigen::VectorXd x = cfg.guess.build(p);
  const bool track_exact = cfg.track_exact_error && p.has_exact_solution();
  std::optional<SpectralOps> ops;
  if (track_exact) ops.emplace(p.grid());
  const double start_norm = x.norm();
  double min_residual = std::numeric_limits<double>::infinity();

  auto finish = [&](IterationTrace::Reason r, std::string why) {
    tr.reason = r;
    tr.detail = std::move(why);
    tr.final_state = x;
    return tr;
  };

  if (!x.allFinite()) return finish(IterationTrace::Reason::non_finite, "initial guess has non-finite entries");
  if (!(start_norm > 0.0)) return finish(IterationTrace::Reason::diverged, "degenerate stall: zero initial guess");

  for (int n = 0;; ++n) {
    if (!x.allFinite()) return finish(IterationTrace::Reason::non_finite, "non-finite entries at step " + std::to_string(n));
    if (x.norm() < cfg.collapse_ratio * start_norm) {
      return finish(IterationTrace::Reason::diverged, "collapsed to the trivial solution at step " + std::to_string(n));
    }

    const double res = residual_error(p, x);
    double m = std::numeric_limits<double>::quiet_NaN();
    try {
      m = stabilizing_factor(p, x);
    } catch (const DomainError&) {
    }
    tr.residual.push_back(res);
    tr.factor.push_back(m);
    tr.factor_discrepancy.push_back(std::abs(m - 1.0));
    if (track_exact) tr.exact_error.push_back(aligned_relative_error(*ops, p.components(), x, *p.exact_solution()).error);
    if (cfg.record_iterates) tr.iterates.push_back(x);

    if (!std::isfinite(res)) return finish(IterationTrace::Reason::non_finite, "non-finite residual at step " + std::to_string(n));
    if (res < cfg.residual_tol) return finish(IterationTrace::Reason::converged, "");
    min_residual = std::min(min_residual, res);
    if (res > cfg.divergence_factor * min_residual) {
      return finish(IterationTrace::Reason::diverged, "residual grew beyond " + io::format_number(cfg.divergence_factor) +
                                                          " times its minimum at step " + std::to_string(n));
    }
    if (n == cfg.max_iters) return finish(IterationTrace::Reason::max_iters, "");

    try {
      x = strategy_step(p, x, tr.variant, tr.gammas);
    } catch (const DomainError& e) {
      return finish(IterationTrace::Reason::diverged, e.what());
    }
  }
}

inline IterationTrace iterate_classic(const Problem& p, IterationConfig cfg) {
  cfg.factor = FactorStrategy::classic();
  return run_iteration(p, cfg);
}

inline IterationTrace iterate_petviashvili(const Problem& p, IterationConfig cfg) {
  if (cfg.factor.variant != FactorStrategy::Variant::single) cfg.factor = FactorStrategy::single_default();
  return run_iteration(p, cfg);
}

inline IterationTrace iterate_extended(const Problem& p, IterationConfig cfg) {
  if (cfg.factor.variant != FactorStrategy::Variant::per_term) cfg.factor = FactorStrategy::per_term_default();
  return run_iteration(p, cfg);
}

// ---------------------------------------------------------------------------
// Serialization

inline io::CsvTable trace_table(const IterationTrace& tr) {
  io::CsvTable t({"n", "residual", "factor_discrepancy", "exact_error"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n = 0; n < tr.residual.size(); ++n) {
    t.add_row({static_cast<double>(n), tr.residual[n], tr.factor_discrepancy[n],
               n < tr.exact_error.size() ? tr.exact_error[n] : nan});
  }
  return t;
}

/// Final profile as columns x, component_0, ...
inline io::CsvTable profile_table(const Problem& p, const Eigen::VectorXd& x) {
  std::vector<std::string> header{"x"};
  for (int c = 0; c < p.components(); ++c) header.push_back("u" + std::to_string(c));
  io::CsvTable t(header);
  const int m = p.grid().num_points();
  for (int j = 0; j < m; ++j) {
    std::vector<double> row{p.grid().node(j)};
    for (int c = 0; c < p.components(); ++c) row.push_back(x[c * m + j]);
    t.add_row(row);
  }
  return t;
}

inline nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline nlohmann::json problem_json(const Problem& p) {
  nlohmann::json j;
  j["name"] = p.name();
  j["grid"] = {{"l", p.grid().half_length()}, {"m", p.grid().num_points()}};
  j["components"] = p.components();
  j["degrees"] = p.degrees();
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : p.parameters()) params[k] = v;
  j["parameters"] = params;
  j["has_exact_solution"] = p.has_exact_solution();
  return j;
}

inline nlohmann::json trace_json(const Problem& p, const IterationConfig& cfg, const IterationTrace& tr) {
  nlohmann::json j;
  j["problem"] = problem_json(p);
  j["engine"] = engine_name(tr.variant);
  j["gammas"] = tr.gammas;
  j["max_iters"] = cfg.max_iters;
  j["residual_tol"] = cfg.residual_tol;
  j["reason"] = reason_name(tr.reason);
  j["detail"] = tr.detail;
  j["iterations"] = tr.steps();
  j["final_residual"] = json_number(tr.final_residual());
  j["final_factor"] = json_number(tr.factor.empty() ? std::numeric_limits<double>::quiet_NaN() : tr.factor.back());
  if (!tr.exact_error.empty()) j["final_exact_error"] = json_number(tr.exact_error.back());
  return j;
}

}  // namespace petv
