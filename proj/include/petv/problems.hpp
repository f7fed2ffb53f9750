#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "petv/error.hpp"
#include "petv/linear_operator.hpp"
#include "petv/spectral.hpp"

namespace petv {

/// One homogeneous piece N_j of the nonlinearity, of degree p with |p| > 1.
struct HomogeneousTerm {
  double degree = 0.0;
  std::string label;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> evaluate;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

/// Pointwise nonlinearity F(|u|^2) u = sum_i coefficient_i |u|^{exponent_i} u of an NLS-type
/// equation i u_t + u_xx - V(x) u + F(|u|^2) u = 0.
struct NlsModel {
  struct Power {
    double coefficient;
    double exponent;  // on |u|
  };
  Eigen::VectorXd potential;  // V at grid nodes (zeros when absent)
  std::vector<Power> powers;

  double rate(double modulus) const {
    double f = 0.0;
    for (const auto& p : powers) f += p.coefficient * std::pow(modulus, p.exponent);
    return f;
  }
};

/// Sum of two sech^2 wells: V(x) = -depth_left sech^2(x + center_left) - depth_right sech^2(x - center_right).
struct PotentialSpec {
  double depth_left = 0.0;
  double center_left = 0.0;
  double depth_right = 0.0;
  double center_right = 0.0;

  static PotentialSpec symmetric(double depth, double center) {
    return {depth, center, depth, center};
  }

  double operator()(double x) const {
    const double a = 1.0 / std::cosh(x + center_left);
    const double b = 1.0 / std::cosh(x - center_right);
    return -depth_left * a * a - depth_right * b * b;
  }

  Eigen::VectorXd sample(const GridSpec& grid) const {
    Eigen::VectorXd v(grid.num_points());
    for (int j = 0; j < grid.num_points(); ++j) v[j] = (*this)(grid.node(j));
    return v;
  }
};

/// Coefficients of the interfacial e-Boussinesq system.
class BoussinesqCoefficients {
 public:
  BoussinesqCoefficients(double r, double depth, double s, double speed)
      : r_(r), depth_(depth), s_(s), speed_(speed) {
    if (r + depth == 0.0) throw ConfigError("boussinesq: r + H must be nonzero");
    const double rh = r + depth;
    d1_ = depth / rh;
    d2_ = depth * depth / (2.0 * rh * rh) * (s + 2.0 / 3.0 * (1.0 + r * depth));
    d3_ = s * d1_ / 2.0;
    d4_ = (depth * depth - r) / (rh * rh);
    d5_ = r * (1.0 + depth) * (1.0 + depth) / (rh * rh * rh);
  }

  /// s = -(1 + r H).
  static BoussinesqCoefficients with_default_s(double r, double depth, double speed) {
    return BoussinesqCoefficients(r, depth, -(1.0 + r * depth), speed);
  }

  double r() const { return r_; }
  double depth() const { return depth_; }
  double s() const { return s_; }
  double speed() const { return speed_; }
  double d1() const { return d1_; }
  double d2() const { return d2_; }
  double d3() const { return d3_; }
  double d4() const { return d4_; }
  double d5() const { return d5_; }

 private:
  double r_, depth_, s_, speed_;
  double d1_, d2_, d3_, d4_, d5_;
};

/// Discrete stationary system L x = sum_j N_j(x).
class Problem {
 public:
  Problem(std::string name, GridSpec grid, int components, std::shared_ptr<const LinearOperator> op,
          std::vector<HomogeneousTerm> terms)
      : name_(std::move(name)),
        grid_(std::move(grid)),
        components_(components),
        op_(std::move(op)),
        terms_(std::move(terms)) {
    if (components_ < 1) throw ConfigError("problem: components must be positive");
    if (!op_) throw ConfigError("problem: missing linear operator");
    if (op_->dim() != state_dim()) throw DimensionError("problem: operator dimension mismatch");
    if (terms_.empty()) throw ConfigError("problem: at least one homogeneous term is required");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (!(std::abs(terms_[i].degree) > 1.0)) {
        throw ConfigError("problem: term '" + terms_[i].label + "' has |degree| <= 1");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (terms_[i].degree == terms_[j].degree) {
          throw ConfigError("problem: degenerate degrees, two terms of degree " +
                            std::to_string(terms_[i].degree));
        }
      }
    }
  }

  const std::string& name() const { return name_; }
  const GridSpec& grid() const { return grid_; }
  int components() const { return components_; }
  int state_dim() const { return components_ * grid_.num_points(); }
  const LinearOperator& op() const { return *op_; }
  const std::vector<HomogeneousTerm>& terms() const { return terms_; }
  int num_terms() const { return static_cast<int>(terms_.size()); }

  std::vector<double> degrees() const {
    std::vector<double> d;
    for (const auto& t : terms_) d.push_back(t.degree);
    return d;
  }

  const std::optional<Eigen::VectorXd>& exact_solution() const { return exact_; }
  bool has_exact_solution() const { return exact_.has_value(); }
  const std::map<std::string, double>& parameters() const { return parameters_; }
  const std::optional<NlsModel>& nls_model() const { return nls_; }
  const std::optional<BoussinesqCoefficients>& boussinesq() const { return boussinesq_; }
  bool has_potential() const { return has_potential_; }

  Problem& set_exact_solution(Eigen::VectorXd x) {
    detail::require_size(x.size(), state_dim(), "exact solution");
    exact_ = std::move(x);
    return *this;
  }
  Problem& set_parameter(const std::string& key, double value) {
    parameters_[key] = value;
    return *this;
  }
  Problem& set_nls_model(NlsModel m) {
    nls_ = std::move(m);
    return *this;
  }
  Problem& set_boussinesq(BoussinesqCoefficients c) {
    boussinesq_ = c;
    return *this;
  }
  Problem& set_has_potential(bool v) {
    has_potential_ = v;
    return *this;
  }

  /// Component c (0-based) of a stacked state.
  Eigen::VectorXd component(const Eigen::VectorXd& x, int c) const {
    detail::require_size(x.size(), state_dim(), "component");
    return x.segment(c * grid_.num_points(), grid_.num_points());
  }

 private:
  std::string name_;
  GridSpec grid_;
  int components_;
  std::shared_ptr<const LinearOperator> op_;
  std::vector<HomogeneousTerm> terms_;
  std::optional<Eigen::VectorXd> exact_;
  std::map<std::string, double> parameters_;
  std::optional<NlsModel> nls_;
  std::optional<BoussinesqCoefficients> boussinesq_;
  bool has_potential_ = false;
};

// ---------------------------------------------------------------------------
// Evaluation

inline Eigen::VectorXd eval_term(const Problem& p, int j, const Eigen::VectorXd& x) {
  detail::require_size(x.size(), p.state_dim(), "eval_term");
  return p.terms()[j].evaluate(x);
}

inline Eigen::VectorXd eval_N(const Problem& p, const Eigen::VectorXd& x) {
  detail::require_size(x.size(), p.state_dim(), "eval_N");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p.state_dim());
  for (const auto& t : p.terms()) out += t.evaluate(x);
  return out;
}

inline Eigen::MatrixXd eval_N_jacobian(const Problem& p, const Eigen::VectorXd& x) {
  detail::require_size(x.size(), p.state_dim(), "eval_N_jacobian");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p.state_dim(), p.state_dim());
  for (const auto& t : p.terms()) out += t.jacobian(x);
  return out;
}

// ---------------------------------------------------------------------------
// Builders

/// c |u|^e u, degree e + 1.
inline HomogeneousTerm power_term(double coefficient, double exponent, std::string label) {
  HomogeneousTerm t;
  t.degree = exponent + 1.0;
  t.label = std::move(label);
  t.evaluate = [=](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return coefficient * hadamard_power_product(u, exponent);
  };
  t.jacobian = [=](const Eigen::VectorXd& u) -> Eigen::MatrixXd {
    Eigen::VectorXd d(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      d[i] = coefficient * (exponent + 1.0) * (exponent == 0.0 ? 1.0 : std::pow(std::abs(u[i]), exponent));
    }
    return d.asDiagonal();
  };
  return t;
}

/// Closed-form localized profile of -mu U + U'' + (alpha |U|^sigma + beta |U|^{2 sigma}) U = 0:
/// U = (A / (B + cosh(D x)))^{1/sigma}, D = sigma sqrt(mu),
/// B = sgn(alpha) (1 + (2+sigma)^2 beta mu / ((1+sigma) alpha^2))^{-1/2}, A = (2+sigma) B mu / alpha.
inline double exact_profile(double x, double mu, double alpha, double beta, double sigma) {
  if (alpha == 0.0) throw DomainError("exact_profile: alpha must be nonzero");
  if (!(mu > 0.0)) throw DomainError("exact_profile: mu must be positive");
  if (!(sigma > 0.0)) throw DomainError("exact_profile: sigma must be positive");
  const double root_arg = 1.0 + (2.0 + sigma) * (2.0 + sigma) * beta * mu / ((1.0 + sigma) * alpha * alpha);
  if (!(root_arg > 0.0)) throw DomainError("exact_profile: nonpositive root argument");
  const double b = (alpha > 0.0 ? 1.0 : -1.0) / std::sqrt(root_arg);
  const double a = (2.0 + sigma) * b * mu / alpha;
  const double d = sigma * std::sqrt(mu);
  const double denom = b + std::cosh(d * x);
  if (std::isinf(denom)) return 0.0;  // far tail
  const double ratio = a / denom;
  if (!(ratio > 0.0)) throw DomainError("exact_profile: A / (B + cosh(D x)) must be positive");
  return std::pow(ratio, 1.0 / sigma);
}

namespace detail {

inline std::shared_ptr<const LinearOperator> schrodinger_operator(const GridSpec& grid, double mu,
                                                                  const Eigen::VectorXd* potential) {
  if (!potential) {
    // mu I - D_h^2
    return std::make_shared<FourierBlockOperator>(
        grid, 1, std::vector<FourierBlockOperator::Entry>{{mu, -1.0}});
  }
  const int m = grid.num_points();
  Eigen::MatrixXd l = -diff_matrix(grid, 2);
  l.diagonal().array() += mu;
  l.diagonal() += *potential;
  return std::make_shared<DenseOperator>(std::move(l));
}

}  // namespace detail

/// L = mu I - D_h^2, N = alpha |U|^{m1} U + beta |U|^{m2} U.
inline Problem build_nls_power(double mu, double alpha, double beta, double m1, double m2,
                               const GridSpec& grid) {
  if (!(mu > 0.0)) throw ConfigError("nls_power: mu must be positive");
  if (m1 == m2) throw ConfigError("nls_power: degenerate degrees (m1 == m2)");
  std::vector<HomogeneousTerm> terms;
  std::vector<NlsModel::Power> powers;
  if (alpha != 0.0) {
    terms.push_back(power_term(alpha, m1, "alpha|U|^m1 U"));
    powers.push_back({alpha, m1});
  }
  if (beta != 0.0) {
    terms.push_back(power_term(beta, m2, "beta|U|^m2 U"));
    powers.push_back({beta, m2});
  }
  Problem p("nls_power", grid, 1, detail::schrodinger_operator(grid, mu, nullptr), std::move(terms));
  p.set_parameter("mu", mu).set_parameter("alpha", alpha).set_parameter("beta", beta);
  p.set_parameter("m1", m1).set_parameter("m2", m2);
  p.set_nls_model({Eigen::VectorXd::Zero(grid.num_points()), powers});
  if (m1 > 0.0 && m2 == 2.0 * m1 && alpha > 0.0 && beta > 0.0) {
    Eigen::VectorXd u(grid.num_points());
    for (int j = 0; j < grid.num_points(); ++j) u[j] = exact_profile(grid.node(j), mu, alpha, beta, m1);
    p.set_exact_solution(std::move(u));
  }
  return p;
}

/// L = mu I - D_h^2 + diag(V), V the symmetric double well; N = |U|^2 U - gamma |U|^4 U.
inline Problem build_gnls_double_well(double mu, double depth, double center, double gamma,
                                      const GridSpec& grid) {
  if (!(depth > 0.0)) throw ConfigError("gnls_double_well: V0 must be positive");
  if (!(mu > 0.0)) throw ConfigError("gnls_double_well: mu must be positive");
  if (gamma < 0.0) throw ConfigError("gnls_double_well: gamma must be nonnegative");
  const PotentialSpec pot = PotentialSpec::symmetric(depth, center);
  const Eigen::VectorXd v = pot.sample(grid);
  std::vector<HomogeneousTerm> terms{power_term(1.0, 2.0, "|U|^2 U")};
  std::vector<NlsModel::Power> powers{{1.0, 2.0}};
  if (gamma != 0.0) {
    terms.push_back(power_term(-gamma, 4.0, "-gamma|U|^4 U"));
    powers.push_back({-gamma, 4.0});
  }
  Problem p("gnls_double_well", grid, 1, detail::schrodinger_operator(grid, mu, &v), std::move(terms));
  p.set_parameter("mu", mu).set_parameter("V0", depth).set_parameter("x0", center);
  p.set_parameter("gamma", gamma);
  p.set_nls_model({v, powers}).set_has_potential(true);
  return p;
}

/// Asymmetric well -3.5 sech^2(x+1.5) - 3 sech^2(x-1.5); N = |U|^2 U - 0.2 |U|^4 U + kappa |U|^6 U.
inline Problem build_gnls_three_term(double mu, double kappa, const GridSpec& grid) {
  if (!(mu > 0.0)) throw ConfigError("gnls_three_term: mu must be positive");
  const PotentialSpec pot{3.5, 1.5, 3.0, 1.5};
  const Eigen::VectorXd v = pot.sample(grid);
  std::vector<HomogeneousTerm> terms{power_term(1.0, 2.0, "|U|^2 U"), power_term(-0.2, 4.0, "-0.2|U|^4 U")};
  std::vector<NlsModel::Power> powers{{1.0, 2.0}, {-0.2, 4.0}};
  if (kappa != 0.0) {
    terms.push_back(power_term(kappa, 6.0, "kappa|U|^6 U"));
    powers.push_back({kappa, 6.0});
  }
  Problem p("gnls_three_term", grid, 1, detail::schrodinger_operator(grid, mu, &v), std::move(terms));
  p.set_parameter("mu", mu).set_parameter("kappa", kappa);
  p.set_nls_model({v, powers}).set_has_potential(true);
  return p;
}

/// Stacked state (eta, W). L = [[c I, -(d1 I + d2 D^2)], [-(1/d1) I, c (I + d3 D^2)]].
/// N_2 = (d4 W eta, (d4/2) W^2), N_3 = (-d5 W eta^2, -d5 W^2 eta), so that L x = N_2 + N_3.
inline Problem build_eboussinesq(const BoussinesqCoefficients& c, const GridSpec& grid) {
  const int m = grid.num_points();
  const double d1 = c.d1(), d2 = c.d2(), d3 = c.d3(), d4 = c.d4(), d5 = c.d5(), cs = c.speed();
  if (d1 == 0.0) throw ConfigError("eboussinesq: d1 = H/(r+H) must be nonzero");
  auto op = std::make_shared<FourierBlockOperator>(
      grid, 2,
      std::vector<FourierBlockOperator::Entry>{{cs, 0.0}, {-d1, -d2}, {-1.0 / d1, 0.0}, {cs, cs * d3}});

  HomogeneousTerm quad;
  quad.degree = 2.0;
  quad.label = "quadratic";
  quad.evaluate = [=](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const auto eta = x.head(m).array();
    const auto w = x.tail(m).array();
    Eigen::VectorXd out(2 * m);
    out.head(m) = d4 * w * eta;
    out.tail(m) = 0.5 * d4 * w * w;
    return out;
  };
  quad.jacobian = [=](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const Eigen::VectorXd eta = x.head(m);
    const Eigen::VectorXd w = x.tail(m);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    j.block(0, 0, m, m).diagonal() = d4 * w;
    j.block(0, m, m, m).diagonal() = d4 * eta;
    j.block(m, m, m, m).diagonal() = d4 * w;
    return j;
  };

  HomogeneousTerm cubic;
  cubic.degree = 3.0;
  cubic.label = "cubic";
  cubic.evaluate = [=](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const auto eta = x.head(m).array();
    const auto w = x.tail(m).array();
    Eigen::VectorXd out(2 * m);
    out.head(m) = -d5 * w * eta * eta;
    out.tail(m) = -d5 * w * w * eta;
    return out;
  };
  cubic.jacobian = [=](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const Eigen::ArrayXd eta = x.head(m);
    const Eigen::ArrayXd w = x.tail(m);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    j.block(0, 0, m, m).diagonal() = (-2.0 * d5 * w * eta).matrix();
    j.block(0, m, m, m).diagonal() = (-d5 * eta * eta).matrix();
    j.block(m, 0, m, m).diagonal() = (-d5 * w * w).matrix();
    j.block(m, m, m, m).diagonal() = (-2.0 * d5 * w * eta).matrix();
    return j;
  };

  Problem p("eboussinesq", grid, 2, std::move(op), {quad, cubic});
  p.set_parameter("r", c.r()).set_parameter("H", c.depth()).set_parameter("s", c.s());
  p.set_parameter("c_s", c.speed());
  p.set_boussinesq(c);
  return p;
}

}  // namespace petv
