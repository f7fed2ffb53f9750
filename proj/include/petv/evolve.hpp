#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "petv/align.hpp"
#include "petv/error.hpp"
#include "petv/io.hpp"
#include "petv/problems.hpp"
#include "petv/spectral.hpp"

namespace petv {

/// Time-ordered snapshots of one integration run.
template <class Scalar>
struct EvolutionRun {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit EvolutionRun(GridSpec g) : grid(std::move(g)) {}

  GridSpec grid;
  int components = 1;
  double dt = 0.0;
  double final_time = 0.0;
  int stride = 1;  // steps between snapshots
  std::vector<double> times;
  std::vector<Vector> snapshots;

  const Vector& initial() const { return snapshots.front(); }
  const Vector& last() const { return snapshots.back(); }
};

using NlsRun = EvolutionRun<std::complex<double>>;
using BoussinesqRun = EvolutionRun<double>;

namespace detail {

struct StepPlan {
  long steps;
  double dt;
};

inline StepPlan plan_steps(double dt, double final_time, int stride) {
  if (!(dt > 0.0)) throw ConfigError("evolve: dt must be positive");
  if (!(final_time >= 0.0)) throw ConfigError("evolve: T must be nonnegative");
  if (stride < 1) throw ConfigError("evolve: stride must be at least 1");
  const double ratio = final_time / dt;
  const long steps = std::lround(ratio);
  if (std::abs(ratio - steps) > 1e-6 * std::max(1.0, ratio)) {
    throw ConfigError("evolve: T must be an integer multiple of dt");
  }
  return {steps, steps > 0 ? final_time / steps : dt};
}

}  // namespace detail

/// Strang split-step Fourier for i u_t + u_xx - V u + F(|u|^2) u = 0.
///
/// Half step of the free flow exp(-i k^2 dt / 2) in Fourier space, then the exact pointwise
/// rotation u exp(i dt (F(|u|^2) - V)), then another free half step. Snapshots are kept
/// every `stride` steps and at T.
inline NlsRun splitstep_nls(const GridSpec& grid, const NlsModel& model, const Eigen::VectorXcd& u0, double dt,
                            double final_time, int stride) {
  const int m = grid.num_points();
  detail::require_size(u0.size(), m, "splitstep_nls initial state");
  const bool has_potential = model.potential.size() != 0;
  if (has_potential) detail::require_size(model.potential.size(), m, "splitstep_nls potential");
  if (!u0.allFinite()) throw DomainError("splitstep_nls: non-finite initial state");
  const auto plan = detail::plan_steps(dt, final_time, stride);

  NlsRun run(grid);
  run.dt = plan.dt;
  run.final_time = final_time;
  run.stride = stride;
  run.times.push_back(0.0);
  run.snapshots.push_back(u0);

  FourierTransform fft(m);
  Eigen::VectorXcd half(m);
  for (int j = 0; j < m; ++j) {
    const double k = grid.wavenumber(j);
    half[j] = std::polar(1.0, -k * k * plan.dt / 2.0);
  }

  Eigen::VectorXcd u = u0, hat(m);
  for (long n = 1; n <= plan.steps; ++n) {
    fft.forward(u.data(), hat.data());
    hat.array() *= half.array();
    fft.inverse(hat.data(), u.data());
    for (int j = 0; j < m; ++j) {
      const double v = has_potential ? model.potential[j] : 0.0;
      u[j] *= std::polar(1.0, plan.dt * (model.rate(std::abs(u[j])) - v));
    }
    fft.forward(u.data(), hat.data());
    hat.array() *= half.array();
    fft.inverse(hat.data(), u.data());
    if (n % stride == 0 || n == plan.steps) {
      if (!u.allFinite()) {
        throw NumericalError("splitstep_nls: non-finite state at t = " + io::format_number(n * plan.dt));
      }
      run.times.push_back(n * plan.dt);
      run.snapshots.push_back(u);
    }
  }
  return run;
}

/// Spectral method of lines with classic RK4 for the e-Boussinesq system
///   eta_t = -(d1 W + d2 W_xx + d4 W eta - d5 W eta^2)_x,
///   (1 + d3 d_xx) W_t = -(eta / d1 + (d4/2) W^2 - d5 W^2 eta)_x.
/// The state stacks (eta, W).
inline BoussinesqRun rk4_eboussinesq(const GridSpec& grid, const BoussinesqCoefficients& c, const Eigen::VectorXd& x0,
                                     double dt, double final_time, int stride) {
  const int m = grid.num_points();
  detail::require_size(x0.size(), 2 * m, "rk4_eboussinesq initial state");
  if (!x0.allFinite()) throw DomainError("rk4_eboussinesq: non-finite initial state");
  const auto plan = detail::plan_steps(dt, final_time, stride);
  const double d1 = c.d1(), d2 = c.d2(), d3 = c.d3(), d4 = c.d4(), d5 = c.d5();

  Eigen::VectorXcd ik(m), inv_symbol(m), lin(m);
  for (int j = 0; j < m; ++j) {
    const double k = grid.wavenumber(j);
    ik[j] = grid.is_nyquist(j) ? 0.0 : std::complex<double>(0.0, k);
    const double sym = 1.0 - d3 * k * k;
    if (!(std::abs(sym) > 1e-12)) {
      throw ConfigError("rk4_eboussinesq: 1 - d3 k^2 vanishes at wavenumber index " +
                        std::to_string(grid.wavenumber_index(j)));
    }
    inv_symbol[j] = 1.0 / sym;
    lin[j] = d1 - d2 * k * k;
  }

  FourierTransform fft(m);
  Eigen::VectorXcd q(m), qh(m), wh(m), eh(m), tmp(m);
  auto rhs = [&](const Eigen::VectorXd& x) {
    const auto eta = x.head(m).array();
    const auto w = x.tail(m).array();
    Eigen::VectorXd out(2 * m);

    q = (w * eta * (d4 - d5 * eta)).cast<std::complex<double>>();
    fft.forward(q.data(), qh.data());
    tmp = x.tail(m).cast<std::complex<double>>();
    fft.forward(tmp.data(), wh.data());
    qh = -(ik.array() * (lin.array() * wh.array() + qh.array()));
    fft.inverse(qh.data(), tmp.data());
    out.head(m) = tmp.real();

    q = (w * w * (0.5 * d4 - d5 * eta)).cast<std::complex<double>>();
    fft.forward(q.data(), qh.data());
    tmp = x.head(m).cast<std::complex<double>>();
    fft.forward(tmp.data(), eh.data());
    qh = -(ik.array() * (eh.array() / d1 + qh.array()) * inv_symbol.array());
    fft.inverse(qh.data(), tmp.data());
    out.tail(m) = tmp.real();
    return out;
  };

  BoussinesqRun run(grid);
  run.components = 2;
  run.dt = plan.dt;
  run.final_time = final_time;
  run.stride = stride;
  run.times.push_back(0.0);
  run.snapshots.push_back(x0);

  const double h = plan.dt;
  Eigen::VectorXd x = x0;
  for (long n = 1; n <= plan.steps; ++n) {
    const Eigen::VectorXd k1 = rhs(x);
    const Eigen::VectorXd k2 = rhs(x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = rhs(x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = rhs(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (n % stride == 0 || n == plan.steps) {
      if (!x.allFinite()) {
        throw NumericalError("rk4_eboussinesq: non-finite state at t = " + io::format_number(n * h) +
                             " (time step too large?)");
      }
      run.times.push_back(n * h);
      run.snapshots.push_back(x);
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Diagnostics

/// h sum_j |u_j|^2.
template <class Derived>
double power(const Eigen::MatrixBase<Derived>& u, const GridSpec& grid) {
  detail::require_size(u.size(), grid.num_points(), "power");
  return grid.spacing() * u.cwiseAbs2().sum();
}

template <class Scalar>
double power(const Field<Scalar>& f) {
  return power(f.values(), f.grid());
}

struct PhaseSpeedSeries {
  std::vector<double> times;  // right end of each sampling interval
  std::vector<double> speed;  // nan where the phase is undefined
  int probe_index = 0;
  bool unwrap_warning = false;  // some wrapped phase increment exceeded pi/2
  int undefined_samples = 0;

  /// Largest |speed - mu| over samples with time >= t_from.
  double max_deviation(double mu, double t_from) const {
    double d = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < t_from) continue;
      if (!std::isfinite(speed[i])) return std::numeric_limits<double>::infinity();
      d = std::max(d, std::abs(speed[i] - mu));
    }
    return d;
  }
};

/// Angular velocity of arg u at the node where |u_0| peaks; u = U e^{i mu t} gives +mu.
inline PhaseSpeedSeries phase_speed(const NlsRun& run) {
  if (run.snapshots.size() < 2) throw ConfigError("phase_speed: need at least two snapshots");
  PhaseSpeedSeries s;
  run.initial().cwiseAbs().maxCoeff(&s.probe_index);
  const int j = s.probe_index;
  for (std::size_t i = 1; i < run.snapshots.size(); ++i) {
    const std::complex<double> a = run.snapshots[i - 1][j];
    const std::complex<double> b = run.snapshots[i][j];
    s.times.push_back(run.times[i]);
    if (std::abs(a) < 1e-12 || std::abs(b) < 1e-12) {
      s.speed.push_back(std::numeric_limits<double>::quiet_NaN());
      ++s.undefined_samples;
      continue;
    }
    const double dphi = std::arg(b * std::conj(a));  // wrapped to (-pi, pi]
    if (std::abs(dphi) > std::numbers::pi / 2.0) s.unwrap_warning = true;
    s.speed.push_back(dphi / (run.times[i] - run.times[i - 1]));
  }
  return s;
}

/// max_t || |u(t)| - |U| || / ||U||, no alignment.
inline double modulus_drift(const NlsRun& run, const Eigen::VectorXd& profile) {
  detail::require_size(profile.size(), run.grid.num_points(), "modulus_drift");
  const Eigen::VectorXd ref = profile.cwiseAbs();
  double d = 0.0;
  for (const auto& u : run.snapshots) d = std::max(d, (u.cwiseAbs() - ref).norm() / ref.norm());
  return d;
}

struct TravelingDrift {
  double error = 0.0;           // shift-aligned relative error of the last snapshot
  double shift = 0.0;           // best translation of the initial state, in (-l, l]
  double expected_shift = 0.0;  // speed * T reduced to (-l, l]
  double shift_mismatch = 0.0;  // circular distance between the two
};

/// Compares the final snapshot with the initial state translated by the best d.
inline TravelingDrift traveling_drift(const BoussinesqRun& run, double speed) {
  SpectralOps ops(run.grid);
  const AlignedError a = aligned_relative_error(ops, run.components, run.initial(), run.last());
  TravelingDrift t;
  t.error = a.error;
  t.shift = a.shift;
  const double period = run.grid.length();
  t.expected_shift = std::remainder(speed * run.times.back(), period);
  t.shift_mismatch = std::abs(std::remainder(t.shift - t.expected_shift, period));
  return t;
}

// ---------------------------------------------------------------------------
// Serialization

inline io::CsvTable snapshot_table(const NlsRun& run) {
  io::CsvTable t({"t", "x", "re", "im", "abs"});
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    const auto& u = run.snapshots[i];
    for (int j = 0; j < run.grid.num_points(); ++j) {
      t.add_row({run.times[i], run.grid.node(j), u[j].real(), u[j].imag(), std::abs(u[j])});
    }
  }
  return t;
}

inline io::CsvTable snapshot_table(const BoussinesqRun& run) {
  io::CsvTable t({"t", "x", "eta", "W"});
  const int m = run.grid.num_points();
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    const auto& x = run.snapshots[i];
    for (int j = 0; j < m; ++j) t.add_row({run.times[i], run.grid.node(j), x[j], x[m + j]});
  }
  return t;
}

/// Per-snapshot t, power, phase speed (nan at t = 0) and modulus drift against `profile`.
inline io::CsvTable nls_diagnostics_table(const NlsRun& run, const Eigen::VectorXd& profile) {
  io::CsvTable t({"t", "power", "phase_speed", "modulus_drift"});
  const PhaseSpeedSeries ps = phase_speed(run);
  const Eigen::VectorXd ref = profile.cwiseAbs();
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    const auto& u = run.snapshots[i];
    t.add_row({run.times[i], power(u, run.grid), i == 0 ? std::numeric_limits<double>::quiet_NaN() : ps.speed[i - 1],
               (u.cwiseAbs() - ref).norm() / ref.norm()});
  }
  return t;
}

inline io::CsvTable boussinesq_diagnostics_table(const BoussinesqRun& run) {
  io::CsvTable t({"t", "eta_max", "w_max", "eta_norm", "w_norm"});
  const int m = run.grid.num_points();
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    const auto& x = run.snapshots[i];
    t.add_row({run.times[i], x.head(m).maxCoeff(), x.tail(m).maxCoeff(), x.head(m).norm(), x.tail(m).norm()});
  }
  return t;
}

}  // namespace petv
