// Acceptance run: prints one PASS/FAIL line per criterion, indented detail lines above it.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "petv/commands.hpp"

using namespace petv;
using cplx = std::complex<double>;

namespace {

int failures = 0;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void note(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
}

void verdict(int id, bool pass, const std::string& what) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

bool check(bool ok, const char* fmt, auto... args) {
  std::printf("    [%s] ", ok ? "ok" : "no");
  std::printf(fmt, args...);
  std::printf("\n");
  return ok;
}

std::vector<cplx> eigenvalues(const Eigen::MatrixXd& a) { return all_eigenvalues(a); }

/// Dominant eigenvalue by power iteration with Rayleigh quotient, for grid-refinement checks.
double dominant_by_power(const Eigen::MatrixXd& a) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += 0.01 * std::sin(0.37 * i);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    const Eigen::VectorXd w = a * v;
    const double next = v.dot(w);
    v = w.normalized();
    if (it > 10 && std::abs(next - lambda) < 1e-13 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

double second_magnitude(const std::vector<cplx>& ev) { return ev.size() > 1 ? std::abs(ev[1]) : 0.0; }

int count_near(const std::vector<cplx>& ev, cplx z, double tol) {
  int n = 0;
  for (const auto& l : ev) n += std::abs(l - z) < tol;
  return n;
}

ExperimentConfig regrid(ExperimentConfig c, int m) {
  c.grid_m = m;
  return c;
}

IterationTrace solve(const ExperimentConfig& c, const Problem& p) { return run_iteration(p, c.iteration); }

// ---------------------------------------------------------------------------

void criterion1() {
  Timer t;
  const ExperimentConfig cfg = preset("cubic-quintic");
  const Problem p = build_problem(cfg);
  const IterationTrace tr = solve(cfg, p);
  const double secs = t.seconds();
  int first = -1;
  for (std::size_t n = 0; n < tr.exact_error.size(); ++n)
    if (tr.exact_error[n] <= 1e-9) {
      first = static_cast<int>(n);
      break;
    }
  note("l=%g m=%d gammas=(1.5, 1.25); %s after %d iterations", cfg.grid_l, cfg.grid_m, reason_name(tr.reason), tr.steps());
  bool ok = check(first >= 0 && first <= 40, "shift-aligned exact error <= 1e-9 first at n=%d (final %.3e)", first,
                  tr.exact_error.back());
  ok &= check(secs < 5.0, "runtime %.2f s < 5 s", secs);
  verdict(1, ok, "cubic-quintic benchmark within 40 iterations");
}

void criterion2() {
  const ExperimentConfig cfg = preset("table2");
  const Problem p = build_problem(cfg);
  const IterationTrace tr = solve(cfg, p);
  const double ref = 4.650469e-01;
  bool ok = true;
  std::vector<double> r;
  for (int n : {16, 18, 20, 25}) {
    if (n >= static_cast<int>(tr.exact_error.size())) {
      ok = check(false, "trace too short for n=%d", n);
      continue;
    }
    const double q = tr.exact_error[n] / tr.exact_error[n - 1];
    r.push_back(q);
    ok &= check(std::abs(q - ref) < 5e-3, "n=%d ratio %.9f (ref %.7f)", n, q, ref);
  }
  if (!r.empty()) {
    const double spread = *std::max_element(r.begin(), r.end()) - *std::min_element(r.begin(), r.end());
    ok &= check(spread < 1e-5, "ratio spread %.3e < 1e-5", spread);
  }
  verdict(2, ok, "linear convergence ratio");
}

void criterion3() {
  const ExperimentConfig cfg = preset("table1");
  const std::vector<double> g{1.5, 1.25};
  struct Values {
    double s_dom, f_second, f_radius;
    int units;
  };
  auto at = [&](int m) {
    const Problem p = build_problem(regrid(cfg, m));
    const Eigen::VectorXd& u = *p.exact_solution();
    const auto s = eigenvalues(build_S(p, u));
    const auto f = eigenvalues(build_F_jacobian(p, u, g, JacobianMode::analytic_general));
    return Values{s.front().real(), second_magnitude(f), spectral_radius_excluding_unit(f, 1e-6), count_near(s, 1.0, 1e-6)};
  };
  const Values a = at(cfg.grid_m);
  const Values b = at(2 * cfg.grid_m);
  note("mu=0.25, l=%g, m=%d and %d, at the exact profile", cfg.grid_l, cfg.grid_m, 2 * cfg.grid_m);
  bool ok = check(std::abs(a.s_dom - 3.479415) < 1e-2, "S dominant %.9f (ref 3.479415)", a.s_dom);
  ok &= check(a.units == 1, "S eigenvalues within 1e-6 of 1: %d", a.units);
  ok &= check(std::abs(a.f_second - 4.833482e-01) < 1e-2, "F' second magnitude %.9f (ref 0.4833482)", a.f_second);
  ok &= check(a.f_radius < 1.0, "F' radius without the unit eigenvalue %.9f < 1", a.f_radius);
  ok &= check(std::abs(a.s_dom - b.s_dom) < 1e-4 && std::abs(a.f_second - b.f_second) < 1e-4,
              "doubling m moves S dominant by %.2e, F' second by %.2e", std::abs(a.s_dom - b.s_dom),
              std::abs(a.f_second - b.f_second));
  verdict(3, ok, "iteration-matrix spectra at the exact profile");
}

void criterion4() {
  const ExperimentConfig cfg = preset("cubic-quintic");
  const Problem p = build_problem(cfg);
  const IterationTrace tr = iterate_classic(p, cfg.iteration);
  const bool ok = check(tr.reason == IterationTrace::Reason::diverged, "classic iteration: %s at step %d (%s)",
                        reason_name(tr.reason), tr.steps(), tr.detail.c_str());
  verdict(4, ok, "classical fixed-point iteration diverges");
}

void criterion5() {
  const GridSpec g = make_grid(12.0, 64);
  struct Case {
    Problem p;
    std::vector<double> gammas;
  };
  std::vector<Case> cases{
      {build_nls_power(1.0, 1.0, 1.0, 2.0, 4.0, g), {1.5, 1.25}},
      {build_gnls_double_well(1.9, 2.8, 1.5, 0.25, g), {1.5, 1.25}},
      {build_gnls_three_term(3.275, 0.01247946, g), {1.5, 1.25, 7.0 / 6.0}},
      {build_eboussinesq(BoussinesqCoefficients::with_default_s(0.8, 1.8, 1.05), g), {2.0, 1.5}}};
  std::mt19937 gen(20240531u);
  std::uniform_real_distribution<double> amp(0.4, 1.1), width(1.0, 3.0), shift(-2.0, 2.0), noise(-0.02, 0.02);
  bool ok = true;
  for (const auto& cs : cases) {
    const Problem& p = cs.p;
    const int m = g.num_points();
    double worst = 0.0;
    int points = 0;
    while (points < 10) {
      const double a = p.components() == 2 ? 0.3 * amp(gen) : amp(gen);
      const double w = width(gen), c = shift(gen);
      Eigen::VectorXd x(p.state_dim());
      for (int k = 0; k < p.components(); ++k)
        for (int j = 0; j < m; ++j) {
          const double z = (g.node(j) - c) / w;
          x[k * m + j] = a * std::exp(-z * z) + a * noise(gen);
        }
      double mval = 0.0;
      try {
        mval = stabilizing_factor(p, x);
      } catch (const DomainError&) {
      }
      if (!(mval > 0.0)) continue;  // the factor power is undefined there
      const double h = 1e-6 * std::max(1.0, x.norm());
      Eigen::MatrixXd fd(p.state_dim(), p.state_dim());
      Eigen::VectorXd probe = x;
      for (int col = 0; col < p.state_dim(); ++col) {
        probe[col] = x[col] + h;
        const Eigen::VectorXd fp = extended_step(p, probe, cs.gammas);
        probe[col] = x[col] - h;
        const Eigen::VectorXd fm = extended_step(p, probe, cs.gammas);
        probe[col] = x[col];
        fd.col(col) = (fp - fm) / (2.0 * h);
      }
      const Eigen::MatrixXd an = build_F_jacobian(p, x, cs.gammas, JacobianMode::analytic_general);
      worst = std::max(worst, (an - fd).norm() / an.norm());
      ++points;
    }
    ok &= check(worst < 1e-5, "%-17s worst Frobenius-relative difference over 10 points %.3e", p.name().c_str(), worst);
  }
  verdict(5, ok, "analytic F' against central differences");
}

void criterion6() {
  bool ok = true;
  {
    Timer t;
    const ExperimentConfig cfg = preset("table4");
    const Problem p = build_problem(cfg);
    const IterationTrace tr = solve(cfg, p);
    note("r=0.8 H=1.8 c_s=1.05 s=%.4f, l=%g m=%d: %s after %d iterations", p.parameters().at("s"), cfg.grid_l,
         cfg.grid_m, reason_name(tr.reason), tr.steps());
    ok &= check(tr.converged() && tr.final_residual() < 1e-10, "final residual %.3e < 1e-10", tr.final_residual());
    if (tr.converged()) {
      const auto s = eigenvalues(build_S(p, tr.final_state));
      const auto f = eigenvalues(build_F_jacobian(p, tr.final_state, {2.0, 1.5}, JacobianMode::analytic_general));
      ok &= check(std::abs(s.front().real() - 1.558592) < 1e-2, "S dominant %.9f (ref 1.558592)", s.front().real());
      ok &= check(count_near(f, 1.0, 1e-6) == 1, "F' has one eigenvalue within 1e-6 of 1 (found %d)", count_near(f, 1.0, 1e-6));
      ok &= check(spectral_radius_excluding_unit(f, 1e-6) < 1.0, "F' radius without it %.9f < 1",
                  spectral_radius_excluding_unit(f, 1e-6));
      const ExperimentConfig fine = regrid(cfg, 2 * cfg.grid_m);
      const Problem pf = build_problem(fine);
      const IterationTrace tf = solve(fine, pf);
      const double sf = tf.converged() ? dominant_by_power(build_S(pf, tf.final_state)) : std::nan("");
      ok &= check(std::abs(sf - s.front().real()) < 1e-4, "m=%d: S dominant %.9f, change %.2e", fine.grid_m, sf,
                  std::abs(sf - s.front().real()));
    }
    const double secs = t.seconds();
    ok &= check(secs < 60.0, "runtime %.1f s < 60 s", secs);
  }
  {
    Timer t;
    const ExperimentConfig cfg = preset("boussinesq-wide");
    const Problem p = build_problem(cfg);
    const IterationTrace tr = solve(cfg, p);
    note("r=0.8 H=0.95 c_s=1.02, l=%g m=%d: %s after %d iterations (%s)", cfg.grid_l, cfg.grid_m,
         reason_name(tr.reason), tr.steps(), tr.detail.c_str());
    ok &= check(tr.converged() && tr.final_residual() < 1e-10, "wide case final residual %.3e < 1e-10",
                tr.final_residual());
    ok &= check(t.seconds() < 60.0, "runtime %.1f s < 60 s", t.seconds());
  }
  verdict(6, ok, "e-Boussinesq solitary waves");
}

void criterion7() {
  const ExperimentConfig cfg = preset("table5");
  const std::vector<std::pair<double, double>> refs{{1.9, 2.935028}, {2.69, 1.305101}};
  bool ok = true;
  std::vector<int> iterations;
  for (const auto& [mu, ref] : refs) {
    ExperimentConfig c = cfg;
    c.problem.mu = mu;
    const Problem p = build_problem(c);
    const IterationTrace tr = solve(c, p);
    iterations.push_back(tr.steps());
    ok &= check(tr.converged(), "mu=%g: %s after %d iterations", mu, reason_name(tr.reason), tr.steps());
    if (!tr.converged()) continue;
    const auto s = eigenvalues(build_S(p, tr.final_state));
    const auto f = eigenvalues(build_F_jacobian(p, tr.final_state, {1.5, 1.25}, JacobianMode::analytic_general));
    ok &= check(std::abs(s.front().real() - ref) < 1e-2, "mu=%g: S dominant %.9f (ref %.6f)", mu, s.front().real(), ref);
    double closest = std::numeric_limits<double>::infinity();
    for (const auto& l : f) closest = std::min(closest, std::abs(l - 1.0));
    ok &= check(closest > 1e-3, "mu=%g: closest F' eigenvalue to 1 at distance %.3e", mu, closest);
    const ExperimentConfig fine = regrid(c, 2 * c.grid_m);
    const Problem pf = build_problem(fine);
    const IterationTrace tf = solve(fine, pf);
    const double sf = tf.converged() ? dominant_by_power(build_S(pf, tf.final_state)) : std::nan("");
    ok &= check(std::abs(sf - s.front().real()) < 1e-4, "mu=%g: m=%d S dominant change %.2e", mu, fine.grid_m,
                std::abs(sf - s.front().real()));
  }
  ok &= check(iterations[1] > iterations[0], "iterations mu=2.69 (%d) > mu=1.9 (%d)", iterations[1], iterations[0]);
  verdict(7, ok, "double-well ground states");
}

void criterion8() {
  const ExperimentConfig cfg = preset("table6");
  struct Ref {
    double mu, s;
    cplx pair;
  };
  const std::vector<Ref> refs{{3.275, 1.5843078, {3.156180e-01, 3.173535e-02}},
                              {3.289, 1.857527, {1.766474e-01, 2.501554e-01}}};
  const std::vector<double> g{1.5, 1.25, 7.0 / 6.0};
  bool ok = true;
  for (const auto& r : refs) {
    ExperimentConfig c = cfg;
    c.problem.mu = r.mu;
    const Problem p = build_problem(c);
    const IterationTrace tr = solve(c, p);
    ok &= check(tr.converged(), "mu=%g: %s after %d iterations", r.mu, reason_name(tr.reason), tr.steps());
    if (!tr.converged()) continue;
    const auto s = eigenvalues(build_S(p, tr.final_state));
    const auto f = top_eigenvalues(build_F_jacobian(p, tr.final_state, g, JacobianMode::analytic_general), 6);
    ok &= check(std::abs(s.front().real() - r.s) < 1e-2, "mu=%g: S dominant %.9f (ref %.7f)", r.mu, s.front().real(), r.s);
    double best = std::numeric_limits<double>::infinity();
    cplx hit = 0.0;
    for (const auto& l : f) {
      if (l.imag() == 0.0) continue;
      const double d = std::abs(std::abs(l) - std::abs(r.pair));
      if (d < best) {
        best = d;
        hit = l;
      }
    }
    ok &= check(best < 2e-2, "mu=%g: F' pair %.7f%+.7fi, |.| differs from reference by %.2e", r.mu, hit.real(),
                std::abs(hit.imag()), best);
    const ExperimentConfig fine = regrid(c, 2 * c.grid_m);
    const Problem pf = build_problem(fine);
    const IterationTrace tf = solve(fine, pf);
    const double sf = tf.converged() ? dominant_by_power(build_S(pf, tf.final_state)) : std::nan("");
    ok &= check(std::abs(sf - s.front().real()) < 1e-4, "mu=%g: m=%d S dominant change %.2e", r.mu, fine.grid_m,
                std::abs(sf - s.front().real()));
  }
  verdict(8, ok, "three-term GNLS profiles");
}

void criterion9() {
  Timer t;
  bool ok = true;
  {
    const ExperimentConfig cfg = preset("fig4");
    const Problem p = build_problem(cfg);
    const IterationTrace tr = solve(cfg, p);
    ok &= check(tr.converged(), "mu=2pi profile %s", reason_name(tr.reason));
    const int stride = static_cast<int>(std::lround(cfg.evolution.sample_interval / cfg.evolution.dt));
    const NlsRun run = splitstep_nls(p.grid(), *p.nls_model(), tr.final_state.cast<cplx>(), cfg.evolution.dt,
                                     cfg.evolution.T, stride);
    const double d = modulus_drift(run, tr.final_state);
    ok &= check(d < 1e-4, "(a) T=%g dt=%g: modulus drift %.3e < 1e-4", cfg.evolution.T, cfg.evolution.dt, d);
  }
  {
    const ExperimentConfig cfg = preset("fig8");
    const Problem p = build_problem(cfg);
    const IterationTrace tr = solve(cfg, p);
    const int stride = static_cast<int>(std::lround(cfg.evolution.sample_interval / cfg.evolution.dt));
    const BoussinesqRun run =
        rk4_eboussinesq(p.grid(), *p.boussinesq(), tr.final_state, cfg.evolution.dt, cfg.evolution.T, stride);
    const TravelingDrift d = traveling_drift(run, p.boussinesq()->speed());
    ok &= check(tr.converged() && d.error < 1e-2 && d.shift_mismatch < p.grid().spacing(),
                "(b) T=%g dt=%g: aligned drift %.3e, shift %.6f vs c_s T mod 2l = %.6f (cell %.3f)", cfg.evolution.T,
                cfg.evolution.dt, d.error, d.shift, d.expected_shift, p.grid().spacing());
  }
  for (const char* name : {"fig13", "fig18"}) {
    const ExperimentConfig cfg = preset(name);
    for (double mu : cfg.mu_values) {
      ExperimentConfig c = cfg;
      c.problem.mu = mu;
      const Problem p = build_problem(c);
      const IterationTrace tr = solve(c, p);
      if (!check(tr.converged(), "(c) mu=%g profile %s", mu, reason_name(tr.reason))) {
        ok = false;
        continue;
      }
      const int stride = static_cast<int>(std::lround(c.evolution.sample_interval / c.evolution.dt));
      const NlsRun run = splitstep_nls(p.grid(), *p.nls_model(), tr.final_state.cast<cplx>(), c.evolution.dt,
                                       c.evolution.T, stride);
      const PhaseSpeedSeries s = phase_speed(run);
      const double dev = s.max_deviation(mu, c.evolution.T / 2.0);
      ok &= check(dev < 1e-3 && !s.unwrap_warning, "(c) mu=%g: max |phase speed - mu| over t>=%g is %.3e", mu,
                  c.evolution.T / 2.0, dev);
    }
  }
  ok &= check(t.seconds() < 300.0, "runtime %.1f s < 300 s", t.seconds());
  verdict(9, ok, "evolution of the computed profiles");
}

void criterion10() {
  bool ok = true;
  {
    const GridSpec g = make_grid(10.0, 64);
    std::vector<Problem> ps{build_nls_power(1.0, 1.0, 1.0, 2.0, 4.0, g), build_gnls_double_well(1.9, 2.8, 1.5, 0.25, g),
                            build_gnls_three_term(3.275, 0.01247946, g),
                            build_eboussinesq(BoussinesqCoefficients::with_default_s(0.8, 1.8, 1.05), g)};
    double hom = 0.0, euler = 0.0;
    for (const auto& p : ps) {
      Eigen::VectorXd x(p.state_dim());
      for (int i = 0; i < x.size(); ++i) x[i] = 0.8 * std::exp(-0.05 * (i % 64 - 32.0) * (i % 64 - 32.0)) * (1 + 0.3 * std::sin(i));
      for (int j = 0; j < p.num_terms(); ++j) {
        const double deg = p.terms()[j].degree;
        const Eigen::VectorXd nj = eval_term(p, j, x);
        hom = std::max(hom, (eval_term(p, j, 2.5 * x) - std::pow(2.5, deg) * nj).norm() / (std::pow(2.5, deg) * nj.norm()));
        euler = std::max(euler, (p.terms()[j].jacobian(x) * x - deg * nj).norm() / (deg * nj.norm()));
      }
    }
    ok &= check(hom < 1e-9, "homogeneity N_j(c x) = c^p N_j(x): worst %.2e", hom);
    ok &= check(euler < 1e-9, "Euler identity N_j'(x) x = p N_j(x): worst %.2e", euler);
  }
  {
    std::mt19937 gen(7u);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int n : {6, 50, 200}) {
      Eigen::MatrixXd a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = nd(gen);
      cplx sum = 0.0;
      for (const auto& l : eigenvalues(a)) sum += l;
      worst = std::max(worst, std::abs(sum - a.trace()) / std::max(1.0, a.cwiseAbs().sum() / n));
    }
    ok &= check(worst < 1e-8, "trace identity sum(lambda) = tr(A): worst %.2e", worst);
  }
  const GridSpec g = make_grid(20.0, 256);
  const NlsModel cubic{Eigen::VectorXd::Zero(256), {{1.0, 2.0}}};
  Eigen::VectorXcd u0(256);
  for (int j = 0; j < 256; ++j) u0[j] = std::polar(1.4 / std::cosh(g.node(j)), 0.3 * g.node(j));
  {
    const NlsRun run = splitstep_nls(g, cubic, u0, 1e-3, 10.0, 10000);
    const double p0 = power(u0, g), p1 = power(run.last(), g);
    ok &= check(std::abs(p1 - p0) / p0 < 1e-8, "split-step power over 1e4 steps: relative change %.2e", std::abs(p1 - p0) / p0);
  }
  {
    const double dt = 0.02, t = 1.0;
    const Eigen::VectorXcd ref = splitstep_nls(g, cubic, u0, dt / 8.0, t, 1 << 20).last();
    auto err = [&](double h) { return (splitstep_nls(g, cubic, u0, h, t, 1 << 20).last() - ref).norm(); };
    const double q = err(dt) / err(dt / 2.0);
    ok &= check(std::abs(q - 4.0) < 0.2 * 4.0, "split-step error ratio under halving %.3f (4 +- 20%%)", q);
  }
  {
    const GridSpec gb = make_grid(32.0, 256);
    const BoussinesqCoefficients c = BoussinesqCoefficients::with_default_s(0.8, 1.8, 1.05);
    Eigen::VectorXd x0(512);
    for (int j = 0; j < 256; ++j) {
      const double z = gb.node(j);
      x0[j] = 0.2 * std::exp(-0.2 * z * z);
      x0[256 + j] = 0.15 * std::exp(-0.2 * (z - 1.0) * (z - 1.0));
    }
    const double dt = 0.04, t = 2.0;
    const Eigen::VectorXd ref = rk4_eboussinesq(gb, c, x0, dt / 8.0, t, 1 << 20).last();
    auto err = [&](double h) { return (rk4_eboussinesq(gb, c, x0, h, t, 1 << 20).last() - ref).norm(); };
    const double q = err(dt) / err(dt / 2.0);
    ok &= check(std::abs(q - 16.0) < 0.3 * 16.0, "RK4 error ratio under halving %.3f (16 +- 30%%)", q);
  }
  verdict(10, ok, "property suites");
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, criterion9, criterion10};
  for (const auto& run : all) {
    try {
      run();
    } catch (const std::exception& e) {
      std::printf("    exception: %s\n", e.what());
      verdict(static_cast<int>(&run - all.data()) + 1, false, "aborted");
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, all.size());
  return failures;
}
