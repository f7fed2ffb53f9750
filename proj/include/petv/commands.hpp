#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "petv/error.hpp"
#include "petv/evolve.hpp"
#include "petv/experiment.hpp"
#include "petv/io.hpp"
#include "petv/iteration.hpp"
#include "petv/spectrum.hpp"

namespace petv {

namespace fs = std::filesystem;

/// Process exit codes of the command layer.
enum ExitCode { exit_ok = 0, exit_failed = 1, exit_config = 2 };

/// Where a command writes and what it prints.
struct CommandContext {
  fs::path out_dir = "out";
  std::ostream* log = &std::cout;
  std::ostream* err = &std::cerr;
};

namespace detail {

inline std::string mu_label(double mu) {
  std::ostringstream os;
  os << "mu_" << std::setprecision(10) << mu;
  return os.str();
}

/// ||x - Rx|| / ||x|| for the reflection x -> -x of each grid component.
inline double asymmetry(const Eigen::VectorXd& x, int num_points) {
  Eigen::VectorXd r(x.size());
  for (Eigen::Index c = 0; c < x.size() / num_points; ++c)
    for (int j = 0; j < num_points; ++j) r(c * num_points + j) = x(c * num_points + (num_points - j) % num_points);
  const double n = x.norm();
  return n > 0.0 ? (x - r).norm() / n : 0.0;
}

inline std::string tag(const Problem& p) {
  std::ostringstream os;
  os << p.name();
  if (auto it = p.parameters().find("mu"); it != p.parameters().end()) os << ", mu=" << it->second;
  return os.str();
}

inline void write_json(const fs::path& path, const nlohmann::json& j) { io::write_atomic(path, j.dump(2) + "\n"); }

/// The jobs a config expands to: one per entry of mu_values, or the config itself.
inline std::vector<std::pair<ExperimentConfig, fs::path>> expand_mu(const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<std::pair<ExperimentConfig, fs::path>> jobs;
  if (cfg.mu_values.empty()) {
    jobs.emplace_back(cfg, out);
    return jobs;
  }
  for (double mu : cfg.mu_values) {
    ExperimentConfig c = cfg;
    c.problem.mu = mu;
    c.mu_values.clear();
    jobs.emplace_back(c, out / mu_label(mu));
  }
  return jobs;
}

/// Reads the x,u0[,u1] CSV written by a solve back into a stacked state.
inline Eigen::VectorXd read_profile_csv(const fs::path& path, const Problem& p) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile " + path.string());
  std::string line;
  std::getline(in, line);
  const int m = p.grid().num_points();
  Eigen::VectorXd x(p.state_dim());
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= m) throw DimensionError("profile " + path.string() + ": too many rows");
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // x
    for (int c = 0; c < p.components(); ++c) {
      if (!std::getline(ss, cell, ',')) throw DimensionError("profile " + path.string() + ": missing column");
      x[c * m + row] = std::stod(cell);
    }
    ++row;
  }
  detail::require_size(row, m, "profile rows");
  return x;
}

}  // namespace detail

struct SolveOutcome {
  IterationTrace trace;
  nlohmann::json summary;
};

/// Runs one iteration job and writes trace.csv, trace.json, profile.csv (and error_ratios.csv
/// when an exact profile is attached) into `dir`.
inline SolveOutcome run_solve(const ExperimentConfig& cfg, const Problem& p, const fs::path& dir) {
  SolveOutcome o;
  o.trace = run_iteration(p, cfg.iteration);
  const IterationTrace& tr = o.trace;
  trace_table(tr).write(dir / "trace.csv");
  profile_table(p, tr.final_state).write(dir / "profile.csv");
  if (!tr.exact_error.empty()) {
    io::CsvTable ratios({"n", "exact_error", "ratio"});
    for (std::size_t n = 1; n < tr.exact_error.size(); ++n) {
      ratios.add_row({static_cast<double>(n), tr.exact_error[n], tr.exact_error[n] / tr.exact_error[n - 1]});
    }
    ratios.write(dir / "error_ratios.csv");
  }
  o.summary = trace_json(p, cfg.iteration, tr);
  if (p.components() == 1) o.summary["power"] = power(tr.final_state, p.grid());
  detail::write_json(dir / "trace.json", o.summary);
  return o;
}

inline int cmd_solve(const ExperimentConfig& cfg, const CommandContext& ctx) {
  int status = exit_ok;
  for (const auto& [job, dir] : detail::expand_mu(cfg, ctx.out_dir)) {
    const Problem p = build_problem(job);
    const SolveOutcome o = run_solve(job, p, dir);
    const IterationTrace& tr = o.trace;
    *ctx.log << job.name << " [" << detail::tag(p) << "] " << engine_name(tr.variant) << ": "
             << reason_name(tr.reason) << " after " << tr.steps() << " iterations, residual "
             << io::format_number(tr.final_residual());
    if (!tr.exact_error.empty()) *ctx.log << ", exact error " << io::format_number(tr.exact_error.back());
    *ctx.log << "\n";
    if (!tr.converged()) {
      *ctx.err << "solve " << job.name << ": " << reason_name(tr.reason) << (tr.detail.empty() ? "" : ": ")
               << tr.detail << "\n";
      status = exit_failed;
    }
  }
  return status;
}

/// Eigen-analysis of the requested matrices at one state.
inline std::vector<SpectrumReport> compute_spectra(const ExperimentConfig& cfg, const Problem& p,
                                                   const Eigen::VectorXd& x, const std::string& point,
                                                   std::ostream& err) {
  int k = cfg.spectrum.k;
  if (k > p.state_dim()) {
    err << "warning: k = " << k << " exceeds the state dimension " << p.state_dim() << ", clamped\n";
    k = p.state_dim();
  }
  const bool symmetric = !p.has_potential();
  std::vector<double> default_gammas = FactorStrategy::per_term_default().resolve(p);
  if (cfg.iteration.factor.variant == FactorStrategy::Variant::per_term) default_gammas = cfg.iteration.factor.resolve(p);

  std::vector<SpectrumReport> reports;
  for (const auto& req : cfg.spectrum.matrices) {
    if (req.kind == "S") {
      reports.push_back(analyze_matrix(build_S(p, x), k, "S", point, false));
      continue;
    }
    const std::vector<double> g = req.gammas.empty() ? default_gammas : req.gammas;
    if (static_cast<int>(g.size()) != p.num_terms()) {
      throw ConfigError("spectrum: F needs " + std::to_string(p.num_terms()) + " exponents");
    }
    std::ostringstream label;
    label << "F'(" << mode_name(req.mode);
    for (double v : g) label << " " << std::setprecision(6) << v;
    label << ")";
    const Eigen::MatrixXd f = build_F_jacobian(p, x, g, req.mode);
    reports.push_back(analyze_matrix(f, k, label.str(), point, symmetric, g));
  }
  return reports;
}

inline void write_spectra(const std::vector<SpectrumReport>& reports, const fs::path& dir) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) j.push_back(spectrum_json(r));
  detail::write_json(dir / "spectrum.json", j);
  io::write_atomic(dir / "spectrum.txt", spectrum_table(reports));
}

/// State at which a spectrum is evaluated: the exact profile, a stored profile, or a fresh solve.
inline std::optional<Eigen::VectorXd> spectrum_point(const ExperimentConfig& cfg, const Problem& p,
                                                     const fs::path& dir, const CommandContext& ctx,
                                                     const IterationTrace* prior) {
  if (cfg.spectrum.point == "exact") {
    if (!p.has_exact_solution()) {
      throw ConfigError("spectrum: missing profile source (problem has no exact solution)");
    }
    return *p.exact_solution();
  }
  if (prior) return prior->final_state;
  if (!cfg.spectrum.profile.empty()) return detail::read_profile_csv(cfg.spectrum.profile, p);
  const SolveOutcome o = run_solve(cfg, p, dir);
  if (!o.trace.converged()) {
    *ctx.err << "spectrum " << cfg.name << ": solve ended with " << reason_name(o.trace.reason) << "\n";
    return std::nullopt;
  }
  return o.trace.final_state;
}

inline int spectrum_job(const ExperimentConfig& job, const Problem& p, const fs::path& dir, const CommandContext& ctx,
                        const IterationTrace* prior) {
  const auto x = spectrum_point(job, p, dir, ctx, prior);
  if (!x) return exit_failed;
  const std::string point = job.spectrum.point == "exact" ? "exact solution" : "final iterate";
  const auto reports = compute_spectra(job, p, *x, point, *ctx.err);
  write_spectra(reports, dir);
  *ctx.log << job.name << " [" << detail::tag(p) << "] eigenvalues at the " << point << ":\n"
           << spectrum_table(reports);
  return exit_ok;
}

inline int cmd_spectrum(const ExperimentConfig& cfg, const CommandContext& ctx) {
  if (!cfg.spectrum.enabled) throw ConfigError("spectrum: config has no 'spectrum' section");
  int status = exit_ok;
  for (const auto& [job, dir] : detail::expand_mu(cfg, ctx.out_dir)) {
    const Problem p = build_problem(job);
    status = std::max(status, spectrum_job(job, p, dir, ctx, nullptr));
  }
  return status;
}

namespace detail {

inline int steps_per(double interval, double dt, const char* what) {
  if (!(interval > 0.0)) throw ConfigError(std::string("evolution.") + what + " must be positive");
  const double r = interval / dt;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - n) > 1e-6 * r) {
    throw ConfigError(std::string("evolution.") + what + " must be a positive multiple of dt");
  }
  return static_cast<int>(n);
}

inline bool on_interval(double t, double interval, double final_time) {
  if (t == 0.0 || std::abs(t - final_time) < 1e-9 * std::max(1.0, final_time)) return true;
  if (!(interval > 0.0)) return false;
  const double r = t / interval;
  return std::abs(r - std::round(r)) < 1e-6;
}

}  // namespace detail

/// Evolves `x` and writes snapshots.csv, diagnostics.csv and evolution.json.
inline nlohmann::json run_evolution(const ExperimentConfig& cfg, const Problem& p, const Eigen::VectorXd& x,
                                    const fs::path& dir) {
  const EvolutionSpec& ev = cfg.evolution;
  const int stride = detail::steps_per(ev.sample_interval, ev.dt, "sample_interval");
  nlohmann::json j;
  j["problem"] = problem_json(p);
  j["dt"] = ev.dt;
  j["T"] = ev.T;
  j["sample_interval"] = ev.sample_interval;

  if (p.boussinesq()) {
    BoussinesqRun run = rk4_eboussinesq(p.grid(), *p.boussinesq(), x, ev.dt, ev.T, stride);
    boussinesq_diagnostics_table(run).write(dir / "diagnostics.csv");
    const TravelingDrift d = traveling_drift(run, p.boussinesq()->speed());
    BoussinesqRun kept(run.grid);
    kept.components = 2;
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      if (detail::on_interval(run.times[i], ev.snapshot_interval, ev.T)) {
        kept.times.push_back(run.times[i]);
        kept.snapshots.push_back(run.snapshots[i]);
      }
    }
    snapshot_table(kept).write(dir / "snapshots.csv");
    j["snapshot_times"] = kept.times;
    j["aligned_drift"] = d.error;
    j["shift"] = d.shift;
    j["expected_shift"] = d.expected_shift;
    j["shift_mismatch"] = d.shift_mismatch;
    j["grid_spacing"] = p.grid().spacing();
    return j;
  }

  if (!p.nls_model()) throw ConfigError("evolve: problem has no evolution equation");
  const Eigen::VectorXcd u0 = x.cast<std::complex<double>>();
  NlsRun run = splitstep_nls(p.grid(), *p.nls_model(), u0, ev.dt, ev.T, stride);
  nls_diagnostics_table(run, x).write(dir / "diagnostics.csv");
  NlsRun kept(run.grid);
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    if (detail::on_interval(run.times[i], ev.snapshot_interval, ev.T)) {
      kept.times.push_back(run.times[i]);
      kept.snapshots.push_back(run.snapshots[i]);
    }
  }
  snapshot_table(kept).write(dir / "snapshots.csv");
  const double p0 = power(u0, p.grid());
  double power_drift = 0.0;
  for (const auto& u : run.snapshots) power_drift = std::max(power_drift, std::abs(power(u, p.grid()) - p0) / p0);
  j["snapshot_times"] = kept.times;
  j["modulus_drift"] = modulus_drift(run, x);
  j["power_drift"] = power_drift;
  if (run.snapshots.size() >= 2) {
    const PhaseSpeedSeries ps = phase_speed(run);
    j["mu"] = p.parameters().count("mu") ? p.parameters().at("mu") : 0.0;
    j["phase_speed_final"] = json_number(ps.speed.back());
    j["phase_speed_max_deviation_second_half"] = json_number(ps.max_deviation(j["mu"].get<double>(), ev.T / 2.0));
    j["unwrap_warning"] = ps.unwrap_warning;
    j["undefined_samples"] = ps.undefined_samples;
  }
  return j;
}

inline int evolve_job(const ExperimentConfig& job, const Problem& p, const fs::path& dir, const CommandContext& ctx,
                      const IterationTrace* prior) {
  Eigen::VectorXd x;
  if (prior) {
    x = prior->final_state;
  } else {
    const SolveOutcome o = run_solve(job, p, dir);
    if (!o.trace.converged()) {
      *ctx.err << "evolve " << job.name << ": solve ended with " << reason_name(o.trace.reason) << "\n";
      return exit_failed;
    }
    x = o.trace.final_state;
  }
  const nlohmann::json j = run_evolution(job, p, x, dir);
  detail::write_json(dir / "evolution.json", j);
  *ctx.log << job.name << " [" << detail::tag(p) << "] evolved to T=" << job.evolution.T;
  if (j.contains("modulus_drift")) *ctx.log << ", modulus drift " << io::format_number(j["modulus_drift"]);
  if (j.contains("aligned_drift")) *ctx.log << ", aligned drift " << io::format_number(j["aligned_drift"]);
  if (j.contains("phase_speed_final") && !j["phase_speed_final"].is_null()) {
    *ctx.log << ", phase speed " << io::format_number(j["phase_speed_final"]);
  }
  *ctx.log << "\n";
  if (j.value("unwrap_warning", false)) {
    *ctx.err << "warning: phase increments above pi/2 between samples; reduce evolution.sample_interval\n";
  }
  return exit_ok;
}

inline int cmd_evolve(const ExperimentConfig& cfg, const CommandContext& ctx) {
  if (!cfg.evolution.enabled) throw ConfigError("evolve: config has no 'evolution' section");
  int status = exit_ok;
  for (const auto& [job, dir] : detail::expand_mu(cfg, ctx.out_dir)) {
    const Problem p = build_problem(job);
    status = std::max(status, evolve_job(job, p, dir, ctx, nullptr));
  }
  return status;
}

/// Solves along the mu list, warm-starting each point from the last converged profile.
/// Writes sweep.csv with (mu, power, iterations, residual, converged, warm_start, asymmetry).
/// A failed warm start is retried from the configured guess.
inline int cmd_sweep(const ExperimentConfig& cfg, const CommandContext& ctx) {
  const std::vector<double>& mus = cfg.sweep.mu;
  if (mus.empty()) {
    *ctx.err << "warning: empty mu range, nothing to do\n";
    return exit_ok;
  }
  io::CsvTable table({"mu", "power", "iterations", "residual", "converged", "warm_start", "asymmetry"});
  nlohmann::json points = nlohmann::json::array();
  std::optional<Eigen::VectorXd> warm;
  int converged = 0;
  for (double mu : mus) {
    try {
      ExperimentConfig job = cfg;
      job.problem.mu = mu;
      const Problem p = build_problem(job);
      IterationTrace tr;
      bool warm_used = false;
      if (warm) {
        IterationConfig ic = job.iteration;
        ic.guess = InitialGuess::field(*warm);
        tr = run_iteration(p, ic);
        warm_used = tr.converged();
        if (!warm_used)
          *ctx.err << "mu=" << mu << ": warm start " << reason_name(tr.reason) << ", retrying from the configured guess\n";
      }
      if (!warm_used) tr = run_iteration(p, job.iteration);
      const double pw = power(tr.final_state.head(p.grid().num_points()), p.grid());
      const double asym = detail::asymmetry(tr.final_state, p.grid().num_points());
      table.add_row({mu, pw, static_cast<double>(tr.steps()), tr.final_residual(), tr.converged() ? 1.0 : 0.0,
                     warm_used ? 1.0 : 0.0, asym});
      points.push_back({{"mu", mu},
                        {"power", json_number(pw)},
                        {"iterations", tr.steps()},
                        {"residual", json_number(tr.final_residual())},
                        {"reason", reason_name(tr.reason)},
                        {"detail", tr.detail},
                        {"warm_start", warm_used},
                        {"asymmetry", json_number(asym)}});
      *ctx.log << "mu=" << mu << ": " << reason_name(tr.reason) << " in " << tr.steps() << " iterations, P = "
               << io::format_number(pw) << (warm_used ? " (warm)" : "") << "\n";
      if (tr.converged()) {
        warm = tr.final_state;
        ++converged;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep at mu=" + io::format_number(mu) + ": " + e.what());
    }
  }
  table.write(ctx.out_dir / "sweep.csv");
  detail::write_json(ctx.out_dir / "sweep.json", {{"name", cfg.name}, {"points", points}});
  return converged > 0 ? exit_ok : exit_failed;
}

/// Runs every task listed in the config, reusing the solve result for later tasks.
inline int cmd_reproduce(const ExperimentConfig& cfg, const CommandContext& ctx) {
  int status = exit_ok;
  auto has = [&](const char* t) { return std::find(cfg.tasks.begin(), cfg.tasks.end(), t) != cfg.tasks.end(); };
  if (has("sweep")) status = std::max(status, cmd_sweep(cfg, ctx));
  const bool per_point = has("solve") || has("spectrum") || has("evolve");
  if (!per_point) return status;
  for (const auto& [job, dir] : detail::expand_mu(cfg, ctx.out_dir)) {
    const Problem p = build_problem(job);
    std::optional<IterationTrace> solved;
    if (has("solve")) {
      const SolveOutcome o = run_solve(job, p, dir);
      const IterationTrace& tr = o.trace;
      *ctx.log << job.name << " [" << detail::tag(p) << "] " << engine_name(tr.variant)
               << ": " << reason_name(tr.reason) << " after " << tr.steps() << " iterations, residual "
               << io::format_number(tr.final_residual()) << "\n";
      if (!tr.converged()) {
        *ctx.err << job.name << ": " << reason_name(tr.reason) << (tr.detail.empty() ? "" : ": ") << tr.detail << "\n";
        status = exit_failed;
        continue;
      }
      solved = o.trace;
    }
    const IterationTrace* prior = solved ? &*solved : nullptr;
    if (has("spectrum")) status = std::max(status, spectrum_job(job, p, dir, ctx, prior));
    if (has("evolve")) status = std::max(status, evolve_job(job, p, dir, ctx, prior));
  }
  return status;
}

}  // namespace petv
