#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "petv/error.hpp"
#include "petv/iteration.hpp"
#include "petv/problems.hpp"
#include "petv/spectrum.hpp"

namespace petv {

using nlohmann::json;

/// Problem selector plus its parameters; unused parameters keep their defaults.
struct ProblemSpec {
  std::string kind = "nls_power";  // nls_power | gnls_double_well | gnls_three_term | eboussinesq
  double mu = 1.0;
  double alpha = 1.0, beta = 1.0, m1 = 2.0, m2 = 4.0;
  double V0 = 2.8, x0 = 1.5, gamma = 0.25;
  double kappa = 0.01247946;
  double r = 0.8, H = 1.8, c_s = 1.05;
  std::optional<double> s;  // defaults to -(1 + r H)
};

/// One matrix of a spectrum request: S, or F' in some mode with its exponents.
struct MatrixRequest {
  std::string kind = "S";  // S | F
  JacobianMode mode = JacobianMode::analytic_general;
  std::vector<double> gammas;  // empty: use the iteration exponents
};

struct SpectrumSpec {
  bool enabled = false;
  std::string point = "final";  // exact | final
  std::string profile;          // optional CSV written by a previous solve
  int k = 6;
  std::vector<MatrixRequest> matrices;
};

struct EvolutionSpec {
  bool enabled = false;
  double dt = 1e-3;
  double T = 40.0;
  double sample_interval = 0.1;    // diagnostics cadence
  double snapshot_interval = 0.0;  // full-profile dumps; 0 means only t = 0 and T
};

struct SweepSpec {
  std::vector<double> mu;  // explicit list, or built from start/stop/count
};

struct ExperimentConfig {
  std::string name = "custom";
  ProblemSpec problem;
  double grid_l = 16.0;
  int grid_m = 512;
  IterationConfig iteration;
  SpectrumSpec spectrum;
  EvolutionSpec evolution;
  SweepSpec sweep;
  std::vector<double> mu_values;  // run the same job at each mu
  std::vector<std::string> tasks{"solve"};
  std::string output_dir;
  unsigned seed = 0;

  GridSpec grid() const { return make_grid(grid_l, grid_m); }
};

// ---------------------------------------------------------------------------
// Problem construction

inline Problem build_problem(const ProblemSpec& s, const GridSpec& g) {
  if (s.kind == "nls_power") return build_nls_power(s.mu, s.alpha, s.beta, s.m1, s.m2, g);
  if (s.kind == "gnls_double_well") return build_gnls_double_well(s.mu, s.V0, s.x0, s.gamma, g);
  if (s.kind == "gnls_three_term") return build_gnls_three_term(s.mu, s.kappa, g);
  if (s.kind == "eboussinesq") {
    const BoussinesqCoefficients c =
        s.s ? BoussinesqCoefficients(s.r, s.H, *s.s, s.c_s) : BoussinesqCoefficients::with_default_s(s.r, s.H, s.c_s);
    return build_eboussinesq(c, g);
  }
  throw ConfigError("problem.kind: unknown problem '" + s.kind + "'");
}

inline Problem build_problem(const ExperimentConfig& cfg) { return build_problem(cfg.problem, cfg.grid()); }

// ---------------------------------------------------------------------------
// JSON parsing with unknown-key rejection

namespace detail {

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(key_path(key) + ": wrong type");
    }
  }

  void read_mode(const std::string& key, JacobianMode& mode) {
    std::string s;
    read(key, s);
    if (s.empty()) return;
    if (s == "analytic") mode = JacobianMode::analytic_general;
    else if (s == "two-term") mode = JacobianMode::paper_two_term;
    else if (s == "itermat") mode = JacobianMode::paper_itermat2;
    else if (s == "finite-difference") mode = JacobianMode::finite_difference;
    else throw ConfigError(key_path(key) + ": unknown mode '" + s + "'");
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), key_path(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config" : path_; }

  /// Throws on the first key that was never looked up.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown config key '" + key_path(it.key()) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline FactorStrategy::Variant parse_engine(const std::string& s) {
  if (s == "classic") return FactorStrategy::Variant::none;
  if (s == "petviashvili") return FactorStrategy::Variant::single;
  if (s == "extended") return FactorStrategy::Variant::per_term;
  throw ConfigError("unknown engine '" + s + "' (expected classic, petviashvili or extended)");
}

inline void parse_guess(Section sec, InitialGuess& g) {
  std::string kind;
  sec.read("kind", kind);
  if (kind == "gaussian" || kind.empty()) g.kind = InitialGuess::Kind::gaussian;
  else if (kind == "sech") g.kind = InitialGuess::Kind::sech;
  else throw ConfigError(sec.key_path("kind") + ": unknown guess kind '" + kind + "'");
  sec.read("amplitude", g.amplitude);
  g.second_amplitude = g.amplitude;
  sec.read("second_amplitude", g.second_amplitude);
  sec.read("width", g.width);
  sec.read("center", g.center);
  sec.finish();
}

}  // namespace detail

/// Parses a JSON experiment description; any unrecognized key is an error naming that key.
inline ExperimentConfig parse_config(const json& root) {
  ExperimentConfig cfg;
  detail::Section top(root, "");
  top.read("name", cfg.name);
  top.read("seed", cfg.seed);
  top.read("output", cfg.output_dir);
  top.read("tasks", cfg.tasks);
  top.read("mu_values", cfg.mu_values);

  if (top.has("problem")) {
    auto sec = top.child("problem");
    ProblemSpec& p = cfg.problem;
    sec.read("kind", p.kind);
    sec.read("mu", p.mu);
    sec.read("alpha", p.alpha);
    sec.read("beta", p.beta);
    sec.read("m1", p.m1);
    sec.read("m2", p.m2);
    sec.read("V0", p.V0);
    sec.read("x0", p.x0);
    sec.read("gamma", p.gamma);
    sec.read("kappa", p.kappa);
    sec.read("r", p.r);
    sec.read("H", p.H);
    sec.read("c_s", p.c_s);
    if (sec.has("s")) {
      double s = 0.0;
      sec.read("s", s);
      p.s = s;
    }
    sec.finish();
    if (p.kind != "nls_power" && p.kind != "gnls_double_well" && p.kind != "gnls_three_term" &&
        p.kind != "eboussinesq") {
      throw ConfigError("problem.kind: unknown problem '" + p.kind + "'");
    }
  }

  if (top.has("grid")) {
    auto sec = top.child("grid");
    sec.read("l", cfg.grid_l);
    sec.read("m", cfg.grid_m);
    sec.finish();
  }

  if (top.has("iteration")) {
    auto sec = top.child("iteration");
    IterationConfig& it = cfg.iteration;
    std::string engine;
    sec.read("engine", engine);
    if (!engine.empty()) it.factor.variant = detail::parse_engine(engine);
    sec.read("gammas", it.factor.gammas);
    sec.read("max_iters", it.max_iters);
    sec.read("tol", it.residual_tol);
    sec.read("record_iterates", it.record_iterates);
    sec.read("divergence_factor", it.divergence_factor);
    if (sec.has("guess")) detail::parse_guess(sec.child("guess"), it.guess);
    sec.finish();
  }

  if (top.has("spectrum")) {
    auto sec = top.child("spectrum");
    SpectrumSpec& sp = cfg.spectrum;
    sp.enabled = true;
    sec.read("point", sp.point);
    if (sp.point != "exact" && sp.point != "final") throw ConfigError("spectrum.point: expected 'exact' or 'final'");
    sec.read("profile", sp.profile);
    sec.read("k", sp.k);
    if (sec.has("matrices")) {
      const json& arr = sec.raw("matrices");
      if (!arr.is_array()) throw ConfigError("spectrum.matrices: expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        detail::Section ms(arr[i], "spectrum.matrices[" + std::to_string(i) + "]");
        MatrixRequest req;
        ms.read("kind", req.kind);
        if (req.kind != "S" && req.kind != "F") throw ConfigError(ms.key_path("kind") + ": expected 'S' or 'F'");
        ms.read_mode("mode", req.mode);
        ms.read("gammas", req.gammas);
        ms.finish();
        sp.matrices.push_back(req);
      }
    }
    if (sp.matrices.empty()) sp.matrices = {MatrixRequest{}, MatrixRequest{"F"}};
    sec.finish();
  }

  if (top.has("evolution")) {
    auto sec = top.child("evolution");
    EvolutionSpec& ev = cfg.evolution;
    ev.enabled = true;
    sec.read("dt", ev.dt);
    sec.read("T", ev.T);
    sec.read("sample_interval", ev.sample_interval);
    sec.read("snapshot_interval", ev.snapshot_interval);
    sec.finish();
  }

  if (top.has("sweep")) {
    auto sec = top.child("sweep");
    SweepSpec& sw = cfg.sweep;
    if (sec.has("mu")) {
      sec.read("mu", sw.mu);
    } else {
      double start = 0.0, stop = 0.0;
      int count = 0;
      sec.read("start", start);
      sec.read("stop", stop);
      sec.read("count", count);
      if (count < 0) throw ConfigError("sweep.count must be nonnegative");
      for (int i = 0; i < count; ++i) sw.mu.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
    }
    sec.finish();
  }
  top.finish();

  for (const auto& t : cfg.tasks) {
    if (t != "solve" && t != "spectrum" && t != "evolve" && t != "sweep") {
      throw ConfigError("tasks: unknown task '" + t + "'");
    }
  }
  cfg.iteration.validate();
  (void)cfg.grid();  // validates l and m
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Built-in experiments

inline std::vector<std::string> preset_names() {
  return {"cubic-quintic", "table1",  "table2", "power-2-4", "table4",        "boussinesq-wide", "table5",
          "table6",        "fig4",    "fig8",   "fig13",     "fig18",         "sweep-double-well"};
}

inline json preset_json(const std::string& name) {
  const json cubic_quintic = {{"kind", "nls_power"}, {"mu", 1.0}, {"alpha", 1.0}, {"beta", 1.0}, {"m1", 2.0}, {"m2", 4.0}};
  const json gaussian = {{"kind", "gaussian"}, {"amplitude", 1.5}, {"width", 2.0}, {"center", 0.0}};
  const json extended = {{"engine", "extended"}, {"max_iters", 500}, {"tol", 1e-10}, {"guess", gaussian}};
  const json power_2_4 = {{"kind", "nls_power"}, {"mu", 2.0 * std::numbers::pi}, {"alpha", 1.0}, {"beta", 1.0},
                          {"m1", 1.0}, {"m2", 3.0}};
  const json table4_problem = {{"kind", "eboussinesq"}, {"r", 0.8}, {"H", 1.8}, {"c_s", 1.05}};
  json table4_iter = extended;
  table4_iter["gammas"] = {2.0, 1.5};
  table4_iter["guess"] = {{"kind", "gaussian"}, {"amplitude", 0.3}, {"width", 2.0}};
  json well_iter = extended;
  well_iter["gammas"] = {1.5, 1.25};
  well_iter["max_iters"] = 2000;
  well_iter["guess"] = {{"kind", "gaussian"}, {"amplitude", 0.5}, {"width", 2.0}};
  json three_iter = extended;
  three_iter["gammas"] = {1.5, 1.25, 7.0 / 6.0};
  three_iter["max_iters"] = 5000;
  three_iter["guess"] = {{"kind", "gaussian"}, {"amplitude", 1.0}, {"width", 2.0}, {"center", 1.5}};
  const json well_problem = {{"kind", "gnls_double_well"}, {"V0", 2.8}, {"x0", 1.5}, {"gamma", 0.25}};
  const json three_problem = {{"kind", "gnls_three_term"}, {"kappa", 0.01247946}};
  json cq_iter = extended;
  cq_iter["gammas"] = {1.5, 1.25};
  cq_iter["max_iters"] = 40;
  const json S = {{"kind", "S"}};

  if (name == "cubic-quintic") {
    return {{"name", name}, {"problem", cubic_quintic}, {"grid", {{"l", 32.0}, {"m", 1024}}}, {"iteration", cq_iter},
            {"tasks", {"solve"}}};
  }
  if (name == "table1") {
    json p = cubic_quintic;
    p["mu"] = 0.25;
    return {{"name", name},
            {"problem", p},
            {"grid", {{"l", 64.0}, {"m", 512}}},
            {"iteration", cq_iter},
            {"spectrum",
             {{"point", "exact"},
              {"k", 6},
              {"matrices",
               {S,
                {{"kind", "F"}, {"gammas", {1.5, 1.5}}},
                {{"kind", "F"}, {"gammas", {1.25, 1.25}}},
                {{"kind", "F"}, {"gammas", {1.5, 1.25}}}}}}},
            {"tasks", {"spectrum"}}};
  }
  if (name == "table2") {
    json it = cq_iter;
    it["max_iters"] = 60;
    return {{"name", name}, {"problem", cubic_quintic}, {"grid", {{"l", 32.0}, {"m", 512}}}, {"iteration", it},
            {"tasks", {"solve"}}};
  }
  if (name == "power-2-4") {
    json it = extended;
    it["gammas"] = {2.0, 4.0 / 3.0};
    return {{"name", name},
            {"problem", power_2_4},
            {"grid", {{"l", 16.0}, {"m", 512}}},
            {"iteration", it},
            {"spectrum", {{"point", "final"}, {"k", 6}, {"matrices", {S, {{"kind", "F"}}}}}},
            {"tasks", {"solve", "spectrum"}}};
  }
  if (name == "table4") {
    return {{"name", name},
            {"problem", table4_problem},
            {"grid", {{"l", 64.0}, {"m", 512}}},
            {"iteration", table4_iter},
            {"spectrum", {{"point", "final"}, {"k", 6}, {"matrices", {S, {{"kind", "F"}}}}}},
            {"tasks", {"solve", "spectrum"}}};
  }
  if (name == "boussinesq-wide") {
    json p = table4_problem;
    p["H"] = 0.95;
    p["c_s"] = 1.02;
    json it = table4_iter;
    it["max_iters"] = 2000;
    return {{"name", name}, {"problem", p}, {"grid", {{"l", 256.0}, {"m", 2048}}}, {"iteration", it},
            {"tasks", {"solve"}}};
  }
  if (name == "table5") {
    return {{"name", name},
            {"problem", well_problem},
            {"mu_values", {1.9, 2.69}},
            {"grid", {{"l", 16.0}, {"m", 512}}},
            {"iteration", well_iter},
            {"spectrum", {{"point", "final"}, {"k", 6}, {"matrices", {S, {{"kind", "F"}}}}}},
            {"tasks", {"solve", "spectrum"}}};
  }
  if (name == "table6") {
    return {{"name", name},
            {"problem", three_problem},
            {"mu_values", {3.275, 3.289}},
            {"grid", {{"l", 16.0}, {"m", 512}}},
            {"iteration", three_iter},
            {"spectrum",
             {{"point", "final"},
              {"k", 6},
              {"matrices", {S, {{"kind", "F"}}, {{"kind", "F"}, {"mode", "itermat"}}}}}},
            {"tasks", {"solve", "spectrum"}}};
  }
  if (name == "fig4") {
    json it = extended;
    it["gammas"] = {2.0, 4.0 / 3.0};
    return {{"name", name},
            {"problem", power_2_4},
            {"grid", {{"l", 16.0}, {"m", 512}}},
            {"iteration", it},
            {"evolution", {{"dt", 1e-3}, {"T", 40.0}, {"sample_interval", 0.1}, {"snapshot_interval", 20.0}}},
            {"tasks", {"solve", "evolve"}}};
  }
  if (name == "fig8") {
    return {{"name", name},
            {"problem", table4_problem},
            {"grid", {{"l", 64.0}, {"m", 512}}},
            {"iteration", table4_iter},
            {"evolution", {{"dt", 5e-4}, {"T", 200.0}, {"sample_interval", 1.0}, {"snapshot_interval", 50.0}}},
            {"tasks", {"solve", "evolve"}}};
  }
  if (name == "fig13" || name == "fig18") {
    const bool well = name == "fig13";
    return {{"name", name},
            {"problem", well ? well_problem : three_problem},
            {"mu_values", well ? json{1.9, 2.69} : json{3.275, 3.289}},
            {"grid", {{"l", 16.0}, {"m", 512}}},
            {"iteration", well ? well_iter : three_iter},
            {"evolution", {{"dt", 1e-3}, {"T", 200.0}, {"sample_interval", 0.1}, {"snapshot_interval", 50.0}}},
            {"tasks", {"solve", "evolve"}}};
  }
  if (name == "sweep-double-well") {
    json sweep_iter = well_iter;
    sweep_iter["tol"] = 1e-9;
    return {{"name", name},
            {"problem", well_problem},
            {"grid", {{"l", 16.0}, {"m", 512}}},
            {"iteration", sweep_iter},
            {"sweep", {{"start", 1.8}, {"stop", 2.7}, {"count", 19}}},
            {"tasks", {"sweep"}}};
  }
  throw ConfigError("unknown preset '" + name + "'");
}

inline ExperimentConfig preset(const std::string& name) { return parse_config(preset_json(name)); }

}  // namespace petv
