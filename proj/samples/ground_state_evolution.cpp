// Finds the cubic ground state and propagates it; the modulus should stay put.
#include <cstdio>

#include "petv/evolve.hpp"
#include "petv/iteration.hpp"

int main() {
  using namespace petv;
  const Problem p = build_nls_power(1.0, 1.0, 0.0, 2.0, 4.0, make_grid(24.0, 512));
  IterationConfig cfg;
  cfg.factor = FactorStrategy::single_default();
  cfg.guess = InitialGuess::gaussian(1.0, 2.0);
  const IterationTrace tr = run_iteration(p, cfg);
  if (!tr.converged()) {
    std::fprintf(stderr, "iteration %s: %s\n", reason_name(tr.reason), tr.detail.c_str());
    return 1;
  }
  const Eigen::VectorXd u = tr.final_state.cwiseAbs();
  const NlsRun run = splitstep_nls(p.grid(), *p.nls_model(), u.cast<std::complex<double>>(), 1e-3, 5.0, 500);
  std::printf("modulus drift %s\n", io::format_number(modulus_drift(run, u)).c_str());
  std::printf("power %s -> %s\n", io::format_number(power(run.initial(), p.grid())).c_str(),
              io::format_number(power(run.last(), p.grid())).c_str());
}
