// Solves u'' - mu u + u^3 + u^5 = 0 with the extended iteration and compares to the closed form.
#include <cstdio>

#include "petv/iteration.hpp"

int main() {
  using namespace petv;
  const Problem p = build_nls_power(1.0, 1.0, 1.0, 2.0, 4.0, make_grid(32.0, 1024));
  IterationConfig cfg;
  cfg.factor = FactorStrategy::per_term({1.5, 1.25});
  cfg.guess = InitialGuess::gaussian(1.5, 2.0);
  const IterationTrace tr = run_iteration(p, cfg);
  std::printf("%s after %d steps\n", reason_name(tr.reason), tr.steps());
  std::printf("residual %s\n", io::format_number(tr.final_residual()).c_str());
  std::printf("error vs exact %s\n", io::format_number(tr.exact_error.back()).c_str());
  return tr.converged() ? 0 : 1;
}
