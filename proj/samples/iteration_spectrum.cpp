// Leading eigenvalues of S and of the extended iteration matrix at the exact profile.
#include <cstdio>

#include "petv/spectrum.hpp"

int main() {
  using namespace petv;
  const Problem p = build_nls_power(1.0, 1.0, 1.0, 2.0, 4.0, make_grid(16.0, 256));
  const Eigen::VectorXd& u = *p.exact_solution();
  std::vector<SpectrumReport> reports;
  reports.push_back(analyze_matrix(build_S(p, u), 4, "S", "exact solution", false));
  const std::vector<double> gammas{1.5, 1.25};
  reports.push_back(analyze_matrix(build_F_jacobian(p, u, gammas, JacobianMode::analytic_general), 4, "F'",
                                   "exact solution", true, gammas));
  std::fputs(spectrum_table(reports).c_str(), stdout);
}
