#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "wdt/model.hpp"

// Brute-force dense Bose-Hubbard reference for small chains (d^M <= ~1000).
// Deliberately shares no evolution or contraction code with the TEBD engine.
namespace wdt::ref {

// Full d^M x d^M Hamiltonian with the impurity coupling term lambda eta n_c.
Eigen::MatrixXcd dense_bhm_hamiltonian(const BhmParams& p, int d, double lambda);

// tr(H e^{-beta H}) / tr(e^{-beta H})
double dense_thermal_energy(const BhmParams& p, int d, double beta, double lambda);

// chi(u) = tr{rho U_Q^+ e^{+iuH(l_tau)} U_Q e^{-iuH(l_0)}} / tr rho with U_Q a
// midpoint staircase of n_quench_steps dense exponentials.
std::vector<std::complex<double>> dense_chi_series(const BhmParams& p, int d,
                                                   const QuenchSpec& q, double beta,
                                                   const std::vector<double>& u,
                                                   int n_quench_steps);

}  // namespace wdt::ref
