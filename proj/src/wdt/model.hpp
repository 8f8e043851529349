#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace wdt {

// ============================================================================
// Quench protocol lambda_Q(t) on [0, tau]
// ============================================================================

enum class QuenchShape { SinSquaredRamp, Linear, PiecewiseTable };

struct QuenchSpec {
  QuenchShape shape = QuenchShape::SinSquaredRamp;
  double lambda_i = 0.0;
  double lambda_f = 0.0;
  double tau = 1.0;
  // PiecewiseTable only: (t, lambda) knots with strictly increasing t,
  // t.front() == 0 and t.back() == tau; linear interpolation between knots.
  std::vector<std::pair<double, double>> table;

  void validate() const;
  double lambda_at(double t) const;
  double lambda_start() const;
  double lambda_end() const;
  // Time-reversed protocol lambda_B(t) = lambda_Q(tau - t).
  QuenchSpec reversed() const;
};

// ============================================================================
// Bose-Hubbard chain with a single impurity coupling site
// ============================================================================

struct BhmParams {
  int m_sites = 1000;
  double hopping = 1.0;         // J
  double interaction = 0.0;     // U
  double chem_potential = 0.0;  // mu (enters the TEBD engine only)
  double density = 1.0;         // n
  double eta = 1.0;             // impurity coupling scale
  int impurity_site = 0;        // c
  double lattice_const = 1.0;   // a

  void validate() const;
};

// ============================================================================
// Interferometry qubit
// ============================================================================

struct QubitConfig {
  std::complex<double> s_down{0.70710678118654752440, 0.0};
  std::complex<double> s_up{0.70710678118654752440, 0.0};
  double delta = 0.0;  // qubit splitting

  void validate() const;
  // Deterministic readout phase phi(u) = delta * (tau + u).
  double phase(double u, double tau) const { return delta * (tau + u); }
  // 2 s_down^* s_up: multiplies chi in the forward map to <sx> + i<sy>.
  std::complex<double> forward_factor() const { return 2.0 * std::conj(s_down) * s_up; }
  // 2 s_up^* s_down: divides the record means in the estimator.
  std::complex<double> estimate_factor() const { return 2.0 * std::conj(s_up) * s_down; }
  // |2 s_up^* s_down|^2, the visibility factor in the estimator variance.
  double vis2() const { return std::norm(estimate_factor()); }
};

}  // namespace wdt
