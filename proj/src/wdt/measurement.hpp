#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"

namespace wdt {

enum class Provenance { Exact, Sampled };

// Characteristic-function series on the uniform grid u_j = j T / N, j = 1..N.
struct CharFnSeries {
  double t_window = 0.0;  // T
  int n_steps = 0;        // N
  std::vector<double> u;
  std::vector<std::complex<double>> value;
  std::vector<double> variance;  // per-point estimator variance; 0 for exact
  Provenance provenance = Provenance::Exact;
  uint64_t seed = 0;
  long n_meas = 0;
  double tau = 0.0;               // quench duration carried for the readout phase
  double beta = 0.0;              // sampling temperature tag
  int clamp_count = 0;            // |<sigma>| > 1 clamps during sampling
  double truncation_weight = 0.0; // cumulative TEBD discarded weight
  std::string engine = "bogoliubov";
  std::string tag = "forward";    // forward | backward

  double du() const { return t_window / n_steps; }
  void validate() const;
};

// Simulate the two-observable qubit record at each grid point and return the
// per-point estimator series chi_bar with plug-in variances.  For each u_j,
// n_meas Bernoulli draws for sigma_x and n_meas independent draws for sigma_y
// are taken from an independent substream keyed by (seed, j).
CharFnSeries sample_series(const CharFnSeries& exact, const QubitConfig& qb, long n_meas,
                           uint64_t seed);

// Plug-in estimator variance (2 - vis2 |chi|^2) / (vis2 n_meas).
double estimator_variance(double abs_chi_sq, double vis2, long n_meas);

// Short-time fit of ln chi over u <= 0.1 / sigma: mu from the unwrapped phase
// slope, sigma^2 from -ln|chi| = sigma^2 u^2 / 2.  Iterates the window choice.
struct ShortTimeCumulants {
  double mu = 0.0;
  double sigma2 = 0.0;
  int n_used = 0;
};
ShortTimeCumulants short_time_cumulants(const CharFnSeries& s);

}  // namespace wdt
