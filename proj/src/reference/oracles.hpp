#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "wdt/freq.hpp"
#include "wdt/model.hpp"

// Independent reference computations for the DERIVED quantities: brute-force
// oscillator evolution, composite-Simpson integrals, quadrature of the
// likelihood's defining integral, Bessel-sum work weights, and finite
// differences of ln chi.  None of these share code with the estimators and
// closed forms they check.
namespace wdt::ref {

// Composite Simpson of Int_0^tau lambdap(t) e^{-i omega t} dt (n even panels).
std::complex<double> simpson_response(const std::function<double(double)>& lambdap, double tau,
                                      double omega, int n_panels);

struct OscillatorOracleOptions {
  int n_fock = 64;          // per-mode Fock truncation
  int n_quench_steps = 400; // midpoint staircase resolution for U_Q
};

// Lab-frame brute force: every Bogoliubov mode is evolved as a truncated
// driven oscillator (thermal initial state at lambda_Q(0), dense midpoint
// staircase), multiplied by the c-number factor e^{iu eta n (l_tau - l_0)}.
std::vector<std::complex<double>> oscillator_chi_series(const BhmParams& p, const QuenchSpec& q,
                                                        double beta,
                                                        const std::vector<double>& u,
                                                        const OscillatorOracleOptions& opt = {});

// ln[ max{1, R^2} * Int_0^inf p N(p_f; R p, var_f) N(p_b; p, var_b) dp ] with
// R = e^{beta (w - df)}, by peak-normalized log-domain quadrature.
double log_likelihood_quadrature(const ObservationRow& row, double beta, double df,
                                 double tol = 1e-9);

// Work weight w_m of a displaced thermal oscillator: P(W) puts mass w_m on
// W = m omega + shift, w_m = e^{-(p+q)} (p/q)^{m/2} I_m(2 sqrt(pq)) with
// p = g2 (nbar + 1), q = g2 nbar.
double bessel_work_weight(double g2, double nbar, int m);

struct FdCumulants {
  double mu = 0.0;
  double sigma2 = 0.0;
  double kappa3 = 0.0;
};

// Cumulants from 4th-order central differences of ln chi at u = 0 with one
// Richardson step (h, h/2).
FdCumulants fd_cumulants(const std::function<std::complex<double>(double)>& chi, double h);

// Canonical oracle values for the CLI `oracle` subcommand, written as a
// summary record fixture.
void write_oracle_fixture(const std::string& path);

}  // namespace wdt::ref
