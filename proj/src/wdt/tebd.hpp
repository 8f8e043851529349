#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "measurement.hpp"
#include "model.hpp"

namespace wdt {

struct TebdOptions {
  int d = 4;        // local Fock cutoff (occupations 0..d-1)
  int d_max = 200;  // max bond dimension
  double dt_real = 0.01;
  double dt_imag = 0.005;
  bool midpoint_lambda = true;  // sample lambda((m-1/2) dt); else start-of-step
  double svd_rel_cutoff = 1e-12;
  double trunc_warn_threshold = 1e-3;

  void validate() const;
};

// Matrix product operator; site tensor A_l has dims (Dl, i, j, Dr) flattened
// row-major.  Site tensors are kept near unit Frobenius norm with the scale
// folded into log_norm.
class Mpo {
 public:
  Mpo(int n_sites, int d);  // identity operator

  int n_sites() const { return n_sites_; }
  int d() const { return d_; }
  int dim_left(int l) const { return l == 0 ? 1 : bond_[l - 1]; }
  int dim_right(int l) const { return l == n_sites_ - 1 ? 1 : bond_[l]; }
  int max_bond() const;
  std::vector<std::complex<double>>& site(int l) { return a_[l]; }
  const std::vector<std::complex<double>>& site(int l) const { return a_[l]; }

  double log_norm = 0.0;
  double discarded = 0.0;  // accumulated relative truncation weight

  // trace() = trace_mantissa() * exp(log_norm)
  std::complex<double> trace_mantissa() const;
  std::complex<double> trace() const;

  // Dense d^M x d^M matrix; small chains only (tests).
  Eigen::MatrixXcd dense() const;

  // Rescale every site tensor to unit Frobenius norm, folding into log_norm.
  void normalize();

  void set_bond(int l, int dim) { bond_[l] = dim; }

 private:
  int n_sites_;
  int d_;
  std::vector<int> bond_;  // bond_[l] between sites l and l+1
  std::vector<std::vector<std::complex<double>>> a_;
};

struct ScaledTrace {
  std::complex<double> mantissa;
  double log_scale;
};

// tr(A * B) as mantissa and log scale.
ScaledTrace trace_product(const Mpo& a, const Mpo& b);

class TebdEngine {
 public:
  TebdEngine(const BhmParams& p, const TebdOptions& opt);

  const TebdOptions& options() const { return opt_; }
  const BhmParams& params() const { return p_; }

  // Two-site bond Hamiltonian h_{l,l+1}; boundary bonds absorb the full
  // single-site term, interior bonds half of it.
  Eigen::MatrixXcd bond_hamiltonian(int l, double lambda) const;

  Mpo identity() const { return Mpo(p_.m_sites, opt_.d); }

  // rho_beta(lambda) ~ e^{-beta H/2} 1 e^{-beta H/2} (unnormalized).
  Mpo thermal_state(double beta, double lambda) const;

  // One symmetrized-staircase step X -> exp(c_l h(lambda_l)) X exp(c_r h(lambda_r)).
  // Either side may be disabled by passing coeff = 0.
  void apply_step(Mpo& x, std::complex<double> c_left, double lambda_left,
                  std::complex<double> c_right, double lambda_right) const;

  // X -> U_Q X (left = true) or X -> X U_Q^dagger-style right products,
  // stepping lambda along the protocol with dt_real substeps.
  void quench_left(Mpo& x, const QuenchSpec& q) const;     // X -> U_Q X
  void quench_right_dagger(Mpo& x, const QuenchSpec& q) const;  // X -> X U_Q^+

  // chi(u_j) on u_j = j T / N via chi = tr{(U_Q rho) B(u)},
  // B(u) = e^{-iu H(l0)} U_Q^+ e^{+iu H(ltau)}, normalized by the u = 0 trace.
  CharFnSeries chi_series(const QuenchSpec& q, double beta, double t_window, int n_steps) const;

  // tr(op rho)/tr(rho) for a two-site op on (l, l+1).
  std::complex<double> expectation_two_site(const Mpo& rho, int l,
                                            const Eigen::MatrixXcd& op) const;

  // tr(H(lambda) rho_beta)/tr(rho_beta) via the bond split.
  double thermal_energy(double beta, double lambda) const;
  double energy(const Mpo& rho, double lambda) const;

 private:
  BhmParams p_;
  TebdOptions opt_;

  struct GateSet {
    // per bond: left/right half-step gates (d^2 x d^2); empty when unused
    std::vector<Eigen::MatrixXcd> left;
    std::vector<Eigen::MatrixXcd> right;
  };
  GateSet make_gates(std::complex<double> c_left, double lambda_left,
                     std::complex<double> c_right, double lambda_right) const;
  void sweep(Mpo& x, const GateSet& g, bool reverse) const;
  // carry_left moves the singular values into site l instead of l+1 so the
  // orthogonality center travels with a right-to-left sweep; truncation is
  // only optimal when the environment of the active bond stays isometric
  void bond_apply(Mpo& x, int l, const Eigen::MatrixXcd* left,
                  const Eigen::MatrixXcd* right, bool carry_left) const;
};

}  // namespace wdt
