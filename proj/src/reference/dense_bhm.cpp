#include "dense_bhm.hpp"

#include <cmath>

#include "wdt/errors.hpp"

namespace wdt::ref {

namespace {

using cplx = std::complex<double>;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// op acting on site l of an M-site chain
Eigen::MatrixXcd embed(const Eigen::MatrixXcd& op, int l, int m_sites, int d) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int s = 0; s < m_sites; ++s)
    out = kron(out, s == l ? op : Eigen::MatrixXcd::Identity(d, d));
  return out;
}

Eigen::MatrixXcd hermitian_exp(const Eigen::MatrixXcd& h, cplx c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd ph = (c * es.eigenvalues().cast<cplx>().array()).exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Eigen::MatrixXcd dense_bhm_hamiltonian(const BhmParams& p, int d, double lambda) {
  p.validate();
  if (d < 2) throw ConfigError("dense_bhm: d must be >= 2");
  const long dim = static_cast<long>(std::pow(double(d), double(p.m_sites)) + 0.5);
  if (dim > 4096) throw ConfigError("dense_bhm: chain too large for the dense reference");

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
  const Eigen::MatrixXcd adag = a.adjoint();
  const Eigen::MatrixXcd num = adag * a;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int l = 0; l + 1 < p.m_sites; ++l) {
    // -J (a_l^+ a_{l+1} + a_l a_{l+1}^+), built as a two-site block at (l, l+1)
    Eigen::MatrixXcd hop = -p.hopping * (kron(adag, a) + kron(a, adag));
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(1, 1);
    for (int s = 0; s < p.m_sites; ++s) {
      if (s == l) {
        full = kron(full, hop);
        ++s;  // consumed two sites
      } else {
        full = kron(full, id);
      }
    }
    h += full;
  }
  for (int l = 0; l < p.m_sites; ++l) {
    Eigen::MatrixXcd site = 0.5 * p.interaction * num * (num - id) - p.chem_potential * num;
    if (l == p.impurity_site) site += lambda * p.eta * num;
    h += embed(site, l, p.m_sites, d);
  }
  return h;
}

double dense_thermal_energy(const BhmParams& p, int d, double beta, double lambda) {
  if (!(beta > 0.0)) throw ConfigError("dense_bhm: beta must be positive");
  const Eigen::MatrixXcd h = dense_bhm_hamiltonian(p, d, lambda);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double e0 = ev.minCoeff();
  double z = 0.0, ez = 0.0;
  for (int i = 0; i < ev.size(); ++i) {
    const double w = std::exp(-beta * (ev[i] - e0));
    z += w;
    ez += ev[i] * w;
  }
  return ez / z;
}

std::vector<cplx> dense_chi_series(const BhmParams& p, int d, const QuenchSpec& q, double beta,
                                   const std::vector<double>& u, int n_quench_steps) {
  if (!(beta > 0.0)) throw ConfigError("dense_bhm: beta must be positive");
  if (n_quench_steps < 1) throw ConfigError("dense_bhm: n_quench_steps must be >= 1");
  q.validate();

  const Eigen::MatrixXcd h0 = dense_bhm_hamiltonian(p, d, q.lambda_start());
  const Eigen::MatrixXcd ht = dense_bhm_hamiltonian(p, d, q.lambda_end());
  const long dim = h0.rows();

  Eigen::MatrixXcd uq = Eigen::MatrixXcd::Identity(dim, dim);
  const double dt = q.tau / n_quench_steps;
  for (int m = 1; m <= n_quench_steps; ++m) {
    const double lam = q.lambda_at((m - 0.5) * dt);
    uq = hermitian_exp(dense_bhm_hamiltonian(p, d, lam), cplx(0.0, -dt)) * uq;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es0(h0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> est(ht);
  const double e0 = es0.eigenvalues().minCoeff();
  Eigen::VectorXd boltz = (-beta * (es0.eigenvalues().array() - e0)).exp();
  const Eigen::MatrixXcd rho =
      es0.eigenvectors() * boltz.cast<cplx>().asDiagonal() * es0.eigenvectors().adjoint();
  const double z = boltz.sum();

  std::vector<cplx> out(u.size());
  for (size_t j = 0; j < u.size(); ++j) {
    const Eigen::VectorXcd pt = (cplx(0.0, u[j]) * est.eigenvalues().cast<cplx>().array()).exp();
    const Eigen::VectorXcd p0 =
        (cplx(0.0, -u[j]) * es0.eigenvalues().cast<cplx>().array()).exp();
    const Eigen::MatrixXcd et =
        est.eigenvectors() * pt.asDiagonal() * est.eigenvectors().adjoint();
    const Eigen::MatrixXcd em =
        es0.eigenvectors() * p0.asDiagonal() * es0.eigenvectors().adjoint();
    out[j] = (rho * uq.adjoint() * et * uq * em).trace() / z;
  }
  return out;
}

}  // namespace wdt::ref
