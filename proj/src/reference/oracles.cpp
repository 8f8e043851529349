#include "oracles.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "dense_bhm.hpp"
#include "wdt/errors.hpp"
#include "wdt/io.hpp"
#include "wdt/quadrature.hpp"

namespace wdt::ref {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXcd hermitian_exp(const Eigen::MatrixXcd& h, cplx c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd ph = (c * es.eigenvalues().cast<cplx>().array()).exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

std::complex<double> simpson_response(const std::function<double(double)>& lambdap, double tau,
                                      double omega, int n_panels) {
  if (n_panels < 2 || n_panels % 2 != 0)
    throw ConfigError("simpson_response: n_panels must be even and >= 2");
  const double h = tau / n_panels;
  cplx acc = 0.0;
  for (int j = 0; j <= n_panels; ++j) {
    const double t = j * h;
    const double w = (j == 0 || j == n_panels) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    acc += w * lambdap(t) * cplx(std::cos(omega * t), -std::sin(omega * t));
  }
  return acc * (h / 3.0);
}

std::vector<cplx> oscillator_chi_series(const BhmParams& p, const QuenchSpec& q, double beta,
                                        const std::vector<double>& u,
                                        const OscillatorOracleOptions& opt) {
  p.validate();
  q.validate();
  if (!(beta > 0.0)) throw ConfigError("oscillator oracle: beta must be positive");
  if (opt.n_fock < 4 || opt.n_quench_steps < 1)
    throw ConfigError("oscillator oracle: bad options");

  const double l0 = q.lambda_start();
  const double ltau = q.lambda_end();
  const int nf = opt.n_fock;

  std::vector<cplx> chi(u.size(), 1.0);
  // c-number impurity-condensate term lambda eta n
  for (size_t j = 0; j < u.size(); ++j) {
    const double phase = u[j] * p.eta * p.density * (ltau - l0);
    chi[j] = cplx(std::cos(phase), std::sin(phase));
  }

  for (int m = 1; m < p.m_sites; ++m) {
    const double k = 2.0 * kPi * m / (p.m_sites * p.lattice_const);
    const double eps = 2.0 * p.hopping * (1.0 - std::cos(k * p.lattice_const));
    const double omega = std::sqrt(eps * (eps + 2.0 * p.interaction * p.density));
    const double arg = k * p.lattice_const * p.impurity_site;
    const cplx eta_k = p.eta * cplx(std::cos(arg), std::sin(arg)) *
                       std::sqrt(p.density * eps / (p.m_sites * omega));

    auto mode_h = [&](double lambda) {
      Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(nf, nf);
      for (int n = 0; n < nf; ++n) h(n, n) = omega * n;
      for (int n = 0; n + 1 < nf; ++n) {
        h(n + 1, n) = lambda * eta_k * std::sqrt(double(n + 1));
        h(n, n + 1) = std::conj(h(n + 1, n));
      }
      return h;
    };

    const Eigen::MatrixXcd h0 = mode_h(l0);
    const Eigen::MatrixXcd ht = mode_h(ltau);
    Eigen::MatrixXcd uq = Eigen::MatrixXcd::Identity(nf, nf);
    const double dt = q.tau / opt.n_quench_steps;
    for (int s = 1; s <= opt.n_quench_steps; ++s)
      uq = hermitian_exp(mode_h(q.lambda_at((s - 0.5) * dt)), cplx(0.0, -dt)) * uq;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es0(h0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> est(ht);
    const double e0 = es0.eigenvalues().minCoeff();
    const Eigen::VectorXd boltz = (-beta * (es0.eigenvalues().array() - e0)).exp();
    const Eigen::MatrixXcd rho =
        es0.eigenvectors() * boltz.cast<cplx>().asDiagonal() * es0.eigenvectors().adjoint();
    const double z = boltz.sum();

    for (size_t j = 0; j < u.size(); ++j) {
      const Eigen::VectorXcd pt =
          (cplx(0.0, u[j]) * est.eigenvalues().cast<cplx>().array()).exp();
      const Eigen::VectorXcd p0 =
          (cplx(0.0, -u[j]) * es0.eigenvalues().cast<cplx>().array()).exp();
      const Eigen::MatrixXcd et =
          est.eigenvectors() * pt.asDiagonal() * est.eigenvectors().adjoint();
      const Eigen::MatrixXcd em =
          es0.eigenvectors() * p0.asDiagonal() * es0.eigenvectors().adjoint();
      chi[j] *= (rho * uq.adjoint() * et * uq * em).trace() / z;
    }
  }
  return chi;
}

double log_likelihood_quadrature(const ObservationRow& row, double beta, double df, double tol) {
  if (!(row.var_f > 0.0) || !(row.var_b > 0.0))
    throw ConfigError("likelihood oracle: variances must be positive");
  const double ell = beta * (row.w - df);
  if (std::abs(ell) > 150.0)
    throw NumericError("likelihood oracle: |ln R| too large for direct quadrature");
  const double r = std::exp(ell);
  const double sf2 = row.var_f;
  const double sb2 = row.var_b;

  const double alpha = r * r / sf2 + 1.0 / sb2;
  const double gamma = r * row.p_f / sf2 + row.p_b / sb2;
  const double p_star = (gamma + std::sqrt(gamma * gamma + 4.0 * alpha)) / (2.0 * alpha);
  const double width = 1.0 / std::sqrt(alpha);

  auto logf = [&](double p) {
    const double rf = row.p_f - r * p;
    const double rb = row.p_b - p;
    return std::log(p) - 0.5 * rf * rf / sf2 - 0.5 * rb * rb / sb2;
  };
  const double logf_star = logf(p_star);

  QuadOptions qopt;
  qopt.abs_tol = tol;
  qopt.rel_tol = tol;
  const double integral = integrate_gk_real(
      [&](double p) { return p > 0.0 ? std::exp(logf(p) - logf_star) : 0.0; }, 0.0,
      p_star + 12.0 * width, qopt);
  const double log_i = logf_star + std::log(integral) -
                       std::log(2.0 * kPi * std::sqrt(sf2) * std::sqrt(sb2));
  return std::max(0.0, 2.0 * ell) + log_i;
}

double bessel_work_weight(double g2, double nbar, int m) {
  if (!(g2 >= 0.0) || !(nbar >= 0.0)) throw ConfigError("bessel weight: bad parameters");
  const double p = g2 * (nbar + 1.0);
  const double q = g2 * nbar;
  if (q == 0.0) {
    if (m < 0) return 0.0;
    return std::exp(-p + m * std::log(p) - std::lgamma(m + 1.0));
  }
  const double bessel = std::cyl_bessel_i(std::abs(m), 2.0 * std::sqrt(p * q));
  return std::exp(-(p + q) + 0.5 * m * std::log(p / q)) * bessel;
}

FdCumulants fd_cumulants(const std::function<cplx(double)>& chi, double h) {
  if (!(h > 0.0)) throw ConfigError("fd_cumulants: h must be positive");
  auto g = [&](double x) { return std::log(chi(x)); };

  auto stencils = [&](double hh) {
    const cplx g1 = g(hh), gm1 = g(-hh);
    const cplx g2 = g(2 * hh), gm2 = g(-2 * hh);
    const cplx g3 = g(3 * hh), gm3 = g(-3 * hh);
    const cplx g0 = g(0.0);
    const cplx d1 = (-g2 + 8.0 * g1 - 8.0 * gm1 + gm2) / (12.0 * hh);
    const cplx d2 = (-g2 + 16.0 * g1 - 30.0 * g0 + 16.0 * gm1 - gm2) / (12.0 * hh * hh);
    const cplx d3 = (-13.0 * (g1 - gm1) + 8.0 * (g2 - gm2) - (g3 - gm3)) / (8.0 * hh * hh * hh);
    return std::array<cplx, 3>{d1, d2, d3};
  };
  const auto a = stencils(h);
  const auto b = stencils(0.5 * h);
  // both stencils are 4th order; one Richardson step
  std::array<cplx, 3> d;
  for (int i = 0; i < 3; ++i) d[i] = (16.0 * b[i] - a[i]) / 15.0;

  FdCumulants c;
  c.mu = (d[0] / cplx(0.0, 1.0)).real();
  c.sigma2 = -d[1].real();
  c.kappa3 = (d[2] * cplx(0.0, 1.0)).real();
  return c;
}

void write_oracle_fixture(const std::string& path) {
  SummaryRecord rec;

  {
    const double tau = 1.0, omega = 3.7;
    auto lp = [tau](double t) {
      const double s = std::sin(0.5 * kPi * t / tau);
      return 0.5 * s * s;
    };
    const cplx v = simpson_response(lp, tau, omega, 4096);
    rec.set_double("simpson_sin2_tau1_w3.7_re", v.real());
    rec.set_double("simpson_sin2_tau1_w3.7_im", v.imag());
  }
  {
    BhmParams p;
    p.m_sites = 4;
    p.interaction = 0.1;
    p.impurity_site = 2;
    QuenchSpec q;
    q.lambda_i = 0.0;
    q.lambda_f = 0.5;
    q.tau = 1.0;
    const std::vector<double> u = {0.7};
    const std::vector<cplx> chi = oscillator_chi_series(p, q, 1.0, u);
    rec.set_double("oscillator_chi_m4_u0.7_re", chi[0].real());
    rec.set_double("oscillator_chi_m4_u0.7_im", chi[0].imag());
  }
  {
    BhmParams p;
    p.m_sites = 2;
    p.interaction = 4.0;
    p.impurity_site = 0;
    rec.set_double("dense_energy_m2_u4_b2_l0.3", dense_thermal_energy(p, 4, 2.0, 0.3));
    QuenchSpec q;
    q.lambda_i = 0.0;
    q.lambda_f = 0.5;
    q.tau = 1.0;
    const std::vector<cplx> chi = dense_chi_series(p, 4, q, 2.0, {0.5}, 400);
    rec.set_double("dense_chi_m2_u0.5_re", chi[0].real());
    rec.set_double("dense_chi_m2_u0.5_im", chi[0].imag());
  }
  {
    ObservationRow row;
    row.w = 0.8;
    row.p_f = 0.45;
    row.var_f = 0.01;
    row.p_b = 0.3;
    row.var_b = 0.02;
    rec.set_double("likelihood_quad_w0.8_b1.2_df0.5",
                   log_likelihood_quadrature(row, 1.2, 0.5));
  }
  for (int m = 0; m <= 3; ++m)
    rec.set_double("bessel_weight_g0.3_n0.5_m" + std::to_string(m),
                   bessel_work_weight(0.3, 0.5, m));

  write_summary(path, rec);
}

}  // namespace wdt::ref
