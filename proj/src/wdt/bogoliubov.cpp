#include "bogoliubov.hpp"

#include <cmath>

#include "errors.hpp"
#include "quadrature.hpp"

namespace wdt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// coth(x) for x > 0 without overflow; ~1/x + x/3 for small x via expm1.
double coth_pos(double x) {
  if (x > 360.0) return 1.0;
  return 1.0 + 2.0 / std::expm1(2.0 * x);
}

// E(x) = Int_0^tau e^{i x t} dt = (e^{i x tau} - 1)/(i x), series near x = 0.
std::complex<double> phase_integral(double x, double tau) {
  const double z = x * tau;
  if (std::abs(z) < 1e-3) {
    const std::complex<double> iz(0.0, z);
    std::complex<double> acc(1.0, 0.0);
    acc += iz * 0.5;
    acc += iz * iz * (1.0 / 6.0);
    acc += iz * iz * iz * (1.0 / 24.0);
    acc += iz * iz * iz * iz * (1.0 / 120.0);
    return tau * acc;
  }
  const std::complex<double> num = std::complex<double>(std::cos(z) - 1.0, std::sin(z));
  return num / std::complex<double>(0.0, x);
}

}  // namespace

BogoliubovModel::BogoliubovModel(const BhmParams& p) : params_(p) {
  p.validate();
  const int m = p.m_sites;
  const double j = p.hopping;
  const double un2 = 2.0 * p.interaction * p.density;
  modes_.reserve(m - 1);
  for (int mm = 1; mm < m; ++mm) {
    Mode md;
    md.k = 2.0 * kPi * mm / (m * p.lattice_const);
    md.epsilon = 2.0 * j * (1.0 - std::cos(md.k * p.lattice_const));
    const double w2 = md.epsilon * (md.epsilon + un2);
    if (!(w2 > 0.0))
      throw NumericError("bogoliubov: non-positive mode frequency; spectrum unstable");
    md.omega = std::sqrt(w2);
    const double amp = p.eta * std::sqrt(p.density * md.epsilon / (m * md.omega));
    const double ph = md.k * p.lattice_const * p.impurity_site;
    md.eta_k = amp * std::complex<double>(std::cos(ph), std::sin(ph));
    md.eta2 = amp * amp;
    s_eta2_omega_ += md.eta2 / md.omega;
    modes_.push_back(md);
  }
}

double BogoliubovModel::free_energy(double lambda, double beta) const {
  if (!(beta > 0.0)) throw ConfigError("bogoliubov: beta must be positive");
  double f0 = 0.0;
  for (const Mode& md : modes_) f0 += std::log1p(-std::exp(-beta * md.omega));
  f0 /= beta;
  return lambda * params_.eta * params_.density - lambda * lambda * s_eta2_omega_ + f0;
}

double BogoliubovModel::delta_f(double lambda_i, double lambda_f, double beta) const {
  return free_energy(lambda_f, beta) - free_energy(lambda_i, beta);
}

std::complex<double> lambda_response_integral(const std::function<double(double)>& lambdap,
                                              double tau, double omega, double quad_tol) {
  QuadOptions opt;
  opt.abs_tol = quad_tol;
  auto f = [&](double t) {
    const double ph = -omega * t;
    return lambdap(t) * std::complex<double>(std::cos(ph), std::sin(ph));
  };
  // Split at oscillation scale so the adaptive pass starts resolved.
  const int pieces = std::max(1, static_cast<int>(omega * tau / (2.0 * kPi)) + 1);
  std::complex<double> acc = 0.0;
  for (int i = 0; i < pieces; ++i) {
    const double a = tau * i / pieces;
    const double b = tau * (i + 1) / pieces;
    QuadOptions piece_opt = opt;
    piece_opt.abs_tol = quad_tol / pieces;
    acc += integrate_gk(f, a, b, piece_opt);
  }
  return acc;
}

namespace {

// Analytic I(omega) for the sin^2 ramp lambda'(t) = dl sin^2(pi t / (2 tau)).
std::complex<double> sin2_response(double dl, double tau, double omega) {
  const double a = kPi / tau;
  return 0.5 * dl *
         (phase_integral(-omega, tau) - 0.5 * phase_integral(a - omega, tau) -
          0.5 * phase_integral(-a - omega, tau));
}

// Analytic I(omega) for the linear ramp lambda'(t) = dl t / tau.
std::complex<double> linear_response(double dl, double tau, double omega) {
  // Int_0^tau t e^{-i w t} dt = e^{-i w tau}(i tau / w + 1/w^2) - 1/w^2
  const double z = omega * tau;
  if (std::abs(z) < 1e-3) {
    // series of (dl/tau) Int t e^{-iwt}: tau^2/2 - i w tau^3/3 - w^2 tau^4/8 ...
    const std::complex<double> iw(0.0, omega);
    std::complex<double> acc = 0.5;
    acc -= iw * tau * (1.0 / 3.0);
    acc += iw * iw * tau * tau * (1.0 / 8.0);
    acc -= iw * iw * iw * tau * tau * tau * (1.0 / 30.0);
    return dl * tau * acc;
  }
  const std::complex<double> e(std::cos(z), -std::sin(z));
  const std::complex<double> val =
      e * (std::complex<double>(0.0, tau / omega) + 1.0 / (omega * omega)) -
      1.0 / (omega * omega);
  return dl / tau * val;
}

}  // namespace

QuenchIntegrals quench_integrals(const BogoliubovModel& m, const QuenchSpec& q, double quad_tol) {
  q.validate();
  QuenchIntegrals qi;
  qi.lambda0 = q.lambda_start();
  qi.lambdap_tau = q.lambda_end() - qi.lambda0;
  const BhmParams& p = m.params();
  qi.n_prime = p.density - 2.0 * qi.lambda0 * m.sum_eta2_over_omega() / p.eta;

  const auto& modes = m.modes();
  qi.Lambda.resize(modes.size());
  qi.H.resize(modes.size());
  qi.G.resize(modes.size());
  for (size_t i = 0; i < modes.size(); ++i) {
    const double w = modes[i].omega;
    std::complex<double> integral;
    switch (q.shape) {
      case QuenchShape::SinSquaredRamp:
        integral = sin2_response(qi.lambdap_tau, q.tau, w);
        break;
      case QuenchShape::Linear:
        integral = linear_response(qi.lambdap_tau, q.tau, w);
        break;
      case QuenchShape::PiecewiseTable: {
        auto lp = [&](double t) { return q.lambda_at(t) - qi.lambda0; };
        integral = lambda_response_integral(lp, q.tau, w, quad_tol);
        break;
      }
    }
    const std::complex<double> lam = w * integral;
    const double z = w * q.tau;
    const std::complex<double> e_tau(std::cos(z), -std::sin(z));  // e^{-i omega tau}
    qi.Lambda[i] = lam;
    qi.H[i] = -std::norm(lam) - 2.0 * qi.lambdap_tau * std::imag(std::conj(lam) * e_tau);
    qi.G[i] = -lam + std::complex<double>(0.0, qi.lambdap_tau) * e_tau;
  }
  return qi;
}

std::complex<double> chi_exact(const BogoliubovModel& m, const QuenchIntegrals& qi, double beta,
                               double u) {
  if (!(beta > 0.0)) throw ConfigError("bogoliubov: beta must be positive");
  const BhmParams& p = m.params();
  const double lt = qi.lambdap_tau;
  const auto& modes = m.modes();
  double phase = p.eta * qi.n_prime * lt * u;
  double damp = 0.0;
  for (size_t i = 0; i < modes.size(); ++i) {
    const double w = modes[i].omega;
    const double c1 = modes[i].eta2 / (w * w);
    const double s = std::sin(w * u);
    const double sh = std::sin(0.5 * w * u);
    phase -= c1 * (lt * lt * w * u + (qi.H[i] - lt * lt) * s);
    damp += 2.0 * c1 * std::norm(qi.G[i]) * sh * sh * coth_pos(0.5 * beta * w);
  }
  return std::exp(-damp) * std::complex<double>(std::cos(phase), std::sin(phase));
}

Cumulants work_cumulants(const BogoliubovModel& m, const QuenchIntegrals& qi, double beta) {
  if (!(beta > 0.0)) throw ConfigError("bogoliubov: beta must be positive");
  const BhmParams& p = m.params();
  const double lt = qi.lambdap_tau;
  Cumulants c;
  c.mu = p.eta * qi.n_prime * lt;
  const auto& modes = m.modes();
  for (size_t i = 0; i < modes.size(); ++i) {
    const double w = modes[i].omega;
    const double e2 = modes[i].eta2;
    c.mu -= e2 / w * qi.H[i];
    c.sigma2 += e2 * std::norm(qi.G[i]) * coth_pos(0.5 * beta * w);
    c.kappa3 -= e2 * w * (qi.H[i] - lt * lt);
  }
  return c;
}

CharFnSeries chi_series_bogoliubov(const BogoliubovModel& m, const QuenchSpec& q, double beta,
                                   double t_window, int n_steps) {
  if (n_steps < 1) throw ConfigError("chi_series: n_steps must be >= 1");
  if (!(t_window > 0.0)) throw ConfigError("chi_series: t_window must be positive");
  const QuenchIntegrals qi = quench_integrals(m, q);
  CharFnSeries s;
  s.t_window = t_window;
  s.n_steps = n_steps;
  s.tau = q.tau;
  s.beta = beta;
  s.engine = "bogoliubov";
  s.u.resize(n_steps);
  s.value.resize(n_steps);
  s.variance.assign(n_steps, 0.0);
  for (int j = 0; j < n_steps; ++j) {
    s.u[j] = t_window * (j + 1) / n_steps;
    s.value[j] = chi_exact(m, qi, beta, s.u[j]);
  }
  return s;
}

}  // namespace wdt
