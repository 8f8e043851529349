#include "measurement.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace wdt {

void CharFnSeries::validate() const {
  if (n_steps < 1) throw ConfigError("charfn: n_steps must be >= 1");
  if (!(t_window > 0.0)) throw ConfigError("charfn: t_window must be positive");
  if (u.size() != static_cast<size_t>(n_steps) || value.size() != u.size() ||
      variance.size() != u.size())
    throw ConfigError("charfn: inconsistent array lengths");
  const double step = du();
  for (size_t j = 0; j < u.size(); ++j) {
    const double expect = step * static_cast<double>(j + 1);
    if (std::abs(u[j] - expect) > 1e-9 * t_window)
      throw ConfigError("charfn: u grid is not uniform j*T/N");
  }
}

double estimator_variance(double abs_chi_sq, double vis2, long n_meas) {
  return (2.0 - vis2 * abs_chi_sq) / (vis2 * static_cast<double>(n_meas));
}

CharFnSeries sample_series(const CharFnSeries& exact, const QubitConfig& qb, long n_meas,
                           uint64_t seed) {
  exact.validate();
  qb.validate();
  if (n_meas < 1) throw ConfigError("sample_series: n_meas must be >= 1");

  CharFnSeries out = exact;
  out.provenance = Provenance::Sampled;
  out.seed = seed;
  out.n_meas = n_meas;
  out.clamp_count = 0;

  const std::complex<double> fwd = qb.forward_factor();
  const std::complex<double> est = qb.estimate_factor();
  const double vis2 = qb.vis2();
  const double inv_n = 1.0 / static_cast<double>(n_meas);

  for (int j = 0; j < exact.n_steps; ++j) {
    const double phi = qb.phase(exact.u[j], exact.tau);
    const std::complex<double> rot(std::cos(phi), std::sin(phi));
    const std::complex<double> sigma = fwd * std::conj(rot) * exact.value[j];
    double px = 0.5 * (1.0 + sigma.real());
    double py = 0.5 * (1.0 + sigma.imag());
    if (px < 0.0 || px > 1.0) {
      ++out.clamp_count;
      px = std::clamp(px, 0.0, 1.0);
    }
    if (py < 0.0 || py > 1.0) {
      ++out.clamp_count;
      py = std::clamp(py, 0.0, 1.0);
    }
    Rng rng(seed, static_cast<uint64_t>(j + 1));
    long nx = 0, ny = 0;
    for (long i = 0; i < n_meas; ++i)
      if (rng.bernoulli(px)) ++nx;
    for (long i = 0; i < n_meas; ++i)
      if (rng.bernoulli(py)) ++ny;
    const double sx = 2.0 * static_cast<double>(nx) * inv_n - 1.0;
    const double sy = 2.0 * static_cast<double>(ny) * inv_n - 1.0;
    const std::complex<double> chi_bar = rot * std::complex<double>(sx, sy) / est;
    out.value[j] = chi_bar;
    out.variance[j] = estimator_variance(std::norm(chi_bar), vis2, n_meas);
  }
  return out;
}

ShortTimeCumulants short_time_cumulants(const CharFnSeries& s) {
  s.validate();
  // Initial sigma guess from the first point with visible decay.
  double sigma = 0.0;
  for (int j = 0; j < s.n_steps; ++j) {
    const double a = std::abs(s.value[j]);
    if (a < 0.95 && a > 0.0) {
      sigma = std::sqrt(-2.0 * std::log(a)) / s.u[j];
      break;
    }
  }
  if (sigma <= 0.0) sigma = 1.0 / s.t_window;

  // ln|chi| fit: y = sigma^2 x with x = u^2/2; phase fit: theta = mu u.
  const auto fit_window = [&](double u_max, ShortTimeCumulants& r) {
    double sxx = 0.0, sxy = 0.0, suu = 0.0, sut = 0.0;
    double prev_theta = 0.0;
    int n = 0;
    for (int j = 0; j < s.n_steps && s.u[j] <= u_max; ++j) {
      const double a = std::abs(s.value[j]);
      if (a <= 0.0) break;
      double theta = std::arg(s.value[j]);
      // unwrap against the previous point
      while (theta - prev_theta > 3.14159265358979323846) theta -= 2.0 * 3.14159265358979323846;
      while (theta - prev_theta < -3.14159265358979323846) theta += 2.0 * 3.14159265358979323846;
      prev_theta = theta;
      const double x = 0.5 * s.u[j] * s.u[j];
      const double y = -std::log(a);
      sxx += x * x;
      sxy += x * y;
      suu += s.u[j] * s.u[j];
      sut += s.u[j] * theta;
      ++n;
    }
    if (n < 2) throw NumericError("short_time_cumulants: fewer than 2 usable points in the fit window");
    r.sigma2 = sxy / sxx;
    r.mu = sut / suu;
    r.n_used = n;
  };

  // Noisy series can fake a steep initial decay from a single sample, so never
  // let the window collapse below the first few grid points.
  const double u_floor = s.u[std::min(3, s.n_steps - 1)];
  const double u_last = s.u[s.n_steps - 1];

  ShortTimeCumulants r;
  for (int iter = 0; iter < 3; ++iter) {
    double u_max = std::max(0.1 / sigma, u_floor);
    for (;;) {
      fit_window(u_max, r);
      if (r.sigma2 > 0.0) break;
      // slope buried in sampling noise: widen until the decay is visible
      if (u_max >= u_last)
        throw NumericError("short_time_cumulants: non-positive sigma^2 fit");
      u_max = std::min(2.0 * u_max, u_last);
    }
    const double new_sigma = std::sqrt(r.sigma2);
    if (std::abs(new_sigma - sigma) < 1e-6 * sigma) break;
    sigma = new_sigma;
  }
  return r;
}

}  // namespace wdt
