#include "spectral.hpp"

#include <cmath>

#include "errors.hpp"

namespace wdt {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double window_weight(Window w, double u, double t_window) {
  switch (w) {
    case Window::Rectangular:
      return 1.0;
    case Window::Hann: {
      const double c = std::cos(0.5 * kPi * u / t_window);
      return c * c;
    }
  }
  throw ConfigError("spectral: unknown window");
}

void WorkDistEstimate::validate() const {
  if (k_max < k_min) throw ConfigError("workdist: k_max < k_min");
  if (!(t_window > 0.0)) throw ConfigError("workdist: t_window must be positive");
  const size_t n = static_cast<size_t>(k_max - k_min + 1);
  if (w_grid.size() != n || p.size() != n || var.size() != n)
    throw ConfigError("workdist: inconsistent array lengths");
}

WorkDistEstimate work_distribution(const CharFnSeries& s, Window win, int k_min, int k_max) {
  s.validate();
  if (k_max < k_min) throw ConfigError("work_distribution: k_max < k_min");
  WorkDistEstimate out;
  out.t_window = s.t_window;
  out.window = win;
  out.k_min = k_min;
  out.k_max = k_max;
  out.tag = s.tag;
  const int n = k_max - k_min + 1;
  out.w_grid.resize(n);
  out.p.resize(n);
  const double du = s.du();
  const double pref = du / (2.0 * kPi);
  const double var = dominant_variance(s, win);
  out.var.assign(n, var);
  for (int idx = 0; idx < n; ++idx) {
    const int k = k_min + idx;
    const double w = k * kPi / s.t_window;
    out.w_grid[idx] = w;
    double acc = 1.0;  // j = 0 term: chi(0) = 1, w(0) = 1
    for (int j = 0; j < s.n_steps; ++j) {
      const double wu = window_weight(win, s.u[j], s.t_window);
      const double ph = w * s.u[j];
      const std::complex<double> e(std::cos(ph), -std::sin(ph));
      acc += 2.0 * wu * (e * s.value[j]).real();
    }
    out.p[idx] = pref * acc;
  }
  return out;
}

double dominant_variance(const CharFnSeries& s, Window win) {
  const double du = s.du();
  const double pref = du / (2.0 * kPi);
  double acc = 0.0;
  for (int j = 0; j < s.n_steps; ++j) {
    const double wu = window_weight(win, s.u[j], s.t_window);
    acc += wu * wu * s.variance[j];
  }
  return 2.0 * pref * pref * acc;
}

double covariance_estimate(const CharFnSeries& s, Window win, double w1, double w2,
                           const QubitConfig& qb) {
  s.validate();
  const double du = s.du();
  const double pref = du / (2.0 * kPi);
  const double vis2 = qb.vis2();
  const double n_meas = static_cast<double>(s.n_meas > 0 ? s.n_meas : 1);
  const std::complex<double> est = qb.estimate_factor();  // 2 s_up^* s_down
  const std::complex<double> est2 = est * est;            // 4 (s_up^* s_down)^2
  double first = 0.0;
  std::complex<double> second = 0.0;
  for (int j = 0; j < s.n_steps; ++j) {
    const double wu = window_weight(win, s.u[j], s.t_window);
    const double w2sq = wu * wu;
    const std::complex<double> chi = s.value[j];
    first += w2sq * std::cos((w1 - w2) * s.u[j]) * (2.0 - vis2 * std::norm(chi));
    const double phi = qb.phase(s.u[j], s.tau);
    const std::complex<double> e2iphi(std::cos(2.0 * phi), std::sin(2.0 * phi));
    const double inner = (std::conj(e2iphi) * est2 * chi * chi).real();
    const double ps = (w1 + w2) * s.u[j];
    const std::complex<double> esum(std::cos(ps), -std::sin(ps));
    second += w2sq * esum * e2iphi * inner;
  }
  const double c1 = 2.0 / (vis2 * n_meas) * pref * pref * first;
  const double c2 = 2.0 / n_meas * pref * pref * (second / est2).real();
  return c1 - c2;
}

double choose_window_size(double beta_guess, double sigma) {
  if (!(beta_guess > 0.0) || !(sigma > 0.0))
    throw ConfigError("choose_window_size: beta and sigma must be positive");
  return kPi * beta_guess * (1.0 + 4.0 * std::exp(-sigma * beta_guess));
}

GridBounds choose_w_grid(double t_window, double mu_f, double sigma_f, double mu_b,
                         double sigma_b) {
  if (!(t_window > 0.0)) throw ConfigError("choose_w_grid: t_window must be positive");
  if (!(sigma_f > 0.0) || !(sigma_b > 0.0))
    throw ConfigError("choose_w_grid: sigmas must be positive");
  const double lo = mu_b - 6.0 * sigma_b;
  const double hi = mu_f + 6.0 * sigma_f;
  if (lo > hi) throw NumericError("choose_w_grid: empty W range");
  GridBounds g;
  g.k_min = static_cast<int>(std::floor(lo * t_window / kPi));
  g.k_max = static_cast<int>(std::ceil(hi * t_window / kPi));
  return g;
}

LeakageReport diagnose_window(const CharFnSeries& s, double sigma, double beta_guess) {
  if (!(sigma > 0.0) || !(beta_guess > 0.0))
    throw ConfigError("diagnose_window: sigma and beta must be positive");
  LeakageReport r;
  const double tau_deph = 1.0 / sigma;
  r.aliasing_ratio = s.n_steps * tau_deph / s.t_window;
  r.leakage_ratio = s.t_window / (kPi * beta_guess);
  r.aliasing_ok = r.aliasing_ratio >= 20.0;
  r.leakage_ok = r.leakage_ratio >= 1.0;
  return r;
}

}  // namespace wdt
