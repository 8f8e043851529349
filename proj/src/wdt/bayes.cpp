#include "bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace wdt {

namespace {
constexpr double kLn2Pi = 1.8378770664093454836;
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSqrt2 = 1.4142135623730950488;
}  // namespace

double log_bfun(double t) {
  if (t <= -20.0) {
    // B(t) = e^{-t^2} h(t), h = 1/(2t^2) - 3/(4t^4) + 15/(8t^6) - 105/(16t^8) + 945/(32t^10)
    const double it2 = 1.0 / (t * t);
    double h = 0.5 * it2;
    double term = 0.5 * it2;
    term *= -1.5 * it2;  // -3/(4 t^4)
    h += term;
    term *= -2.5 * it2;
    h += term;
    term *= -3.5 * it2;
    h += term;
    term *= -4.5 * it2;
    h += term;
    return -t * t + std::log(h);
  }
  const double b = std::exp(-t * t) + t * kSqrtPi * std::erfc(-t);
  return std::log(b);
}

double log_likelihood_point(const ObservationRow& row, double beta, double df) {
  if (!(row.var_f > 0.0) || !(row.var_b > 0.0))
    throw ConfigError("bayes: variances must be positive (floor noiseless input upstream)");
  const double sf2 = row.var_f;
  const double sb2 = row.var_b;
  const double sf = std::sqrt(sf2);
  const double sb = std::sqrt(sb2);
  const double ell = beta * (row.w - df);  // ln R

  double z, t, lnscale;
  if (ell <= 0.0) {
    const double e = std::exp(ell);       // <= 1
    const double q = sf2 + e * e * sb2;   // e^{2l} sigma_B'^{-2}-scaled sum
    z = (row.p_f - e * row.p_b) / std::sqrt(q);
    t = (row.p_f * e * sb2 + row.p_b * sf2) / (kSqrt2 * sf * sb * std::sqrt(q));
    // ln(sigma'_F sigma_B / sigma'^2_FB) = ln sigma_F + l + ln sigma_B - ln q
    lnscale = std::log(sf) + ell + std::log(sb) - std::log(q);
  } else {
    const double e = std::exp(-ell);      // < 1
    const double q = sf2 * e * e + sb2;
    z = (row.p_f * e - row.p_b) / std::sqrt(q);
    t = (row.p_f * sb2 + row.p_b * sf2 * e) / (kSqrt2 * sf * sb * std::sqrt(q));
    lnscale = std::log(sf) - ell + std::log(sb) - std::log(q);
  }
  return std::abs(ell) + lnscale - kLn2Pi - 0.5 * z * z + log_bfun(t);
}

double log_likelihood(const Observation& obs, double beta, double df) {
  double acc = 0.0;
  for (const auto& row : obs) acc += log_likelihood_point(row, beta, df);
  return acc;
}

std::vector<double> log_beta_grid(double beta0, int n) {
  if (!(beta0 > 0.0)) throw ConfigError("log_beta_grid: beta0 must be positive");
  if (n < 2) throw ConfigError("log_beta_grid: n must be >= 2");
  std::vector<double> g(n);
  const double lo = std::log(beta0 / 10.0);
  const double hi = std::log(beta0 * 10.0);
  for (int i = 0; i < n; ++i) g[i] = std::exp(lo + (hi - lo) * i / (n - 1));
  return g;
}

std::vector<double> linear_df_grid(double center, double halfwidth, int n) {
  if (!(halfwidth > 0.0)) throw ConfigError("linear_df_grid: halfwidth must be positive");
  if (n < 2) throw ConfigError("linear_df_grid: n must be >= 2");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = center - halfwidth + 2.0 * halfwidth * i / (n - 1);
  return g;
}

std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
  const size_t n = grid.size();
  if (n < 2) throw ConfigError("trapezoid_weights: need at least 2 points");
  std::vector<double> w(n, 0.0);
  for (size_t i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * (grid[i + 1] - grid[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

Posterior compute_posterior(const Observation& obs, const std::vector<double>& beta_grid,
                            const std::vector<double>& df_grid, const LogPrior& log_prior) {
  if (obs.empty()) throw ConfigError("compute_posterior: empty observation");
  Posterior post;
  post.beta_grid = beta_grid;
  post.df_grid = df_grid;
  const int nb = static_cast<int>(beta_grid.size());
  const int nd = static_cast<int>(df_grid.size());
  post.log_density.resize(static_cast<size_t>(nb) * nd);

  // Per-observation sigmas are W-independent; hoisting them buys nothing
  // beyond what the row loop already costs, so evaluate rows directly.
  double max_ld = -std::numeric_limits<double>::infinity();
  for (int ib = 0; ib < nb; ++ib) {
    const double beta = beta_grid[ib];
    for (int id = 0; id < nd; ++id) {
      const double df = df_grid[id];
      double ld = log_likelihood(obs, beta, df);
      if (log_prior) ld += log_prior(beta, df);
      post.log_density[static_cast<size_t>(ib) * nd + id] = ld;
      if (ld > max_ld) max_ld = ld;
    }
  }
  if (!std::isfinite(max_ld))
    throw NumericError("compute_posterior: likelihood is not finite anywhere on the grid");

  const std::vector<double> wb = trapezoid_weights(beta_grid);
  const std::vector<double> wd = trapezoid_weights(df_grid);
  double z = 0.0;
  for (int ib = 0; ib < nb; ++ib)
    for (int id = 0; id < nd; ++id)
      z += std::exp(post.log_density[static_cast<size_t>(ib) * nd + id] - max_ld) * wb[ib] * wd[id];
  const double log_z = max_ld + std::log(z);
  post.log_evidence = log_z;
  for (double& ld : post.log_density) ld -= log_z;

  double edge = 0.0;
  for (int ib = 0; ib < nb; ++ib)
    for (int id = 0; id < nd; ++id) {
      if (ib == 0 || ib == nb - 1 || id == 0 || id == nd - 1) {
        edge += std::exp(post.log_density[static_cast<size_t>(ib) * nd + id]) * wb[ib] * wd[id];
      }
    }
  post.boundary_mass = edge;
  return post;
}

PosteriorSummary summarize(const Posterior& post) {
  const int nb = static_cast<int>(post.beta_grid.size());
  const int nd = static_cast<int>(post.df_grid.size());
  const std::vector<double> wb = trapezoid_weights(post.beta_grid);
  const std::vector<double> wd = trapezoid_weights(post.df_grid);
  // renormalize by the actual grid mass: when the log-densities are huge in
  // magnitude the stored values only carry the normalization to ~ulp(|ld|)
  double z = 0.0, m_b = 0.0, m_b2 = 0.0, m_d = 0.0, m_d2 = 0.0;
  for (int ib = 0; ib < nb; ++ib) {
    for (int id = 0; id < nd; ++id) {
      const double mass = std::exp(post.log_density[static_cast<size_t>(ib) * nd + id]) *
                          wb[ib] * wd[id];
      z += mass;
      m_b += mass * post.beta_grid[ib];
      m_b2 += mass * post.beta_grid[ib] * post.beta_grid[ib];
      m_d += mass * post.df_grid[id];
      m_d2 += mass * post.df_grid[id] * post.df_grid[id];
    }
  }
  if (!(z > 0.0)) throw NumericError("summarize: posterior mass vanished");
  m_b /= z;
  m_b2 /= z;
  m_d /= z;
  m_d2 /= z;
  PosteriorSummary s;
  s.beta_mean = m_b;
  s.beta_std = std::sqrt(std::max(0.0, m_b2 - m_b * m_b));
  s.df_mean = m_d;
  s.df_std = std::sqrt(std::max(0.0, m_d2 - m_d * m_d));
  s.log_evidence = post.log_evidence;
  s.boundary_mass = post.boundary_mass;
  return s;
}

std::vector<double> marginal_beta(const Posterior& post) {
  const int nb = static_cast<int>(post.beta_grid.size());
  const int nd = static_cast<int>(post.df_grid.size());
  const std::vector<double> wd = trapezoid_weights(post.df_grid);
  std::vector<double> m(nb, 0.0);
  for (int ib = 0; ib < nb; ++ib) {
    double acc = 0.0;
    for (int id = 0; id < nd; ++id)
      acc += std::exp(post.log_density[static_cast<size_t>(ib) * nd + id]) * wd[id];
    m[ib] = acc;
  }
  return m;
}

double posterior_beta_cdf(const Posterior& post, double value) {
  const std::vector<double> dens = marginal_beta(post);
  const auto& g = post.beta_grid;
  const int nb = static_cast<int>(g.size());
  double total = 0.0;
  for (int i = 0; i + 1 < nb; ++i)
    total += 0.5 * (dens[i] + dens[i + 1]) * (g[i + 1] - g[i]);
  if (!(total > 0.0)) throw NumericError("posterior_beta_cdf: marginal mass vanished");
  if (value <= g.front()) return 0.0;
  double cdf = 0.0;
  for (int i = 0; i + 1 < nb; ++i) {
    const double h = g[i + 1] - g[i];
    if (value >= g[i + 1]) {
      cdf += 0.5 * (dens[i] + dens[i + 1]) * h;
      continue;
    }
    // partial cell with linear density interpolation
    const double f = (value - g[i]) / h;
    const double dv = dens[i] + (dens[i + 1] - dens[i]) * f;
    cdf += 0.5 * (dens[i] + dv) * (value - g[i]);
    break;
  }
  return std::clamp(cdf / total, 0.0, 1.0);
}

int posterior_beta_decile(const Posterior& post, double value) {
  const double q = posterior_beta_cdf(post, value);
  return std::min(9, static_cast<int>(std::floor(q * 10.0)));
}

double posterior_beta_quantile(const Posterior& post, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile level must be in [0, 1]");
  const std::vector<double> dens = marginal_beta(post);
  const auto& g = post.beta_grid;
  const int nb = static_cast<int>(g.size());
  if (q <= 0.0) return g.front();
  double cdf = 0.0;
  for (int i = 0; i + 1 < nb; ++i) {
    const double h = g[i + 1] - g[i];
    const double cell = 0.5 * (dens[i] + dens[i + 1]) * h;
    if (cdf + cell < q) {
      cdf += cell;
      continue;
    }
    // invert the partial trapezoid cell: q - cdf = d0 x + (d1 - d0) x^2 / (2h)
    const double need = q - cdf;
    const double a = 0.5 * (dens[i + 1] - dens[i]) / h;
    const double b = dens[i];
    double x;
    if (std::abs(a) * h < 1e-14 * std::max(b, 1e-300)) {
      x = b > 0.0 ? need / b : h;
    } else {
      const double disc = b * b + 4.0 * a * need;
      x = disc > 0.0 ? (-b + std::sqrt(disc)) / (2.0 * a) : h;
    }
    return g[i] + std::clamp(x, 0.0, h);
  }
  return g.back();
}

}  // namespace wdt
