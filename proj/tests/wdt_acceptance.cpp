// Acceptance gate: eleven quantitative criteria, each printed as a single
// [PASS]/[FAIL] line with the measured numbers.  Run with no arguments for
// the full sweep, `--only N` for one criterion, `--list` for the catalogue.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "reference/dense_bhm.hpp"
#include "reference/oracles.hpp"
#include "wdt/bayes.hpp"
#include "wdt/bogoliubov.hpp"
#include "wdt/errors.hpp"
#include "wdt/freq.hpp"
#include "wdt/harness.hpp"
#include "wdt/measurement.hpp"
#include "wdt/model.hpp"
#include "wdt/rng.hpp"
#include "wdt/spectral.hpp"
#include "wdt/tebd.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// Reference 1000-site chain used throughout: U/J = 0.1, unit filling and
// impurity coupling, quench lambda eta 0 -> 0.5 over tau J = 1 at beta J = 1.
wdt::BhmParams chain1000() {
  wdt::BhmParams p;
  p.m_sites = 1000;
  p.hopping = 1.0;
  p.interaction = 0.1;
  p.density = 1.0;
  p.eta = 1.0;
  p.impurity_site = 500;
  p.lattice_const = 1.0;
  return p;
}

wdt::QuenchSpec ramp_half() {
  wdt::QuenchSpec q;
  q.shape = wdt::QuenchShape::SinSquaredRamp;
  q.lambda_i = 0.0;
  q.lambda_f = 0.5;
  q.tau = 1.0;
  return q;
}

const double kTRef = 2.9 * kPi;  // window for the reference chain at beta = 1

// Noiseless reconstruction + unweighted log-ratio fit for a Bogoliubov model.
wdt::FitResult noiseless_fit(const wdt::BogoliubovModel& m, const wdt::QuenchSpec& q,
                             double beta, double t_window, int n_steps) {
  const wdt::CharFnSeries sf = wdt::chi_series_bogoliubov(m, q, beta, t_window, n_steps);
  const wdt::CharFnSeries sb =
      wdt::chi_series_bogoliubov(m, q.reversed(), beta, t_window, n_steps);
  const wdt::Cumulants cf = wdt::work_cumulants(m, wdt::quench_integrals(m, q), beta);
  const wdt::Cumulants cb =
      wdt::work_cumulants(m, wdt::quench_integrals(m, q.reversed()), beta);
  const wdt::GridBounds grid = wdt::choose_w_grid(t_window, cf.mu, std::sqrt(cf.sigma2),
                                                  -cb.mu, std::sqrt(cb.sigma2));
  const wdt::WorkDistEstimate df =
      wdt::work_distribution(sf, wdt::Window::Rectangular, grid.k_min, grid.k_max);
  const wdt::WorkDistEstimate db =
      wdt::work_distribution(sb, wdt::Window::Rectangular, -grid.k_max, -grid.k_min);
  return wdt::crooks_linear_fit(df, db);
}

wdt::ExperimentConfig noisy_config() {
  wdt::ExperimentConfig cfg;
  cfg.engine = "bogoliubov";
  cfg.bhm = chain1000();
  cfg.quench = ramp_half();
  cfg.beta_true = 1.0;
  cfg.t_window = kTRef;
  cfg.n_steps = 500;
  cfg.n_meas = 500;
  cfg.inference = "both";
  return cfg;
}

// --------------------------------------------------------------------------
// 1. closed-form likelihood vs quadrature of its defining integral
// --------------------------------------------------------------------------
Outcome c01_likelihood_oracle() {
  wdt::Rng rng(20240817u);
  double worst = 0.0;
  int worst_case = -1;
  for (int i = 0; i < 50; ++i) {
    wdt::ObservationRow row;
    row.w = -2.0 + 4.5 * rng.uniform();
    row.p_f = -0.1 + 1.3 * rng.uniform();
    row.p_b = -0.1 + 1.3 * rng.uniform();
    row.var_f = std::pow(10.0, -6.0 + 4.0 * rng.uniform());
    row.var_b = std::pow(10.0, -6.0 + 4.0 * rng.uniform());
    const double beta = 0.2 * std::pow(25.0, rng.uniform());
    const double df = -0.5 + rng.uniform();
    const double impl = wdt::log_likelihood_point(row, beta, df);
    const double oracle = wdt::ref::log_likelihood_quadrature(row, beta, df, 1e-11);
    const double rel = std::abs(impl - oracle) / std::max(1.0, std::abs(oracle));
    if (rel > worst) {
      worst = rel;
      worst_case = i;
    }
  }
  return {worst <= 1e-6,
          fmt("max rel err %.3e over 50 random cases (worst case %d, tol 1e-6)", worst,
              worst_case)};
}

// --------------------------------------------------------------------------
// 2. noiseless log-ratio linearity on the reference chain
// --------------------------------------------------------------------------
Outcome c02_noiseless_crooks() {
  const wdt::BogoliubovModel m(chain1000());
  const wdt::QuenchSpec q = ramp_half();
  const wdt::FitResult fit = noiseless_fit(m, q, 1.0, kTRef, 500);
  if (!fit.ok) return {false, "log-ratio fit failed"};
  const double df_true = m.delta_f(q.lambda_i, q.lambda_f, 1.0);
  const double slope_err = std::abs(fit.beta_hat - 1.0);
  const double df_err = std::abs(fit.df_hat - df_true) / std::abs(df_true);
  return {slope_err <= 0.03 && df_err <= 0.05,
          fmt("slope %.4f (err %.2f%% <= 3%%), dF %.6f vs %.6f (err %.2f%% <= 5%%)",
              fit.beta_hat, 100.0 * slope_err, fit.df_hat, df_true, 100.0 * df_err)};
}

// --------------------------------------------------------------------------
// 3. posterior accuracy over 100 independent noisy experiments
// --------------------------------------------------------------------------
Outcome c03_single_experiment() {
  const wdt::ExperimentConfig cfg = noisy_config();
  const wdt::PreparedModel prep = wdt::prepare_model(cfg, cfg.beta_true);
  int within = 0, completed = 0;
  double frac_sum = 0.0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    const wdt::ExperimentOutcome o = wdt::run_one(cfg, prep, seed);
    if (!o.has_bayes) continue;
    ++completed;
    if (std::abs(o.bayes.beta_mean - 1.0) <= 3.0 * o.bayes.beta_std) ++within;
    frac_sum += o.bayes.beta_std;  // beta_true = 1
  }
  const double avg_frac = completed > 0 ? frac_sum / completed : 1e300;
  return {completed == 100 && within >= 95 && avg_frac <= 0.10,
          fmt("%d/100 completed, %d within 3 sigma (need >= 95), mean fractional std %.3f "
              "(need <= 0.10)",
              completed, within, avg_frac)};
}

// --------------------------------------------------------------------------
// 4. posterior calibration: decile frequencies over 200 experiments
// --------------------------------------------------------------------------
Outcome c04_calibration_deciles() {
  wdt::ExperimentConfig cfg = noisy_config();
  cfg.n_experiments = 200;
  cfg.beta_list = {1.0};
  cfg.seed = 4040;
  const wdt::CalibrationResult res = wdt::run_calibration(cfg);
  const wdt::CalibrationAggregate& a = res.per_beta.at(0);
  if (a.n_completed != 200)
    return {false, fmt("only %d/200 experiments completed", a.n_completed)};
  double lo = 1.0, hi = 0.0;
  for (int c : a.decile_counts) {
    const double f = c / 200.0;
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  return {lo >= 0.04 && hi <= 0.17,
          fmt("decile frequencies in [%.3f, %.3f] (need within [0.04, 0.17])", lo, hi)};
}

// --------------------------------------------------------------------------
// 5. temperature sweep with the automatic window rule
// --------------------------------------------------------------------------
Outcome c05_beta_sweep() {
  wdt::ExperimentConfig cfg = noisy_config();
  cfg.t_window = 0.0;  // window rule
  cfg.beta_list = {1.0, 5.0, 10.0, 20.0, 50.0};
  cfg.n_experiments = 100;
  cfg.seed = 5050;
  const wdt::CalibrationResult res = wdt::run_calibration(cfg);
  bool pass = true;
  std::string detail;
  for (const auto& a : res.per_beta) {
    const double bias = std::abs(a.bias_frac);
    const double spread = a.n_completed > 0 ? a.std_beta / a.beta_true : 1e300;
    const bool ok = a.n_completed == 100 && bias <= 0.05 && spread <= 0.15;
    pass = pass && ok;
    detail += fmt("%sbeta %g: bias %.3f spread %.3f%s", detail.empty() ? "" : "; ",
                  a.beta_true, a.bias_frac, spread, ok ? "" : " [FAIL]");
  }
  return {pass, detail + " (need |bias| <= 0.05, spread <= 0.15)"};
}

// --------------------------------------------------------------------------
// 6. estimator variance law at fixed |chi|
// --------------------------------------------------------------------------
Outcome c06_estimator_variance() {
  const wdt::QubitConfig qb;  // balanced preparation, no splitting
  const long n_meas = 500;
  const int n_rep = 10000;
  const int n_points = 8;
  bool pass = true;
  std::string detail;
  for (const double chi : {0.0, 0.5, 0.9}) {
    wdt::CharFnSeries s;
    s.t_window = 1.0;
    s.n_steps = n_points;
    s.tau = 1.0;
    s.u.resize(n_points);
    s.value.assign(n_points, {chi, 0.0});
    s.variance.assign(n_points, 0.0);
    for (int j = 0; j < n_points; ++j) s.u[j] = (j + 1) / static_cast<double>(n_points);

    double acc = 0.0;
    long count = 0;
    for (int r = 0; r < n_rep; ++r) {
      const wdt::CharFnSeries rec = wdt::sample_series(s, qb, n_meas, wdt::substream_key(99, r));
      for (int j = 0; j < n_points; ++j) {
        acc += std::norm(rec.value[j] - std::complex<double>(chi, 0.0));
        ++count;
      }
    }
    const double empirical = acc / count;
    const double expected = (2.0 - chi * chi) / n_meas;
    const double rel = std::abs(empirical / expected - 1.0);
    pass = pass && rel <= 0.05;
    detail += fmt("%s|chi|=%.1f: %.3e vs %.3e (err %.2f%%)", detail.empty() ? "" : "; ", chi,
                  empirical, expected, 100.0 * rel);
  }
  return {pass, detail + " (need <= 5%)"};
}

// --------------------------------------------------------------------------
// 7. cumulants vs finite differences of ln chi; dephasing-time fit
// --------------------------------------------------------------------------
Outcome c07_cumulant_identities() {
  const wdt::BogoliubovModel m(chain1000());
  const wdt::QuenchSpec q = ramp_half();
  const wdt::QuenchIntegrals qi = wdt::quench_integrals(m, q);
  const wdt::Cumulants cum = wdt::work_cumulants(m, qi, 1.0);

  const auto chi = [&](double u) { return wdt::chi_exact(m, qi, 1.0, u); };
  const wdt::ref::FdCumulants fd = wdt::ref::fd_cumulants(chi, 0.05 / std::sqrt(cum.sigma2));
  const double mu_err = std::abs(fd.mu - cum.mu) / std::abs(cum.mu);
  const double s2_err = std::abs(fd.sigma2 - cum.sigma2) / cum.sigma2;

  const wdt::CharFnSeries s = wdt::chi_series_bogoliubov(m, q, 1.0, kTRef, 500);
  const wdt::ShortTimeCumulants st = wdt::short_time_cumulants(s);
  const double sigma_fit = std::sqrt(st.sigma2);
  const double sigma = std::sqrt(cum.sigma2);
  const double fit_err = std::abs(sigma_fit - sigma) / sigma;

  return {mu_err <= 1e-6 && s2_err <= 1e-6 && fit_err <= 0.005,
          fmt("mu rel err %.2e, sigma2 rel err %.2e (tol 1e-6); 1/tau_deph fit err %.3f%% "
              "(tol 0.5%%)",
              mu_err, s2_err, 100.0 * fit_err)};
}

// --------------------------------------------------------------------------
// 8. forward/backward cumulant symmetry
// --------------------------------------------------------------------------
Outcome c08_cumulant_symmetry() {
  const wdt::BogoliubovModel m(chain1000());
  const wdt::QuenchSpec q = ramp_half();
  const wdt::Cumulants cf = wdt::work_cumulants(m, wdt::quench_integrals(m, q), 1.0);
  const wdt::Cumulants cb = wdt::work_cumulants(m, wdt::quench_integrals(m, q.reversed()), 1.0);
  const double df = m.delta_f(q.lambda_i, q.lambda_f, 1.0);
  const double mu_gap = std::abs(cf.mu - cb.mu - 2.0 * df);
  const double sigma_gap = std::abs(std::sqrt(cf.sigma2) - std::sqrt(cb.sigma2));
  return {mu_gap <= 1e-10 && sigma_gap <= 1e-12,
          fmt("|mu_F - mu_B - 2 dF| = %.2e (tol 1e-10), |sigma_F - sigma_B| = %.2e (tol 1e-12)",
              mu_gap, sigma_gap)};
}

// --------------------------------------------------------------------------
// 9. discretization robustness of the noiseless slope
// --------------------------------------------------------------------------
Outcome c09_discretization() {
  const wdt::BogoliubovModel m(chain1000());
  const wdt::QuenchSpec q = ramp_half();
  const double base = noiseless_fit(m, q, 1.0, kTRef, 500).beta_hat;
  const double dense = noiseless_fit(m, q, 1.0, kTRef, 1000).beta_hat;
  const double wide = noiseless_fit(m, q, 1.0, 1.5 * kTRef, 500).beta_hat;
  const double both = noiseless_fit(m, q, 1.0, 1.5 * kTRef, 1000).beta_hat;
  const double d1 = std::abs(dense / base - 1.0);
  const double d2 = std::abs(wide / base - 1.0);
  const double d3 = std::abs(both / base - 1.0);
  return {d1 < 0.01 && d2 < 0.01 && d3 < 0.01,
          fmt("base slope %.4f; N x2: %.3f%%, T x1.5: %.3f%%, both: %.3f%% (need < 1%%)",
              base, 100 * d1, 100 * d2, 100 * d3)};
}

// --------------------------------------------------------------------------
// 10. TEBD against dense diagonalization on small chains
// --------------------------------------------------------------------------
Outcome c10_tebd_oracle() {
  // (a) two sites: single-bond Hamiltonian, thermal energy vs dense
  wdt::BhmParams p2;
  p2.m_sites = 2;
  p2.hopping = 1.0;
  p2.interaction = 4.0;
  p2.density = 1.0;
  p2.eta = 1.0;
  p2.impurity_site = 0;
  wdt::TebdOptions opt2;
  opt2.d = 6;
  opt2.d_max = 64;
  opt2.dt_imag = 0.01;
  const wdt::TebdEngine eng2(p2, opt2);
  const double e_tebd = eng2.thermal_energy(1.0, 0.0);
  const double e_dense = wdt::ref::dense_thermal_energy(p2, opt2.d, 1.0, 0.0);
  const double e_gap = std::abs(e_tebd - e_dense);

  // (b) three sites: chi against the dense four-unitary trace on u in [0, 5]
  wdt::BhmParams p3;
  p3.m_sites = 3;
  p3.hopping = 1.0;
  p3.interaction = 4.0;
  p3.density = 1.0;
  p3.eta = 1.0;
  p3.impurity_site = 1;
  wdt::QuenchSpec q;
  q.lambda_i = 0.0;
  q.lambda_f = 1.0;
  q.tau = 0.1;
  wdt::TebdOptions opt3;
  opt3.d = 4;
  opt3.d_max = 64;
  opt3.dt_real = 0.001;
  opt3.dt_imag = 0.005;
  const wdt::TebdEngine eng3(p3, opt3);
  const wdt::CharFnSeries s = eng3.chi_series(q, 1.0, 5.0, 25);
  const std::vector<std::complex<double>> dense =
      wdt::ref::dense_chi_series(p3, opt3.d, q, 1.0, s.u, 2000);
  double worst = 0.0;
  for (size_t j = 0; j < s.u.size(); ++j)
    worst = std::max(worst, std::abs(s.value[j] - dense[j]));

  return {e_gap <= 1e-6 && worst <= 1e-3,
          fmt("thermal energy gap %.2e (tol 1e-6); max |chi - dense| %.2e over u in [0, 5] "
              "(tol 1e-3, truncation %.1e)",
              e_gap, worst, s.truncation_weight)};
}

// --------------------------------------------------------------------------
// 11. TEBD log-ratio slope and skewness at reduced scale
// --------------------------------------------------------------------------
Outcome c11_tebd_crooks() {
  wdt::BhmParams p;
  p.m_sites = 5;
  p.hopping = 1.0;
  p.interaction = 4.0;
  p.chem_potential = 2.0;  // ~ U/2 keeps the chain near unit filling
  p.density = 1.0;
  p.eta = 1.0;
  p.impurity_site = 2;
  wdt::QuenchSpec q;
  q.lambda_i = 0.0;
  q.lambda_f = 2.0;
  q.tau = 0.1;
  wdt::TebdOptions opt;
  opt.d = 3;
  opt.d_max = 64;
  opt.dt_real = 0.005;
  opt.dt_imag = 0.005;
  const double beta = 1.0;
  const double t_window = 5.0;
  const int n_steps = 125;

  const wdt::TebdEngine eng(p, opt);
  const wdt::CharFnSeries sf = eng.chi_series(q, beta, t_window, n_steps);
  const wdt::CharFnSeries sb = eng.chi_series(q.reversed(), beta, t_window, n_steps);

  const wdt::ShortTimeCumulants cf = wdt::short_time_cumulants(sf);
  const wdt::ShortTimeCumulants cb = wdt::short_time_cumulants(sb);
  const wdt::GridBounds grid =
      wdt::choose_w_grid(t_window, cf.mu, std::sqrt(std::max(cf.sigma2, 0.0)), -cb.mu,
                         std::sqrt(std::max(cb.sigma2, 0.0)));
  const wdt::WorkDistEstimate df =
      wdt::work_distribution(sf, wdt::Window::Rectangular, grid.k_min, grid.k_max);
  const wdt::WorkDistEstimate db =
      wdt::work_distribution(sb, wdt::Window::Rectangular, -grid.k_max, -grid.k_min);

  wdt::LogRatioOptions lropt;
  const std::vector<wdt::LogRatioPoint> pts =
      wdt::log_ratio_points(wdt::pair_observation(df, db), lropt);
  const wdt::FitResult fit = wdt::weighted_fit(pts);
  if (!fit.ok) return {false, "log-ratio fit failed"};
  const double slope_err = std::abs(fit.beta_hat - beta) / beta;

  // third central moment of the reconstructed forward distribution
  double s0 = 0.0, s1 = 0.0;
  for (int i = 0; i < df.size(); ++i) {
    s0 += df.p[i];
    s1 += df.p[i] * df.w_grid[i];
  }
  const double mu = s1 / s0;
  double kappa3 = 0.0;
  for (int i = 0; i < df.size(); ++i)
    kappa3 += df.p[i] * std::pow(df.w_grid[i] - mu, 3);
  kappa3 /= s0;

  return {slope_err <= 0.10 && kappa3 > 0.0,
          fmt("slope %.4f (err %.2f%% <= 10%%), kappa3 %.4f (need > 0), truncation %.1e",
              fit.beta_hat, 100.0 * slope_err, kappa3,
              sf.truncation_weight + sb.truncation_weight)};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "likelihood-quadrature-oracle", c01_likelihood_oracle},
    {2, "noiseless-log-ratio-linearity", c02_noiseless_crooks},
    {3, "single-experiment-accuracy", c03_single_experiment},
    {4, "calibration-deciles", c04_calibration_deciles},
    {5, "beta-sweep-bias-and-spread", c05_beta_sweep},
    {6, "estimator-variance-law", c06_estimator_variance},
    {7, "cumulant-identities", c07_cumulant_identities},
    {8, "forward-backward-symmetry", c08_cumulant_symmetry},
    {9, "discretization-robustness", c09_discretization},
    {10, "tebd-dense-oracle", c10_tebd_oracle},
    {11, "tebd-reduced-scale-crooks", c11_tebd_crooks},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--list") == 0) {
      for (const Criterion& c : kCriteria) std::printf("%2d  %s\n", c.id, c.name);
      return 0;
    }
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only.push_back(std::atoi(argv[++i]));
      continue;
    }
    if (std::strncmp(argv[i], "--only=", 7) == 0) {
      only.push_back(std::atoi(argv[i] + 7));
      continue;
    }
    std::fprintf(stderr, "usage: wdt_acceptance [--list] [--only N]...\n");
    return 2;
  }

  int failures = 0, ran = 0;
  for (const Criterion& c : kCriteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %02d %s — %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no matching criterion\n");
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
