#include "freq.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace wdt {

Observation pair_observation(const WorkDistEstimate& fwd, const WorkDistEstimate& bwd) {
  fwd.validate();
  bwd.validate();
  if (bwd.k_min != -fwd.k_max || bwd.k_max != -fwd.k_min)
    throw ConfigError("pair_observation: backward grid is not the negated forward grid");
  if (std::abs(bwd.t_window - fwd.t_window) > 1e-12 * fwd.t_window)
    throw ConfigError("pair_observation: window size mismatch");
  Observation obs;
  const int n = fwd.size();
  obs.reserve(n);
  for (int i = 0; i < n; ++i) {
    ObservationRow row;
    row.w = fwd.w_grid[i];
    row.p_f = fwd.p[i];
    row.var_f = fwd.var[i];
    const int bi = n - 1 - i;  // -W_k sits mirrored in the backward estimate
    row.p_b = bwd.p[bi];
    row.var_b = bwd.var[bi];
    obs.push_back(row);
  }
  return obs;
}

std::vector<LogRatioPoint> log_ratio_points(const Observation& obs, const LogRatioOptions& opt) {
  if (opt.n_resample < 2) throw ConfigError("log_ratio_points: n_resample must be >= 2");
  std::vector<LogRatioPoint> out;
  out.reserve(obs.size());
  bool noiseless = true;
  for (const auto& row : obs)
    if (row.var_f > 0.0 || row.var_b > 0.0) noiseless = false;

  for (size_t i = 0; i < obs.size(); ++i) {
    const auto& row = obs[i];
    LogRatioPoint pt;
    pt.w = row.w;
    if (row.p_f <= 0.0 || row.p_b <= 0.0) {
      out.push_back(pt);
      continue;
    }
    if (!noiseless && (row.var_f / (row.p_f * row.p_f) > opt.snr_limit ||
                       row.var_b / (row.p_b * row.p_b) > opt.snr_limit)) {
      out.push_back(pt);
      continue;
    }
    const double lraw = std::log(row.p_f) - std::log(row.p_b);
    if (noiseless) {
      pt.lbar = lraw;
      pt.var = 0.0;
      pt.included = true;
      out.push_back(pt);
      continue;
    }
    // Parametric resampling around the observed values.
    Rng rng(opt.seed, static_cast<uint64_t>(i + 1));
    const double sf = std::sqrt(row.var_f);
    const double sb = std::sqrt(row.var_b);
    double sum = 0.0, sum2 = 0.0;
    long n_ok = 0;
    for (int r = 0; r < opt.n_resample; ++r) {
      const double pf = row.p_f + sf * rng.gaussian();
      const double pb = row.p_b + sb * rng.gaussian();
      if (pf <= 0.0 || pb <= 0.0) continue;
      const double l = std::log(pf) - std::log(pb);
      sum += l;
      sum2 += l * l;
      ++n_ok;
    }
    if (n_ok < 10) {
      out.push_back(pt);  // too little support to debias; exclude
      continue;
    }
    const double mean = sum / n_ok;
    const double var = std::max(0.0, sum2 / n_ok - mean * mean) * n_ok / (n_ok - 1.0);
    pt.bias = mean - lraw;
    pt.lbar = lraw - pt.bias;
    pt.var = var;
    pt.included = true;
    out.push_back(pt);
  }
  return out;
}

namespace {

FitResult wls(const std::vector<double>& w, const std::vector<double>& l,
              const std::vector<double>& invvar) {
  FitResult r;
  double s1 = 0.0, sw = 0.0, sw2 = 0.0, sl = 0.0, swl = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    const double g = invvar[i];
    s1 += g;
    sw += g * w[i];
    sw2 += g * w[i] * w[i];
    sl += g * l[i];
    swl += g * w[i] * l[i];
  }
  const double det = s1 * sw2 - sw * sw;
  if (!(det > 0.0) || !(s1 > 0.0)) return r;
  const double a = (s1 * swl - sw * sl) / det;
  const double b = (sw2 * sl - sw * swl) / det;
  r.beta_hat = a;
  r.df_hat = (a != 0.0) ? -b / a : 0.0;
  r.var_beta = s1 / det;
  const double var_b = sw2 / det;
  const double cov_ab = -sw / det;
  if (a != 0.0) {
    const double da = b / (a * a);
    const double db = -1.0 / a;
    r.var_df = da * da * r.var_beta + db * db * var_b + 2.0 * da * db * cov_ab;
  }
  r.n_used = static_cast<int>(w.size());
  r.ok = a != 0.0;
  return r;
}

}  // namespace

FitResult weighted_fit(const std::vector<LogRatioPoint>& pts) {
  std::vector<double> w, l, g;
  bool any_var = false;
  for (const auto& pt : pts)
    if (pt.included && pt.var > 0.0) any_var = true;
  for (const auto& pt : pts) {
    if (!pt.included) continue;
    w.push_back(pt.w);
    l.push_back(pt.lbar);
    g.push_back(any_var ? 1.0 / pt.var : 1.0);
  }
  if (w.size() < 3) return FitResult{};
  return wls(w, l, g);
}

FitResult crooks_linear_fit(const WorkDistEstimate& fwd, const WorkDistEstimate& bwd,
                            double rel_floor) {
  Observation obs = pair_observation(fwd, bwd);
  double peak_f = 0.0, peak_b = 0.0;
  for (const auto& row : obs) {
    peak_f = std::max(peak_f, row.p_f);
    peak_b = std::max(peak_b, row.p_b);
  }
  if (!(peak_f > 0.0) || !(peak_b > 0.0))
    throw NumericError("crooks_linear_fit: non-positive distributions");
  std::vector<double> w, l, g;
  for (const auto& row : obs) {
    if (row.p_f < rel_floor * peak_f || row.p_b < rel_floor * peak_b) continue;
    w.push_back(row.w);
    l.push_back(std::log(row.p_f) - std::log(row.p_b));
    g.push_back(1.0);
  }
  if (w.size() < 2) throw NumericError("crooks_linear_fit: fewer than 2 points in central region");
  return wls(w, l, g);
}

}  // namespace wdt
