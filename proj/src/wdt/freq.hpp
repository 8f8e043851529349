#pragma once

#include <cstdint>
#include <vector>

#include "spectral.hpp"

namespace wdt {

// Paired observations on the W_k grid: forward p_F(W_k) and backward
// p_B(-W_k) with dominant-term variances.
struct ObservationRow {
  double w = 0.0;
  double p_f = 0.0;
  double var_f = 0.0;
  double p_b = 0.0;
  double var_b = 0.0;
};
using Observation = std::vector<ObservationRow>;

// Builds the paired rows; `bwd` must hold the backward estimate on the
// negated grid, i.e. bwd.k_min == -fwd.k_max and bwd.k_max == -fwd.k_min.
Observation pair_observation(const WorkDistEstimate& fwd, const WorkDistEstimate& bwd);

struct LogRatioPoint {
  double w = 0.0;
  double lbar = 0.0;   // debiased ln(p_F / p_B)
  double var = 0.0;    // resampled variance of the log-ratio
  double bias = 0.0;   // subtracted bias estimate
  bool included = false;
};

struct LogRatioOptions {
  int n_resample = 2000;
  uint64_t seed = 0;
  double snr_limit = 1.0;  // exclude when var/p^2 > snr_limit
};

// ln(p_F/p_B) per grid point with positivity and SNR exclusions; bias and
// variance via parametric Gaussian resampling around the observed values
// (draws with non-positive values are dropped).  Noiseless inputs (all
// variances zero) skip resampling and return var = 0 on included points.
std::vector<LogRatioPoint> log_ratio_points(const Observation& obs, const LogRatioOptions& opt);

struct FitResult {
  double beta_hat = 0.0;
  double df_hat = 0.0;
  double var_beta = 0.0;
  double var_df = 0.0;
  int n_used = 0;
  bool ok = false;
};

// Weighted least squares of L = a W + b; beta = a, dF = -b/a.  Zero-variance
// points (noiseless mode) fall back to unit weights for all points.
FitResult weighted_fit(const std::vector<LogRatioPoint>& pts);

// Unweighted Crooks fit on exact distributions over the central region where
// both p_F(W) and p_B(-W) exceed `rel_floor` times their peaks.
FitResult crooks_linear_fit(const WorkDistEstimate& fwd, const WorkDistEstimate& bwd,
                            double rel_floor = 1e-3);

}  // namespace wdt
