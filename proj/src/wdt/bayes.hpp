#pragma once

#include <functional>
#include <vector>

#include "freq.hpp"

namespace wdt {

// ln P(p_F, p_B | beta, dF) for one W row, up to a (beta, dF)-independent
// constant.  Closed form of the defining integral
//   P = 2 max{1, R^2} / C^2 * Int_0^inf dp p N(p_F; R p, var_f) N(p_B; p, var_b),
// R = e^{beta (W - dF)}, evaluated in log space; stable for |ln R| up to ~700.
double log_likelihood_point(const ObservationRow& row, double beta, double df);

double log_likelihood(const Observation& obs, double beta, double df);

// ln B(t) with B(t) = e^{-t^2} + t sqrt(pi) (1 + erf(t)); asymptotic series
// for t << 0 where the direct form cancels.
double log_bfun(double t);

std::vector<double> log_beta_grid(double beta0, int n);
std::vector<double> linear_df_grid(double center, double halfwidth, int n);

struct Posterior {
  std::vector<double> beta_grid;
  std::vector<double> df_grid;
  // Row-major [i_beta * n_df + i_df]; exp(log_density) integrates to 1 with
  // trapezoid weights on the (possibly non-uniform) grids.
  std::vector<double> log_density;
  double log_evidence = 0.0;  // ln Int likelihood * prior before normalization
  double boundary_mass = 0.0; // posterior mass on the outermost grid cells
};

using LogPrior = std::function<double(double beta, double df)>;

// Flat prior unless log_prior is provided.
Posterior compute_posterior(const Observation& obs, const std::vector<double>& beta_grid,
                            const std::vector<double>& df_grid, const LogPrior& log_prior = {});

struct PosteriorSummary {
  double beta_mean = 0.0;
  double beta_std = 0.0;
  double df_mean = 0.0;
  double df_std = 0.0;
  double log_evidence = 0.0;
  double boundary_mass = 0.0;
};
PosteriorSummary summarize(const Posterior& post);

std::vector<double> marginal_beta(const Posterior& post);

// P(beta <= value) under the posterior beta marginal.
double posterior_beta_cdf(const Posterior& post, double value);

// Decile index 0..9 of `value` under the posterior beta marginal.
int posterior_beta_decile(const Posterior& post, double value);

// Inverse CDF of the beta marginal at level q.
double posterior_beta_quantile(const Posterior& post, double q);

// Trapezoid weights for a sorted grid.
std::vector<double> trapezoid_weights(const std::vector<double>& grid);

}  // namespace wdt
