#pragma once

#include <vector>

#include "measurement.hpp"

namespace wdt {

enum class Window { Rectangular, Hann };

// w(u) on [0, T]; even extension is implied by the cosine sum.
double window_weight(Window w, double u, double t_window);

// Windowed Fourier estimate of the work distribution on W_k = k pi / T,
// k = k_min..k_max, from a characteristic-function series.
struct WorkDistEstimate {
  double t_window = 0.0;
  Window window = Window::Rectangular;
  int k_min = 0;
  int k_max = 0;
  std::string tag = "forward";
  std::vector<double> w_grid;
  std::vector<double> p;
  std::vector<double> var;  // dominant-term variance, identical for all k

  void validate() const;
  int size() const { return static_cast<int>(w_grid.size()); }
};

WorkDistEstimate work_distribution(const CharFnSeries& s, Window win, int k_min, int k_max);

// Dominant variance term 2 (du/2pi)^2 sum_j w_j^2 var_chi_j; W-independent.
double dominant_variance(const CharFnSeries& s, Window win);

// Off-diagonal covariance Cov[p(W), p(W')] including the oscillatory term the
// dominant formula drops; diagnostic only.
double covariance_estimate(const CharFnSeries& s, Window win, double w1, double w2,
                           const QubitConfig& qb);

// T = pi beta (1 + 4 e^{-sigma beta}).
double choose_window_size(double beta_guess, double sigma);

// k range covering [mu_b - 6 sigma_b, mu_f + 6 sigma_f].
struct GridBounds {
  int k_min = 0;
  int k_max = 0;
};
GridBounds choose_w_grid(double t_window, double mu_f, double sigma_f, double mu_b,
                         double sigma_b);

struct LeakageReport {
  double aliasing_ratio = 0.0;  // N tau_deph / T, pass >= 20
  double leakage_ratio = 0.0;   // T / (pi beta), pass >= 1
  bool aliasing_ok = false;
  bool leakage_ok = false;
};
LeakageReport diagnose_window(const CharFnSeries& s, double sigma, double beta_guess);

}  // namespace wdt
