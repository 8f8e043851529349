#pragma once

#include <complex>
#include <functional>

namespace wdt {

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

// Adaptive Gauss-Kronrod (G7,K15) on [a,b]; bisects the interval with the
// largest error estimate until the summed estimate meets the tolerance.
// Throws NumericError when the interval budget is exhausted.
std::complex<double> integrate_gk(const std::function<std::complex<double>(double)>& f,
                                  double a, double b, const QuadOptions& opt = {});

double integrate_gk_real(const std::function<double(double)>& f, double a, double b,
                         const QuadOptions& opt = {});

}  // namespace wdt
