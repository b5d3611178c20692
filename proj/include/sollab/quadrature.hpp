#pragma once

#include <functional>
#include <span>
#include <vector>

namespace sollab {

struct QuadOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
  // Measure the relative tolerance against the integral of |f| instead of |integral f|.
  // Useful when the integrand cancels almost exactly.
  bool relative_to_l1 = false;
  bool throw_on_failure = true;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;  // estimate of the integral of |f|
  int evaluations = 0;
  bool converged = true;
};

// Globally adaptive 7/15-point Gauss-Kronrod rule on [a, b].
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts = {});

// Same, with the interval split at the given increasing breakpoints first.
QuadResult integrate(const std::function<double(double)>& f, std::span<const double> breakpoints,
                     const QuadOptions& opts = {});

// Composite rules on uniformly spaced samples.
double trapezoid(std::span<const double> y, double h);
double simpson(std::span<const double> y, double h);  // requires an odd sample count

}  // namespace sollab
