#pragma once

#include <string>
#include <vector>

namespace sollab {

struct GroundStateOptions {
  double r_trunc = 40.0;
  double h = 0.005;           // tabulation step
  double r_start = 1e-6;      // series start for the regular singular point
  double r_match = 6.0;       // matching radius between outward and inward solutions
  double fit_window_lo = 25.0;
  double fit_window_hi = 35.0;
};

struct TailFit {
  double amplitude = 0.0;
  double max_relative_residual = 0.0;
  int samples = 0;
};

// Radial ground state of  q'' + (d-1)/r q' - q + q^p = 0,  q'(0) = 0,  q -> 0.
class GroundState {
 public:
  int dimension() const { return d_; }
  double exponent() const { return p_; }
  double q0() const { return q_.front(); }
  double step() const { return h_; }
  double r_trunc() const { return h_ * static_cast<double>(q_.size() - 1); }
  const std::vector<double>& radial_grid() const { return r_; }
  const std::vector<double>& q_values() const { return q_; }
  const std::vector<double>& q_prime_values() const { return qp_; }

  double tail_amplitude() const { return tail_.amplitude; }
  const TailFit& tail_fit() const { return tail_; }
  double mass_sq() const { return mass_sq_; }            // ||Q||^2
  double lambda_inner() const { return lambda_inner_; }  // (Lambda Q, Q)
  double shooting_residual() const { return match_residual_; }

  double eval_q(double r) const;
  double eval_q_prime(double r) const;
  double eval_q_second(double r) const;
  // ln q(r), finite far beyond the underflow radius of q.
  double log_q(double r) const;
  // Lambda Q = 2/(p-1) Q + r Q'
  double eval_lambda_q(double r) const;

  // Angular factor |S^{d-1}| and radial integrals on the tabulation.
  double sphere_area() const;
  double mass_sq_trapezoid() const;
  double mass_sq_simpson() const;

  // Decaying solution of the linear tail equation, ~ r^{-(d-1)/2} e^{-r}.
  static double tail_kernel(int d, double r);
  static double tail_kernel_prime(int d, double r);
  static double log_tail_kernel(int d, double r);

  std::string profile_csv() const;
  std::string constants_json() const;

 private:
  friend GroundState solve_ground_state(int, double, double, const GroundStateOptions&);
  int d_ = 1;
  double p_ = 3.0;
  double h_ = 0.005;
  std::vector<double> r_, q_, qp_;
  double tail_match_amplitude_ = 0.0;
  TailFit tail_;
  double mass_sq_ = 0.0;
  double lambda_inner_ = 0.0;
  double match_residual_ = 0.0;
};

GroundState solve_ground_state(int d, double p, double tol = 1e-10, const GroundStateOptions& opts = {});

// Least-squares fit of q e^r r^{(d-1)/2} ~ A (1 + c/r) on [lo, hi].
TailFit fit_tail_amplitude(const GroundState& gs, double lo, double hi);

}  // namespace sollab
