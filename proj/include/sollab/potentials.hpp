#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sollab {

enum class PotentialFamily { zero, exp_sqrt, power_law, exp_linear_tail, tabulated };
enum class TailKind { fast, slow };
enum class TailSign { plus, minus };

std::string to_string(PotentialFamily f);

// Radial potential V(r) on R^d. The analytic families share the form
//   V(r) = C exp(-alpha <r> - gamma ln <r>),   <r> = sqrt(1 + r^2),
// evaluated at lambda * r when rescaled.
class PotentialSpec {
 public:
  static PotentialSpec zero(int d);
  static PotentialSpec exp_sqrt(int d, double C, double c);
  static PotentialSpec power_law(int d, double C, double rho);
  // kappa exp(-(2 -/+ a)<r> - (d-1) ln <r>): soliton-squared decay modified by H(r) ~ a r.
  static PotentialSpec exp_linear_tail(int d, double kappa, TailSign sign, double a);
  // Samples of a positive, decreasing tail; interpolated monotonically in ln V.
  static PotentialSpec tabulated(int d, std::vector<double> r, std::vector<double> v);
  static PotentialSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // V_lambda(r) = V(lambda r); rescaling composes.
  PotentialSpec rescaled(double lambda) const;

  // k-th radial derivative, k <= 3 (k <= 1 for tabulated data).
  double value(double r, int k = 0) const;
  // ln |V(r)|, finite far past the underflow radius of V itself.
  double log_value(double r) const;
  // ln |V^(k)(r)| for k <= 2, analytic families only.
  double log_abs_derivative(double r, int k) const;

  double sup() const;         // sup_r V(r)
  double tail_start() const;  // r0 in the current (rescaled) units
  bool is_zero() const { return family_ == PotentialFamily::zero || amp_ == 0.0; }
  int dimension() const { return d_; }
  PotentialFamily family() const { return family_; }
  double scale() const { return lambda_; }
  double amplitude() const { return amp_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  TailSign declared_sign() const { return sign_; }
  double declared_slope() const { return a_; }

 private:
  // Derivatives of f = ln V - ln C at the unscaled argument.
  void log_derivs(double x, double f[4]) const;
  double tab_log(double x, double* slope) const;

  PotentialFamily family_ = PotentialFamily::zero;
  int d_ = 1;
  double amp_ = 0.0, alpha_ = 0.0, gamma_ = 0.0;
  double lambda_ = 1.0;
  double c_param_ = 0.0, rho_ = 0.0, a_ = 0.0;
  TailSign sign_ = TailSign::minus;
  std::vector<double> tr_, tlog_, tslope_;
};

inline double eval_V(const PotentialSpec& v, double r, int k = 0) { return v.value(r, k); }

struct TailClass {
  TailKind kind = TailKind::fast;
  TailSign sign = TailSign::minus;
  double kappa = 0.0;  // normalisation in V = kappa exp(-2r - (d-1) ln r +/- H)
  int d = 1;
  double r0 = 1.0;
  bool low_confidence = false;
  std::function<double(double)> H;         // fast tails
  std::function<double(double)> H_prime;   // fast tails
  std::function<double(double, int)> h;    // slow tails: h^(k)(r) with h = -ln V
};

TailClass classify_tail(const PotentialSpec& v);

// Smallest N0 with |V|^N0 <= C |V''| on the far tail, from the log-log slope
// of |V''| against |V| between two far radii.
double estimate_n0(const PotentialSpec& v);

}  // namespace sollab
