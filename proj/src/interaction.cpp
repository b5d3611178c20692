#include "sollab/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "sollab/error.hpp"
#include "sollab/quadrature.hpp"

namespace sollab {

std::string to_string(ProfileBranch b) {
  switch (b) {
    case ProfileBranch::vanishing: return "vanishing";
    case ProfileBranch::plus_subexp: return "plus_subexp";
    case ProfileBranch::plus_linear: return "plus_linear";
    case ProfileBranch::minus_d4: return "minus_d4";
    case ProfileBranch::minus_d23_integrable: return "minus_d23_integrable";
    case ProfileBranch::minus_d23_nonintegrable: return "minus_d23_nonintegrable";
    case ProfileBranch::slow_v2: return "slow_v2";
  }
  return "unknown";
}

namespace {

constexpr double kPi = std::numbers::pi;

double norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// ln of |S^{d-1}| r^{d-1} times the sphere average of exp(b r w_1).
double log_exp_weight(int d, double b, double r) {
  const double x = b * r;
  switch (d) {
    case 1:
      return std::log(2.0) + std::abs(x) + std::log1p(std::exp(-2.0 * std::abs(x))) - std::log(2.0);
    case 2: {
      double li0;
      if (x < 500.0)
        li0 = x + std::log(std::cyl_bessel_i(0.0, x) * std::exp(-x));
      else
        li0 = x - 0.5 * std::log(2.0 * kPi * x) + std::log1p(1.0 / (8.0 * x) + 9.0 / (128.0 * x * x));
      return std::log(2.0 * kPi) + std::log(r) + li0;
    }
    default: {
      double lsh;
      if (x < 1e-6)
        lsh = x * x / 6.0;
      else
        lsh = x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0) - std::log(x);
      return std::log(4.0 * kPi) + 2.0 * std::log(r) + lsh;
    }
  }
}

// int_0^inf exp(logf(r)) dr for a positive integrand that eventually decays.
double integrate_to_infinity(const std::function<double(double)>& logf, double r_start_tail) {
  QuadOptions o{.abs_tol = 0.0, .rel_tol = 1e-12};
  auto f = [&](double r) { return std::exp(logf(r)); };
  const double head_bp[] = {0.0, 1.0, 5.0, 10.0, std::max(20.0, r_start_tail)};
  double total = integrate(f, std::span<const double>(head_bp), o).value;
  double a = head_bp[4];
  double len = 20.0;
  for (int k = 0; k < 400; ++k) {
    const double piece = integrate(f, a, a + len, {.abs_tol = 1e-300, .rel_tol = 1e-12}).value;
    total += piece;
    a += len;
    if (std::abs(piece) <= 1e-15 * std::abs(total)) return total;
    len = std::min(2.0 * len, 500.0);
  }
  fail(ErrorCode::branch_undecidable, "tail integral did not converge; the integrand decays too slowly");
}

void fit_slope(const std::function<double(double)>& g, double lo, double hi, double& a, double& b) {
  // g(r) ~ a + b / r by least squares.
  double s = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  const int m = 50;
  for (int i = 0; i <= m; ++i) {
    const double r = lo + (hi - lo) * i / m;
    const double x = 1.0 / r, y = g(r);
    s += 1; sx += x; sxx += x * x; sy += y; sxy += x * y;
  }
  const double det = s * sxx - sx * sx;
  a = (sy * sxx - sx * sxy) / det;
  b = (s * sxy - sx * sy) / det;
}

}  // namespace

double j_radial(const PotentialSpec& v, const GroundState& gs, double xi, const JQuadOptions& opts) {
  if (v.dimension() != gs.dimension())
    fail(ErrorCode::invalid_argument, "potential and ground state dimensions differ");
  if (v.is_zero()) return 0.0;
  if (!(xi > 0.0)) return 0.0;  // J(0) = 0 by the symmetry of the radial integrand
  const int d = gs.dimension();
  const double L = opts.reach;
  QuadOptions outer{.abs_tol = 0.0, .rel_tol = opts.rel_tol, .max_intervals = opts.max_intervals};
  QuadOptions inner{.abs_tol = 0.0, .rel_tol = opts.inner_rel_tol, .max_intervals = opts.max_intervals,
                    .relative_to_l1 = true};
  auto dq2 = [&](double r) { return 2.0 * gs.eval_q(r) * gs.eval_q_prime(r); };

  if (d == 1) {
    std::vector<double> bp = {-xi - L, -xi, -0.5 * xi, 0.0, L};
    std::sort(bp.begin(), bp.end());
    auto f = [&](double y) { return v.value(std::abs(y + xi)) * dq2(y); };
    return integrate(f, std::span<const double>(bp), outer).value;
  }

  std::vector<double> bp = {0.0, xi, xi + L};
  if (L < xi) bp.push_back(L);
  if (xi > 2.0) bp.push_back(0.5 * xi);
  std::sort(bp.begin(), bp.end());

  if (d == 2) {
    auto f = [&](double r) {
      if (r == 0.0) return 0.0;
      auto g = [&](double th) {
        const double u2 = xi * xi + r * r + 2.0 * xi * r * std::cos(th);
        return v.value(std::sqrt(std::max(0.0, u2))) * std::cos(th);
      };
      return 2.0 * dq2(r) * r * integrate(g, 0.0, kPi, inner).value;
    };
    return integrate(f, std::span<const double>(bp), outer).value;
  }

  // d = 3: substitute u = |y + chi| for the polar angle, which makes the inner rule exact in the geometry.
  auto f = [&](double r) {
    if (r == 0.0) return 0.0;
    auto g = [&](double u) { return v.value(u) * u * (u * u - xi * xi - r * r); };
    return dq2(r) * integrate(g, std::abs(xi - r), xi + r, inner).value;
  };
  return kPi / (xi * xi) * integrate(f, std::span<const double>(bp), outer).value;
}

std::vector<double> j_quadrature(const PotentialSpec& v, const GroundState& gs, const std::vector<double>& chi,
                                 const JQuadOptions& opts) {
  if (static_cast<int>(chi.size()) != gs.dimension())
    fail(ErrorCode::invalid_argument, "chi must have d components");
  const double xi = norm(chi);
  std::vector<double> out(chi.size(), 0.0);
  if (xi == 0.0) return out;
  const double j = j_radial(v, gs, xi, opts);
  for (std::size_t i = 0; i < chi.size(); ++i) out[i] = j * chi[i] / xi;
  return out;
}

double TailProfile::upsilon(int d) {
  if (d <= 1) return std::numeric_limits<double>::infinity();
  return 0.5 * std::pow(2.0, -0.5 * (d - 1)) * std::tgamma(0.5 * (d - 1));
}

double TailProfile::c_integral(double xi) const {
  if (xi <= 2.0) return 0.0;
  const int d = d_;
  const double e = 0.5 * (d - 1);
  auto f = [&](double r) {
    const double lg = -2.0 * xi - e * std::log(xi) + v_.log_value(r) + 2.0 * r + (d - 1) * std::log(r) -
                      e * std::log(r * (xi - r));
    return std::exp(lg);
  };
  return integrate(f, 1.0, xi - 1.0, {.abs_tol = 0.0, .rel_tol = 1e-12}).value;
}

double TailProfile::U(double xi) const {
  switch (branch_) {
    case ProfileBranch::vanishing: return 0.0;
    case ProfileBranch::slow_v2:
    case ProfileBranch::plus_linear: return constant_ * v_.value(xi);
    case ProfileBranch::minus_d23_integrable:
    case ProfileBranch::minus_d4:
      return amp2_ * constant_ * std::exp(-2.0 * xi - (d_ - 1) * std::log(xi));
    case ProfileBranch::plus_subexp:
    case ProfileBranch::minus_d23_nonintegrable:
      return amp2_ * std::pow(kPi, 0.5 * (d_ - 1)) * c_integral(xi);
  }
  return 0.0;
}

double TailProfile::U_prime(double xi) const {
  switch (branch_) {
    case ProfileBranch::vanishing: return 0.0;
    case ProfileBranch::slow_v2:
    case ProfileBranch::plus_linear: return constant_ * v_.value(xi, 1);
    case ProfileBranch::minus_d23_integrable:
    case ProfileBranch::minus_d4: return U(xi) * (-2.0 - (d_ - 1) / xi);
    case ProfileBranch::plus_subexp:
    case ProfileBranch::minus_d23_nonintegrable: {
      const double h = 1e-2;
      return (U(xi - 2 * h) - 8.0 * U(xi - h) + 8.0 * U(xi + h) - U(xi + 2 * h)) / (12.0 * h);
    }
  }
  return 0.0;
}

TailProfile u_profile(const PotentialSpec& v, const GroundState& gs, double lambda, const ProfileOptions& opts) {
  if (v.dimension() != gs.dimension())
    fail(ErrorCode::invalid_argument, "potential and ground state dimensions differ");
  if (!(lambda > 0.0)) fail(ErrorCode::invalid_argument, "lambda must be positive");
  TailProfile prof;
  prof.v_ = v.rescaled(lambda);
  prof.d_ = gs.dimension();
  prof.lambda_ = lambda;
  prof.validity_radius_ = opts.validity_radius;
  prof.mass_sq_ = gs.mass_sq();
  prof.amp2_ = gs.tail_amplitude() * gs.tail_amplitude();
  const int d = prof.d_;
  if (prof.v_.is_zero()) {
    prof.branch_ = ProfileBranch::vanishing;
    return prof;
  }
  const TailClass tc = classify_tail(prof.v_);
  if (tc.low_confidence) prof.note_ = "tail classified from sampled data (low confidence)";
  if (tc.kind == TailKind::slow) {
    prof.branch_ = ProfileBranch::slow_v2;
    prof.constant_ = gs.mass_sq();
    return prof;
  }

  double a = 0.0, b = 0.0;
  fit_slope(tc.H_prime, opts.limit_window_lo, opts.limit_window_hi, a, b);
  if (tc.sign == TailSign::plus) {
    if (a < opts.undecidable_lo) {
      prof.branch_ = ProfileBranch::plus_subexp;
      prof.slope_a_ = 0.0;
      return prof;
    }
    if (a < opts.undecidable_hi) {
      std::ostringstream msg;
      msg << "lim H' estimated as " << a << ", too close to zero to choose between sub-exponential and linear H";
      fail(ErrorCode::branch_undecidable, msg.str());
    }
    prof.branch_ = ProfileBranch::plus_linear;
    prof.slope_a_ = a;
    const double rate = 2.0 - a;
    if (std::abs(rate) < 1e-3) prof.note_ = "degenerate case lim H' = 2: weight exp((2 - a) z1) is identically 1";
    prof.constant_ = integrate_to_infinity(
        [&](double r) { return 2.0 * gs.log_q(r) + log_exp_weight(d, rate, r); }, gs.r_trunc());
    return prof;
  }

  if (d >= 4) {
    prof.branch_ = ProfileBranch::minus_d4;
  } else {
    bool integrable;
    if (a > opts.undecidable_lo) {
      integrable = true;
    } else {
      const double r = opts.limit_window_hi;
      const double sigma = -0.5 * (d - 1) - r * tc.H_prime(r);
      if (sigma >= -1.05)
        integrable = false;
      else if (sigma < -1.2)
        integrable = true;
      else {
        std::ostringstream msg;
        msg << "log-log slope " << sigma << " of r^{-(d-1)/2} e^{-H} is too close to -1 to decide integrability";
        fail(ErrorCode::branch_undecidable, msg.str());
      }
    }
    prof.branch_ = integrable ? ProfileBranch::minus_d23_integrable : ProfileBranch::minus_d23_nonintegrable;
  }
  if (prof.branch_ != ProfileBranch::minus_d23_nonintegrable) {
    const PotentialSpec& vv = prof.v_;
    prof.constant_ =
        integrate_to_infinity([&](double r) { return vv.log_value(r) + log_exp_weight(d, 2.0, r); }, 20.0);
  }
  return prof;
}

AsymptoticJ asymptotic_j(const TailProfile& profile, const std::vector<double>& chi) {
  AsymptoticJ out;
  const double xi = norm(chi);
  out.value.assign(chi.size(), 0.0);
  out.below_validity = xi < profile.validity_radius();
  if (xi == 0.0) return out;
  const double up = profile.U_prime(xi);
  for (std::size_t i = 0; i < chi.size(); ++i) out.value[i] = -chi[i] / xi * up;
  if (profile.branch() == ProfileBranch::slow_v2) {
    const TailClass tc = classify_tail(profile.potential());
    const double h1 = std::abs(tc.h(xi, 1));
    double h2 = 0.0, h3 = 0.0;
    if (profile.potential().family() != PotentialFamily::tabulated) {
      h2 = std::abs(tc.h(xi, 2));
      h3 = std::abs(tc.h(xi, 3));
    } else {
      h2 = h1 / xi;
      h3 = h1 / (xi * xi);
    }
    const double vx = std::abs(profile.potential().value(xi));
    const double rem = (h1 * (h1 * h1 + h1 / xi + h2 + 1.0 / (xi * xi)) + h2 / xi + h3) * vx;
    out.remainder_bound = profile.mass_sq() * rem + std::exp(-0.5 * xi);
  }
  return out;
}

double theta(const PotentialSpec& v, const GroundState& gs, double xi) {
  const int d = gs.dimension();
  bool minus = true;
  if (!v.is_zero()) {
    auto f = [&](double r) { return v.log_value(r) + r + 0.5 * (d - 1) * std::log(r); };
    minus = f(100.0 / v.scale()) - f(50.0 / v.scale()) <= 0.1;
  }
  if (minus) return std::exp(-xi) * std::pow(1.0 + xi, -0.5 * (d - 1));
  return std::abs(v.value(xi));
}

std::vector<double> b_modulation(const PotentialSpec& v, const GroundState& gs, const std::vector<double>& chi,
                                 double lambda, const JQuadOptions& opts) {
  if (!(lambda > 0.0)) fail(ErrorCode::invalid_argument, "lambda must be positive");
  std::vector<double> scaled(chi);
  for (double& c : scaled) c /= lambda;
  auto j = j_quadrature(v.rescaled(lambda), gs, scaled, opts);
  const double f = -1.0 / (lambda * gs.mass_sq());
  for (double& c : j) c *= f;
  return j;
}

std::string j_batch_csv(const PotentialSpec& v, const GroundState& gs, double lambda,
                        const std::vector<std::vector<double>>& chis) {
  const TailProfile prof = u_profile(v, gs, lambda);
  std::string out = "chi_norm,J_quad,J_asym,rel_err\n";
  char line[160];
  for (const auto& chi : chis) {
    const double xi = norm(chi);
    const auto jq = j_quadrature(prof.potential(), gs, chi);
    const auto ja = asymptotic_j(prof, chi).value;
    double dq = 0.0, da = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < chi.size(); ++i) {
      const double u = xi > 0.0 ? chi[i] / xi : 0.0;
      dq += jq[i] * u;
      da += ja[i] * u;
      diff += (ja[i] - jq[i]) * (ja[i] - jq[i]);
    }
    const double nq = norm(jq);
    const double rel = nq > 0.0 ? std::sqrt(diff) / nq : (std::sqrt(diff) > 0.0 ? 1.0 : 0.0);
    std::snprintf(line, sizeof line, "%.10g,%.12e,%.12e,%.6e\n", xi, dq, da, rel);
    out += line;
  }
  return out;
}

}  // namespace sollab
