#include "sollab/groundstate.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "sollab/error.hpp"
#include "sollab/ode.hpp"
#include "sollab/quadrature.hpp"

namespace sollab {

namespace {

enum class Shot { undershoot, overshoot, survived };

OdeRhs radial_rhs(int d, double p) {
  return [d, p](double r, const double* y, double* dy) {
    const double q = y[0];
    dy[0] = y[1];
    dy[1] = q - std::pow(std::abs(q), p - 1.0) * q - (d - 1) / r * y[1];
  };
}

// Integrates outward from the series start; classifies the trajectory by
// whether it crosses zero (q(0) too large) or turns back up (too small).
Shot shoot(int d, double p, double s, double r_end, double r_start) {
  const double curv = (s - std::pow(s, p)) / d;
  std::vector<double> y = {s + 0.5 * curv * r_start * r_start, curv * r_start};
  double r = r_start;
  Shot verdict = Shot::survived;
  Dopri5 ode(2, radial_rhs(d, p), {.rtol = 1e-12, .atol = 1e-14});
  ode.integrate(r, y, r_end, [&](const StepView& st) {
    const auto& v = st.y();
    if (v[0] < 0.0) {
      verdict = Shot::overshoot;
      return false;
    }
    if (v[1] > 0.0 || v[0] > 2.0 * s) {
      verdict = Shot::undershoot;
      return false;
    }
    return true;
  });
  return verdict;
}

std::vector<double> outward_state(int d, double p, double s, const GroundStateOptions& o) {
  const double curv = (s - std::pow(s, p)) / d;
  std::vector<double> y = {s + 0.5 * curv * o.r_start * o.r_start, curv * o.r_start};
  double r = o.r_start;
  Dopri5 ode(2, radial_rhs(d, p), {.rtol = 1e-13, .atol = 1e-16});
  ode.integrate(r, y, o.r_match);
  return y;
}

std::vector<double> inward_state(int d, double p, double amp, const GroundStateOptions& o) {
  std::vector<double> y = {amp * GroundState::tail_kernel(d, o.r_trunc),
                           amp * GroundState::tail_kernel_prime(d, o.r_trunc)};
  double r = o.r_trunc;
  Dopri5 ode(2, radial_rhs(d, p), {.rtol = 1e-13, .atol = 1e-300});
  ode.integrate(r, y, o.r_match);
  return y;
}

double cubic_hermite(double t, double h, double f0, double f1, double d0, double d1) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * d1;
}

}  // namespace

double GroundState::tail_kernel(int d, double r) {
  switch (d) {
    case 1: return std::exp(-r);
    case 2: return r > 700.0 ? 0.0 : std::sqrt(2.0 / std::numbers::pi) * std::cyl_bessel_k(0.0, r);
    default: return std::exp(-r) / r;
  }
}

double GroundState::tail_kernel_prime(int d, double r) {
  switch (d) {
    case 1: return -std::exp(-r);
    case 2: return r > 700.0 ? 0.0 : -std::sqrt(2.0 / std::numbers::pi) * std::cyl_bessel_k(1.0, r);
    default: return -std::exp(-r) * (1.0 / r + 1.0 / (r * r));
  }
}

double GroundState::log_tail_kernel(int d, double r) {
  switch (d) {
    case 1: return -r;
    case 2:
      if (r < 600.0) return std::log(tail_kernel(2, r));
      return -r - 0.5 * std::log(r) + std::log1p(-1.0 / (8.0 * r) + 9.0 / (128.0 * r * r));
    default: return -r - std::log(r);
  }
}

double GroundState::log_q(double r) const {
  r = std::abs(r);
  if (r >= r_trunc()) return std::log(tail_match_amplitude_) + log_tail_kernel(d_, r);
  return std::log(eval_q(r));
}

double GroundState::sphere_area() const {
  switch (d_) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    default: return 4.0 * std::numbers::pi;
  }
}

double GroundState::eval_q_second(double r) const {
  const double q = eval_q(r);
  if (r == 0.0) return (q - std::pow(q, p_)) / d_;
  return q - std::pow(std::abs(q), p_ - 1.0) * q - (d_ - 1) / r * eval_q_prime(r);
}

namespace {
double node_second(int d, double p, double r, double q, double qp) {
  if (r == 0.0) return (q - std::pow(q, p)) / d;
  return q - std::pow(std::abs(q), p - 1.0) * q - (d - 1) / r * qp;
}
}  // namespace

double GroundState::eval_q(double r) const {
  r = std::abs(r);
  if (r >= r_trunc()) return tail_match_amplitude_ * tail_kernel(d_, r);
  const std::size_t i = std::min(static_cast<std::size_t>(r / h_), q_.size() - 2);
  const double t = (r - r_[i]) / h_;
  return cubic_hermite(t, h_, q_[i], q_[i + 1], qp_[i], qp_[i + 1]);
}

double GroundState::eval_q_prime(double r) const {
  // Odd extension, so that in d = 1 this is Q'(x) on the whole line.
  if (r < 0.0) return -eval_q_prime(-r);
  if (r >= r_trunc()) return tail_match_amplitude_ * tail_kernel_prime(d_, r);
  const std::size_t i = std::min(static_cast<std::size_t>(r / h_), q_.size() - 2);
  const double t = (r - r_[i]) / h_;
  return cubic_hermite(t, h_, qp_[i], qp_[i + 1], node_second(d_, p_, r_[i], q_[i], qp_[i]),
                       node_second(d_, p_, r_[i + 1], q_[i + 1], qp_[i + 1]));
}

double GroundState::eval_lambda_q(double r) const {
  return 2.0 / (p_ - 1.0) * eval_q(r) + r * eval_q_prime(r);
}

double GroundState::mass_sq_simpson() const {
  std::vector<double> f(q_.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = q_[i] * q_[i] * std::pow(r_[i], d_ - 1);
  return sphere_area() * simpson(f, h_);
}

double GroundState::mass_sq_trapezoid() const {
  std::vector<double> f(q_.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = q_[i] * q_[i] * std::pow(r_[i], d_ - 1);
  // First Euler-Maclaurin end correction; only the r q^2 weight has f'(0) != 0.
  const double df0 = d_ == 2 ? q_[0] * q_[0] : 0.0;
  const double n = static_cast<double>(q_.size() - 1);
  const double rb = n * h_;
  const double dfb = q_.back() * (2.0 * qp_.back() * std::pow(rb, d_ - 1) +
                                  (d_ - 1) * q_.back() * std::pow(rb, d_ - 2));
  return sphere_area() * (trapezoid(f, h_) - h_ * h_ / 12.0 * (dfb - df0));
}

TailFit fit_tail_amplitude(const GroundState& gs, double lo, double hi) {
  const auto& r = gs.radial_grid();
  const auto& q = gs.q_values();
  if (!(hi > lo) || hi > gs.r_trunc() + 1e-12)
    fail(ErrorCode::tail_window_too_short, "fit window must lie inside the tabulated range");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] >= lo && r[i] <= hi) idx.push_back(i);
  if (idx.size() < 10) fail(ErrorCode::tail_window_too_short, "fewer than 10 samples in fit window");
  const int d = gs.dimension();
  Eigen::MatrixXd A(idx.size(), 2);
  Eigen::VectorXd b(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double x = r[idx[k]];
    A(k, 0) = 1.0;
    A(k, 1) = 1.0 / x;
    b(k) = q[idx[k]] * std::exp(x) * std::pow(x, 0.5 * (d - 1));
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  TailFit fit;
  fit.amplitude = c(0);
  fit.samples = static_cast<int>(idx.size());
  const Eigen::VectorXd res = A * c - b;
  fit.max_relative_residual = res.cwiseAbs().maxCoeff() / std::abs(c(0));
  return fit;
}

GroundState solve_ground_state(int d, double p, double tol, const GroundStateOptions& o) {
  if (d < 1 || d > 3) fail(ErrorCode::no_bracket_found, "dimension must be 1, 2 or 3");
  // Q exists for every energy-subcritical power; the mass-subcritical bound only matters for dynamics.
  const double p_max = d == 3 ? 5.0 : 1e300;
  if (!(p > 1.0) || !(p < p_max))
    fail(ErrorCode::no_bracket_found, "exponent outside the existence range of the ground state");
  if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "tolerance must be positive");
  if (!(o.h > 0.0) || o.r_match >= o.r_trunc) fail(ErrorCode::invalid_argument, "bad grid options");

  // Bracket q(0): anything slightly above 1 turns back up, large values cross zero.
  double lo = 1.0 + 1e-6;
  if (shoot(d, p, lo, o.r_trunc, o.r_start) != Shot::undershoot)
    fail(ErrorCode::no_bracket_found, "lower shooting value does not undershoot");
  double hi = 2.0;
  while (shoot(d, p, hi, o.r_trunc, o.r_start) != Shot::overshoot) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) fail(ErrorCode::no_bracket_found, "no overshooting value of q(0) found");
  }
  for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (shoot(d, p, mid, o.r_trunc, o.r_start) == Shot::overshoot)
      hi = mid;
    else
      lo = mid;
  }
  double s = 0.5 * (lo + hi);

  // Two-sided matching polish on (q(0), A).
  auto mismatch = [&](double sv, double av) {
    const auto a = outward_state(d, p, sv, o);
    const auto b = inward_state(d, p, av, o);
    return Eigen::Vector2d(a[0] - b[0], a[1] - b[1]);
  };
  double amp = outward_state(d, p, s, o)[0] / GroundState::tail_kernel(d, o.r_match);
  Eigen::Vector2d F = mismatch(s, amp);
  for (int it = 0; it < 12 && F.norm() > 1e-15; ++it) {
    const double ds = 1e-7 * s, da = 1e-7 * amp;
    Eigen::Matrix2d J;
    J.col(0) = (mismatch(s + ds, amp) - F) / ds;
    J.col(1) = (mismatch(s, amp + da) - F) / da;
    const Eigen::Vector2d step = J.fullPivLu().solve(F);
    s -= step(0);
    amp -= step(1);
    const Eigen::Vector2d Fn = mismatch(s, amp);
    if (Fn.norm() >= F.norm() && it > 2) {
      F = Fn;
      break;
    }
    F = Fn;
  }
  const double qm = outward_state(d, p, s, o)[0];
  const double achieved = F.norm() / std::max(qm, 1e-300);
  if (!(achieved <= tol)) {
    std::ostringstream msg;
    msg << "matching residual " << achieved << " above tolerance " << tol;
    fail(ErrorCode::tolerance_not_reached, msg.str());
  }

  GroundState gs;
  gs.d_ = d;
  gs.p_ = p;
  gs.h_ = o.h;
  gs.match_residual_ = achieved;
  gs.tail_match_amplitude_ = amp;
  const std::size_t n = static_cast<std::size_t>(std::llround(o.r_trunc / o.h));
  gs.r_.resize(n + 1);
  gs.q_.resize(n + 1);
  gs.qp_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) gs.r_[i] = static_cast<double>(i) * o.h;
  gs.q_[0] = s;
  gs.qp_[0] = 0.0;

  std::vector<double> buf;
  {
    const double curv = (s - std::pow(s, p)) / d;
    std::vector<double> y = {s + 0.5 * curv * o.r_start * o.r_start, curv * o.r_start};
    double r = o.r_start;
    std::size_t next = 1;
    Dopri5 ode(2, radial_rhs(d, p), {.rtol = 1e-13, .atol = 1e-16});
    ode.integrate(r, y, o.r_match, [&](const StepView& st) {
      while (next <= n && gs.r_[next] <= st.t && gs.r_[next] <= o.r_match) {
        st.dense(gs.r_[next], buf);
        gs.q_[next] = buf[0];
        gs.qp_[next] = buf[1];
        ++next;
      }
      return true;
    });
  }
  {
    std::vector<double> y = {amp * GroundState::tail_kernel(d, o.r_trunc),
                             amp * GroundState::tail_kernel_prime(d, o.r_trunc)};
    double r = o.r_trunc;
    gs.q_[n] = y[0];
    gs.qp_[n] = y[1];
    std::size_t next = n - 1;
    Dopri5 ode(2, radial_rhs(d, p), {.rtol = 1e-13, .atol = 1e-300});
    ode.integrate(r, y, o.r_match, [&](const StepView& st) {
      while (next > 0 && gs.r_[next] >= st.t && gs.r_[next] > o.r_match) {
        st.dense(gs.r_[next], buf);
        gs.q_[next] = buf[0];
        gs.qp_[next] = buf[1];
        --next;
      }
      return true;
    });
  }

  gs.tail_ = fit_tail_amplitude(gs, o.fit_window_lo, o.fit_window_hi);
  gs.mass_sq_ = gs.mass_sq_simpson();
  std::vector<double> f(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    f[i] = (2.0 / (p - 1.0) * gs.q_[i] + gs.r_[i] * gs.qp_[i]) * gs.q_[i] * std::pow(gs.r_[i], d - 1);
  gs.lambda_inner_ = gs.sphere_area() * simpson(f, o.h);
  return gs;
}

std::string GroundState::profile_csv() const {
  std::string out = "r,q,qprime\n";
  char line[128];
  for (std::size_t i = 0; i < q_.size(); ++i) {
    std::snprintf(line, sizeof line, "%.10g,%.17g,%.17g\n", r_[i], q_[i], qp_[i]);
    out += line;
  }
  return out;
}

std::string GroundState::constants_json() const {
  nlohmann::json j = {{"d", d_},       {"p", p_},           {"q0", q0()},
                      {"A", tail_.amplitude}, {"mass_sq", mass_sq_}, {"lambda_inner", lambda_inner_}};
  return j.dump(2);
}

}  // namespace sollab
