#include "sollab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sollab/error.hpp"

namespace sollab {

namespace {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace

void StepView::dense(double s, std::vector<double>& out) const {
  out.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = dense(s, i);
}

double StepView::dense(double s, std::size_t i) const {
  const double h = t - t_old;
  const double th = h == 0.0 ? 1.0 : (s - t_old) / h;
  const double th1 = 1.0 - th;
  const auto& rc = *rcont_;
  return rc[i] + th * (rc[n_ + i] + th1 * (rc[2 * n_ + i] + th * (rc[3 * n_ + i] + th1 * rc[4 * n_ + i])));
}

Dopri5::Dopri5(std::size_t n, OdeRhs rhs, OdeOptions opts)
    : n_(n), rhs_(std::move(rhs)), opts_(opts), k1_(n), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n),
      k7_(n), ytmp_(n), ynew_(n), rcont_(5 * n) {}

double Dopri5::initial_step(double t, const std::vector<double>& y, double dir) {
  if (opts_.h_init > 0.0) return opts_.h_init;
  rhs_(t, y.data(), k1_.data());
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double sk = opts_.atol + opts_.rtol * std::abs(y[i]);
    dnf += (k1_[i] / sk) * (k1_[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  for (std::size_t i = 0; i < n_; ++i) ytmp_[i] = y[i] + dir * h * k1_[i];
  rhs_(t + dir * h, ytmp_.data(), k2_.data());
  double der2 = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double sk = opts_.atol + opts_.rtol * std::abs(y[i]);
    der2 += ((k2_[i] - k1_[i]) / sk) * ((k2_[i] - k1_[i]) / sk);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  h = std::min(100.0 * h, h1);
  if (opts_.h_max > 0.0) h = std::min(h, opts_.h_max);
  return h;
}

bool Dopri5::integrate(double& t, std::vector<double>& y, double t_end, const Observer& observer) {
  if (y.size() != n_) fail(ErrorCode::invalid_argument, "state size mismatch");
  if (t == t_end) return true;
  const double dir = t_end > t ? 1.0 : -1.0;
  double h = initial_step(t, y, dir);
  rhs_(t, y.data(), k1_.data());
  StepView view;
  view.y_ = &y;
  view.rcont_ = &rcont_;
  view.n_ = n_;
  long steps = 0;
  double fac_old = 1e-4;
  bool last_rejected = false;
  while (true) {
    if (steps++ > opts_.max_steps) fail(ErrorCode::step_size_underflow, "step budget exhausted");
    const double remaining = std::abs(t_end - t);
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < hmin) {
      std::ostringstream msg;
      msg << "step size underflow at t = " << t;
      fail(ErrorCode::step_size_underflow, msg.str());
    }
    const double hs = dir * h;
    for (std::size_t i = 0; i < n_; ++i) ytmp_[i] = y[i] + hs * a21 * k1_[i];
    rhs_(t + c2 * hs, ytmp_.data(), k2_.data());
    for (std::size_t i = 0; i < n_; ++i) ytmp_[i] = y[i] + hs * (a31 * k1_[i] + a32 * k2_[i]);
    rhs_(t + c3 * hs, ytmp_.data(), k3_.data());
    for (std::size_t i = 0; i < n_; ++i)
      ytmp_[i] = y[i] + hs * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    rhs_(t + c4 * hs, ytmp_.data(), k4_.data());
    for (std::size_t i = 0; i < n_; ++i)
      ytmp_[i] = y[i] + hs * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    rhs_(t + c5 * hs, ytmp_.data(), k5_.data());
    for (std::size_t i = 0; i < n_; ++i)
      ytmp_[i] = y[i] + hs * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
    const double tnew = last ? t_end : t + hs;
    rhs_(tnew, ytmp_.data(), k6_.data());
    for (std::size_t i = 0; i < n_; ++i)
      ynew_[i] = y[i] + hs * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
    rhs_(tnew, ynew_.data(), k7_.data());

    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sk = opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
      const double ei = hs * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
      err += (ei / sk) * (ei / sk);
    }
    err = std::sqrt(err / static_cast<double>(n_));
    if (!std::isfinite(err)) err = 1e10;

    // PI step control (Hairer's beta = 0.04).
    const double fac11 = std::pow(err, 0.2 - 0.04 * 0.75);
    double fac = fac11 / std::pow(fac_old, 0.04) / 0.9;
    fac = std::clamp(fac, 1.0 / 10.0, 1.0 / 0.2);
    double hnew = h / fac;

    if (err <= 1.0) {
      fac_old = std::max(err, 1e-4);
      for (std::size_t i = 0; i < n_; ++i) {
        const double dy = ynew_[i] - y[i];
        const double bspl = hs * k1_[i] - dy;
        rcont_[i] = y[i];
        rcont_[n_ + i] = dy;
        rcont_[2 * n_ + i] = bspl;
        rcont_[3 * n_ + i] = dy - hs * k7_[i] - bspl;
        rcont_[4 * n_ + i] =
            hs * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
      }
      const double told = t;
      t = tnew;
      y.swap(ynew_);
      k1_.swap(k7_);
      view.y_ = &y;
      view.t_old = told;
      view.t = t;
      ++accepted_;
      if (opts_.h_max > 0.0) hnew = std::min(hnew, opts_.h_max);
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      if (observer && !observer(view)) return false;
      if (last) return true;
    } else {
      hnew = h / std::min(1.0 / 0.2, fac11 / 0.9);
      last_rejected = true;
      ++rejected_;
    }
    h = hnew;
  }
}

}  // namespace sollab
