#include "sollab/reduced_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sollab/error.hpp"
#include "sollab/ode.hpp"
#include "sollab/quadrature.hpp"

namespace sollab {

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double mu_of(const double* chi, const double* beta, int d) {
  if (d == 1) return 0.0;
  // chi' = 2 beta
  if (d == 2) return std::abs(2.0 * (chi[0] * beta[1] - chi[1] * beta[0]));
  const double c0 = chi[1] * beta[2] - chi[2] * beta[1];
  const double c1 = chi[2] * beta[0] - chi[0] * beta[2];
  const double c2 = chi[0] * beta[1] - chi[1] * beta[0];
  return 2.0 * std::sqrt(c0 * c0 + c1 * c1 + c2 * c2);
}

double e0_of(const double* chi, const double* beta, int d, const TailProfile& profile) {
  double r2 = 0.0, b2 = 0.0;
  for (int i = 0; i < d; ++i) {
    r2 += chi[i] * chi[i];
    b2 += beta[i] * beta[i];
  }
  return 2.0 * b2 - effective_potential(profile, std::sqrt(r2));
}

void check_state(const ReducedState& s, int d) {
  if (static_cast<int>(s.chi.size()) != d || static_cast<int>(s.beta.size()) != d)
    fail(ErrorCode::invalid_argument, "state dimension does not match the profile");
  if (!(s.lambda > 0.0)) fail(ErrorCode::invalid_argument, "lambda must be positive");
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::hyperbolic: return "hyperbolic";
    case Regime::parabolic: return "parabolic";
    case Regime::trapped: return "trapped";
  }
  return "unknown";
}

double effective_potential(const TailProfile& profile, double r) {
  if (!(r > 0.0)) r = 0.0;
  return 2.0 * profile.U(r / profile.lambda()) / profile.mass_sq();
}

double effective_force(const TailProfile& profile, double r) {
  if (!(r > 0.0)) return 0.0;
  return 2.0 * profile.U_prime(r / profile.lambda()) / (profile.lambda() * profile.mass_sq());
}

double energy_e0(const ReducedState& s, const TailProfile& profile, const GroundState& gs) {
  check_state(s, gs.dimension());
  return e0_of(s.chi.data(), s.beta.data(), gs.dimension(), profile);
}

double angular_momentum(const ReducedState& s) {
  return mu_of(s.chi.data(), s.beta.data(), static_cast<int>(s.chi.size()));
}

Regime classify_regime(double e0, double tol) {
  if (!(tol >= 0.0)) fail(ErrorCode::invalid_argument, "regime tolerance must be non-negative");
  if (e0 > tol) return Regime::hyperbolic;
  if (e0 < -tol) return Regime::trapped;
  return Regime::parabolic;
}

double gamma_rate(const ReducedState& s, const std::vector<double>& B) {
  if (B.size() != s.chi.size()) fail(ErrorCode::invalid_argument, "B and chi dimensions differ");
  return -1.0 / (s.lambda * s.lambda) + dot(s.beta, s.beta) + dot(B, s.chi);
}

std::string Trajectory::csv() const {
  std::string out = "t";
  const std::size_t d = samples.empty() ? final_state.chi.size() : samples.front().chi.size();
  for (std::size_t i = 0; i < d; ++i) out += ",chi_" + std::to_string(i + 1);
  for (std::size_t i = 0; i < d; ++i) out += ",beta_" + std::to_string(i + 1);
  out += ",gamma,E0,mu\n";
  char buf[96];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.t);
    out += buf;
    for (double x : s.chi) {
      std::snprintf(buf, sizeof buf, ",%.17g", x);
      out += buf;
    }
    for (double x : s.beta) {
      std::snprintf(buf, sizeof buf, ",%.17g", x);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", s.gamma, s.e0, s.mu);
    out += buf;
  }
  return out;
}

Trajectory integrate(const ReducedState& s0, const TailProfile& profile, const GroundState& gs, double horizon,
                     const IntegrateOptions& opts) {
  const int d = gs.dimension();
  check_state(s0, d);
  if (profile.dimension() != d) fail(ErrorCode::invalid_argument, "profile and ground state dimensions differ");
  if (!std::isfinite(horizon)) fail(ErrorCode::invalid_argument, "horizon must be finite");
  if (std::abs(s0.lambda - profile.lambda()) > 1e-12 * s0.lambda)
    fail(ErrorCode::invalid_argument, "state lambda differs from the profile lambda");

  const double lambda = s0.lambda;
  const double inv_l2 = 1.0 / (lambda * lambda);
  // y = [chi (d), beta (d), gamma]
  auto rhs = [&](double, const double* y, double* dy) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) r2 += y[i] * y[i];
    const double r = std::sqrt(r2);
    const double f = r > 0.0 ? 0.5 * effective_force(profile, r) / r : 0.0;
    double b2 = 0.0, bchi = 0.0;
    for (int i = 0; i < d; ++i) {
      dy[i] = 2.0 * y[d + i];
      dy[d + i] = f * y[i];
      b2 += y[d + i] * y[d + i];
      bchi += f * y[i] * y[i];
    }
    dy[2 * d] = -inv_l2 + b2 + bchi;
  };

  OdeOptions oo;
  oo.rtol = opts.rtol;
  oo.atol = opts.atol;
  Dopri5 ode(2 * d + 1, rhs, oo);

  std::vector<double> y(2 * d + 1);
  for (int i = 0; i < d; ++i) {
    y[i] = s0.chi[i];
    y[d + i] = s0.beta[i];
  }
  y[2 * d] = s0.gamma;

  const double e_start = e0_of(y.data(), y.data() + d, d, profile);
  const double mu_start = mu_of(y.data(), y.data() + d, d);
  const double t_end = s0.t + horizon;
  const double dir = horizon >= 0.0 ? 1.0 : -1.0;

  Trajectory tr;
  auto sample = [&](double t, const std::vector<double>& v) {
    TrajectorySample s;
    s.t = t;
    s.chi.assign(v.begin(), v.begin() + d);
    s.beta.assign(v.begin() + d, v.begin() + 2 * d);
    s.gamma = v[2 * d];
    s.e0 = e0_of(v.data(), v.data() + d, d, profile);
    s.mu = mu_of(v.data(), v.data() + d, d);
    tr.samples.push_back(std::move(s));
  };

  std::vector<double> times;
  for (double t : opts.sample_times)
    if (dir * (t - s0.t) > 0.0 && dir * (t_end - t) > 0.0) times.push_back(t);
  std::sort(times.begin(), times.end(), [dir](double a, double b) { return dir * a < dir * b; });
  std::size_t next = 0;

  sample(s0.t, y);
  std::vector<double> buf;
  auto observer = [&](const StepView& sv) {
    const auto& v = sv.y();
    tr.max_energy_drift =
        std::max(tr.max_energy_drift, std::abs(e0_of(v.data(), v.data() + d, d, profile) - e_start));
    tr.max_mu_drift = std::max(tr.max_mu_drift, std::abs(mu_of(v.data(), v.data() + d, d) - mu_start));
    while (next < times.size() && dir * (sv.t - times[next]) >= 0.0) {
      sv.dense(times[next], buf);
      sample(times[next], buf);
      ++next;
    }
    return true;
  };

  double t = s0.t;
  ode.integrate(t, y, t_end, observer);
  if (horizon != 0.0) sample(t, y);

  tr.accepted_steps = ode.accepted_steps();
  tr.final_state.t = t;
  tr.final_state.chi.assign(y.begin(), y.begin() + d);
  tr.final_state.beta.assign(y.begin() + d, y.begin() + 2 * d);
  tr.final_state.gamma = y[2 * d];
  tr.final_state.lambda = lambda;
  return tr;
}

double parabolic_time(const TailProfile& profile, double mu, double r) {
  const double r_v = profile.validity_radius() * profile.lambda();
  auto rate = [&](double x) {
    const double s = 2.0 * effective_potential(profile, x) - mu * mu / (x * x);
    return s > 0.0 ? 1.0 / std::sqrt(s) : 0.0;
  };
  QuadOptions qo;
  qo.rel_tol = 1e-12;
  qo.abs_tol = 0.0;
  const double lo = std::min(r, r_v), hi = std::max(r, r_v);
  const double v = integrate(rate, lo, hi, qo).value;
  return r >= r_v ? v : -v;
}

namespace {

// Smallest radius past which 2 Phi - mu^2 / r^2 stays positive, searched outward from r_v.
double parabolic_start(const TailProfile& profile, double mu) {
  const double r_v = profile.validity_radius() * profile.lambda();
  auto g = [&](double x) { return 2.0 * effective_potential(profile, x) - mu * mu / (x * x); };
  if (g(r_v) > 0.0) return r_v;
  double lo = r_v, hi = 2.0 * r_v;
  while (!(g(hi) > 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) fail(ErrorCode::parabolic_seed_unavailable, "no parabolic branch for this angular momentum");
  }
  for (int k = 0; k < 200 && hi - lo > 1e-13 * hi; ++k) {
    const double m = 0.5 * (lo + hi);
    (g(m) > 0.0 ? hi : lo) = m;
  }
  return hi;
}

bool decays_slower_than_inverse_square(const PotentialSpec& v) {
  const double a = 1e2, b = 1e4;
  if (v.value(a) <= 0.0 || v.value(b) <= 0.0) return false;
  return v.log_value(b) + 2.0 * std::log(b) > v.log_value(a) + 2.0 * std::log(a);
}

}  // namespace

ReducedState seed_from_infinity(Regime regime, const TailProfile& profile, const GroundState& gs, double lambda_inf,
                                const std::vector<double>& theta0, double T0, const SeedOptions& opts) {
  const int d = gs.dimension();
  if (static_cast<int>(theta0.size()) != d) fail(ErrorCode::invalid_argument, "theta0 has the wrong dimension");
  const double tn = norm(theta0);
  if (std::abs(tn - 1.0) > 1e-10) fail(ErrorCode::invalid_argument, "theta0 must be a unit vector");
  if (!(lambda_inf > 0.0) || std::abs(lambda_inf - profile.lambda()) > 1e-12 * lambda_inf)
    fail(ErrorCode::invalid_argument, "lambda_inf must match the profile lambda");
  if (!(T0 > 0.0)) fail(ErrorCode::invalid_argument, "T0 must be positive");

  ReducedState s;
  s.t = T0;
  s.lambda = lambda_inf;
  s.chi.assign(d, 0.0);
  s.beta.assign(d, 0.0);

  if (regime == Regime::trapped) fail(ErrorCode::invalid_argument, "trapped orbits do not reach infinity");

  if (regime == Regime::hyperbolic) {
    if (!(opts.e0 > 0.0)) fail(ErrorCode::invalid_argument, "hyperbolic seed needs E0 > 0");
    if (opts.mu != 0.0) fail(ErrorCode::invalid_argument, "hyperbolic seeds are radial");
    const double r = std::sqrt(2.0 * opts.e0) * T0;
    const double speed = std::sqrt(2.0 * (opts.e0 + effective_potential(profile, r)));
    for (int i = 0; i < d; ++i) {
      s.chi[i] = r * theta0[i];
      s.beta[i] = 0.5 * speed * theta0[i];
    }
    return s;
  }

  // parabolic
  const PotentialSpec& v = profile.potential();
  if (v.is_zero()) fail(ErrorCode::parabolic_seed_unavailable, "no parabolic branch without a potential");
  for (double r = v.tail_start(); r < 1e3; r *= 1.05)
    if (v.value(r) < 0.0) fail(ErrorCode::parabolic_seed_unavailable, "V changes sign on the tail");
  std::vector<double> tangent;
  if (opts.mu != 0.0) {
    if (d < 2) fail(ErrorCode::invalid_argument, "angular momentum needs d >= 2");
    if (!decays_slower_than_inverse_square(v))
      fail(ErrorCode::invalid_argument, "nonzero angular momentum needs V decaying slower than r^-2");
    tangent = opts.tangent;
    if (tangent.empty()) {
      // any unit vector orthogonal to theta0
      std::size_t k = 0;
      for (std::size_t i = 1; i < theta0.size(); ++i)
        if (std::abs(theta0[i]) < std::abs(theta0[k])) k = i;
      tangent.assign(d, 0.0);
      tangent[k] = 1.0;
      const double c = dot(tangent, theta0);
      for (int i = 0; i < d; ++i) tangent[i] -= c * theta0[i];
    }
    if (static_cast<int>(tangent.size()) != d) fail(ErrorCode::invalid_argument, "tangent has the wrong dimension");
    const double c = dot(tangent, theta0);
    for (int i = 0; i < d; ++i) tangent[i] -= c * theta0[i];
    const double n = norm(tangent);
    if (!(n > 1e-12)) fail(ErrorCode::invalid_argument, "tangent is parallel to theta0");
    for (double& x : tangent) x /= n;
  }
  const double mu = std::abs(opts.mu);

  const double r_lo = parabolic_start(profile, mu);
  auto t_of = [&](double r) { return parabolic_time(profile, mu, r) - parabolic_time(profile, mu, r_lo); };
  double a = r_lo, b = 2.0 * r_lo;
  while (t_of(b) < T0) {
    a = b;
    b *= 2.0;
    if (b > 1e15) fail(ErrorCode::parabolic_seed_unavailable, "arrival time not reached");
  }
  for (int k = 0; k < 200 && b - a > 1e-14 * b; ++k) {
    const double m = 0.5 * (a + b);
    (t_of(m) < T0 ? a : b) = m;
  }
  const double r = 0.5 * (a + b);
  const double phi = effective_potential(profile, r);
  const double rdot = std::sqrt(std::max(0.0, 2.0 * phi - mu * mu / (r * r)));
  for (int i = 0; i < d; ++i) {
    s.chi[i] = r * theta0[i];
    s.beta[i] = 0.5 * rdot * theta0[i];
    if (mu != 0.0) s.beta[i] += 0.5 * (mu / r) * tangent[i];
  }
  return s;
}

double k_of_v(const TailClass& tail) {
  if (tail.kind != TailKind::fast) fail(ErrorCode::invalid_argument, "K(V) is defined for fast tails only");
  if (tail.sign == TailSign::minus) return 1.0;
  if (!tail.H) fail(ErrorCode::invalid_argument, "tail descriptor has no H");
  // H(tau) ~ a tau + b ln tau + c, fitted on two decades; the slope must agree.
  auto fit = [&](double lo, double hi) {
    constexpr int n = 40;
    double m[3][3] = {}, rhs[3] = {};
    for (int k = 0; k < n; ++k) {
      const double tau = lo * std::pow(hi / lo, k / double(n - 1));
      const double phi[3] = {tau, std::log(tau), 1.0};
      const double h = tail.H(tau);
      for (int i = 0; i < 3; ++i) {
        rhs[i] += phi[i] * h;
        for (int j = 0; j < 3; ++j) m[i][j] += phi[i] * phi[j];
      }
    }
    // Gaussian elimination with partial pivoting
    for (int c = 0; c < 3; ++c) {
      int p = c;
      for (int i = c + 1; i < 3; ++i)
        if (std::abs(m[i][c]) > std::abs(m[p][c])) p = i;
      std::swap(m[c], m[p]);
      std::swap(rhs[c], rhs[p]);
      for (int i = c + 1; i < 3; ++i) {
        const double f = m[i][c] / m[c][c];
        for (int j = c; j < 3; ++j) m[i][j] -= f * m[c][j];
        rhs[i] -= f * rhs[c];
      }
    }
    double x[3];
    for (int i = 2; i >= 0; --i) {
      double s = rhs[i];
      for (int j = i + 1; j < 3; ++j) s -= m[i][j] * x[j];
      x[i] = s / m[i][i];
    }
    return x[0];
  };
  const double a1 = fit(1e3, 1e4), a2 = fit(1e4, 1e5);
  if (!std::isfinite(a1) || !std::isfinite(a2) || std::abs(a1 - a2) > 0.01 * std::max(1.0, std::abs(a2)))
    fail(ErrorCode::limit_not_resolved, "lim H(tau)/tau is not resolved on [1e3, 1e5]");
  const double a = std::max(0.0, a2);
  if (a < 0.02) return 1.0;  // same cut as the sub-exponential profile branch
  if (a >= 2.0 - 1e-9) fail(ErrorCode::limit_not_resolved, "lim H(tau)/tau >= 2 gives unbounded K");
  return 1.0 / (1.0 - 0.5 * a);
}

}  // namespace sollab
