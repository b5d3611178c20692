// Acceptance report: one PASS/FAIL line per criterion, INFO lines for context.
// Exit status is 0 once the report is complete; with --strict it is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sollab/groundstate.hpp"
#include "sollab/interaction.hpp"
#include "sollab/linops.hpp"
#include "sollab/nls_solver.hpp"
#include "sollab/reduced_dynamics.hpp"

using namespace sollab;

namespace {

int failures = 0;

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void verdict(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

void info(const std::string& detail) {
  std::printf("INFO %s\n", detail.c_str());
  std::fflush(stdout);
}

std::string f(const char* fmt, double a) {
  char b[96];
  std::snprintf(b, sizeof b, fmt, a);
  return b;
}

double r_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

std::vector<double> log_times(double a, double b, int n) {
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = a * std::pow(b / a, k / double(n - 1));
  return t;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// Fitted slope of ln r (or r) against ln t over [lo, hi].
double fitted_slope(const Trajectory& tr, double lo, double hi, bool log_r) {
  std::vector<double> x, y;
  for (const auto& s : tr.samples) {
    if (s.t < lo * (1 - 1e-12) || s.t > hi * (1 + 1e-12)) continue;
    x.push_back(std::log(s.t));
    y.push_back(log_r ? std::log(r_of(s.chi)) : r_of(s.chi));
  }
  return slope(x, y);
}

void criterion1() {
  const auto t0 = clock_type::now();
  const GroundState gs = solve_ground_state(1, 3.0);
  double err = 0.0;
  for (double x = 0.0; x <= 20.0; x += 0.001) err = std::max(err, std::abs(gs.eval_q(x) - oracle::q_cubic_1d(x)));
  const double dm = std::abs(gs.mass_sq() - 4.0);
  const double da = std::abs(gs.tail_amplitude() - 2.0 * std::sqrt(2.0));
  const double secs = seconds_since(t0);
  verdict(1, err <= 1e-6 && dm <= 1e-6 && da <= 1e-4 && secs < 1.0,
          "max|Q - sqrt2 sech| = " + f("%.2e", err) + ", |mass - 4| = " + f("%.2e", dm) + ", |A - 2sqrt2| = " +
              f("%.2e", da) + ", " + f("%.2f s", secs));
}

void criterion2() {
  const auto t0 = clock_type::now();
  const GroundState gs = solve_ground_state(1, 3.0);
  const IdentityReport a = identity_suite(gs, 0.02), b = identity_suite(gs, 0.01);
  const double secs = seconds_since(t0);
  bool ok = secs < 5.0;
  std::string detail;
  auto one = [&](const char* name, double ra, double rb) {
    const double ratio = ra / rb;
    ok = ok && ra <= 1e-3 && ratio >= 3.5 && ratio <= 4.5;
    detail += std::string(name) + " " + f("%.3e", ra) + " (ratio " + f("%.2f", ratio) + "), ";
  };
  one("L+Q'", a.kernel, b.kernel);
  one("L+LQ+2Q", a.lambda_q, b.lambda_q);
  one("L+Q+(p-1)(1-D)Q", a.l_plus_q, b.l_plus_q);
  verdict(2, ok, detail + "bound 1e-3 at h = 0.02, " + f("%.2f s", secs));
  if (a.lambda_q > 1e-3)
    info("criterion 2: L+LQ+2Q residual equals the stencil truncation h^2 * 25 sqrt2 / 12 = " +
         f("%.4e", 0.02 * 0.02 * 25.0 * std::sqrt(2.0) / 12.0));
}

void criterion3() {
  struct DP {
    int d;
    double p;
  };
  bool ok = true;
  std::string detail;
  for (const DP c : {DP{1, 2.0}, DP{1, 3.0}, DP{2, 3.0}}) {
    const GroundState gs = solve_ground_state(c.d, c.p, c.d == 2 ? 1e-8 : 1e-10);
    const double expected = (2.0 / (c.p - 1.0) - 0.5 * c.d) * gs.mass_sq();
    const double rel = std::abs(gs.lambda_inner() - expected) / gs.mass_sq();
    ok = ok && rel <= 1e-6;
    detail += "(" + std::to_string(c.d) + "," + f("%g", c.p) + ") " + f("%.2e", rel) + "; ";
  }
  verdict(3, ok, detail + "relative to ||Q||^2, bound 1e-6");
}

void criterion4() {
  const auto t0 = clock_type::now();
  bool ok = true;
  std::string detail;
  for (int d : {1, 3}) {
    const GroundState gs = solve_ground_state(d, d == 3 ? 2.0 : 3.0);
    const std::vector<std::pair<std::string, PotentialSpec>> fams = {
        {"exp_sqrt(c=1)", PotentialSpec::exp_sqrt(d, 1.0, 1.0)},
        {"exp_sqrt(c=4)", PotentialSpec::exp_sqrt(d, 1.0, 4.0)},
        {"power_law(rho=2)", PotentialSpec::power_law(d, 1.0, 2.0)},
        {"exp_linear_tail(+)", PotentialSpec::exp_linear_tail(d, 1.0, TailSign::plus, 1.0)},
        {"exp_linear_tail(-)", PotentialSpec::exp_linear_tail(d, 1.0, TailSign::minus, 1.0)},
    };
    for (const auto& [name, v] : fams) {
      const bool slow = v.family() == PotentialFamily::power_law;
      const std::vector<double> ladder = slow ? std::vector<double>{15, 30, 60} : std::vector<double>{10, 14, 18};
      const TailProfile prof = u_profile(v, gs, 1.0);
      double prev = 1e300;
      bool dec = true;
      for (double xi : ladder) {
        std::vector<double> chi(d, 0.0);
        chi[0] = xi;
        const double q = j_radial(v, gs, xi);
        const double a = asymptotic_j(prof, chi).value[0];
        const double rel = std::abs(a - q) / std::abs(q);
        dec = dec && rel < prev;
        prev = rel;
      }
      ok = ok && dec && prev <= 0.1;
      detail += "d" + std::to_string(d) + " " + name + " " + f("%.2e", prev) + (dec ? "" : " (not decreasing)") + "; ";
    }
  }
  const double secs = seconds_since(t0);
  verdict(4, ok && secs < 120.0, "rel err at the last ladder point: " + detail + f("%.1f s", secs));

  const GroundState gs3 = solve_ground_state(3, 2.0);
  const auto v = PotentialSpec::exp_sqrt(3, 1.0, 3.0);
  const TailProfile prof = u_profile(v, gs3, 1.0);
  std::string seq;
  for (double xi : {10.0, 14.0, 18.0, 24.0}) {
    const double q = j_radial(v, gs3, xi);
    const double a = asymptotic_j(prof, {xi, 0.0, 0.0}).value[0];
    seq += f("%g:", xi) + f("%.3f ", std::abs(a - q) / std::abs(q));
  }
  info("criterion 4: d3 exp_sqrt(c=3) rel err along the ladder " + seq + "(O(1/|chi|) approach)");
}

void criterion5() {
  const GroundState gs = solve_ground_state(1, 3.0);
  bool ok = true;
  std::string detail;
  double drift = 0.0;

  auto t0 = clock_type::now();
  {
    const auto prof = u_profile(PotentialSpec::power_law(1, 0.5, 2.0), gs, 1.0);
    SeedOptions so;
    so.e0 = 0.02;
    const auto s = seed_from_infinity(Regime::hyperbolic, prof, gs, 1.0, {1.0}, 50.0, so);
    IntegrateOptions io;
    io.sample_times = {100.0, 1000.0};
    const auto tr = integrate(s, prof, gs, 1000.0 - s.t, io);
    const auto& last = tr.samples.back();
    const double rel = std::abs(r_of(last.chi) / last.t / std::sqrt(0.04) - 1.0);
    drift = std::max(drift, tr.max_energy_drift);
    const double secs = seconds_since(t0);
    ok = ok && rel <= 0.02 && secs < 60.0;
    detail += "hyperbolic r/t vs sqrt(2E0) " + f("%.2e", rel) + "; ";
  }
  for (double rho : {1.0, 1.5}) {
    t0 = clock_type::now();
    const auto prof = u_profile(PotentialSpec::power_law(1, 0.5, rho), gs, 1.0);
    const auto s = seed_from_infinity(Regime::parabolic, prof, gs, 1.0, {1.0}, 10.0);
    IntegrateOptions io;
    io.sample_times = log_times(1e3, 1e5, 41);
    const auto tr = integrate(s, prof, gs, 1e5 - s.t, io);
    const double k = fitted_slope(tr, 1e3, 1e5, true);
    drift = std::max(drift, tr.max_energy_drift);
    const double secs = seconds_since(t0);
    ok = ok && std::abs(k - 2.0 / (2.0 + rho)) <= 0.02 && secs < 60.0;
    detail += "rho " + f("%g", rho) + " exponent " + f("%.4f", k) + " vs " + f("%.4f", 2.0 / (2.0 + rho)) + "; ";
  }
  struct LogCase {
    std::string name;
    PotentialSpec v;
  };
  for (const auto& c : {LogCase{"exp_sqrt(C=1,c=1)", PotentialSpec::exp_sqrt(1, 1.0, 1.0)},
                        LogCase{"exp_sqrt(C=1e4,c=4)", PotentialSpec::exp_sqrt(1, 1e4, 4.0)}}) {
    t0 = clock_type::now();
    const auto prof = u_profile(c.v, gs, 1.0);
    const double K = k_of_v(classify_tail(prof.potential()));
    const auto s = seed_from_infinity(Regime::parabolic, prof, gs, 1.0, {-1.0}, 10.0);
    IntegrateOptions io;
    io.sample_times = log_times(1e3, 1e6, 61);
    const auto tr = integrate(s, prof, gs, 1e6 - s.t, io);
    const double k = fitted_slope(tr, 1e3, 1e6, false);
    drift = std::max(drift, tr.max_energy_drift);
    const double secs = seconds_since(t0);
    ok = ok && std::abs(k / K - 1.0) <= 0.05 && secs < 60.0;
    detail += c.name + " log slope " + f("%.4f", k) + " vs K = " + f("%.4f", K) + "; ";
  }
  ok = ok && drift <= 1e-8;
  verdict(5, ok, detail + "max energy drift " + f("%.2e", drift));

  const auto prof = u_profile(PotentialSpec::exp_sqrt(1, 1.0, 4.0), gs, 1.0);
  const auto s = seed_from_infinity(Regime::parabolic, prof, gs, 1.0, {-1.0}, 10.0);
  IntegrateOptions io;
  io.sample_times = log_times(1e3, 1e6, 61);
  const auto tr = integrate(s, prof, gs, 1e6 - s.t, io);
  info("criterion 5: exp_sqrt(C=1,c=4) log slope on [1e3,1e6] " + f("%.4f", fitted_slope(tr, 1e3, 1e6, false)) +
       f(", on [1e5,1e6] %.4f", fitted_slope(tr, 1e5, 1e6, false)) + " vs K = 1 (slow transient)");
}

void criterion6() {
  const GroundState gs = solve_ground_state(1, 3.0);
  LinopsOptions o2, o1;
  o2.h = 0.02;
  o1.h = 0.01;
  bool ok = true;
  std::string detail;

  const auto v0 = PotentialSpec::power_law(1, 1.0, 2.0);
  const double chi0 = std::sqrt(99.0);
  const auto ta = t0_explicit(v0, gs, chi0, 1.0, o2), tb = t0_explicit(v0, gs, chi0, 1.0, o1);
  const double c_a = ta.residual / (o2.h * o2.h), c_b = tb.residual / (o1.h * o1.h);
  ok = ok && std::abs(c_a / c_b - 1.0) <= 0.1;
  detail += "T0 residual/h^2 " + f("%.4f", c_a) + " and " + f("%.4f", c_b) + "; ";

  const double chi = 15.0, lambda = 0.9;
  const auto a = solve_t1(v0, gs, chi, lambda, o2), b = solve_t1(v0, gs, chi, lambda, o1);
  const double ratio = a.residual / b.residual;
  const double cons = std::max(a.constraint / std::sqrt(a.grid.dot(a.values, a.values)),
                               b.constraint / std::sqrt(b.grid.dot(b.values, b.values)));
  ok = ok && ratio >= 3.5 && ratio <= 4.5 && cons <= 1e-9;
  detail += "T1 residual " + f("%.2e", a.residual) + " -> " + f("%.2e", b.residual) + " (ratio " + f("%.2f", ratio) +
            "), constraint " + f("%.1e", cons) + "; ";

  const double bq = b_modulation(v0, gs, {chi}, lambda)[0];
  const double rel = std::abs(a.B1[0] / bq - 1.0);
  ok = ok && rel <= 1e-6;
  verdict(6, ok, detail + "B1 vs quadrature " + f("%.2e", rel));
}

void criterion7() {
  const auto t0 = clock_type::now();
  const GroundState gs = solve_ground_state(1, 3.0);
  const auto s0 = init_soliton(gs, ReducedState{0.0, {0.0}, {0.0}, 1.0, 0.0}, 4096, 40.0);
  SplitStepSolver sol(s0, PotentialSpec::zero(1), 3.0);
  const auto g0 = sol.diagnostics();
  sol.advance(10000);
  double dev = 0.0;
  for (int i = 0; i < s0.n; ++i) dev = std::max(dev, std::abs(std::abs(sol.state().u[i]) - s0.u[i].real()));
  const auto g = sol.diagnostics();
  const double dm = std::abs(g.mass - g0.mass) / g0.mass;
  const double de = std::abs(g.energy - g0.energy) / std::abs(g0.energy);
  const double secs = seconds_since(t0);
  verdict(7, dev <= 1e-6 && dm <= 1e-8 && de <= 1e-6 && secs < 60.0,
          "shape deviation at t = " + f("%g", sol.state().t) + " " + f("%.2e", dev) + ", mass drift " + f("%.2e", dm) +
              ", energy drift " + f("%.2e", de) + ", " + f("%.1f s", secs));
}

void criterion8() {
  const auto t0 = clock_type::now();
  const GroundState gs = solve_ground_state(1, 3.0);
  TrackConfig cfg;
  cfg.potential = PotentialSpec::power_law(1, 0.05, 2.0);
  SeedOptions so;
  so.e0 = 0.01;
  cfg.seed = seed_from_infinity(Regime::hyperbolic, u_profile(cfg.potential, gs, 1.0), gs, 1.0, {1.0}, 50.0, so);
  cfg.L_box = 80.0;
  cfg.dt = 1e-3;
  cfg.t_end = 200.0;
  cfg.n = 4096;
  const TrackReport a = track_vs_reduced(gs, cfg);
  cfg.n = 8192;
  const TrackReport b = track_vs_reduced(gs, cfg);
  const double width = cfg.seed.lambda;
  const double change = std::abs(b.max_center_error - a.max_center_error) / a.max_center_error;
  const double secs = seconds_since(t0);
  verdict(8, a.max_center_error <= 0.5 * width && b.max_center_error <= 0.5 * width && change <= 0.2 && secs < 600.0,
          "max centre error " + f("%.4f", a.max_center_error) + " (N=4096), " + f("%.4f", b.max_center_error) +
              " (N=8192) widths, change " + f("%.1e", change) + ", " + f("%.0f s", secs));
  info("criterion 8: mass drift " + f("%.1e", std::max(a.mass_drift, b.mass_drift)) + ", energy drift " +
       f("%.1e", std::max(a.energy_drift, b.energy_drift)) + ", max beta error " + f("%.1e", a.max_beta_error));
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  for (int i = 1; i < argc; ++i) strict = strict || std::strcmp(argv[i], "--strict") == 0;
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  std::printf("%d of 8 criteria pass\n", 8 - failures);
  return strict ? failures : 0;
}
