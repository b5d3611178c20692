#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sollab/error.hpp"
#include "sollab/reduced_dynamics.hpp"

using namespace sollab;

namespace {
const GroundState& gs1() {
  static const GroundState g = solve_ground_state(1, 3.0);
  return g;
}
const GroundState& gs2() {
  static const GroundState g = solve_ground_state(2, 3.0, 1e-8);
  return g;
}
const GroundState& gs3() {
  static const GroundState g = solve_ground_state(3, 2.0);
  return g;
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

// Least-squares slope of y against x.
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

// Samples of the run restricted to [lo, hi]: (ln t, ln r) or (ln t, r).
void collect(const Trajectory& tr, double lo, double hi, bool log_r, std::vector<double>& x, std::vector<double>& y) {
  for (const auto& s : tr.samples) {
    if (s.t < lo * (1 - 1e-12) || s.t > hi * (1 + 1e-12)) continue;
    x.push_back(std::log(s.t));
    y.push_back(log_r ? std::log(r_of(s.chi)) : r_of(s.chi));
  }
}
}  // namespace

TEST_CASE("free motion is a straight line with linear phase") {
  const auto prof = u_profile(PotentialSpec::zero(2), gs2(), 1.3);
  ReducedState s{0.0, {1.0, -2.0}, {0.3, 0.1}, 1.3, 0.5};
  IntegrateOptions io;
  io.sample_times = {2.5, 7.0};
  const auto tr = integrate(s, prof, gs2(), 10.0, io);
  REQUIRE(tr.samples.size() == 4);
  for (const auto& x : tr.samples) {
    CHECK(x.chi[0] == doctest::Approx(1.0 + 0.6 * x.t).epsilon(1e-12));
    CHECK(x.chi[1] == doctest::Approx(-2.0 + 0.2 * x.t).epsilon(1e-12));
    CHECK(x.gamma == doctest::Approx(0.5 + (-1.0 / 1.69 + 0.1) * x.t).epsilon(1e-12));
  }
  CHECK(energy_e0(s, prof, gs2()) == doctest::Approx(2.0 * 0.1));
  CHECK(classify_regime(0.2, 1e-12) == Regime::hyperbolic);
}

TEST_CASE("gamma rate formula") {
  ReducedState s{0.0, {2.0, 0.0}, {0.5, 0.5}, 2.0, 0.0};
  CHECK(gamma_rate(s, {-0.1, 3.0}) == doctest::Approx(-0.25 + 0.5 - 0.2));
  CHECK_THROWS_AS(gamma_rate(s, {1.0}), Error);
}

TEST_CASE("regime classification and its tolerance") {
  CHECK(classify_regime(1e-3, 1e-6) == Regime::hyperbolic);
  CHECK(classify_regime(-1e-3, 1e-6) == Regime::trapped);
  CHECK(classify_regime(1e-9, 1e-6) == Regime::parabolic);
  CHECK_THROWS_AS(classify_regime(0.0, -1.0), Error);
}

TEST_CASE("trapped orbit turns at the energy radius") {
  const auto v = PotentialSpec::power_law(1, 0.05, 2.0);
  const auto prof = u_profile(v, gs1(), 1.0);
  ReducedState s{0.0, {3.0}, {0.04}, 1.0, 0.0};
  const double e0 = energy_e0(s, prof, gs1());
  REQUIRE(e0 < 0.0);
  CHECK(classify_regime(e0, 1e-10) == Regime::trapped);
  // turning radius: Phi(r) = -E0, by bisection
  double lo = 3.0, hi = 1e3;
  for (int k = 0; k < 200; ++k) {
    const double m = 0.5 * (lo + hi);
    (effective_potential(prof, m) > -e0 ? lo : hi) = m;
  }
  const double r_turn = lo;
  double rmax = 0.0;
  IntegrateOptions io;
  for (int k = 1; k <= 4000; ++k) io.sample_times.push_back(0.05 * k);
  const auto tr = integrate(s, prof, gs1(), 200.0, io);
  for (const auto& x : tr.samples) rmax = std::max(rmax, std::abs(x.chi[0]));
  CHECK(rmax <= r_turn * (1 + 1e-8));
  CHECK(rmax >= r_turn * (1 - 1e-3));
  CHECK(tr.max_energy_drift <= 1e-8);
}

TEST_CASE("hyperbolic seed: r/t approaches sqrt(2 E0)") {
  const auto v = PotentialSpec::power_law(1, 0.5, 2.0);
  const auto prof = u_profile(v, gs1(), 1.0);
  SeedOptions so;
  so.e0 = 0.02;
  const auto s = seed_from_infinity(Regime::hyperbolic, prof, gs1(), 1.0, {1.0}, 50.0, so);
  CHECK(energy_e0(s, prof, gs1()) == doctest::Approx(0.02).epsilon(1e-13));
  IntegrateOptions io;
  io.sample_times = {100.0, 1000.0};
  const auto tr = integrate(s, prof, gs1(), 1000.0 - 50.0, io);
  const auto& last = tr.samples.back();
  CHECK(std::abs(r_of(last.chi) / last.t / std::sqrt(0.04) - 1.0) < 0.02);
  // escaping: r increases along the run
  for (std::size_t i = 1; i < tr.samples.size(); ++i)
    CHECK(r_of(tr.samples[i].chi) > r_of(tr.samples[i - 1].chi));
  CHECK(tr.max_energy_drift <= 1e-8);
}

TEST_CASE("parabolic power-law radius grows like t^(2/(2+rho))") {
  for (double rho : {1.0, 1.5}) {
    CAPTURE(rho);
    const auto v = PotentialSpec::power_law(1, 0.5, rho);
    const auto prof = u_profile(v, gs1(), 1.0);
    const auto s = seed_from_infinity(Regime::parabolic, prof, gs1(), 1.0, {1.0}, 10.0);
    CHECK(std::abs(energy_e0(s, prof, gs1())) < 1e-12);
    IntegrateOptions io;
    io.sample_times = log_times(1e3, 1e5, 41);
    const auto tr = integrate(s, prof, gs1(), 1e5 - 10.0, io);
    std::vector<double> x, y;
    collect(tr, 1e3, 1e5, true, x, y);
    REQUIRE(x.size() >= 40);
    CHECK(std::abs(slope(x, y) - 2.0 / (2.0 + rho)) < 0.02);
    CHECK(tr.max_energy_drift <= 1e-8);
  }
}

TEST_CASE("parabolic exponential tails: r grows like K(V) ln t") {
  struct Case {
    PotentialSpec v;
    double k;
  };
  // The minus tail is weak at the validity radius; with unit amplitude the log law only
  // takes over past t ~ 1e5, so the amplitude is raised to move the transient below 1e3.
  for (const auto& c : {Case{PotentialSpec::exp_sqrt(1, 1.0, 1.0), 2.0}, Case{PotentialSpec::exp_sqrt(1, 1e4, 4.0), 1.0}}) {
    CAPTURE(c.k);
    const auto prof = u_profile(c.v, gs1(), 1.0);
    CHECK(k_of_v(classify_tail(prof.potential())) == doctest::Approx(c.k).epsilon(1e-3));
    const auto s = seed_from_infinity(Regime::parabolic, prof, gs1(), 1.0, {-1.0}, 10.0);
    IntegrateOptions io;
    io.sample_times = log_times(1e3, 1e6, 61);
    const auto tr = integrate(s, prof, gs1(), 1e6 - 10.0, io);
    std::vector<double> x, y;
    collect(tr, 1e3, 1e6, false, x, y);
    REQUIRE(x.size() >= 60);
    CHECK(std::abs(slope(x, y) / c.k - 1.0) < 0.05);
    CHECK(tr.max_energy_drift <= 1e-8);
    CHECK(tr.samples.back().chi[0] < 0.0);
  }
}

TEST_CASE("parabolic seed agrees with its own arrival time") {
  const auto v = PotentialSpec::power_law(1, 0.5, 1.0);
  const auto prof = u_profile(v, gs1(), 1.0);
  const auto s = seed_from_infinity(Regime::parabolic, prof, gs1(), 1.0, {1.0}, 200.0);
  CHECK(parabolic_time(prof, 0.0, s.chi[0]) == doctest::Approx(200.0).epsilon(1e-10));
  // running the seed from T0 = 20 forward to 200 lands on the T0 = 200 seed
  const auto s20 = seed_from_infinity(Regime::parabolic, prof, gs1(), 1.0, {1.0}, 20.0);
  const auto tr = integrate(s20, prof, gs1(), 180.0);
  CHECK(tr.final_state.chi[0] == doctest::Approx(s.chi[0]).epsilon(1e-8));
  CHECK(tr.final_state.beta[0] == doctest::Approx(s.beta[0]).epsilon(1e-7));
}

TEST_CASE("parabolic seed with angular momentum") {
  const auto v = PotentialSpec::power_law(2, 1.0, 1.0);
  const auto prof = u_profile(v, gs2(), 1.0);
  SeedOptions so;
  so.mu = 0.5;
  const auto s = seed_from_infinity(Regime::parabolic, prof, gs2(), 1.0, {0.6, 0.8}, 50.0, so);
  CHECK(angular_momentum(s) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(energy_e0(s, prof, gs2())) < 1e-12);
  const auto tr = integrate(s, prof, gs2(), 500.0);
  CHECK(tr.max_mu_drift <= 1e-8);
  CHECK(tr.max_energy_drift <= 1e-8);
  CHECK(r_of(tr.final_state.chi) > r_of(s.chi));
}

TEST_CASE("planar motion and angular momentum in d = 3") {
  const auto v = PotentialSpec::power_law(3, 1.0, 1.0);
  const auto prof = u_profile(v, gs3(), 1.0);
  ReducedState s{0.0, {3.0, 1.0, 2.0}, {0.1, -0.2, 0.05}, 1.0, 0.0};
  const double n[3] = {s.chi[1] * s.beta[2] - s.chi[2] * s.beta[1], s.chi[2] * s.beta[0] - s.chi[0] * s.beta[2],
                       s.chi[0] * s.beta[1] - s.chi[1] * s.beta[0]};
  const double nn = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  IntegrateOptions io;
  for (int k = 1; k < 100; ++k) io.sample_times.push_back(3.0 * k);
  const auto tr = integrate(s, prof, gs3(), 300.0, io);
  for (const auto& x : tr.samples) {
    const double off = (x.chi[0] * n[0] + x.chi[1] * n[1] + x.chi[2] * n[2]) / nn;
    CHECK(std::abs(off) <= 1e-10 * std::max(1.0, r_of(x.chi)));
  }
  CHECK(tr.max_mu_drift <= 1e-8);
  CHECK(tr.max_energy_drift <= 1e-8);
}

TEST_CASE("time reversal returns to the seed") {
  const auto v = PotentialSpec::power_law(2, 0.3, 1.5);
  const auto prof = u_profile(v, gs2(), 1.0);
  ReducedState s{5.0, {4.0, -1.0}, {-0.05, 0.12}, 1.0, 0.2};
  const auto fwd = integrate(s, prof, gs2(), 80.0);
  const auto back = integrate(fwd.final_state, prof, gs2(), -80.0);
  CHECK(back.final_state.t == doctest::Approx(5.0));
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(back.final_state.chi[i] - s.chi[i]) < 1e-8);
    CHECK(std::abs(back.final_state.beta[i] - s.beta[i]) < 1e-8);
  }
  CHECK(std::abs(back.final_state.gamma - s.gamma) < 1e-8);
}

TEST_CASE("K(V) from synthetic descriptors") {
  TailClass tc;
  tc.kind = TailKind::fast;
  tc.sign = TailSign::plus;
  tc.H = [](double r) { return r; };
  CHECK(k_of_v(tc) == doctest::Approx(2.0).epsilon(1e-9));
  tc.H = [](double r) { return 1.5 * r; };
  CHECK(k_of_v(tc) == doctest::Approx(4.0).epsilon(1e-9));
  tc.H = [](double r) { return std::sqrt(r); };
  CHECK(k_of_v(tc) == doctest::Approx(1.0));
  tc.H = [](double r) { return r + 3.0 * std::log(r) - 2.0; };
  CHECK(k_of_v(tc) == doctest::Approx(2.0).epsilon(1e-9));
  tc.sign = TailSign::minus;
  CHECK(k_of_v(tc) == 1.0);

  tc.sign = TailSign::plus;
  tc.H = [](double r) { return 2.5 * r; };
  CHECK_THROWS_AS(k_of_v(tc), Error);
  tc.H = [](double r) { return r * std::log(r); };  // H/r does not settle
  CHECK_THROWS_AS(k_of_v(tc), Error);
  tc.kind = TailKind::slow;
  CHECK_THROWS_AS(k_of_v(tc), Error);
}

TEST_CASE("seed error paths") {
  const auto slow1 = u_profile(PotentialSpec::power_law(1, 1.0, 1.0), gs1(), 1.0);
  SeedOptions bad;
  bad.e0 = -1.0;
  CHECK_THROWS_AS(seed_from_infinity(Regime::hyperbolic, slow1, gs1(), 1.0, {1.0}, 10.0, bad), Error);
  CHECK_THROWS_AS(seed_from_infinity(Regime::trapped, slow1, gs1(), 1.0, {1.0}, 10.0), Error);
  CHECK_THROWS_AS(seed_from_infinity(Regime::parabolic, slow1, gs1(), 1.0, {2.0}, 10.0), Error);
  CHECK_THROWS_AS(seed_from_infinity(Regime::parabolic, slow1, gs1(), 0.5, {1.0}, 10.0), Error);
  CHECK_THROWS_AS(seed_from_infinity(Regime::parabolic, slow1, gs1(), 1.0, {1.0}, -1.0), Error);
  SeedOptions spin;
  spin.mu = 0.3;
  CHECK_THROWS_AS(seed_from_infinity(Regime::parabolic, slow1, gs1(), 1.0, {1.0}, 10.0, spin), Error);

  const auto fast2 = u_profile(PotentialSpec::exp_sqrt(2, 1.0, 1.0), gs2(), 1.0);
  CHECK_THROWS_AS(seed_from_infinity(Regime::parabolic, fast2, gs2(), 1.0, {1.0, 0.0}, 10.0, spin), Error);
  const auto steep2 = u_profile(PotentialSpec::power_law(2, 1.0, 3.0), gs2(), 1.0);
  CHECK_THROWS_AS(seed_from_infinity(Regime::parabolic, steep2, gs2(), 1.0, {1.0, 0.0}, 10.0, spin), Error);

  const auto neg = u_profile(PotentialSpec::power_law(1, -1.0, 1.0), gs1(), 1.0);
  try {
    seed_from_infinity(Regime::parabolic, neg, gs1(), 1.0, {1.0}, 10.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parabolic_seed_unavailable);
  }
  const auto none = u_profile(PotentialSpec::zero(1), gs1(), 1.0);
  CHECK_THROWS_AS(seed_from_infinity(Regime::parabolic, none, gs1(), 1.0, {1.0}, 10.0), Error);
}

TEST_CASE("integrate rejects mismatched inputs") {
  const auto prof = u_profile(PotentialSpec::power_law(1, 1.0, 1.0), gs1(), 1.0);
  CHECK_THROWS_AS(integrate(ReducedState{0, {1.0, 0.0}, {0.0, 0.0}, 1.0, 0.0}, prof, gs1(), 1.0), Error);
  CHECK_THROWS_AS(integrate(ReducedState{0, {1.0}, {0.0}, 2.0, 0.0}, prof, gs1(), 1.0), Error);
  CHECK_THROWS_AS(integrate(ReducedState{0, {1.0}, {0.0}, 1.0, 0.0}, prof, gs1(), INFINITY), Error);
}

TEST_CASE("trajectory csv layout") {
  const auto prof = u_profile(PotentialSpec::zero(2), gs2(), 1.0);
  const auto tr = integrate(ReducedState{0, {1.0, 0.0}, {0.0, 0.5}, 1.0, 0.0}, prof, gs2(), 1.0);
  const std::string csv = tr.csv();
  CHECK(csv.rfind("t,chi_1,chi_2,beta_1,beta_2,gamma,E0,mu\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
