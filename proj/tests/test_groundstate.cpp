#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sollab/error.hpp"
#include "sollab/groundstate.hpp"

using namespace sollab;

namespace {
const GroundState& cubic1() {
  static const GroundState gs = solve_ground_state(1, 3.0);
  return gs;
}
const GroundState& quad1() {
  static const GroundState gs = solve_ground_state(1, 2.0);
  return gs;
}
const GroundState& cubic2() {
  static const GroundState gs = solve_ground_state(2, 3.0, 1e-8);
  return gs;
}
const GroundState& quad3() {
  static const GroundState gs = solve_ground_state(3, 2.0);
  return gs;
}
}  // namespace

TEST_CASE("cubic soliton in one dimension matches sqrt(2) sech") {
  const auto& gs = cubic1();
  CHECK(gs.q0() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  double err = 0.0, errp = 0.0;
  for (double x = 0.0; x <= 20.0; x += 0.0137) {
    err = std::max(err, std::abs(gs.eval_q(x) - oracle::q_cubic_1d(x)));
    errp = std::max(errp, std::abs(gs.eval_q_prime(x) - oracle::q_cubic_1d_prime(x)));
  }
  CHECK(err < 1e-6);
  CHECK(errp < 1e-6);
  CHECK(gs.mass_sq() == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(gs.tail_amplitude() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-5));
  CHECK(gs.eval_q(1.0) == doctest::Approx(std::sqrt(2.0) / std::cosh(1.0)).epsilon(1e-9));
}

TEST_CASE("quadratic soliton in one dimension") {
  const auto& gs = quad1();
  double err = 0.0;
  for (double x = 0.0; x <= 20.0; x += 0.0137)
    err = std::max(err, std::abs(gs.eval_q(x) - oracle::q_quadratic_1d(x)));
  CHECK(err < 1e-6);
  CHECK(gs.q0() == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(gs.tail_amplitude() == doctest::Approx(6.0).epsilon(1e-5));
  CHECK(gs.mass_sq() == doctest::Approx(6.0).epsilon(1e-9));  // 9/4 * 2 * 4/3
}

TEST_CASE("two-dimensional cubic ground state against an RK4 shooting oracle") {
  const double a = oracle::shooting_q0(2, 3.0, 0.01);
  const double b = oracle::shooting_q0(2, 3.0, 0.005);
  const double richardson = b + (b - a) / 15.0;
  CHECK(std::abs(a - b) < 1e-6);
  const auto& gs = cubic2();
  CHECK(gs.q0() == doctest::Approx(richardson).epsilon(1e-8));
  CHECK(gs.q0() == doctest::Approx(2.2062).epsilon(1e-4));
  CHECK(gs.tail_amplitude() == doctest::Approx(3.518).epsilon(1e-3));
  const double alt = fit_tail_amplitude(gs, 20.0, 30.0).amplitude;
  CHECK(std::abs(alt / gs.tail_amplitude() - 1.0) < 1e-2);
}

TEST_CASE("profile invariants in every dimension") {
  for (const GroundState* g : {&cubic1(), &quad1(), &cubic2(), &quad3()}) {
    const auto& gs = *g;
    CAPTURE(gs.dimension());
    CAPTURE(gs.exponent());
    const auto& q = gs.q_values();
    const auto& qp = gs.q_prime_values();
    for (std::size_t i = 1; i < q.size(); ++i) {
      REQUIRE(q[i] > 0.0);
      REQUIRE(q[i] < q[i - 1]);
      REQUIRE(qp[i] < 0.0);
    }
    // Measured relative to the mass: in the critical case the inner product vanishes.
    const double expected = (2.0 / (gs.exponent() - 1.0) - 0.5 * gs.dimension()) * gs.mass_sq();
    CHECK(std::abs(gs.lambda_inner() - expected) <= 1e-6 * gs.mass_sq());
    CHECK(std::abs(gs.mass_sq_trapezoid() / gs.mass_sq_simpson() - 1.0) < 1e-8);
    const double R = gs.r_trunc();
    CHECK(q.back() < 1e-10);
    // Hand-off to the analytic tail.
    const double inside = gs.eval_q(R - 1e-9), outside = gs.eval_q(R + 1e-9);
    CHECK(std::abs(outside / inside - 1.0) < 1e-6);
    CHECK(gs.tail_fit().max_relative_residual < 1e-3);
  }
}

TEST_CASE("tail extension beyond truncation") {
  const auto& gs = quad3();
  const double r = gs.r_trunc() + 5.0;
  const double expected = gs.tail_amplitude() * std::exp(-r) / r;
  CHECK(gs.eval_q(r) == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("discrete ODE residual is second order in the stencil step") {
  for (const GroundState* g : {&cubic1(), &cubic2(), &quad3()}) {
    const auto& gs = *g;
    const int d = gs.dimension();
    const double p = gs.exponent();
    auto residual = [&](double h) {
      double worst = 0.0;
      for (double r = 0.5; r < 15.0; r += h) {
        const double qm = gs.eval_q(r - h), q0 = gs.eval_q(r), qp = gs.eval_q(r + h);
        const double res = (qp - 2 * q0 + qm) / (h * h) + (d - 1) / r * (qp - qm) / (2 * h) - q0 + std::pow(q0, p);
        worst = std::max(worst, std::abs(res));
      }
      return worst;
    };
    const double r1 = residual(0.04), r2 = residual(0.02);
    CAPTURE(d);
    CHECK(r1 / r2 > 3.5);
    CHECK(r1 / r2 < 4.5);
  }
}

TEST_CASE("inadmissible parameters are rejected") {
  CHECK_THROWS_AS(solve_ground_state(3, 5.0), Error);
  CHECK_THROWS_AS(solve_ground_state(3, 6.0), Error);
  CHECK_THROWS_AS(solve_ground_state(4, 1.5), Error);
  CHECK_THROWS_AS(solve_ground_state(1, 1.0), Error);
  try {
    solve_ground_state(3, 5.5);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_bracket_found);
  }
  CHECK_THROWS_AS(fit_tail_amplitude(cubic1(), 39.99, 40.0), Error);
}

TEST_CASE("exports carry the constants") {
  const auto& gs = cubic1();
  const std::string csv = gs.profile_csv();
  CHECK(csv.rfind("r,q,qprime\n", 0) == 0);
  const std::string js = gs.constants_json();
  CHECK(js.find("\"mass_sq\"") != std::string::npos);
  CHECK(js.find("\"lambda_inner\"") != std::string::npos);
}
