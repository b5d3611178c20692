#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "sollab/error.hpp"
#include "sollab/ode.hpp"
#include "sollab/quadrature.hpp"

using namespace sollab;

TEST_CASE("gauss-kronrod integrates polynomials and smooth functions") {
  auto r = integrate([](double x) { return x * x * x * x; }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(0.2).epsilon(1e-14));
  auto g = integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0);
  CHECK(std::abs(g.value - std::sqrt(std::numbers::pi)) < 1e-12);
  auto osc = integrate([](double x) { return std::sin(50 * x); }, 0.0, std::numbers::pi,
                       {.abs_tol = 1e-12, .rel_tol = 0, .relative_to_l1 = true});
  CHECK(std::abs(osc.value) < 1e-11);
}

TEST_CASE("gauss-kronrod handles endpoint singularities adaptively") {
  auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {.rel_tol = 1e-7});
  CHECK(std::abs(r.value - 2.0) <= r.error);
  CHECK(r.error < 2e-7);
}

TEST_CASE("breakpoints split the interval") {
  const double bp[] = {-1.0, 0.0, 2.0};
  auto r = integrate([](double x) { return std::abs(x); }, std::span<const double>(bp), {});
  CHECK(r.value == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("quadrature failure reports the estimate") {
  try {
    integrate([](double x) { return 1.0 / x; }, 1e-300, 1.0, {.rel_tol = 1e-14, .max_intervals = 20});
    FAIL("expected an exception");
  } catch (const QuadratureError& e) {
    CHECK(e.code() == ErrorCode::quadrature_tolerance_not_met);
    CHECK(e.error_bound > 0.0);
  }
}

TEST_CASE("composite rules") {
  std::vector<double> y(101);
  for (int i = 0; i <= 100; ++i) y[i] = std::pow(i * 0.01, 3);
  CHECK(simpson(y, 0.01) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(trapezoid(y, 0.01) == doctest::Approx(0.25).epsilon(1e-4));
  CHECK_THROWS_AS(simpson(std::vector<double>(4, 1.0), 0.1), Error);
}

TEST_CASE("dopri5 on the harmonic oscillator, both directions") {
  Dopri5 ode(2, [](double, const double* y, double* dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  }, {.rtol = 1e-12, .atol = 1e-12});
  std::vector<double> y = {1.0, 0.0};
  double t = 0.0;
  ode.integrate(t, y, 20.0);
  CHECK(t == 20.0);
  CHECK(std::abs(y[0] - std::cos(20.0)) < 1e-9);
  CHECK(std::abs(y[1] + std::sin(20.0)) < 1e-9);
  ode.integrate(t, y, 0.0);
  CHECK(std::abs(y[0] - 1.0) < 1e-9);
  CHECK(std::abs(y[1]) < 1e-9);
}

TEST_CASE("dopri5 dense output matches the exact solution between steps") {
  Dopri5 ode(1, [](double, const double* y, double* dy) { dy[0] = -y[0]; }, {.rtol = 1e-10, .atol = 1e-12});
  std::vector<double> y = {1.0};
  double t = 0.0;
  double worst = 0.0;
  ode.integrate(t, y, 5.0, [&](const StepView& st) {
    for (int k = 1; k < 4; ++k) {
      const double s = st.t_old + (st.t - st.t_old) * k / 4.0;
      worst = std::max(worst, std::abs(st.dense(s, 0) - std::exp(-s)));
    }
    return true;
  });
  CHECK(worst < 1e-8);
}

TEST_CASE("dopri5 observer can stop early and keeps the state") {
  Dopri5 ode(1, [](double, const double*, double* dy) { dy[0] = 1.0; });
  std::vector<double> y = {0.0};
  double t = 0.0;
  const bool done = ode.integrate(t, y, 10.0, [](const StepView& st) { return st.t < 1.0; });
  CHECK_FALSE(done);
  CHECK(y[0] == doctest::Approx(t));
}

TEST_CASE("dopri5 reports step size underflow at a singularity") {
  Dopri5 ode(1, [](double, const double* y, double* dy) { dy[0] = y[0] * y[0]; });
  std::vector<double> y = {1.0};
  double t = 0.0;
  try {
    ode.integrate(t, y, 2.0);
    FAIL("expected underflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::step_size_underflow);
    CHECK(t < 1.0);
    CHECK(std::isfinite(y[0]));
  }
}
