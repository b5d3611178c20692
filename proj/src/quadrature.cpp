#include "sollab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "sollab/error.hpp"

namespace sollab {

namespace {

constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error, l1;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  double l1 = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    l1 += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  Segment s{a, b, kron * h, std::abs((kron - gauss) * h), l1 * std::abs(h)};
  // QUADPACK-style error scaling; keeps the estimate honest for smooth integrands.
  if (s.error > 0.0) {
    const double scaled = std::pow(200.0 * s.error / std::max(s.l1, 1e-300), 1.5);
    s.error = std::max(s.error * std::min(1.0, scaled), 50.0 * 2.2e-16 * s.l1);
  }
  return s;
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, std::span<const double> bp,
                     const QuadOptions& opts) {
  QuadResult res;
  if (bp.size() < 2) return res;
  std::priority_queue<Segment> heap;
  double total = 0.0, err = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    if (bp[i + 1] == bp[i]) continue;
    Segment s = gk15(f, bp[i], bp[i + 1]);
    res.evaluations += 15;
    total += s.value;
    err += s.error;
    l1 += s.l1;
    heap.push(s);
  }
  auto target = [&] {
    const double scale = opts.relative_to_l1 ? l1 : std::abs(total);
    return std::max(opts.abs_tol, opts.rel_tol * scale);
  };
  int intervals = static_cast<int>(heap.size());
  while (!heap.empty() && err > target()) {
    if (intervals >= opts.max_intervals) break;
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (std::abs(worst.b - worst.a) < 1e-13 * std::max(1.0, std::abs(mid))) break;
    heap.pop();
    Segment left = gk15(f, worst.a, mid);
    Segment right = gk15(f, mid, worst.b);
    res.evaluations += 30;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed the drift accumulated by incremental updates.
  total = 0.0;
  err = 0.0;
  l1 = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    l1 += heap.top().l1;
    heap.pop();
  }
  res.value = total;
  res.error = err;
  res.l1 = l1;
  const double scale = opts.relative_to_l1 ? l1 : std::abs(total);
  res.converged = err <= std::max(opts.abs_tol, opts.rel_tol * scale);
  if (!std::isfinite(total)) res.converged = false;
  if (!res.converged && opts.throw_on_failure) {
    std::ostringstream msg;
    msg << "estimate " << total << " with error bound " << err;
    throw QuadratureError(total, err, msg.str());
  }
  return res;
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts) {
  const double bp[2] = {a, b};
  return integrate(f, std::span<const double>(bp, 2), opts);
}

double trapezoid(std::span<const double> y, double h) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * h;
}

double simpson(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 3 || n % 2 == 0) fail(ErrorCode::invalid_argument, "simpson needs an odd number of samples >= 3");
  double s = y.front() + y.back();
  for (std::size_t i = 1; i + 1 < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * y[i];
  return s * h / 3.0;
}

}  // namespace sollab
