#include "sollab/linops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/SparseLU>
#include <json.hpp>

#include "sollab/error.hpp"
#include "sollab/quadrature.hpp"

namespace sollab {

namespace {

using Vec = Eigen::VectorXd;
using Sparse = Eigen::SparseMatrix<double>;

void check_grid(const Grid1D& g) {
  if (!(g.h > 0.0) || !(g.L > 0.0) || g.size() < 8) fail(ErrorCode::invalid_argument, "grid needs h > 0 and L > 0");
}

void check_d1(const GroundState& gs) {
  if (gs.dimension() != 1) fail(ErrorCode::invalid_argument, "correction fields are built in d = 1");
}

// lambda^2 V(|lambda y + chi|) on the nodes.
Vec perturbation(const PotentialSpec& v, const Grid1D& g, double chi, double lambda) {
  Vec w(g.size());
  for (int i = 0; i < g.size(); ++i) w[i] = lambda * lambda * v.value(std::abs(lambda * g.x(i) + chi));
  return w;
}

Sparse bordered(const Sparse& a, const Vec& c) {
  const int n = static_cast<int>(a.rows());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.nonZeros() + 2 * n);
  for (int k = 0; k < a.outerSize(); ++k)
    for (Sparse::InnerIterator it(a, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    if (c[i] == 0.0) continue;
    t.emplace_back(i, n, c[i]);
    t.emplace_back(n, i, c[i]);
  }
  Sparse m(n + 1, n + 1);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

struct BorderedSolution {
  Vec u;
  double sigma = 0.0;
};

// [A c; c^T 0] [u; s] = [f; 0] with unit c.
BorderedSolution solve_bordered(const Sparse& a, const Vec& c_raw, const Vec& f) {
  const double cn = c_raw.norm();
  if (!(cn > 0.0)) fail(ErrorCode::singular_system, "constraint row vanishes on this grid");
  const Vec c = c_raw / cn;
  const Sparse m = bordered(a, c);
  Eigen::SparseLU<Sparse> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) fail(ErrorCode::singular_system, "bordered system is singular");
  Vec rhs(f.size() + 1);
  rhs.head(f.size()) = f;
  rhs[f.size()] = 0.0;
  const Vec x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) fail(ErrorCode::singular_system, "bordered solve failed");
  return {x.head(f.size()), x[f.size()] / cn};
}

double decay_fit(const Grid1D& g, const Vec& u, double away_sign) {
  std::vector<double> xs, ys;
  for (int i = 0; i < g.size(); ++i) {
    const double y = g.x(i);
    const double ay = std::abs(y);
    if (ay < 4.0 || ay > 12.0 || y * away_sign < 0.0) continue;
    if (u[i] == 0.0) continue;
    xs.push_back(ay);
    ys.push_back(std::log(std::abs(u[i])));
  }
  if (xs.size() < 3) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return -sxy / sxx;
}

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void check_lambda_chi(const PotentialSpec& v, const GroundState& gs, double chi, double lambda,
                      const LinopsOptions& opts) {
  check_d1(gs);
  if (v.dimension() != 1) fail(ErrorCode::invalid_argument, "potential must be one-dimensional");
  if (!(lambda > 0.0)) fail(ErrorCode::invalid_argument, "lambda must be positive");
  if (!(lambda * lambda * v.sup() < 1.0)) fail(ErrorCode::invalid_argument, "needs lambda^2 sup V < 1");
  if (std::abs(chi) / lambda < opts.validity_radius)
    fail(ErrorCode::invalid_argument, "|chi| / lambda is below the validity radius");
}

}  // namespace

int Grid1D::size() const { return static_cast<int>(std::lround(2.0 * L / h)) - 1; }

Vec Grid1D::nodes() const {
  Vec x(size());
  for (int i = 0; i < size(); ++i) x[i] = this->x(i);
  return x;
}

std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::Lplus: return "Lplus";
    case OperatorKind::Lminus: return "Lminus";
    case OperatorKind::LplusV: return "LplusV";
    case OperatorKind::LminusV: return "LminusV";
  }
  return "unknown";
}

DiscretizedOperator::DiscretizedOperator(OperatorKind kind, const GroundState& gs, const Grid1D& grid,
                                         const PotentialSpec* v, double chi, double lambda)
    : kind_(kind), grid_(grid) {
  check_d1(gs);
  check_grid(grid);
  const bool perturbed = kind == OperatorKind::LplusV || kind == OperatorKind::LminusV;
  if (perturbed && v == nullptr) fail(ErrorCode::invalid_argument, "perturbed operator needs a potential");
  if (perturbed && !(lambda > 0.0)) fail(ErrorCode::invalid_argument, "lambda must be positive");
  const double c = (kind == OperatorKind::Lplus || kind == OperatorKind::LplusV) ? gs.exponent() : 1.0;
  const int n = grid.size();
  const double p = gs.exponent();
  pot_.resize(n);
  for (int i = 0; i < n; ++i) pot_[i] = 1.0 - c * std::pow(gs.eval_q(grid.x(i)), p - 1.0);
  if (perturbed) pot_ -= perturbation(*v, grid, chi, lambda);

  const double ih2 = 1.0 / (grid.h * grid.h);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * n);
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0 * ih2 + pot_[i]);
    if (i > 0) t.emplace_back(i, i - 1, -ih2);
    if (i + 1 < n) t.emplace_back(i, i + 1, -ih2);
  }
  m_.resize(n, n);
  m_.setFromTriplets(t.begin(), t.end());
  m_.makeCompressed();
}

Vec DiscretizedOperator::apply_fourth_order(const Vec& u) const {
  const int n = grid_.size();
  const double ih2 = 1.0 / (12.0 * grid_.h * grid_.h);
  Vec out = Vec::Zero(n);
  for (int i = 2; i + 2 < n; ++i) {
    const double d2 = (-u[i - 2] + 16.0 * u[i - 1] - 30.0 * u[i] + 16.0 * u[i + 1] - u[i + 2]) * ih2;
    out[i] = -d2 + pot_[i] * u[i];
  }
  return out;
}

Vec sample_q(const GroundState& gs, const Grid1D& g) {
  Vec v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = gs.eval_q(g.x(i));
  return v;
}

Vec sample_q_prime(const GroundState& gs, const Grid1D& g) {
  Vec v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = gs.eval_q_prime(g.x(i));
  return v;
}

Vec sample_lambda_q(const GroundState& gs, const Grid1D& g) {
  Vec v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = gs.eval_lambda_q(g.x(i));
  return v;
}

IdentityReport identity_suite(const GroundState& gs, double h, double L) {
  if (!(h > 0.0) || h > 0.05) fail(ErrorCode::invalid_argument, "identity suite needs 0 < h <= 0.05");
  if (!(L > 2.0)) fail(ErrorCode::invalid_argument, "identity suite needs L > 2");
  IdentityReport rep;
  rep.d = gs.dimension();
  rep.p = gs.exponent();
  rep.h = h;
  const double p = gs.exponent();
  const int d = gs.dimension();

  if (d == 1) {
    const Grid1D g{L, h};
    const DiscretizedOperator lp(OperatorKind::Lplus, gs, g);
    const Vec q = sample_q(gs, g), dq = sample_q_prime(gs, g), lq = sample_lambda_q(gs, g);
    rep.kernel = max_abs(lp.apply(dq));
    rep.lambda_q = max_abs(lp.apply(lq) + 2.0 * q);
    // (-D2 + 1) Q = L+ Q + p Q^p
    Vec helm = lp.apply(q);
    for (int i = 0; i < g.size(); ++i) helm[i] += p * std::pow(q[i], p);
    rep.l_plus_q = max_abs(lp.apply(q) + (p - 1.0) * helm);
  } else {
    // radial nodes r in [1, L - h]; differences use exact samples at r +/- h
    const int n = static_cast<int>(std::floor((L - 1.0) / h));
    for (int i = 0; i < n; ++i) {
      const double r = 1.0 + i * h;
      auto lap = [&](auto f, double ell) {
        const double fm = f(r - h), f0 = f(r), fp = f(r + h);
        return (fp - 2.0 * f0 + fm) / (h * h) + (d - 1) / r * (fp - fm) / (2.0 * h) - ell * f0 / (r * r);
      };
      auto qf = [&](double s) { return gs.eval_q(s); };
      auto dqf = [&](double s) { return gs.eval_q_prime(s); };
      auto lqf = [&](double s) { return gs.eval_lambda_q(s); };
      const double q = qf(r), w = p * std::pow(q, p - 1.0);
      rep.kernel = std::max(rep.kernel, std::abs(-lap(dqf, d - 1.0) + (1.0 - w) * dqf(r)));
      rep.lambda_q = std::max(rep.lambda_q, std::abs(-lap(lqf, 0.0) + (1.0 - w) * lqf(r) + 2.0 * q));
      const double helm = -lap(qf, 0.0) + q;
      rep.l_plus_q = std::max(rep.l_plus_q, std::abs(helm - w * q + (p - 1.0) * helm));
    }
  }
  rep.inner = gs.lambda_inner();
  rep.inner_expected = (2.0 / (p - 1.0) - 0.5 * d) * gs.mass_sq();
  rep.inner_rel_err = std::abs(rep.inner - rep.inner_expected) / gs.mass_sq();
  return rep;
}

double CorrectionField::at(double y) const {
  const int n = grid.size();
  const double s = (y + grid.L) / grid.h - 1.0;
  if (s <= -1.0 || s >= n) return 0.0;
  const int i = static_cast<int>(std::floor(s));
  const double w = s - i;
  const double a = i >= 0 ? values[i] : 0.0;
  const double b = i + 1 < n ? values[i + 1] : 0.0;
  return (1.0 - w) * a + w * b;
}

CorrectionField t0_explicit(const PotentialSpec& v, const GroundState& gs, double chi, double lambda,
                            const LinopsOptions& opts) {
  check_d1(gs);
  if (!(lambda > 0.0)) fail(ErrorCode::invalid_argument, "lambda must be positive");
  if (!v.is_zero() && classify_tail(v).kind != TailKind::slow)
    fail(ErrorCode::invalid_argument, "T0 is defined for slow potentials");
  const Grid1D g{opts.L, opts.h};
  check_grid(g);
  CorrectionField f;
  f.order = FieldOrder::T0;
  f.grid = g;
  // V_lambda(|chi / lambda|) = V(|chi|)
  const double amp = lambda * lambda * v.value(std::abs(chi));
  f.values = -0.5 * amp * sample_lambda_q(gs, g);
  const DiscretizedOperator lp(OperatorKind::Lplus, gs, g);
  const Vec q = sample_q(gs, g);
  // closed form: the second-order stencil measures the truncation error, as in the identity suite
  f.residual = max_abs(lp.apply(f.values) - amp * q);
  f.constraint = std::abs(g.dot(f.values, sample_q_prime(gs, g)));
  f.decay_rate = amp == 0.0 ? 0.0 : decay_fit(g, f.values, 1.0);
  return f;
}

CorrectionField solve_t1(const PotentialSpec& v, const GroundState& gs, double chi, double lambda,
                         const LinopsOptions& opts) {
  check_lambda_chi(v, gs, chi, lambda, opts);
  const Grid1D g{opts.L, opts.h};
  check_grid(g);
  const DiscretizedOperator a(OperatorKind::LplusV, gs, g, &v, chi, lambda);
  const Vec q = sample_q(gs, g), dq = sample_q_prime(gs, g), y = g.nodes();
  const Vec vq = perturbation(v, g, chi, lambda).cwiseProduct(q);
  const Vec yq = lambda * lambda * lambda * y.cwiseProduct(q);
  const double b1 = g.dot(vq, dq) / g.dot(yq, dq);
  const Vec f = vq - b1 * yq;

  CorrectionField out;
  out.order = FieldOrder::T1;
  out.grid = g;
  out.B1 = {b1};
  const auto sol = solve_bordered(a.matrix(), dq, f);
  out.values = sol.u;
  out.multiplier = sol.sigma;
  Vec r = a.apply_fourth_order(out.values) + sol.sigma * dq - f;
  r[0] = r[1] = r[g.size() - 1] = r[g.size() - 2] = 0.0;
  out.residual = max_abs(r);
  out.constraint = std::abs(g.dot(out.values, dq));
  out.decay_rate = decay_fit(g, out.values, chi >= 0.0 ? 1.0 : -1.0);
  return out;
}

namespace {

Vec dchi_t1(const PotentialSpec& v, const GroundState& gs, double chi, double lambda, const LinopsOptions& opts) {
  const Vec up = solve_t1(v, gs, chi + opts.fd_delta, lambda, opts).values;
  const Vec dn = solve_t1(v, gs, chi - opts.fd_delta, lambda, opts).values;
  return (up - dn) / (2.0 * opts.fd_delta);
}

double m1_from(const Vec& dt1, const GroundState& gs, const Grid1D& g, double beta, double lambda) {
  const Vec q = sample_q(gs, g);
  const double lqq = g.dot(sample_lambda_q(gs, g), q);
  if (std::abs(lqq) < 1e-12 * g.dot(q, q)) fail(ErrorCode::singular_system, "(Lambda Q, Q) vanishes");
  return 2.0 * lambda / lqq * beta * g.dot(dt1, q);
}

}  // namespace

double m1_modulation(const PotentialSpec& v, const GroundState& gs, double chi, double beta, double lambda,
                     const LinopsOptions& opts) {
  if (!(opts.fd_delta > 0.0)) fail(ErrorCode::invalid_argument, "fd_delta must be positive");
  if (beta == 0.0) {
    check_lambda_chi(v, gs, chi, lambda, opts);
    return 0.0;
  }
  const Grid1D g{opts.L, opts.h};
  return m1_from(dchi_t1(v, gs, chi, lambda, opts), gs, g, beta, lambda);
}

CorrectionField solve_t2(const PotentialSpec& v, const GroundState& gs, double chi, double beta, double lambda,
                         const LinopsOptions& opts) {
  check_lambda_chi(v, gs, chi, lambda, opts);
  const Grid1D g{opts.L, opts.h};
  check_grid(g);
  const Vec dt1 = dchi_t1(v, gs, chi, lambda, opts);
  const double m1 = m1_from(dt1, gs, g, beta, lambda);
  const Vec q = sample_q(gs, g);
  const Vec f = -lambda * m1 * sample_lambda_q(gs, g) + 2.0 * lambda * lambda * beta * dt1;
  const DiscretizedOperator a(OperatorKind::LminusV, gs, g, &v, chi, lambda);

  CorrectionField out;
  out.order = FieldOrder::T2;
  out.grid = g;
  out.M1 = m1;
  const auto sol = solve_bordered(a.matrix(), q, f);
  out.values = sol.u;
  out.multiplier = sol.sigma;
  Vec r = a.apply_fourth_order(out.values) + sol.sigma * q - f;
  r[0] = r[1] = r[g.size() - 1] = r[g.size() - 2] = 0.0;
  out.residual = max_abs(r);
  out.constraint = std::abs(g.dot(out.values, q));
  out.decay_rate = beta == 0.0 ? 0.0 : decay_fit(g, out.values, chi >= 0.0 ? 1.0 : -1.0);
  return out;
}

bool CoercivityReport::positive() const {
  for (double e : l_plus)
    if (!(e > 0.0)) return false;
  for (double e : l_minus)
    if (!(e > 0.0)) return false;
  return !l_plus.empty() && !l_minus.empty();
}

namespace {

std::vector<double> restricted_eigs(const Sparse& a, const Eigen::MatrixXd& c, int count) {
  const int n = static_cast<int>(a.rows());
  const int k = static_cast<int>(c.cols());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
  const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd z = full.rightCols(n - k);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(a);
  const Eigen::MatrixXd r = z.transpose() * dense * z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (r + r.transpose()), Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (int i = 0; i < std::min(count, n - k); ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

}  // namespace

CoercivityReport coercivity(const PotentialSpec& v, const GroundState& gs, double chi, double lambda, int count,
                            double h, double L) {
  check_d1(gs);
  if (count < 1) fail(ErrorCode::invalid_argument, "count must be positive");
  const Grid1D g{L, h};
  check_grid(g);
  const Vec q = sample_q(gs, g), y = g.nodes();
  CoercivityReport rep;
  Eigen::MatrixXd c(g.size(), 2);
  c.col(0) = q;
  c.col(1) = y.cwiseProduct(q);
  rep.l_plus = restricted_eigs(DiscretizedOperator(OperatorKind::LplusV, gs, g, &v, chi, lambda).matrix(), c, count);
  rep.l_minus = restricted_eigs(DiscretizedOperator(OperatorKind::LminusV, gs, g, &v, chi, lambda).matrix(),
                                sample_lambda_q(gs, g), count);
  return rep;
}

ConditioningReport conditioning_scan(const PotentialSpec& v, const GroundState& gs, double lambda,
                                     const std::vector<double>& chis, double threshold, const LinopsOptions& opts) {
  check_d1(gs);
  if (!(threshold > 0.0)) fail(ErrorCode::invalid_argument, "threshold must be positive");
  const Grid1D g{opts.L, opts.h};
  check_grid(g);
  const Vec dq = sample_q_prime(gs, g);
  ConditioningReport rep;
  for (double chi : chis) {
    ConditioningRow row;
    row.chi = chi;
    const DiscretizedOperator a(OperatorKind::LplusV, gs, g, &v, chi, lambda);
    const Sparse m = bordered(a.matrix(), dq / dq.norm());
    Eigen::SparseLU<Sparse> lu;
    lu.compute(m);
    if (lu.info() == Eigen::Success) {
      // inverse iteration for the eigenvalue of smallest modulus
      Vec x = Vec::Ones(m.rows()) / std::sqrt(double(m.rows()));
      double growth = 0.0;
      for (int it = 0; it < 200; ++it) {
        Vec z = lu.solve(x);
        const double nz = z.norm();
        if (!std::isfinite(nz)) {
          growth = INFINITY;
          break;
        }
        const bool done = std::abs(nz - growth) <= 1e-10 * nz;
        growth = nz;
        x = z / nz;
        if (done) break;
      }
      row.min_abs_eig = std::isfinite(growth) && growth > 0.0 ? 1.0 / growth : 0.0;
    }
    row.well_conditioned = row.min_abs_eig >= threshold;
    rep.rows.push_back(row);
  }
  // smallest ladder value past which every (larger |chi|) row is fine
  std::vector<ConditioningRow> sorted = rep.rows;
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return std::abs(a.chi) < std::abs(b.chi); });
  for (auto it = sorted.rbegin(); it != sorted.rend() && it->well_conditioned; ++it) rep.c_v = std::abs(it->chi);
  return rep;
}

std::string field_csv(const CorrectionField& t0, const CorrectionField& t1, const CorrectionField& t2) {
  std::string out = "x,T0,T1,T2\n";
  char buf[128];
  const Grid1D& g = t1.grid;
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", x, t0.at(x), t1.values[i], t2.at(x));
    out += buf;
  }
  return out;
}

std::string field_report_json(const CorrectionField& t0, const CorrectionField& t1, const CorrectionField& t2) {
  nlohmann::json j;
  j["h"] = t1.grid.h;
  j["L"] = t1.grid.L;
  j["T0"] = {{"residual", t0.residual}, {"decay_rate", t0.decay_rate}};
  j["T1"] = {{"residual", t1.residual},
             {"constraint", t1.constraint},
             {"multiplier", t1.multiplier},
             {"decay_rate", t1.decay_rate},
             {"B1", t1.B1}};
  j["T2"] = {{"residual", t2.residual},
             {"constraint", t2.constraint},
             {"multiplier", t2.multiplier},
             {"decay_rate", t2.decay_rate},
             {"M1", t2.M1}};
  return j.dump(2) + "\n";
}

}  // namespace sollab
