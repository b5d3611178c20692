#include "sollab/nls_solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "sollab/error.hpp"
#include "sollab/interaction.hpp"

namespace sollab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_state(const FieldState& s) {
  if (s.d != 1 && s.d != 2) fail(ErrorCode::invalid_argument, "field dimension must be 1 or 2");
  if (s.n < 8 || (s.n & (s.n - 1)) != 0) fail(ErrorCode::invalid_argument, "points per axis must be a power of two");
  if (!(s.L_box > 0.0)) fail(ErrorCode::invalid_argument, "L_box must be positive");
  const std::size_t expect = s.d == 1 ? s.n : static_cast<std::size_t>(s.n) * s.n;
  if (s.u.size() != expect) fail(ErrorCode::invalid_argument, "field size does not match the grid");
}

double wavenumber(int i, int n, double L) {
  const int m = i <= n / 2 ? i : i - n;
  return kPi / L * m;
}

double cell(const FieldState& s) { return std::pow(s.dx(), s.d); }

// FFT of u (forward, unnormalised).
std::vector<cplx> spectrum(const FieldState& s) {
  std::vector<cplx> out(s.u);
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan = s.d == 1 ? fftw_plan_dft_1d(s.n, p, p, FFTW_FORWARD, FFTW_ESTIMATE)
                            : fftw_plan_dft_2d(s.n, s.n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

double radius_at(const FieldState& s, std::size_t idx) {
  if (s.d == 1) return std::abs(s.coord(static_cast<int>(idx)));
  const int i = static_cast<int>(idx / s.n), j = static_cast<int>(idx % s.n);
  return std::hypot(s.coord(i), s.coord(j));
}

}  // namespace

FieldState init_soliton(const GroundState& gs, const ReducedState& xi, int n, double L_box, const CorrectionField* t1) {
  const int d = gs.dimension();
  if (d != 1 && d != 2) fail(ErrorCode::invalid_argument, "the PDE solver supports d = 1 and d = 2");
  if (static_cast<int>(xi.chi.size()) != d || static_cast<int>(xi.beta.size()) != d)
    fail(ErrorCode::invalid_argument, "seed dimension does not match the ground state");
  if (!(xi.lambda > 0.0)) fail(ErrorCode::invalid_argument, "lambda must be positive");
  if (t1 != nullptr && d != 1) fail(ErrorCode::invalid_argument, "first-order profile is one-dimensional");
  double chi_norm = 0.0;
  for (double c : xi.chi) chi_norm += c * c;
  chi_norm = std::sqrt(chi_norm);
  if (L_box < chi_norm + 20.0 * xi.lambda) fail(ErrorCode::box_too_small, "L_box must be at least |chi| + 20 lambda");

  FieldState s;
  s.d = d;
  s.n = n;
  s.L_box = L_box;
  s.t = xi.t;
  s.u.assign(d == 1 ? n : static_cast<std::size_t>(n) * n, cplx(0.0));
  check_state(s);

  const double lam = xi.lambda;
  const double amp = std::pow(lam, -2.0 / (gs.exponent() - 1.0));
  const cplx gauge = std::polar(1.0, -xi.gamma);
  if (d == 1) {
    for (int i = 0; i < n; ++i) {
      const double x = s.coord(i);
      const double y = (x - xi.chi[0]) / lam;
      double w = gs.eval_q(y);
      if (t1 != nullptr) w += t1->at(y);
      s.u[i] = amp * w * gauge * std::polar(1.0, xi.beta[0] * x);
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double x0 = s.coord(i), x1 = s.coord(j);
        const double r = std::hypot(x0 - xi.chi[0], x1 - xi.chi[1]) / lam;
        s.u[static_cast<std::size_t>(i) * n + j] =
            amp * gs.eval_q(r) * gauge * std::polar(1.0, xi.beta[0] * x0 + xi.beta[1] * x1);
      }
  }
  return s;
}

Diagnostics diagnostics(const FieldState& s, const PotentialSpec& v, double p, bool nonlinear) {
  check_state(s);
  const int d = s.d, n = s.n;
  const double dv = cell(s);
  const std::size_t total = s.size();
  Diagnostics g;
  g.center.assign(d, 0.0);
  g.momentum.assign(d, 0.0);
  g.beta.assign(d, 0.0);

  double umax = 0.0;
  for (const auto& z : s.u) umax = std::max(umax, std::norm(z));
  const double cut = 1e-6 * umax;
  double wsum = 0.0, pot = 0.0, nl = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    const double a2 = std::norm(s.u[k]);
    g.mass += a2;
    if (!v.is_zero()) pot += v.value(radius_at(s, k)) * a2;
    if (nonlinear) nl += std::pow(a2, 0.5 * (p + 1.0));
    if (a2 > cut) {
      wsum += a2;
      if (d == 1) {
        g.center[0] += a2 * s.coord(static_cast<int>(k));
      } else {
        g.center[0] += a2 * s.coord(static_cast<int>(k / n));
        g.center[1] += a2 * s.coord(static_cast<int>(k % n));
      }
    }
  }
  g.mass *= dv;
  pot *= dv;
  nl *= dv;
  if (wsum > 0.0)
    for (double& c : g.center) c /= wsum;

  // Parseval: sum |u|^2 = (1 / N) sum |u_hat|^2
  const auto uh = spectrum(s);
  double kin = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    const double a2 = std::norm(uh[k]);
    if (d == 1) {
      const double kx = wavenumber(static_cast<int>(k), n, s.L_box);
      kin += kx * kx * a2;
      if (static_cast<int>(k) != n / 2) g.momentum[0] += kx * a2;
    } else {
      const int i = static_cast<int>(k / n), j = static_cast<int>(k % n);
      const double kx = wavenumber(i, n, s.L_box), ky = wavenumber(j, n, s.L_box);
      kin += (kx * kx + ky * ky) * a2;
      if (i != n / 2) g.momentum[0] += kx * a2;
      if (j != n / 2) g.momentum[1] += ky * a2;
    }
  }
  const double norm = dv / static_cast<double>(total);
  kin *= norm;
  for (double& m : g.momentum) m *= norm;
  g.energy = 0.5 * kin - 0.5 * pot - nl / (p + 1.0);
  for (int i = 0; i < d; ++i) g.beta[i] = g.mass > 0.0 ? g.momentum[i] / g.mass : 0.0;
  return g;
}

struct SplitStepSolver::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

SplitStepSolver::SplitStepSolver(FieldState init, const PotentialSpec& v, double p, const NlsOptions& opts)
    : s_(std::move(init)), v_(v), p_(p), opts_(opts), plans_(std::make_unique<Plans>()) {
  check_state(s_);
  if (!(p > 1.0)) fail(ErrorCode::invalid_argument, "nonlinearity exponent must exceed 1");
  if (v.dimension() != s_.d) fail(ErrorCode::invalid_argument, "potential dimension does not match the field");
  if (s_.dx() > 1.0 / 16.0) fail(ErrorCode::invalid_argument, "grid must have at least 16 points per unit length");
  if (opts_.checkpoint_every < 1) fail(ErrorCode::invalid_argument, "checkpoint_every must be positive");
  set_dt(opts_.dt);

  const int n = s_.n;
  const std::size_t total = s_.size();
  k2_.resize(total);
  vx_.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    if (s_.d == 1) {
      const double kx = wavenumber(static_cast<int>(k), n, s_.L_box);
      k2_[k] = kx * kx;
    } else {
      const double kx = wavenumber(static_cast<int>(k / n), n, s_.L_box);
      const double ky = wavenumber(static_cast<int>(k % n), n, s_.L_box);
      k2_[k] = kx * kx + ky * ky;
    }
    vx_[k] = v_.is_zero() ? 0.0 : v_.value(radius_at(s_, k));
  }
  // FFTW_ESTIMATE leaves the array untouched while planning and keeps the plan, and therefore the
  // output bits, independent of timing.
  auto* buf = reinterpret_cast<fftw_complex*>(s_.u.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  if (s_.d == 1) {
    plans_->fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, flags);
    plans_->bwd = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, flags);
  } else {
    plans_->fwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, flags);
    plans_->bwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, flags);
  }
}

SplitStepSolver::~SplitStepSolver() = default;

void SplitStepSolver::set_dt(double dt) {
  if (!(dt != 0.0) || !std::isfinite(dt)) fail(ErrorCode::invalid_argument, "dt must be finite and nonzero");
  if (std::abs(dt) > opts_.max_dt) fail(ErrorCode::invalid_argument, "dt exceeds the stability budget");
  opts_.dt = dt;
  phase_full_.clear();
  phase_half_.clear();
}

void SplitStepSolver::kinetic(bool half) {
  // i u_t = -Delta u: u_hat *= exp(-i k^2 tau), with the 1/N of the inverse transform folded in
  auto& ph = half ? phase_half_ : phase_full_;
  if (ph.empty()) {
    const double tau = half ? 0.5 * opts_.dt : opts_.dt;
    const double inv = 1.0 / static_cast<double>(s_.size());
    ph.resize(s_.size());
    for (std::size_t k = 0; k < s_.size(); ++k) ph[k] = std::polar(inv, -k2_[k] * tau);
  }
  auto* buf = reinterpret_cast<fftw_complex*>(s_.u.data());
  fftw_execute_dft(plans_->fwd, buf, buf);
  for (std::size_t k = 0; k < s_.size(); ++k) s_.u[k] *= ph[k];
  fftw_execute_dft(plans_->bwd, buf, buf);
}

void SplitStepSolver::potential_phase() {
  const double tau = opts_.dt;
  const double e = 0.5 * (p_ - 1.0);
  const bool cubic = e == 1.0;
  for (std::size_t k = 0; k < s_.size(); ++k) {
    double w = vx_[k];
    if (opts_.nonlinear) {
      const double a2 = std::norm(s_.u[k]);
      w += cubic ? a2 : std::pow(a2, e);
    }
    s_.u[k] *= std::polar(1.0, w * tau);
  }
}

bool SplitStepSolver::finite() const {
  double acc = 0.0;
  for (const auto& z : s_.u) acc += std::norm(z);
  return std::isfinite(acc);
}

void SplitStepSolver::advance(long steps) {
  if (steps < 0) fail(ErrorCode::invalid_argument, "step count must be non-negative");
  const double dt = opts_.dt;
  long done = 0;
  while (done < steps) {
    const long chunk = std::min<long>(opts_.checkpoint_every, steps - done);
    const std::vector<cplx> saved(s_.u);
    const double t_saved = s_.t;
    kinetic(true);
    for (long k = 0; k < chunk; ++k) {
      potential_phase();
      kinetic(k + 1 == chunk);
    }
    if (!finite()) {
      s_.u = saved;
      s_.t = t_saved;
      fail(ErrorCode::nan_detected, "non-finite field; state restored to the last checkpoint");
    }
    s_.t = t_saved + chunk * dt;
    done += chunk;
  }
}

Diagnostics SplitStepSolver::diagnostics() const { return sollab::diagnostics(s_, v_, p_, opts_.nonlinear); }

FieldState step(const FieldState& s, const PotentialSpec& v, double p, double dt, const NlsOptions& opts) {
  NlsOptions o = opts;
  o.dt = dt;
  SplitStepSolver solver(s, v, p, o);
  solver.advance(1);
  return solver.state();
}

std::string diagnostics_csv_header(int d) {
  std::string h = "t,mass,energy";
  for (int i = 0; i < d; ++i) h += ",center_" + std::to_string(i + 1);
  for (int i = 0; i < d; ++i) h += ",momentum_" + std::to_string(i + 1);
  return h + "\n";
}

std::string diagnostics_csv_row(double t, const Diagnostics& g) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  std::string out = buf;
  for (double x : {g.mass, g.energy}) {
    std::snprintf(buf, sizeof buf, ",%.17g", x);
    out += buf;
  }
  for (const auto* v : {&g.center, &g.momentum})
    for (double x : *v) {
      std::snprintf(buf, sizeof buf, ",%.17g", x);
      out += buf;
    }
  return out + "\n";
}

namespace {

void put_le(std::ostream& os, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_snapshot(const FieldState& s, const std::string& path) {
  check_state(s);
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::invalid_argument, "cannot open snapshot for writing: " + path);
  char head[128];
  std::snprintf(head, sizeof head, "%d,%d,%.17g,%.17g\n", s.d, s.n, s.L_box, s.t);
  os << head;
  for (const auto& z : s.u) {
    put_le(os, z.real());
    put_le(os, z.imag());
  }
  if (!os) fail(ErrorCode::invalid_argument, "snapshot write failed: " + path);
}

FieldState read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::invalid_argument, "cannot open snapshot: " + path);
  std::string head;
  std::getline(is, head);
  FieldState s;
  if (std::sscanf(head.c_str(), "%d,%d,%lf,%lf", &s.d, &s.n, &s.L_box, &s.t) != 4)
    fail(ErrorCode::invalid_argument, "malformed snapshot header");
  if ((s.d != 1 && s.d != 2) || s.n < 8) fail(ErrorCode::invalid_argument, "malformed snapshot header");
  s.u.resize(s.d == 1 ? s.n : static_cast<std::size_t>(s.n) * s.n);
  for (auto& z : s.u) {
    const double re = get_le(is);
    const double im = get_le(is);
    z = cplx(re, im);
  }
  if (!is) fail(ErrorCode::invalid_argument, "snapshot is truncated");
  check_state(s);
  return s;
}

std::string TrackReport::csv() const {
  std::string out = "t";
  const std::size_t d = rows.empty() ? 0 : rows.front().center_pde.size();
  for (std::size_t i = 0; i < d; ++i) out += ",center_pde_" + std::to_string(i + 1);
  for (std::size_t i = 0; i < d; ++i) out += ",chi_reduced_" + std::to_string(i + 1);
  for (std::size_t i = 0; i < d; ++i) out += ",beta_pde_" + std::to_string(i + 1);
  for (std::size_t i = 0; i < d; ++i) out += ",beta_reduced_" + std::to_string(i + 1);
  out += ",center_error,beta_error,mass,energy\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.t);
    out += buf;
    for (const auto* v : {&r.center_pde, &r.chi_reduced, &r.beta_pde, &r.beta_reduced})
      for (double x : *v) {
        std::snprintf(buf, sizeof buf, ",%.17g", x);
        out += buf;
      }
    for (double x : {r.center_error, r.beta_error, r.mass, r.energy}) {
      std::snprintf(buf, sizeof buf, ",%.17g", x);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

TrackReport track_vs_reduced(const GroundState& gs, const TrackConfig& cfg) {
  const int d = gs.dimension();
  if (!(cfg.t_end > 0.0) || !(cfg.sample_every > 0.0) || !(cfg.dt > 0.0))
    fail(ErrorCode::invalid_argument, "t_end, sample_every and dt must be positive");
  const long per_sample = std::lround(cfg.sample_every / cfg.dt);
  if (per_sample < 1 || std::abs(per_sample * cfg.dt - cfg.sample_every) > 1e-9 * cfg.sample_every)
    fail(ErrorCode::invalid_argument, "sample_every must be a multiple of dt");
  const long samples = std::lround(cfg.t_end / cfg.sample_every);

  const ReducedState& seed = cfg.seed;
  const TailProfile prof = u_profile(cfg.potential, gs, seed.lambda);
  IntegrateOptions io;
  for (long k = 1; k < samples; ++k) io.sample_times.push_back(seed.t + k * cfg.sample_every);
  const Trajectory red = integrate(seed, prof, gs, samples * cfg.sample_every, io);

  CorrectionField t1;
  const CorrectionField* w1 = nullptr;
  if (cfg.first_order) {
    const double chi = seed.chi.at(0);
    t1 = solve_t1(cfg.potential, gs, chi, seed.lambda);
    w1 = &t1;
  }
  NlsOptions no;
  no.dt = cfg.dt;
  SplitStepSolver solver(init_soliton(gs, seed, cfg.n, cfg.L_box, w1), cfg.potential, gs.exponent(), no);

  TrackReport rep;
  double e0 = 0.0, m0 = 0.0, sum = 0.0;
  for (long k = 0; k <= samples; ++k) {
    if (k > 0) solver.advance(per_sample);
    const Diagnostics g = solver.diagnostics();
    if (k == 0) {
      m0 = g.mass;
      e0 = g.energy;
    }
    const TrajectorySample& rs = red.samples.at(k);
    TrackRow row;
    row.t = seed.t + k * cfg.sample_every;
    row.center_pde = g.center;
    row.chi_reduced = rs.chi;
    row.beta_pde = g.beta;
    row.beta_reduced = rs.beta;
    double ce = 0.0, be = 0.0;
    for (int i = 0; i < d; ++i) {
      ce += (g.center[i] - rs.chi[i]) * (g.center[i] - rs.chi[i]);
      be += (g.beta[i] - rs.beta[i]) * (g.beta[i] - rs.beta[i]);
    }
    row.center_error = std::sqrt(ce);
    row.beta_error = std::sqrt(be);
    row.mass = g.mass;
    row.energy = g.energy;
    rep.max_center_error = std::max(rep.max_center_error, row.center_error);
    rep.max_beta_error = std::max(rep.max_beta_error, row.beta_error);
    rep.mass_drift = std::max(rep.mass_drift, std::abs(g.mass - m0) / m0);
    rep.energy_drift = std::max(rep.energy_drift, std::abs(g.energy - e0) / std::max(1e-300, std::abs(e0)));
    sum += row.center_error;
    rep.rows.push_back(std::move(row));
  }
  rep.mean_center_error = sum / rep.rows.size();
  rep.final_state = solver.state();
  return rep;
}

}  // namespace sollab
