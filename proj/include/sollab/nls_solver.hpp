#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "sollab/groundstate.hpp"
#include "sollab/linops.hpp"
#include "sollab/potentials.hpp"
#include "sollab/reduced_dynamics.hpp"

namespace sollab {

using cplx = std::complex<double>;

// Periodic grid [-L_box, L_box)^d with n points per axis, row-major (first axis slowest).
struct FieldState {
  int d = 1;
  int n = 0;
  double L_box = 0.0;
  double t = 0.0;
  std::vector<cplx> u;

  double dx() const { return 2.0 * L_box / n; }
  double coord(int i) const { return -L_box + i * dx(); }
  std::size_t size() const { return u.size(); }
};

// u = lambda^(-2/(p-1)) W((x - chi)/lambda) e^(-i gamma) e^(i beta.x), W = Q or, in d = 1, Q + T1.
FieldState init_soliton(const GroundState& gs, const ReducedState& xi, int n, double L_box,
                        const CorrectionField* t1 = nullptr);

struct Diagnostics {
  double mass = 0.0;
  double energy = 0.0;
  std::vector<double> center;
  std::vector<double> momentum;
  std::vector<double> beta;  // momentum / mass
};

// E = 1/2 int |grad u|^2 - 1/2 int V |u|^2 - 1/(p+1) int |u|^(p+1); the nonlinear term is dropped
// when nonlinear is false.
Diagnostics diagnostics(const FieldState& s, const PotentialSpec& v, double p, bool nonlinear = true);

struct NlsOptions {
  double dt = 1e-3;
  double max_dt = 0.05;        // stability budget
  bool nonlinear = true;
  int checkpoint_every = 100;  // steps between saved states used on nan-detected
};

// Strang splitting for i u_t + Delta u + V u + |u|^(p-1) u = 0: half kinetic step in Fourier
// space, full pointwise phase rotation, half kinetic step. Consecutive half steps are merged.
class SplitStepSolver {
 public:
  SplitStepSolver(FieldState init, const PotentialSpec& v, double p, const NlsOptions& opts = {});
  ~SplitStepSolver();
  SplitStepSolver(const SplitStepSolver&) = delete;
  SplitStepSolver& operator=(const SplitStepSolver&) = delete;

  void advance(long steps);
  void set_dt(double dt);
  double dt() const { return opts_.dt; }
  const FieldState& state() const { return s_; }
  Diagnostics diagnostics() const;

 private:
  struct Plans;
  void kinetic(bool half);
  void potential_phase();
  bool finite() const;

  FieldState s_;
  PotentialSpec v_;
  double p_;
  NlsOptions opts_;
  std::vector<double> k2_;
  std::vector<double> vx_;
  std::vector<cplx> phase_full_, phase_half_;
  std::unique_ptr<Plans> plans_;
};

FieldState step(const FieldState& s, const PotentialSpec& v, double p, double dt, const NlsOptions& opts = {});

// Time series "t,mass,energy,center_1..,momentum_1.."
std::string diagnostics_csv_header(int d);
std::string diagnostics_csv_row(double t, const Diagnostics& g);

// Header line "d,N,L_box,t" then little-endian float64 (re, im) pairs, row-major.
void write_snapshot(const FieldState& s, const std::string& path);
FieldState read_snapshot(const std::string& path);

struct TrackConfig {
  PotentialSpec potential = PotentialSpec::zero(1);
  ReducedState seed;  // reduced state at the start of the run (t = seed.t)
  int n = 4096;
  double L_box = 80.0;
  double dt = 1e-3;
  double t_end = 200.0;        // duration of the run
  double sample_every = 1.0;   // in time units
  bool first_order = false;    // W = Q + T1 instead of Q (d = 1)
};

struct TrackRow {
  double t = 0.0;
  std::vector<double> center_pde, chi_reduced;
  std::vector<double> beta_pde, beta_reduced;
  double center_error = 0.0;
  double beta_error = 0.0;
  double mass = 0.0, energy = 0.0;
};

struct TrackReport {
  std::vector<TrackRow> rows;
  double max_center_error = 0.0;
  double mean_center_error = 0.0;
  double max_beta_error = 0.0;
  double mass_drift = 0.0;    // relative
  double energy_drift = 0.0;  // relative
  FieldState final_state;

  std::string csv() const;
};

TrackReport track_vs_reduced(const GroundState& gs, const TrackConfig& cfg);

}  // namespace sollab
