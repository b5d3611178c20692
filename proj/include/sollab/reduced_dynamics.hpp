#pragma once

#include <string>
#include <vector>

#include "sollab/groundstate.hpp"
#include "sollab/interaction.hpp"
#include "sollab/potentials.hpp"

namespace sollab {

struct ReducedState {
  double t = 0.0;
  std::vector<double> chi;
  std::vector<double> beta;
  double lambda = 1.0;
  double gamma = 0.0;
};

enum class Regime { hyperbolic, parabolic, trapped };
std::string to_string(Regime r);

// Central-force potential energy per unit "mass" seen by chi: Phi(r) = 2 U(r / lambda) / ||Q||^2,
// so that chi'' = grad Phi and E0 = |chi'|^2 / 2 - Phi.
double effective_potential(const TailProfile& profile, double r);
double effective_force(const TailProfile& profile, double r);  // d Phi / dr

double energy_e0(const ReducedState& s, const TailProfile& profile, const GroundState& gs);
double angular_momentum(const ReducedState& s);  // |chi x chi'|, zero in d = 1
Regime classify_regime(double e0, double tol);

// gamma' = -1/lambda^2 + |beta|^2 + B . chi
double gamma_rate(const ReducedState& s, const std::vector<double>& B);

struct TrajectorySample {
  double t = 0.0;
  std::vector<double> chi, beta;
  double gamma = 0.0, e0 = 0.0, mu = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  ReducedState final_state;
  double max_energy_drift = 0.0;  // max |E0(t) - E0(0)| over accepted steps
  double max_mu_drift = 0.0;
  long accepted_steps = 0;

  std::string csv() const;
};

struct IntegrateOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  std::vector<double> sample_times;  // absolute times inside the run; start and end are always kept
};

Trajectory integrate(const ReducedState& s0, const TailProfile& profile, const GroundState& gs, double horizon,
                     const IntegrateOptions& opts = {});

struct SeedOptions {
  double e0 = 0.0;               // hyperbolic energy
  double mu = 0.0;               // parabolic angular momentum r^2 phi'
  std::vector<double> tangent;   // unit vector orthogonal to the direction, used when mu != 0
};

// State at t = T0 on the asymptotic branch escaping to infinity along theta0.
ReducedState seed_from_infinity(Regime regime, const TailProfile& profile, const GroundState& gs, double lambda_inf,
                                const std::vector<double>& theta0, double T0, const SeedOptions& opts = {});

// Parabolic arrival time t(r) = int_{r_v}^{r} dr / sqrt(2 Phi - mu^2 / r^2) with t(r_v) = 0.
double parabolic_time(const TailProfile& profile, double mu, double r);

// Growth constant of the parabolic radius r ~ K ln t for fast tails.
double k_of_v(const TailClass& tail);

}  // namespace sollab
