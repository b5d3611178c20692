#pragma once

#include <string>
#include <vector>

#include "sollab/groundstate.hpp"
#include "sollab/potentials.hpp"

namespace sollab {

enum class ProfileBranch {
  vanishing,  // V identically zero
  plus_subexp,
  plus_linear,
  minus_d4,
  minus_d23_integrable,
  minus_d23_nonintegrable,
  slow_v2,
};

std::string to_string(ProfileBranch b);

struct JQuadOptions {
  double rel_tol = 1e-10;
  double inner_rel_tol = 1e-12;
  double reach = 40.0;  // how far past the soliton core and the potential core to integrate
  int max_intervals = 4000;
};

// Interaction integral J(chi) = int V(|y + chi|) grad(Q^2)(y) dy; parallel to chi.
std::vector<double> j_quadrature(const PotentialSpec& v, const GroundState& gs, const std::vector<double>& chi,
                                 const JQuadOptions& opts = {});
// Signed scalar J . chi/|chi| as a function of |chi|.
double j_radial(const PotentialSpec& v, const GroundState& gs, double xi, const JQuadOptions& opts = {});

struct ProfileOptions {
  double validity_radius = 10.0;
  double limit_window_lo = 50.0;  // window for lim H' and integrability tests
  double limit_window_hi = 100.0;
  double undecidable_lo = 0.02;   // a = lim H' inside [lo, hi] cannot be called zero or positive
  double undecidable_hi = 0.1;
};

// Effective potential U(xi) felt by the soliton centre, xi = |chi| / lambda,
// normalised so that J(chi) ~ -chi/|chi| U'(|chi|).
class TailProfile {
 public:
  ProfileBranch branch() const { return branch_; }
  double lambda() const { return lambda_; }
  int dimension() const { return d_; }
  double validity_radius() const { return validity_radius_; }
  double mass_sq() const { return mass_sq_; }
  // Branch constant: K (plus_linear, slow_v2), I_V (minus integrable) or 0.
  double constant() const { return constant_; }
  double slope_limit() const { return slope_a_; }  // lim H' for fast plus tails
  const std::string& note() const { return note_; }
  const PotentialSpec& potential() const { return v_; }  // already rescaled by lambda

  double U(double xi) const;
  double U_prime(double xi) const;

  static double upsilon(int d);  // int_0^inf exp(-2 eta^2) eta^(d-2) d eta

 private:
  friend TailProfile u_profile(const PotentialSpec&, const GroundState&, double, const ProfileOptions&);
  double c_integral(double xi) const;

  ProfileBranch branch_ = ProfileBranch::vanishing;
  PotentialSpec v_;
  int d_ = 1;
  double lambda_ = 1.0;
  double validity_radius_ = 10.0;
  double mass_sq_ = 0.0;
  double amp2_ = 0.0;  // tail amplitude squared
  double constant_ = 0.0;
  double slope_a_ = 0.0;
  std::string note_;
};

TailProfile u_profile(const PotentialSpec& v, const GroundState& gs, double lambda, const ProfileOptions& opts = {});

struct AsymptoticJ {
  std::vector<double> value;
  double remainder_bound = 0.0;  // slow tails only; 0 otherwise
  bool below_validity = false;
};

// Leading-order J at chi (in the profile's rescaled units).
AsymptoticJ asymptotic_j(const TailProfile& profile, const std::vector<double>& chi);

// Soliton-potential overlap scale.
double theta(const PotentialSpec& v, const GroundState& gs, double xi);

// Speed modulation coefficient B = -J_lambda(chi/lambda) / (lambda ||Q||^2).
std::vector<double> b_modulation(const PotentialSpec& v, const GroundState& gs, const std::vector<double>& chi,
                                 double lambda, const JQuadOptions& opts = {});

// CSV rows "chi_norm,J_quad,J_asym,rel_err" for a batch of chi vectors.
std::string j_batch_csv(const PotentialSpec& v, const GroundState& gs, double lambda,
                        const std::vector<std::vector<double>>& chis);

}  // namespace sollab
