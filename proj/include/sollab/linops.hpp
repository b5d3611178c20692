#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sollab/groundstate.hpp"
#include "sollab/potentials.hpp"

namespace sollab {

// Uniform interior nodes x_i = -L + (i + 1) h of [-L, L] with Dirichlet ends.
struct Grid1D {
  double L = 30.0;
  double h = 0.02;

  int size() const;
  double x(int i) const { return -L + (i + 1) * h; }
  Eigen::VectorXd nodes() const;
  double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return h * a.dot(b); }
};

enum class OperatorKind { Lplus, Lminus, LplusV, LminusV };
std::string to_string(OperatorKind k);

// -D2 + 1 - c Q^(p-1) [- lambda^2 V(|y + chi/lambda|)] with second-order differences
// (c = p for L+, c = 1 for L-). V is the unscaled potential; the perturbation is
// lambda^2 V(|lambda y + chi|).
class DiscretizedOperator {
 public:
  DiscretizedOperator(OperatorKind kind, const GroundState& gs, const Grid1D& grid, const PotentialSpec* v = nullptr,
                      double chi = 0.0, double lambda = 1.0);

  OperatorKind kind() const { return kind_; }
  const Grid1D& grid() const { return grid_; }
  const Eigen::SparseMatrix<double>& matrix() const { return m_; }
  const Eigen::VectorXd& diagonal_potential() const { return pot_; }  // everything except -D2
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return m_ * u; }
  // Same operator with the fourth-order Laplacian stencil, on nodes at least two from the ends.
  Eigen::VectorXd apply_fourth_order(const Eigen::VectorXd& u) const;

 private:
  OperatorKind kind_;
  Grid1D grid_;
  Eigen::VectorXd pot_;
  Eigen::SparseMatrix<double> m_;
};

// Samples of Q, Q', Lambda Q on the grid.
Eigen::VectorXd sample_q(const GroundState& gs, const Grid1D& g);
Eigen::VectorXd sample_q_prime(const GroundState& gs, const Grid1D& g);
Eigen::VectorXd sample_lambda_q(const GroundState& gs, const Grid1D& g);

struct IdentityReport {
  int d = 1;
  double p = 3.0;
  double h = 0.0;
  double kernel = 0.0;      // max |L+ Q'|
  double lambda_q = 0.0;    // max |L+ Lambda Q + 2 Q|
  double l_plus_q = 0.0;    // max |L+ Q + (p - 1)(-Delta + 1) Q|
  double inner = 0.0;       // (Lambda Q, Q)
  double inner_expected = 0.0;
  double inner_rel_err = 0.0;  // relative to ||Q||^2
};

// d = 1 on the Dirichlet grid; d >= 2 on the radial grid r in [1, L] (the l = 1 operator for the kernel).
IdentityReport identity_suite(const GroundState& gs, double h, double L = 30.0);

enum class FieldOrder { T0, T1, T2 };

struct CorrectionField {
  FieldOrder order = FieldOrder::T1;
  Grid1D grid;
  Eigen::VectorXd values;
  std::vector<double> B1;    // T1 only
  double M1 = 0.0;           // T2 only
  double multiplier = 0.0;   // Lagrange multiplier of the bordered solve
  double residual = 0.0;     // max-norm PDE residual (fourth-order stencil for solved fields)
  double constraint = 0.0;   // |(T, grad Q)| for T1, |(T, Q)| for T2
  double decay_rate = 0.0;   // fitted eta in |T| ~ e^(-eta |y|)

  double at(double y) const;  // linear interpolation, zero outside the grid
};

struct LinopsOptions {
  double h = 0.02;
  double L = 30.0;
  double validity_radius = 10.0;  // lower bound on |chi| / lambda
  double fd_delta = 1e-3;         // step for grad_chi T1
};

// T0 = -lambda^2 V(|chi/lambda|) Lambda Q / 2 with V = V_lambda; residual against L+ T0 = lambda^2 V Q.
CorrectionField t0_explicit(const PotentialSpec& v, const GroundState& gs, double chi, double lambda,
                            const LinopsOptions& opts = {});

// (L+ - lambda^2 V(|y + chi/lambda|)) T1 = -lambda^3 B1 y Q + lambda^2 V(|y + chi/lambda|) Q, (T1, Q') = 0.
CorrectionField solve_t1(const PotentialSpec& v, const GroundState& gs, double chi, double lambda,
                         const LinopsOptions& opts = {});

// M1 = 2 lambda / (Lambda Q, Q) (beta d_chi T1, Q), with d_chi T1 by central differences.
double m1_modulation(const PotentialSpec& v, const GroundState& gs, double chi, double beta, double lambda,
                     const LinopsOptions& opts = {});

// (L- - lambda^2 V) T2 = -lambda M1 Lambda Q + 2 lambda^2 beta d_chi T1, (T2, Q) = 0.
CorrectionField solve_t2(const PotentialSpec& v, const GroundState& gs, double chi, double beta, double lambda,
                         const LinopsOptions& opts = {});

struct CoercivityReport {
  std::vector<double> l_plus;   // smallest eigenvalues of L+V on {Q, yQ}-perp
  std::vector<double> l_minus;  // smallest eigenvalues of L-V on {Lambda Q}-perp
  bool positive() const;
};

CoercivityReport coercivity(const PotentialSpec& v, const GroundState& gs, double chi, double lambda, int count = 4,
                            double h = 0.1, double L = 30.0);

struct ConditioningRow {
  double chi = 0.0;
  double min_abs_eig = 0.0;  // smallest |eigenvalue| of the bordered T1 matrix
  bool well_conditioned = false;
};

struct ConditioningReport {
  std::vector<ConditioningRow> rows;
  double c_v = -1.0;  // smallest ladder |chi| from which every row is well conditioned; -1 if none
};

ConditioningReport conditioning_scan(const PotentialSpec& v, const GroundState& gs, double lambda,
                                     const std::vector<double>& chis, double threshold = 1e-4,
                                     const LinopsOptions& opts = {});

// CSV "x,T0,T1,T2" on the T1 grid.
std::string field_csv(const CorrectionField& t0, const CorrectionField& t1, const CorrectionField& t2);
// JSON report: residuals, constraint values, B1, M1, decay rate.
std::string field_report_json(const CorrectionField& t0, const CorrectionField& t1, const CorrectionField& t2);

}  // namespace sollab
