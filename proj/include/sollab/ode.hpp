#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace sollab {

using OdeRhs = std::function<void(double t, const double* y, double* dydt)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_init = 0.0;  // 0 selects a starting step automatically
  double h_max = 0.0;   // 0 means unbounded
  long max_steps = 50'000'000;
};

// One accepted step; the dense interpolant is valid on [t_old, t].
class StepView {
 public:
  double t_old = 0.0;
  double t = 0.0;
  const std::vector<double>& y() const { return *y_; }
  void dense(double s, std::vector<double>& out) const;
  double dense(double s, std::size_t component) const;

 private:
  friend class Dopri5;
  const std::vector<double>* y_ = nullptr;
  const std::vector<double>* rcont_ = nullptr;
  std::size_t n_ = 0;
};

// Dormand-Prince 5(4) pair with the standard fourth-order continuous extension.
class Dopri5 {
 public:
  using Observer = std::function<bool(const StepView&)>;

  Dopri5(std::size_t n, OdeRhs rhs, OdeOptions opts = {});

  // Advances (t, y) to t_end (either direction). On return t and y hold the last
  // accepted state, also when the observer stops early or an error is thrown.
  // Returns false if the observer requested a stop.
  bool integrate(double& t, std::vector<double>& y, double t_end, const Observer& observer = {});

  long accepted_steps() const { return accepted_; }
  long rejected_steps() const { return rejected_; }

 private:
  double initial_step(double t, const std::vector<double>& y, double dir);

  std::size_t n_;
  OdeRhs rhs_;
  OdeOptions opts_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, rcont_;
  long accepted_ = 0;
  long rejected_ = 0;
};

}  // namespace sollab
