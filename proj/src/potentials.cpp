#include "sollab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sollab/error.hpp"

namespace sollab {

std::string to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::zero: return "zero";
    case PotentialFamily::exp_sqrt: return "exp_sqrt";
    case PotentialFamily::power_law: return "power_law";
    case PotentialFamily::exp_linear_tail: return "exp_linear_tail";
    case PotentialFamily::tabulated: return "tabulated";
  }
  return "unknown";
}

namespace {
void check_dim(int d) {
  if (d < 1 || d > 3) fail(ErrorCode::invalid_argument, "potential dimension must be 1, 2 or 3");
}
}  // namespace

PotentialSpec PotentialSpec::zero(int d) {
  check_dim(d);
  PotentialSpec v;
  v.d_ = d;
  return v;
}

PotentialSpec PotentialSpec::exp_sqrt(int d, double C, double c) {
  check_dim(d);
  if (!(c > 0.0)) fail(ErrorCode::invalid_argument, "exp_sqrt needs c > 0");
  PotentialSpec v;
  v.family_ = PotentialFamily::exp_sqrt;
  v.d_ = d;
  v.amp_ = C;
  v.alpha_ = c;
  v.c_param_ = c;
  return v;
}

PotentialSpec PotentialSpec::power_law(int d, double C, double rho) {
  check_dim(d);
  if (!(rho > 0.0)) fail(ErrorCode::invalid_argument, "power_law needs rho > 0");
  PotentialSpec v;
  v.family_ = PotentialFamily::power_law;
  v.d_ = d;
  v.amp_ = C;
  v.gamma_ = rho;
  v.rho_ = rho;
  return v;
}

PotentialSpec PotentialSpec::exp_linear_tail(int d, double kappa, TailSign sign, double a) {
  check_dim(d);
  if (!(a >= 0.0)) fail(ErrorCode::invalid_argument, "exp_linear_tail needs a >= 0");
  if (sign == TailSign::plus && !(a < 2.0))
    fail(ErrorCode::invalid_argument, "exp_linear_tail with plus sign needs a < 2 to decay");
  PotentialSpec v;
  v.family_ = PotentialFamily::exp_linear_tail;
  v.d_ = d;
  v.amp_ = kappa;
  v.sign_ = sign;
  v.a_ = a;
  v.alpha_ = sign == TailSign::plus ? 2.0 - a : 2.0 + a;
  v.gamma_ = d - 1;
  return v;
}

PotentialSpec PotentialSpec::tabulated(int d, std::vector<double> r, std::vector<double> val) {
  check_dim(d);
  if (r.size() != val.size() || r.size() < 4)
    fail(ErrorCode::invalid_argument, "tabulated potential needs at least 4 matching samples");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(val[i] > 0.0)) fail(ErrorCode::invalid_argument, "tabulated samples must be positive");
    if (i > 0 && !(r[i] > r[i - 1])) fail(ErrorCode::invalid_argument, "tabulated radii must increase");
  }
  PotentialSpec v;
  v.family_ = PotentialFamily::tabulated;
  v.d_ = d;
  v.amp_ = 1.0;
  v.tr_ = std::move(r);
  const std::size_t n = v.tr_.size();
  v.tlog_.resize(n);
  for (std::size_t i = 0; i < n; ++i) v.tlog_[i] = std::log(val[i]);
  // Fritsch-Carlson slopes keep the interpolant monotone.
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    delta[i] = (v.tlog_[i + 1] - v.tlog_[i]) / (v.tr_[i + 1] - v.tr_[i]);
  v.tslope_.assign(n, 0.0);
  v.tslope_[0] = delta[0];
  v.tslope_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    const double h0 = v.tr_[i] - v.tr_[i - 1], h1 = v.tr_[i + 1] - v.tr_[i];
    const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
    v.tslope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
  return v;
}

double PotentialSpec::tab_log(double x, double* slope) const {
  const std::size_t n = tr_.size();
  if (x <= tr_.front()) {
    if (slope) *slope = tslope_.front();
    return tlog_.front() + tslope_.front() * (x - tr_.front());
  }
  if (x >= tr_.back()) {
    if (slope) *slope = tslope_.back();
    return tlog_.back() + tslope_.back() * (x - tr_.back());
  }
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(tr_.begin(), tr_.end(), x) - tr_.begin()) - 1;
  const double h = tr_[i + 1] - tr_[i];
  const double t = (x - tr_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double y0 = tlog_[i], y1 = tlog_[i + 1], m0 = tslope_[i], m1 = tslope_[std::min(i + 1, n - 1)];
  if (slope)
    *slope = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * m0 + (-6 * t2 + 6 * t) * y1 +
              (3 * t2 - 2 * t) * h * m1) / h;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1;
}

void PotentialSpec::log_derivs(double x, double f[4]) const {
  const double s2 = 1.0 + x * x;
  const double s = std::sqrt(s2);
  const double sp = x / s, spp = 1.0 / (s2 * s), sppp = -3.0 * x / (s2 * s2 * s);
  const double L = 0.5 * std::log1p(x * x);
  const double Lp = x / s2, Lpp = (1.0 - x * x) / (s2 * s2), Lppp = (2.0 * x * x * x - 6.0 * x) / (s2 * s2 * s2);
  f[0] = -alpha_ * s - gamma_ * L;
  f[1] = -alpha_ * sp - gamma_ * Lp;
  f[2] = -alpha_ * spp - gamma_ * Lpp;
  f[3] = -alpha_ * sppp - gamma_ * Lppp;
}

double PotentialSpec::value(double r, int k) const {
  if (k < 0 || k > 3) fail(ErrorCode::unsupported_order, "derivative order must be 0..3");
  if (family_ == PotentialFamily::tabulated && k > 1)
    fail(ErrorCode::unsupported_order, "tabulated potentials provide derivatives up to order 1");
  if (is_zero()) return 0.0;
  const double x = lambda_ * std::abs(r);
  const double scale = std::pow(lambda_, k);
  if (family_ == PotentialFamily::tabulated) {
    double slope = 0.0;
    const double v = std::exp(tab_log(x, &slope));
    return k == 0 ? v : scale * v * slope;
  }
  double f[4];
  log_derivs(x, f);
  const double v = amp_ * std::exp(f[0]);
  switch (k) {
    case 0: return v;
    case 1: return scale * v * f[1];
    case 2: return scale * v * (f[2] + f[1] * f[1]);
    default: return scale * v * (f[3] + 3.0 * f[1] * f[2] + f[1] * f[1] * f[1]);
  }
}

double PotentialSpec::log_value(double r) const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  const double x = lambda_ * std::abs(r);
  if (family_ == PotentialFamily::tabulated) return tab_log(x, nullptr);
  double f[4];
  log_derivs(x, f);
  return std::log(std::abs(amp_)) + f[0];
}

double PotentialSpec::log_abs_derivative(double r, int k) const {
  if (k < 0 || k > 2) fail(ErrorCode::unsupported_order, "log derivative order must be 0..2");
  if (family_ == PotentialFamily::tabulated && k > 1)
    fail(ErrorCode::unsupported_order, "tabulated potentials provide derivatives up to order 1");
  const double x = lambda_ * std::abs(r);
  double f[4] = {0, 0, 0, 0};
  if (family_ == PotentialFamily::tabulated)
    tab_log(x, &f[1]);
  else
    log_derivs(x, f);
  const double factor = k == 0 ? 1.0 : (k == 1 ? f[1] : f[2] + f[1] * f[1]);
  return log_value(r) + std::log(std::abs(factor)) + k * std::log(lambda_);
}

double PotentialSpec::sup() const {
  if (is_zero()) return 0.0;
  if (family_ == PotentialFamily::tabulated) return std::exp(*std::max_element(tlog_.begin(), tlog_.end()));
  return std::max(0.0, value(0.0));
}

double PotentialSpec::tail_start() const {
  // V'' of exp_sqrt(c = 1) is monotone only past r = 1.57, so every family starts its tail at 2.
  return 2.0 / lambda_;
}

PotentialSpec PotentialSpec::rescaled(double lambda) const {
  if (!(lambda > 0.0)) fail(ErrorCode::invalid_argument, "rescaling factor must be positive");
  PotentialSpec v = *this;
  v.lambda_ *= lambda;
  return v;
}

nlohmann::json PotentialSpec::to_json() const {
  nlohmann::json params = nlohmann::json::object();
  switch (family_) {
    case PotentialFamily::zero: break;
    case PotentialFamily::exp_sqrt: params = {{"C", amp_}, {"c", c_param_}}; break;
    case PotentialFamily::power_law: params = {{"C", amp_}, {"rho", rho_}}; break;
    case PotentialFamily::exp_linear_tail:
      params = {{"kappa", amp_}, {"sign", sign_ == TailSign::plus ? "+" : "-"}, {"a", a_}};
      break;
    case PotentialFamily::tabulated: {
      std::vector<double> v(tlog_.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(tlog_[i]);
      params = {{"r", tr_}, {"V", v}};
      break;
    }
  }
  nlohmann::json j = {{"family", to_string(family_)}, {"params", params}, {"d", d_}};
  if (lambda_ != 1.0) j["lambda"] = lambda_;
  return j;
}

PotentialSpec PotentialSpec::from_json(const nlohmann::json& j) {
  auto need = [&](const nlohmann::json& obj, const char* key) -> const nlohmann::json& {
    if (!obj.is_object() || !obj.contains(key))
      fail(ErrorCode::config_invalid, std::string("potential descriptor is missing field '") + key + "'");
    return obj.at(key);
  };
  try {
    const std::string fam = need(j, "family").get<std::string>();
    const int d = need(j, "d").get<int>();
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    PotentialSpec v;
    if (fam == "zero") {
      v = zero(d);
    } else if (fam == "exp_sqrt") {
      v = exp_sqrt(d, need(params, "C").get<double>(), need(params, "c").get<double>());
    } else if (fam == "power_law") {
      v = power_law(d, need(params, "C").get<double>(), need(params, "rho").get<double>());
    } else if (fam == "exp_linear_tail") {
      const std::string s = need(params, "sign").get<std::string>();
      if (s != "+" && s != "-") fail(ErrorCode::config_invalid, "potential field 'params.sign' must be \"+\" or \"-\"");
      v = exp_linear_tail(d, need(params, "kappa").get<double>(), s == "+" ? TailSign::plus : TailSign::minus,
                          need(params, "a").get<double>());
    } else if (fam == "tabulated") {
      v = tabulated(d, need(params, "r").get<std::vector<double>>(), need(params, "V").get<std::vector<double>>());
    } else {
      fail(ErrorCode::config_invalid, "potential field 'family' has unknown value '" + fam + "'");
    }
    if (j.contains("lambda")) v = v.rescaled(j.at("lambda").get<double>());
    return v;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::config_invalid, std::string("potential descriptor: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_invalid) throw;
    fail(ErrorCode::config_invalid, std::string("potential descriptor: ") + e.what());
  }
}

TailClass classify_tail(const PotentialSpec& v) {
  TailClass tc;
  tc.d = v.dimension();
  tc.r0 = v.tail_start();
  const int d = tc.d;
  const double lam = v.scale();
  if (v.is_zero()) {
    tc.kind = TailKind::fast;
    tc.sign = TailSign::minus;
    tc.H = [](double) { return std::numeric_limits<double>::infinity(); };
    tc.H_prime = [](double) { return 0.0; };
    return tc;
  }

  bool fast = false;
  switch (v.family()) {
    case PotentialFamily::exp_sqrt:
      fast = true;
      tc.sign = v.alpha() <= 2.0 ? TailSign::plus : TailSign::minus;
      break;
    case PotentialFamily::exp_linear_tail:
      fast = true;
      tc.sign = v.declared_sign();
      break;
    case PotentialFamily::power_law:
      fast = false;
      break;
    case PotentialFamily::tabulated: {
      // ln V ~ c0 - sigma r - g ln r on the far half of the samples (in rescaled units).
      tc.low_confidence = true;
      const double r_hi = 1e3 / lam;
      const double r_lo = 0.5 * r_hi;
      double s = 0, sr = 0, sl = 0, srr = 0, sll = 0, srl = 0, sy = 0, sry = 0, sly = 0;
      const int m = 50;
      for (int i = 0; i <= m; ++i) {
        const double r = r_lo + (r_hi - r_lo) * i / m;
        const double l = std::log(r), y = v.log_value(r);
        s += 1; sr += r; sl += l; srr += r * r; sll += l * l; srl += r * l; sy += y; sry += r * y; sly += l * y;
      }
      // Normal equations for (c0, -sigma, -g), solved by Cramer's rule.
      const double A[3][3] = {{s, sr, sl}, {sr, srr, srl}, {sl, srl, sll}};
      const double b[3] = {sy, sry, sly};
      auto det3 = [](const double M[3][3]) {
        return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
               M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
      };
      double M[3][3];
      std::copy(&A[0][0], &A[0][0] + 9, &M[0][0]);
      for (int i = 0; i < 3; ++i) M[i][1] = b[i];
      const double sigma = -det3(M) / det3(A);
      fast = sigma > 0.1 * lam;
      tc.sign = sigma <= 2.0 ? TailSign::plus : TailSign::minus;
      break;
    }
    case PotentialFamily::zero: break;
  }

  if (!fast) {
    tc.kind = TailKind::slow;
    const PotentialSpec vc = v;
    if (v.family() == PotentialFamily::power_law) {
      // h = (rho/2) ln(1 + (lam r)^2) - ln C, differentiated in closed form.
      const double rho = v.gamma();
      const double C = v.amplitude();
      tc.h = [rho, C, lam](double r, int k) {
        const double x = lam * r, s2 = 1.0 + x * x;
        switch (k) {
          case 0: return 0.5 * rho * std::log1p(x * x) - std::log(C);
          case 1: return lam * rho * x / s2;
          case 2: return lam * lam * rho * (1.0 - x * x) / (s2 * s2);
          default: return lam * lam * lam * rho * (2.0 * x * x * x - 6.0 * x) / (s2 * s2 * s2);
        }
      };
    } else {
      tc.h = [vc](double r, int k) {
        if (k == 0) return -vc.log_value(r);
        if (k == 1) return -vc.value(r, 1) / vc.value(r, 0);
        fail(ErrorCode::unsupported_order, "tabulated slow tails provide h' only");
      };
    }
    return tc;
  }

  tc.kind = TailKind::fast;
  const double sgn = tc.sign == TailSign::plus ? 1.0 : -1.0;
  const PotentialSpec vc = v;
  const double base_kappa = v.amplitude();
  const double log_abs_kappa0 = std::log(std::abs(base_kappa));
  auto H_raw = [vc, d, sgn, log_abs_kappa0](double r) {
    return sgn * (vc.log_value(r) - log_abs_kappa0 + 2.0 * r + (d - 1) * std::log(r));
  };
  // Normalise kappa so that sign * H(r0) >= 0 with H(r0) = 0 when a shift is needed.
  const double h0 = H_raw(tc.r0);
  const double shift = h0 < 0.0 ? h0 : 0.0;
  tc.kappa = (base_kappa < 0 ? -1.0 : 1.0) * std::exp(log_abs_kappa0 + sgn * shift);
  tc.H = [H_raw, shift](double r) { return H_raw(r) - shift; };
  tc.H_prime = [vc, d, sgn](double r) {
    double dlog;
    if (vc.family() == PotentialFamily::tabulated)
      dlog = vc.value(r, 1) / vc.value(r, 0);
    else {
      // d/dr ln V without forming V (which may underflow).
      const double x = vc.scale() * r, s2 = 1.0 + x * x;
      dlog = vc.scale() * (-vc.alpha() * x / std::sqrt(s2) - vc.gamma() * x / s2);
    }
    return sgn * (dlog + 2.0 + (d - 1) / r);
  };
  return tc;
}

double estimate_n0(const PotentialSpec& v) {
  if (v.is_zero() || v.family() == PotentialFamily::tabulated) return std::numeric_limits<double>::quiet_NaN();
  const double r1 = 1e3 / v.scale(), r2 = 1e4 / v.scale();
  const double num = v.log_abs_derivative(r2, 2) - v.log_abs_derivative(r1, 2);
  const double den = v.log_value(r2) - v.log_value(r1);
  return num / den;
}

}  // namespace sollab
