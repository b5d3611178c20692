#include "sollab/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "sollab/error.hpp"
#include "sollab/groundstate.hpp"
#include "sollab/interaction.hpp"
#include "sollab/linops.hpp"
#include "sollab/nls_solver.hpp"
#include "sollab/potentials.hpp"
#include "sollab/reduced_dynamics.hpp"

namespace sollab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  fail(ErrorCode::config_invalid, "config field '" + field + "' " + why);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) bad(join(path, key), "is missing");
  return obj.at(key);
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) bad(field, "must be finite");
  return x;
}

double number(const json& obj, const std::string& path, const std::string& key) {
  return as_number(require(obj, path, key), join(path, key));
}

double number_or(const json& obj, const std::string& path, const std::string& key, double def) {
  return obj.contains(key) ? as_number(obj.at(key), join(path, key)) : def;
}

double positive_or(const json& obj, const std::string& path, const std::string& key, double def) {
  const double x = number_or(obj, path, key, def);
  if (!(x > 0.0)) bad(join(path, key), "must be positive");
  return x;
}

int integer(const json& obj, const std::string& path, const std::string& key) {
  const json& j = require(obj, path, key);
  if (!j.is_number_integer()) bad(join(path, key), "must be an integer");
  return j.get<int>();
}

bool flag_or(const json& obj, const std::string& path, const std::string& key, bool def) {
  if (!obj.contains(key)) return def;
  if (!obj.at(key).is_boolean()) bad(join(path, key), "must be true or false");
  return obj.at(key).get<bool>();
}

std::vector<double> vector_of(const json& j, const std::string& field, std::size_t dim) {
  if (!j.is_array()) bad(field, "must be an array of numbers");
  if (dim != 0 && j.size() != dim) bad(field, "must have " + std::to_string(dim) + " components");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

const json& object(const json& obj, const std::string& path, const std::string& key) {
  const json& j = require(obj, path, key);
  if (!j.is_object()) bad(join(path, key), "must be an object");
  return j;
}

struct GsParams {
  int d = 1;
  double p = 3.0, tol = 1e-10;
  GroundState solve() const { return solve_ground_state(d, p, tol); }
};

GsParams gs_params(const json& cfg) {
  const json& g = object(cfg, "", "gs");
  const int d = integer(g, "gs", "d");
  if (d < 1 || d > 3) bad("gs.d", "must be 1, 2 or 3");
  const double p = number(g, "gs", "p");
  if (!(p > 1.0)) bad("gs.p", "must exceed 1");
  if (d == 3 && !(p < 5.0)) bad("gs.p", "must be below 5 in d = 3");
  const double tol = positive_or(g, "gs", "tol", d == 2 ? 1e-8 : 1e-10);
  return {d, p, tol};
}

PotentialSpec potential(const json& cfg, const RunOptions& opts, int d) {
  const json& j = require(cfg, "", "potential");
  json desc = j;
  if (j.is_string()) {
    fs::path path = j.get<std::string>();
    if (path.is_relative()) path = opts.config_dir / path;
    std::ifstream in(path);
    if (!in) bad("potential", "refers to a file that cannot be read: " + path.string());
    try {
      desc = json::parse(in);
    } catch (const json::exception& e) {
      bad("potential", std::string("file is not valid JSON: ") + e.what());
    }
  } else if (!j.is_object()) {
    bad("potential", "must be a descriptor object or a file path");
  }
  PotentialSpec v;
  try {
    v = PotentialSpec::from_json(desc);
  } catch (const Error& e) {
    bad("potential", std::string("is invalid: ") + e.what());
  }
  if (v.dimension() != d) bad("potential.d", "must equal gs.d");
  return v;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

class Run {
 public:
  Run(std::string name, const RunOptions& opts) : opts_(opts) {
    res_.experiment = std::move(name);
  }

  void emit(const std::string& name, const std::string& bytes) {
    fs::create_directories(opts_.out_dir);
    write_atomic(opts_.out_dir / name, bytes);
    res_.files.push_back({name, bytes.size(), sha256_hex(bytes)});
  }

  void check_le(const std::string& name, double value, double limit) {
    res_.checks.push_back({name, std::isfinite(value) && value <= limit, value, limit});
  }
  void check(const std::string& name, bool ok, double value = 0.0, double limit = 0.0) {
    res_.checks.push_back({name, ok, value, limit});
  }

  const RunOptions& opts() const { return opts_; }

  ExperimentResult finish() {
    fs::create_directories(opts_.out_dir);
    const std::string m = res_.manifest().dump(2) + "\n";
    write_atomic(opts_.out_dir / "manifest.json", m);
    return res_;
  }

 private:
  RunOptions opts_;
  ExperimentResult res_;
};

void run_groundstate(const json& cfg, Run& run) {
  const GsParams gp = gs_params(cfg);
  const double max_shoot = positive_or(cfg.at("gs"), "gs", "max_shooting_residual", 1e-8);
  const GroundState gs = gp.solve();
  run.emit("profile.csv", gs.profile_csv());
  run.emit("constants.json", gs.constants_json());

  const double m = gs.mass_sq();
  run.check_le("shooting_residual", gs.shooting_residual(), max_shoot);
  run.check_le("mass_quadrature_agreement",
               std::abs(gs.mass_sq_trapezoid() - gs.mass_sq_simpson()) / gs.mass_sq_simpson(), 1e-6);
  const double expected = (2.0 / (gs.exponent() - 1.0) - 0.5 * gs.dimension()) * m;
  run.check_le("lambda_inner_identity", std::abs(gs.lambda_inner() - expected) / m, 1e-8);

  if (run.opts().seed_rng) {
    // The tail amplitude must not depend on where exactly the fit window sits.
    std::mt19937_64 rng(*run.opts().seed_rng);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    std::string csv = "window_lo,window_hi,amplitude\n";
    double lo_a = gs.tail_amplitude(), hi_a = lo_a;
    for (int k = 0; k < 8; ++k) {
      const double lo = 25.0 + jitter(rng), hi = 35.0 + jitter(rng);
      const TailFit f = fit_tail_amplitude(gs, lo, hi);
      lo_a = std::min(lo_a, f.amplitude);
      hi_a = std::max(hi_a, f.amplitude);
      csv += fmt("%.10g", lo) + "," + fmt("%.10g", hi) + "," + fmt("%.15e", f.amplitude) + "\n";
    }
    run.emit("tail_jitter.csv", csv);
    run.check_le("tail_amplitude_window_spread", (hi_a - lo_a) / gs.tail_amplitude(), 1e-4);
  }
}

void run_j_ladder(const json& cfg, Run& run) {
  const GsParams gp = gs_params(cfg);
  const int d = gp.d;
  const PotentialSpec v = potential(cfg, run.opts(), d);
  const double lambda = positive_or(cfg, "", "lambda", 1.0);
  const double tol = positive_or(cfg, "", "tolerance", 0.1);
  const json& lad = require(cfg, "", "ladder");
  if (!lad.is_array() || lad.empty()) bad("ladder", "must be a non-empty array");
  std::vector<std::vector<double>> chis;
  for (std::size_t k = 0; k < lad.size(); ++k) {
    const std::string field = "ladder[" + std::to_string(k) + "]";
    std::vector<double> chi(d, 0.0);
    if (lad[k].is_number()) {
      chi[0] = as_number(lad[k], field);
    } else {
      chi = vector_of(lad[k], field, d);
    }
    double n = 0.0;
    for (double c : chi) n += c * c;
    if (!(n > 0.0)) bad(field, "must be a nonzero separation");
    chis.push_back(chi);
  }

  const GroundState gs = gp.solve();
  const std::string csv = j_batch_csv(v, gs, lambda, chis);
  run.emit("j_ladder.csv", csv);

  std::vector<double> jq, rel;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    double xi = 0, a = 0, b = 0, r = 0;
    std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &xi, &a, &b, &r);
    jq.push_back(std::abs(a) + std::abs(b));
    rel.push_back(r);
  }
  if (v.is_zero()) {
    run.check_le("zero_potential_gives_zero_j", *std::max_element(jq.begin(), jq.end()), 0.0);
    return;
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < rel.size(); ++k) decreasing = decreasing && rel[k] <= rel[k - 1];
  run.check("rel_err_decreasing", decreasing);
  run.check_le("rel_err_last", rel.back(), tol);
}

void run_regime_sweep(const json& cfg, Run& run) {
  const GsParams gp = gs_params(cfg);
  const int d = gp.d;
  const PotentialSpec v = potential(cfg, run.opts(), d);
  const double lambda = positive_or(cfg, "", "lambda", 1.0);
  const double r0 = positive_or(cfg, "", "r0", 20.0);
  const double horizon = positive_or(cfg, "", "horizon", 1000.0);
  const double regime_tol = positive_or(cfg, "", "regime_tol", 1e-9);
  const double drift_tol = positive_or(cfg, "", "max_energy_drift", 1e-8);
  const json& ev = require(cfg, "", "e0_values");
  if (!ev.is_array() || ev.empty()) bad("e0_values", "must be a non-empty array");
  for (std::size_t k = 0; k < ev.size(); ++k) as_number(ev[k], "e0_values[" + std::to_string(k) + "]");

  const GroundState gs = gp.solve();
  const TailProfile prof = u_profile(v, gs, lambda);
  const double phi0 = effective_potential(prof, r0);
  std::vector<double> e0s;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    const std::string field = "e0_values[" + std::to_string(k) + "]";
    const double e = as_number(ev[k], field);
    if (e + phi0 < 0.0) bad(field, "is below -Phi(r0) = " + fmt("%.6g", -phi0) + ", no real launch speed");
    e0s.push_back(e);
  }

  std::string table = "case,E0,regime,r_start,r_end,r_max,energy_drift\n";
  bool drift_ok = true, shape_ok = true;
  double worst = 0.0;
  for (std::size_t k = 0; k < e0s.size(); ++k) {
    // Launch radially outward from r0 with the speed fixed by E0 = |chi'|^2/2 - Phi.
    ReducedState s;
    s.lambda = lambda;
    s.chi.assign(d, 0.0);
    s.beta.assign(d, 0.0);
    s.chi[0] = r0;
    s.beta[0] = 0.5 * std::sqrt(2.0 * (e0s[k] + phi0));
    const double e = energy_e0(s, prof, gs);
    const Regime regime = classify_regime(e, regime_tol * std::max(1.0, phi0));

    IntegrateOptions io;
    for (int i = 1; i < 200; ++i) io.sample_times.push_back(horizon * i / 200.0);
    const Trajectory tr = integrate(s, prof, gs, horizon, io);
    run.emit("trajectory_" + std::to_string(k) + ".csv", tr.csv());

    double r_max = 0.0, r_prev = 0.0;
    bool monotone = true;
    for (const auto& smp : tr.samples) {
      double r = 0.0;
      for (double c : smp.chi) r += c * c;
      r = std::sqrt(r);
      monotone = monotone && r >= r_prev;
      r_prev = r;
      r_max = std::max(r_max, r);
    }
    const double r_end = r_prev;
    const double drift = tr.max_energy_drift / std::max(1.0, std::abs(e));
    worst = std::max(worst, drift);
    drift_ok = drift_ok && drift <= drift_tol;
    // Unbounded regimes run away monotonically; a trapped orbit turns around before the horizon.
    if (regime == Regime::trapped)
      shape_ok = shape_ok && r_end < r_max;
    else
      shape_ok = shape_ok && monotone && r_end > r0;

    table += std::to_string(k) + "," + fmt("%.10g", e0s[k]) + "," + to_string(regime) + "," + fmt("%.10g", r0) + "," +
             fmt("%.10g", r_end) + "," + fmt("%.10g", r_max) + "," + fmt("%.3e", drift) + "\n";
  }
  run.emit("regime_sweep.csv", table);
  run.check_le("energy_drift", worst, drift_tol);
  run.check("trajectory_matches_regime", shape_ok);
}

ReducedState pde_seed(const json& sd, const PotentialSpec& v, const GroundState& gs) {
  const int d = gs.dimension();
  if (sd.contains("regime")) {
    const json& rj = sd.at("regime");
    const std::string r = rj.is_string() ? rj.get<std::string>() : "";
    Regime regime;
    if (r == "hyperbolic")
      regime = Regime::hyperbolic;
    else if (r == "parabolic")
      regime = Regime::parabolic;
    else
      bad("seed.regime", "must be \"hyperbolic\" or \"parabolic\"");
    const double lam = positive_or(sd, "seed", "lambda", 1.0);
    const double T0 = positive_or(sd, "seed", "T0", 50.0);
    std::vector<double> theta(d, 0.0);
    theta[0] = 1.0;
    if (sd.contains("theta")) theta = vector_of(sd.at("theta"), "seed.theta", d);
    SeedOptions so;
    if (regime == Regime::hyperbolic) so.e0 = positive_or(sd, "seed", "e0", 0.01);
    so.mu = number_or(sd, "seed", "mu", 0.0);
    if (sd.contains("tangent")) so.tangent = vector_of(sd.at("tangent"), "seed.tangent", d);
    const TailProfile prof = u_profile(v, gs, lam);
    return seed_from_infinity(regime, prof, gs, lam, theta, T0, so);
  }
  ReducedState s;
  s.chi = vector_of(require(sd, "seed", "chi"), "seed.chi", d);
  s.beta = vector_of(require(sd, "seed", "beta"), "seed.beta", d);
  s.lambda = positive_or(sd, "seed", "lambda", 1.0);
  s.gamma = number_or(sd, "seed", "gamma", 0.0);
  s.t = number_or(sd, "seed", "t", 0.0);
  return s;
}

void run_pde_track(const json& cfg, Run& run) {
  const GsParams gp = gs_params(cfg);
  const int d = gp.d;
  if (d > 2) bad("gs.d", "must be 1 or 2 for pde_track");
  TrackConfig tc;
  tc.potential = potential(cfg, run.opts(), d);
  const json& box = object(cfg, "", "box");
  tc.n = integer(box, "box", "n");
  if (tc.n < 16 || (tc.n & (tc.n - 1)) != 0) bad("box.n", "must be a power of two, at least 16");
  tc.L_box = positive_or(box, "box", "L", 80.0);
  if (2.0 * tc.L_box / tc.n > 1.0 / 16.0) bad("box.n", "is too small: the grid spacing 2L/n must not exceed 1/16");
  tc.dt = positive_or(cfg, "", "dt", 1e-3);
  if (cfg.contains("t_end") && cfg.contains("steps")) bad("steps", "conflicts with t_end; give one of them");
  if (cfg.contains("steps")) {
    const int steps = integer(cfg, "", "steps");
    if (steps <= 0) bad("steps", "must be positive");
    tc.t_end = steps * tc.dt;
  } else {
    tc.t_end = positive_or(cfg, "", "t_end", 200.0);
  }
  tc.sample_every = positive_or(cfg, "", "sample_every", std::min(1.0, tc.t_end));
  tc.first_order = flag_or(cfg, "", "first_order", false);
  if (tc.first_order && d != 1) bad("first_order", "is only available in d = 1");
  const double widths = positive_or(cfg, "", "tolerance_widths", 0.5);
  const double mass_tol = positive_or(cfg, "", "max_mass_drift", 1e-8);
  const double energy_tol = positive_or(cfg, "", "max_energy_drift", 1e-6);
  const bool snapshot = flag_or(cfg, "", "snapshot", false);
  const json& sd = object(cfg, "", "seed");
  if (sd.contains("regime")) {
    const json& rj = sd.at("regime");
    if (rj != "hyperbolic" && rj != "parabolic") bad("seed.regime", "must be \"hyperbolic\" or \"parabolic\"");
  }
  const GroundState gs = gp.solve();
  tc.seed = pde_seed(sd, tc.potential, gs);

  const TrackReport rep = track_vs_reduced(gs, tc);
  run.emit("track.csv", rep.csv());
  std::string diag = diagnostics_csv_header(d);
  for (const auto& row : rep.rows) {
    Diagnostics g;
    g.mass = row.mass;
    g.energy = row.energy;
    g.center = row.center_pde;
    g.beta = row.beta_pde;
    for (double b : row.beta_pde) g.momentum.push_back(b * row.mass);
    diag += diagnostics_csv_row(row.t, g);
  }
  run.emit("diagnostics.csv", diag);

  json summary = {{"max_center_error", rep.max_center_error},
                  {"mean_center_error", rep.mean_center_error},
                  {"max_beta_error", rep.max_beta_error},
                  {"mass_drift", rep.mass_drift},
                  {"energy_drift", rep.energy_drift},
                  {"seed", {{"t", tc.seed.t}, {"chi", tc.seed.chi}, {"beta", tc.seed.beta}, {"lambda", tc.seed.lambda}}},
                  {"n", tc.n},
                  {"L_box", tc.L_box},
                  {"dt", tc.dt},
                  {"t_end", tc.t_end}};
  run.emit("summary.json", summary.dump(2) + "\n");
  if (snapshot) {
    const fs::path tmp = run.opts().out_dir / "final.bin.tmp";
    write_snapshot(rep.final_state, tmp.string());
    std::ifstream in(tmp, std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    in.close();
    fs::remove(tmp);
    run.emit("final.bin", bytes.str());
  }

  run.check_le("max_center_error", rep.max_center_error, widths * tc.seed.lambda);
  run.check_le("mass_drift", rep.mass_drift, mass_tol);
  run.check_le("energy_drift", rep.energy_drift, energy_tol);
}

void run_identities(const json& cfg, Run& run) {
  const GsParams gp = gs_params(cfg);
  const double h = positive_or(cfg, "", "h", 0.02);
  if (h > 0.05) bad("h", "must not exceed 0.05");
  const double L = positive_or(cfg, "", "L", 30.0);
  const double max_res = positive_or(cfg, "", "max_residual", 1e-3);
  const GroundState gs = gp.solve();
  const IdentityReport a = identity_suite(gs, h, L);
  const IdentityReport b = identity_suite(gs, 0.5 * h, L);

  const double rk = a.kernel / b.kernel, rl = a.lambda_q / b.lambda_q, rp = a.l_plus_q / b.l_plus_q;
  json out = {{"d", a.d},
              {"p", a.p},
              {"h", {a.h, b.h}},
              {"residuals",
               {{"kernel", {a.kernel, b.kernel}}, {"lambda_q", {a.lambda_q, b.lambda_q}}, {"l_plus_q", {a.l_plus_q, b.l_plus_q}}}},
              {"order_ratio", {{"kernel", rk}, {"lambda_q", rl}, {"l_plus_q", rp}}},
              {"inner", a.inner},
              {"inner_expected", a.inner_expected},
              {"inner_rel_err", a.inner_rel_err}};
  run.emit("identities.json", out.dump(2) + "\n");

  auto ratio = [&](const std::string& name, double r) {
    run.check("order_ratio_" + name, r >= 3.5 && r <= 4.5, r, 4.5);
  };
  ratio("kernel", rk);
  ratio("lambda_q", rl);
  ratio("l_plus_q", rp);
  run.check_le("inner_identity", a.inner_rel_err, 1e-8);
  if (cfg.contains("max_residual")) {
    run.check_le("residual_kernel", a.kernel, max_res);
    run.check_le("residual_lambda_q", a.lambda_q, max_res);
    run.check_le("residual_l_plus_q", a.l_plus_q, max_res);
  }
}

}  // namespace

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

nlohmann::json ExperimentResult::manifest() const {
  json checks_j = json::array();
  for (const auto& c : checks)
    checks_j.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit}});
  json files_j = json::array();
  for (const auto& f : files) files_j.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  return {{"experiment", experiment}, {"status", passed() ? "pass" : "fail"}, {"checks", checks_j}, {"files", files_j}};
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"groundstate", "j_ladder", "regime_sweep", "pde_track", "identities"};
  return names;
}

ExperimentResult run_experiment(const std::string& name, const nlohmann::json& config, const RunOptions& opts) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) bad("experiment", "has unknown value '" + name + "'");
  if (!config.is_object()) bad("(root)", "must be a JSON object");
  if (config.contains("experiment") && config.at("experiment") != name)
    bad("experiment", "does not match the experiment named on the command line");

  Run run(name, opts);
  if (name == "groundstate")
    run_groundstate(config, run);
  else if (name == "j_ladder")
    run_j_ladder(config, run);
  else if (name == "regime_sweep")
    run_regime_sweep(config, run);
  else if (name == "pde_track")
    run_pde_track(config, run);
  else
    run_identities(config, run);
  return run.finish();
}

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::config_invalid, "config file cannot be read: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::config_invalid, "config file is not valid JSON: " + std::string(e.what()));
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::invalid_argument, "sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::invalid_argument, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::invalid_argument, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace sollab
