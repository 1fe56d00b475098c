#include "lightcone/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "lightcone/diffsys.hpp"
#include "lightcone/errors.hpp"
#include "lightcone/io.hpp"
#include "lightcone/linearized.hpp"
#include "lightcone/nashmoser.hpp"
#include "lightcone/profiles.hpp"
#include "lightcone/rng.hpp"
#include "lightcone/spectral.hpp"

namespace lc {

namespace {

constexpr const char* kVersion = "1.0.0";

using json = nlohmann::json;

const std::vector<std::pair<Experiment, std::string>>& experiment_table() {
  static const std::vector<std::pair<Experiment, std::string>> t = {
      {Experiment::verify, "verify"},
      {Experiment::spectrum, "spectrum"},
      {Experiment::frobenius, "frobenius"},
      {Experiment::newton_polygon, "newton-polygon"},
      {Experiment::evolve_linear, "evolve-linear"},
      {Experiment::evolve_nonlinear, "evolve-nonlinear"},
      {Experiment::nash_moser, "nash-moser"},
      {Experiment::appendix_check, "appendix-check"}};
  return t;
}

const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> k = {"kappa", "sigma", "T",       "eps",    "cells",   "tau_max",
                                             "dt",    "seed",  "out",     "n_max",  "trials",  "mu1",
                                             "mu2",   "horizon", "m_max", "linearization"};
  return k;
}

[[noreturn]] void range_error(const std::string& what) { throw ConfigError(what, exit_code::range); }

bool needs_open_kappa(Experiment e) {
  return e == Experiment::spectrum || e == Experiment::frobenius || e == Experiment::evolve_linear ||
         e == Experiment::appendix_check;
}

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("parse error: parameter '" + key + "' has the wrong type", exit_code::parse);
  }
}

Check make_check(std::string name, double value, double threshold, bool pass) {
  return Check{std::move(name), value, threshold, pass};
}

Check upper_check(std::string name, double value, double threshold) {
  return make_check(std::move(name), value, threshold, std::isfinite(value) && value < threshold);
}

struct RunContext {
  std::filesystem::path dir;
  RunManifest manifest;

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void csv(const std::string& name, const std::vector<std::vector<double>>& rows,
           const std::vector<std::string>& schema) {
    manifest.outputs.push_back({name, write_series(rows, schema, path(name))});
  }

  void text(const std::string& name, const std::string& content) {
    manifest.outputs.push_back({name, write_text(path(name), content)});
  }

  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  void check(Check c) { manifest.checks.push_back(std::move(c)); }
};

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

// ---------------------------------------------------------------- verify

void run_verify(const ExperimentConfig& cfg, RunContext& ctx) {
  const SimilarityFrame frame(cfg.T, cfg.sigma, cfg.kappa);
  std::vector<std::pair<double, double>> pts;
  const int nt = 25, nr = 40;
  for (int i = 0; i < nt; ++i) {
    const double t = 0.9 * cfg.T * i / nt;
    for (int j = 1; j <= nr; ++j) pts.emplace_back(t, 0.9 * (cfg.T - t) * j / nr);
  }
  std::vector<std::vector<double>> rows;
  double worst[2] = {0.0, 0.0};
  for (int k = 0; k < 2; ++k) {
    const int sign = k == 0 ? +1 : -1;
    const ResidualReport rep = membrane_residual(explicit_field(frame, sign), pts);
    worst[k] = rep.max_abs;
    for (const auto& s : rep.samples) rows.push_back({double(sign), s.t, s.r, s.residual});
  }
  ctx.csv("residuals.csv", rows, {"sign", "t", "r", "residual"});
  ctx.check(upper_check("residual_plus", worst[0], 1e-10));
  ctx.check(upper_check("residual_minus", worst[1], 1e-10));

  std::vector<std::vector<double>> rate_rows;
  double rate_err = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double t = cfg.T * (1.0 - std::ldexp(1.0, -k));
    for (int sign : {+1, -1}) {
      const double got = origin_second_derivative(frame, sign, t);
      const double expected = sign / (cfg.T - t);
      const double jet_urr = explicit_field(frame, sign)(t, 0.0).urr;
      const double err =
          std::max(std::abs(got - expected), std::abs(std::abs(jet_urr) - std::abs(got))) / std::abs(expected);
      rate_err = std::max(rate_err, err);
      rate_rows.push_back({double(k), double(sign), t, got, expected, err});
    }
  }
  ctx.csv("blowup_rate.csv", rate_rows, {"k", "sign", "t", "second_derivative", "expected", "rel_error"});
  ctx.check(upper_check("blowup_rate_rel_error", rate_err, 1e-12));

  double ode = 0.0;
  std::vector<std::vector<double>> ode_rows;
  for (int i = 1; i < 100; ++i) {
    const double rho = i / 100.0;
    const double r = std::max(std::abs(ode_residual({+1}, rho)), std::abs(ode_residual({-1}, rho)));
    ode = std::max(ode, r);
    ode_rows.push_back({rho, r});
  }
  ctx.csv("profile_ode.csv", ode_rows, {"rho", "residual"});
  ctx.check(upper_check("profile_ode_residual", ode, 1e-10));
}

// -------------------------------------------------------------- spectrum

void run_spectrum(const ExperimentConfig& cfg, RunContext& ctx) {
  const ModeReport mr = mode_roots({1.0, 3.0, -4.0});
  ctx.json_file("roots.json", json{{"polynomial", {1.0, 3.0, -4.0}},
                                   {"roots", {cplx_json(mr.r1), cplx_json(mr.r2)}},
                                   {"verdict", mr.verdict},
                                   {"discrepancy", mr.discrepancy}});
  const double root_err = std::max(std::abs(mr.r1 - cplx(1.0, 0.0)), std::abs(mr.r2 - cplx(-4.0, 0.0)));
  ctx.check(upper_check("mode_root_error", root_err, 1e-14));
  ctx.check(make_check("mode_unstable_with_discrepancy", mr.stable ? 0.0 : 1.0, 1.0,
                       !mr.stable && mr.verdict == "mode unstable" && !mr.discrepancy.empty()));

  std::vector<std::vector<double>> rh_rows;
  bool all_ok = true;
  double worst_re = -INFINITY;
  for (int i = 0; i < 10; ++i) {
    const double kappa = 0.9 + 0.099 * i / 9.0;
    for (long n = 0; n < 100; ++n) {
      const StableRootReport r = stable_root_check(n, kappa);
      all_ok = all_ok && r.all_stable && r.agree;
      worst_re = std::max(worst_re, r.r1.real());
      rh_rows.push_back({kappa, double(n), r.r1.real(), r.r2.real(), r.all_stable ? 1.0 : 0.0,
                         r.coefficients_positive ? 1.0 : 0.0});
    }
  }
  ctx.csv("routh_hurwitz.csv", rh_rows, {"kappa", "n", "re_r1", "re_r2", "stable", "coefficients_positive"});
  ctx.check(make_check("routh_hurwitz_max_re", worst_re, -1e-12, all_ok && worst_re < -1e-12));

  const RadialGrid g(cfg.sigma, cfg.cells);
  const OperatorMatrices m = assemble_operator(g, cfg.kappa);
  const std::vector<cplx> ev = discrete_spectrum(m);
  std::vector<std::vector<double>> ev_rows;
  for (const cplx& z : ev) ev_rows.push_back({z.real(), z.imag()});
  ctx.csv("eigenvalues.csv", ev_rows, {"re", "im"});
  const double max_re = ev.empty() ? 0.0 : ev.back().real();
  ctx.check(make_check("max_re_eigenvalue", max_re, 0.0, max_re < 0.0));

  const DissipativityReport d = dissipativity_check(g, m, cfg.trials, cfg.seed);
  std::vector<std::vector<double>> d_rows;
  for (std::size_t i = 0; i < d.values.size(); ++i) d_rows.push_back({double(i), d.values[i]});
  ctx.csv("dissipativity.csv", d_rows, {"trial", "re_form"});
  ctx.check(make_check("dissipativity_worst", d.worst, 1e-8, d.worst <= 1e-8));
}

// ------------------------------------------------------------- frobenius

void run_frobenius(const ExperimentConfig& cfg, RunContext& ctx) {
  const StableRootReport sr = stable_root_check(0, cfg.kappa);
  const cplx nu = sr.r1;
  const FrobeniusSeries s = frobenius_series(nu, cfg.kappa, static_cast<std::size_t>(cfg.n_max));
  const RatioDiagnostics rd = ratio_diagnostics(s);
  std::vector<std::vector<double>> rows;
  double worst_d = 0.0;
  const long lo = std::min<long>(1500, cfg.n_max * 3 / 4);
  for (std::size_t i = 0; i < rd.index.size(); ++i) {
    const long n = rd.index[i];
    const double dmag = rd.masked[i] ? NAN : std::abs(rd.d[i] - 1.0);
    if (n >= lo && !rd.masked[i]) worst_d = std::max(worst_d, dmag);
    rows.push_back({double(n), s.coeffs.at(static_cast<std::size_t>(n)).log_abs(), rd.d[i].real(), rd.d[i].imag(),
                    rd.R[i].real(), rd.R[i].imag(), std::abs(rd.dtilde[i]), rd.masked[i] ? 1.0 : 0.0});
  }
  ctx.csv("series.csv", rows, {"n", "log_abs_a", "re_d", "im_d", "re_R", "im_R", "abs_dtilde", "masked"});
  ctx.json_file("frobenius.json", json{{"nu", cplx_json(nu)},
                                       {"kappa", cfg.kappa},
                                       {"n_max", cfg.n_max},
                                       {"seeds", {cplx_json(s.seeds[0]), cplx_json(s.seeds[1]), cplx_json(s.seeds[2])}},
                                       {"scaled", s.scaled}});
  ctx.check(upper_check("recurrence_residual", recurrence_residual(s), 1e-10));
  ctx.check(upper_check("ratio_deviation_tail", worst_d, 0.01));
}

// -------------------------------------------------------- newton-polygon

json polygon_json(const NewtonPolygon& p) {
  json pts = json::array(), edges = json::array();
  for (const auto& q : p.points) pts.push_back({q.alpha, q.beta});
  for (const auto& e : p.edges)
    edges.push_back({{"from", {e.from.alpha, e.from.beta}}, {"to", {e.to.alpha, e.to.beta}}, {"slope", e.slope}});
  return json{{"points", pts}, {"edges", edges}, {"steepest_slope", p.steepest_slope}, {"xbar", p.xbar}};
}

bool same_edges(const std::vector<PolyEdge>& a, const std::vector<PolyEdge>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].from.alpha != b[i].from.alpha || a[i].from.beta != b[i].from.beta ||
        a[i].to.alpha != b[i].to.alpha || a[i].to.beta != b[i].to.beta)
      return false;
  return true;
}

void run_newton_polygon(const ExperimentConfig& cfg, RunContext& ctx) {
  const NewtonPolygon p = newton_polygon({{2.0, 0.0}, {1.5, 2.0}, {1.0, 4.0}});
  ctx.json_file("polygon.json", polygon_json(p));
  ctx.check(make_check("xbar", p.xbar, 0.25, p.xbar == 0.25 && p.edges.size() == 1 && p.steepest_slope == -4.0));

  auto rng = make_rng(cfg.seed, 7);
  std::uniform_int_distribution<int> count(2, 9), coord(0, 8);
  int mismatches = 0;
  for (int t = 0; t < 500; ++t) {
    std::vector<PolyPoint> pts(static_cast<std::size_t>(count(rng)));
    for (auto& q : pts) q = {coord(rng) * 0.5, double(coord(rng))};
    if (!same_edges(newton_polygon(pts).edges, brute_force_hull(pts))) ++mismatches;
  }
  ctx.check(make_check("hull_oracle_mismatches", mismatches, 0.0, mismatches == 0));
}

// ------------------------------------------------------- evolve-linear

FieldState random_smooth_state(const RadialGrid& g, std::uint64_t seed, double amplitude) {
  FieldState s(g.size());
  s.v = random_boundary_function(g, seed, 11);
  s.v_tau = random_boundary_function(g, seed, 12);
  for (auto& x : s.v) x *= amplitude;
  for (auto& x : s.v_tau) x *= amplitude;
  return s;
}

std::vector<std::vector<double>> trajectory_rows(const std::vector<TrajectoryRow>& rows) {
  std::vector<std::vector<double>> out;
  for (const auto& r : rows) out.push_back({r.tau, r.energy_L2, r.energy_bracket, r.h1_norm, r.boundary_flux});
  return out;
}

const std::vector<std::string> kTrajectorySchema = {"tau", "energy_L2", "energy_bracket", "h1_norm",
                                                    "boundary_flux"};

void run_evolve_linear(const ExperimentConfig& cfg, RunContext& ctx) {
  const RadialGrid g(cfg.sigma, cfg.cells);
  EvolveOptions opt;
  opt.tau_max = cfg.tau_max;
  opt.dt = cfg.dt;
  opt.energy = {cfg.mu1, cfg.mu2};
  const EvolveResult r = evolve(g, random_smooth_state(g, cfg.seed, 1.0), cfg.kappa, opt);
  ctx.csv("energy.csv", trajectory_rows(r.rows), kTrajectorySchema);
  ctx.json_file("decay.json", json{{"rate", r.decay.rate},
                                   {"r_squared", r.decay.r_squared},
                                   {"dt", r.dt},
                                   {"energy0", r.energy0},
                                   {"max_bracket_increase", r.max_bracket_increase}});
  ctx.check(make_check("decay_rate", r.decay.rate, 0.0, r.decay.rate < 0.0));
  ctx.check(make_check("decay_r_squared", r.decay.r_squared, 0.99, r.decay.r_squared > 0.99));
  const double rel = r.max_bracket_increase / r.energy0;
  ctx.check(make_check("bracket_increase_rel", rel, 1e-6, rel <= 1e-6));
}

// ---------------------------------------------------- evolve-nonlinear

Vec bump_profile(const RadialGrid& g) {
  Vec b(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double s = std::sin(std::numbers::pi * g.nodes[j] / g.sigma);
    b[j] = s * s;
  }
  return b;
}

void run_evolve_nonlinear(const ExperimentConfig& cfg, RunContext& ctx) {
  const RadialGrid g(cfg.sigma, cfg.cells);
  FieldState s0(g.size());
  const Vec b = bump_profile(g);
  for (std::size_t j = 0; j < g.size(); ++j) s0.v[j] = cfg.eps * b[j];
  NonlinearOptions opt;
  opt.tau_max = cfg.tau_max;
  opt.dt = cfg.dt;
  opt.T = cfg.T;
  opt.energy = {cfg.mu1, cfg.mu2};
  const NonlinearResult r = evolve_nonlinear(g, s0, cfg.kappa, opt);
  ctx.csv("trajectory.csv", trajectory_rows(r.rows), kTrajectorySchema);
  std::vector<std::vector<double>> phys;
  double ratio0 = NAN, ratio_max = 0.0;
  for (const auto& p : r.physical) {
    phys.push_back({p.tau, p.t, p.ratio});
    if (std::isnan(ratio0)) ratio0 = p.ratio;
    ratio_max = std::max(ratio_max, p.ratio);
  }
  ctx.csv("physical.csv", phys, {"tau", "t", "ratio"});
  ctx.json_file("status.json", json{{"status", to_string(r.status)},
                                    {"message", r.message},
                                    {"tau_reached", r.tau_reached},
                                    {"dt", r.dt},
                                    {"min_time_margin", r.min_time_margin},
                                    {"min_space_margin", r.min_space_margin}});
  ctx.check(make_check("completed", r.tau_reached, cfg.tau_max, r.status == RunStatus::completed));
  const double growth = ratio_max / ratio0;
  ctx.check(make_check("physical_ratio_growth", growth, 10.0, std::isfinite(growth) && growth <= 10.0));
}

// ---------------------------------------------------------- nash-moser

void run_nash_moser(const ExperimentConfig& cfg, RunContext& ctx) {
  const RadialGrid g(cfg.sigma, cfg.cells);
  ScheduleParams s;
  s.tau_horizon = cfg.horizon;
  if (cfg.dt > 0.0) s.dt = cfg.dt;
  s.m_max = cfg.m_max;
  s.mode = cfg.linearization == "tabulated" ? LinearizationMode::tabulated : LinearizationMode::consistent;
  const IterationOutcome out = run_iteration(zero_trajectory(g, s), cfg.kappa, g, s);
  const ConvergenceReport& rep = out.report;
  json steps = json::array();
  for (const auto& h : out.state.history)
    steps.push_back({{"m", h.m},
                     {"theta", h.theta},
                     {"k_m", h.k_m},
                     {"norm_h", h.norm_h},
                     {"norm_E", h.norm_E},
                     {"c_m", h.c_m},
                     {"h_over_E", h.h_over_E},
                     {"solve_residual", h.solve_residual}});
  ctx.json_file("convergence.json", json{{"steps", steps},
                                         {"doubling_ratios", rep.doubling_ratios},
                                         {"log_E", rep.log_E},
                                         {"converged", rep.converged()},
                                         {"status", to_string(rep.status)},
                                         {"message", rep.message},
                                         {"E0", rep.E0},
                                         {"precondition", rep.precondition},
                                         {"final_residual", rep.final_residual},
                                         {"accumulation_error", rep.accumulation_error}});
  ctx.check(make_check("converged", rep.final_residual, s.tol, rep.converged()));
  double worst = NAN;
  bool ratios_ok = rep.doubling_ratios.size() >= 4;
  for (std::size_t i = 0; i < std::min<std::size_t>(4, rep.doubling_ratios.size()); ++i) {
    const double q = rep.doubling_ratios[i];
    if (std::isnan(worst) || std::abs(q - 2.0) > std::abs(worst - 2.0)) worst = q;
    ratios_ok = ratios_ok && q >= 1.5 && q <= 2.5;
  }
  ctx.check(make_check("doubling_ratio_m1_4", worst, 2.0, ratios_ok));
}

// ------------------------------------------------------ appendix-check

void run_appendix_check(const ExperimentConfig& cfg, RunContext& ctx) {
  const JordanReport jr = jordan_verify();
  ctx.check(make_check("jordan_exact", jr.ok() ? 1.0 : 0.0, 1.0, jr.ok()));
  int window_fail = 0;
  for (long n = 1; n <= 50; ++n)
    if (!window_transform(n).diagonal_ok) ++window_fail;
  ctx.check(make_check("window_transform_failures", window_fail, 0.0, window_fail == 0));

  auto rng = make_rng(cfg.seed, 21);
  std::uniform_int_distribution<long> nd(1, 200);
  std::uniform_real_distribution<double> kd(0.9, 0.999), re(-5.0, 0.0), im(-2.0, 2.0);
  double worst = 0.0;
  std::vector<std::vector<double>> rows;
  for (int t = 0; t < 20; ++t) {
    const long n = nd(rng);
    const double kappa = kd(rng);
    const cplx nu(re(rng), im(rng));
    const RecurrenceWeights w = recurrence_weights(n, nu, kappa);
    const CMatrix4 a = ttilde_build(n, w), b = ttilde_closed_form(n, w);
    double scale = 0.0, diff = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        scale = std::max(scale, std::abs(a[i][j]));
        diff = std::max(diff, std::abs(a[i][j] - b[i][j]));
      }
    const double rel = diff / std::max(scale, 1e-300);
    worst = std::max(worst, rel);
    rows.push_back({double(n), kappa, nu.real(), nu.imag(), rel});
  }
  ctx.csv("ttilde_samples.csv", rows, {"n", "kappa", "re_nu", "im_nu", "rel_diff"});
  ctx.check(upper_check("ttilde_closed_form_rel_diff", worst, 1e-10));

  const cplx nu = stable_root_check(0, cfg.kappa).r1;
  const GrowthProfile diag = growth_profile(nu, cfg.kappa, 1000, 1, true);
  double tele = 0.0;
  for (std::size_t k = 1; k < diag.log_norm.size(); ++k)
    tele = std::max(tele, std::abs(std::expm1(diag.log_norm[k] - std::log(double(k + 1)))));
  ctx.check(upper_check("diagonal_telescoping_rel", tele, 1e-9));

  std::vector<GrowthProfile> prof;
  for (int e = 0; e < 4; ++e) prof.push_back(growth_profile(nu, cfg.kappa, cfg.n_max, e));
  std::vector<std::vector<double>> grow;
  for (std::size_t k = 0; k < prof[0].log_norm.size(); ++k)
    grow.push_back({double(k), prof[0].log_norm[k], prof[1].log_norm[k], prof[2].log_norm[k], prof[3].log_norm[k]});
  ctx.csv("growth.csv", grow, {"n", "log_norm_e1", "log_norm_e2", "log_norm_e3", "log_norm_e4"});
  long first_drop = -1;
  for (std::size_t k = 101; k < prof[1].log_norm.size(); ++k)
    if (!(prof[1].log_norm[k] > prof[1].log_norm[k - 1])) {
      first_drop = static_cast<long>(k);
      break;
    }
  ctx.check(make_check("growth_first_non_increase", double(first_drop), -1.0, first_drop < 0));
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [k, v] : experiment_table())
    if (k == e) return v;
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (const auto& [k, v] : experiment_table())
    if (v == name) return k;
  throw ConfigError("unknown experiment '" + name + "'", exit_code::usage);
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& kv : experiment_table()) n.push_back(kv.second);
    return n;
  }();
  return names;
}

void ExperimentConfig::validate() const {
  if (needs_open_kappa(experiment)) {
    if (!(kappa > 0.0 && kappa < 1.0)) range_error("kappa must lie in (0,1)");
  } else if (!(kappa > 0.0 && kappa <= 1.0)) {
    range_error("kappa must lie in (0,1]");
  }
  if (!(sigma > 0.0 && sigma < 1.0)) range_error("sigma must lie in (0,1)");
  if (!(T > 0.0) || !std::isfinite(T)) range_error("T must be positive");
  if (!(eps >= 0.0) || !std::isfinite(eps)) range_error("eps must be non-negative");
  if (cells < 8) range_error("cells must be at least 8");
  if (experiment == Experiment::spectrum && cells > 500) range_error("cells must be at most 500 for spectrum");
  if (experiment == Experiment::nash_moser && cells > 400) range_error("cells must be at most 400 for nash-moser");
  if (!(tau_max > 0.0) || !std::isfinite(tau_max)) range_error("tau_max must be positive");
  if (!(dt >= 0.0) || !std::isfinite(dt)) range_error("dt must be non-negative (0 selects the CFL step)");
  if (out.empty()) range_error("out must be a non-empty path");
  if (n_max < 16) range_error("n_max must be at least 16");
  if (trials < 1) range_error("trials must be at least 1");
  if (!(mu1 > 0.0 && mu1 < 1.0 && mu2 > 1.0)) range_error("energy weights need 0 < mu1 < 1 < mu2");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) range_error("horizon must be positive");
  if (m_max < 1) range_error("m_max must be at least 1");
  if (linearization != "consistent" && linearization != "tabulated")
    range_error("linearization must be 'consistent' or 'tabulated'");
}

json ExperimentConfig::to_json() const {
  return json{{"experiment", to_string(experiment)},
              {"params",
               {{"kappa", kappa},
                {"sigma", sigma},
                {"T", T},
                {"eps", eps},
                {"cells", cells},
                {"tau_max", tau_max},
                {"dt", dt},
                {"seed", seed},
                {"out", out},
                {"n_max", n_max},
                {"trials", trials},
                {"mu1", mu1},
                {"mu2", mu2},
                {"horizon", horizon},
                {"m_max", m_max},
                {"linearization", linearization}}}};
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + " (byte " +
                          std::to_string(e.byte) + ")",
                      exit_code::parse);
  }
  if (!j.is_object()) throw ConfigError("parse error: configuration must be a JSON object", exit_code::parse);
  for (const auto& [k, v] : j.items())
    if (k != "experiment" && k != "params") throw ConfigError("unknown key '" + k + "'", exit_code::unknown_key);
  if (!j.contains("experiment")) throw ConfigError("parse error: missing key 'experiment'", exit_code::parse);

  ExperimentConfig c;
  c.experiment = parse_experiment(get_as<std::string>(j["experiment"], "experiment"));
  if (j.contains("params")) {
    const json& p = j["params"];
    if (!p.is_object()) throw ConfigError("parse error: 'params' must be an object", exit_code::parse);
    for (const auto& [k, v] : p.items()) {
      if (std::find(param_keys().begin(), param_keys().end(), k) == param_keys().end())
        throw ConfigError("unknown key 'params." + k + "'", exit_code::unknown_key);
      if (k == "kappa") c.kappa = get_as<double>(v, k);
      else if (k == "sigma") c.sigma = get_as<double>(v, k);
      else if (k == "T") c.T = get_as<double>(v, k);
      else if (k == "eps") c.eps = get_as<double>(v, k);
      else if (k == "cells") c.cells = get_as<int>(v, k);
      else if (k == "tau_max") c.tau_max = get_as<double>(v, k);
      else if (k == "dt") c.dt = get_as<double>(v, k);
      else if (k == "seed") c.seed = get_as<std::uint64_t>(v, k);
      else if (k == "out") c.out = get_as<std::string>(v, k);
      else if (k == "n_max") c.n_max = get_as<long>(v, k);
      else if (k == "trials") c.trials = get_as<int>(v, k);
      else if (k == "mu1") c.mu1 = get_as<double>(v, k);
      else if (k == "mu2") c.mu2 = get_as<double>(v, k);
      else if (k == "horizon") c.horizon = get_as<double>(v, k);
      else if (k == "m_max") c.m_max = get_as<int>(v, k);
      else if (k == "linearization") c.linearization = get_as<std::string>(v, k);
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open config " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return parse_config(os.str());
}

bool RunManifest::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

json RunManifest::to_json() const {
  json outs = json::array(), chks = json::array();
  for (const auto& o : outputs) outs.push_back({{"path", o.path}, {"sha256", o.sha256}});
  for (const auto& c : checks) {
    json v = std::isfinite(c.value) ? json(c.value) : json(nullptr);
    chks.push_back({{"name", c.name}, {"value", v}, {"threshold", c.threshold}, {"pass", c.pass}});
  }
  return json{{"config", config},         {"version", version}, {"wall_seconds", wall_seconds},
              {"outputs", outs},          {"checks", chks},     {"all_pass", all_pass()}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  try {
    m.config = j.at("config");
    m.version = j.at("version").get<std::string>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& o : j.at("outputs")) m.outputs.push_back({o.at("path"), o.at("sha256")});
    for (const auto& c : j.at("checks"))
      m.checks.push_back({c.at("name").get<std::string>(), c.at("value").is_null() ? NAN : c.at("value").get<double>(),
                          c.at("threshold").get<double>(), c.at("pass").get<bool>()});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("parse error: malformed manifest: ") + e.what(), exit_code::parse);
  }
  return m;
}

RunManifest run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunContext ctx;
  ctx.dir = cfg.out;
  std::error_code ec;
  std::filesystem::create_directories(ctx.dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out + ": " + ec.message());
  ctx.manifest.config = cfg.to_json();
  ctx.manifest.version = kVersion;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (cfg.experiment) {
      case Experiment::verify: run_verify(cfg, ctx); break;
      case Experiment::spectrum: run_spectrum(cfg, ctx); break;
      case Experiment::frobenius: run_frobenius(cfg, ctx); break;
      case Experiment::newton_polygon: run_newton_polygon(cfg, ctx); break;
      case Experiment::evolve_linear: run_evolve_linear(cfg, ctx); break;
      case Experiment::evolve_nonlinear: run_evolve_nonlinear(cfg, ctx); break;
      case Experiment::nash_moser: run_nash_moser(cfg, ctx); break;
      case Experiment::appendix_check: run_appendix_check(cfg, ctx); break;
    }
  } catch (const Error& e) {
    throw Error(to_string(cfg.experiment) + ": " + e.what(), e.exit_code());
  }
  ctx.manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(ctx.path("manifest.json"), ctx.manifest.to_json().dump(2) + "\n");
  return ctx.manifest;
}

SummaryResult summary(const std::vector<RunManifest>& manifests) {
  if (manifests.empty()) throw ConfigError("summary needs at least one manifest", exit_code::usage);
  SummaryResult r;
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-34s %14s %14s %s\n", "experiment", "check", "value", "threshold", "result");
  os << line;
  for (const auto& m : manifests) {
    const std::string exp = m.config.value("experiment", std::string("?"));
    for (const auto& c : m.checks) {
      std::snprintf(line, sizeof line, "%-18s %-34s %14.6g %14.6g %s\n", exp.c_str(), c.name.c_str(), c.value,
                    c.threshold, c.pass ? "PASS" : "FAIL");
      os << line;
      r.all_pass = r.all_pass && c.pass;
    }
  }
  os << (r.all_pass ? "overall: PASS\n" : "overall: FAIL\n");
  r.text = os.str();
  return r;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for self-similar blowup of the radial lightcone membrane equation"};
  std::string experiment, config_path;
  std::vector<std::string> manifests;
  std::optional<double> kappa, sigma;
  std::optional<int> cells;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;

  std::string names;
  for (const auto& n : experiment_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("experiment", experiment, "One of: " + names + ", or 'summary'")->required();
  app.add_option("manifests", manifests, "manifest.json files (summary only)");
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--kappa", kappa, "Perturbation parameter kappa");
  app.add_option("--sigma", sigma, "Lightcone fraction sigma");
  app.add_option("--cells", cells, "Number of grid cells");
  app.add_option("--out", out, "Output directory");
  app.add_option("--seed", seed, "Random seed");
  app.set_version_flag("--version", kVersion);
  app.footer(
      "Exit codes:\n"
      "  0  success, all checks pass\n"
      "  1  experiment ran but at least one check failed\n"
      "  2  usage error (bad arguments or unknown experiment)\n"
      "  3  configuration parse error\n"
      "  4  unknown configuration key\n"
      "  5  parameter out of range\n"
      "  6  I/O error\n"
      "  7  domain error\n"
      "  8  numerical failure (pole, CFL, loss of hyperbolicity, non-finite values)\n"
      "  9  internal error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code::usage;
  }

  try {
    if (experiment == "summary") {
      std::vector<RunManifest> ms;
      for (const auto& p : manifests) {
        std::ifstream is(p, std::ios::binary);
        if (!is) throw IoError("cannot open manifest " + p);
        json j;
        try {
          j = json::parse(is);
        } catch (const json::parse_error& e) {
          throw ConfigError("parse error in " + p + " at byte " + std::to_string(e.byte), exit_code::parse);
        }
        ms.push_back(RunManifest::from_json(j));
      }
      const SummaryResult s = summary(ms);
      std::cout << s.text;
      return s.all_pass ? exit_code::ok : exit_code::check_failed;
    }
    if (!manifests.empty()) throw ConfigError("unexpected extra arguments", exit_code::usage);

    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    cfg.experiment = parse_experiment(experiment);
    if (kappa) cfg.kappa = *kappa;
    if (sigma) cfg.sigma = *sigma;
    if (cells) cfg.cells = *cells;
    if (out) cfg.out = *out;
    if (seed) cfg.seed = *seed;
    cfg.validate();

    const RunManifest m = run_experiment(cfg);
    const SummaryResult s = summary({m});
    std::cout << s.text;
    return s.all_pass ? exit_code::ok : exit_code::check_failed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_code::internal;
  }
}

}  // namespace lc
