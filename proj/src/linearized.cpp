#include "lightcone/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lightcone/errors.hpp"
#include "lightcone/forcing.hpp"

namespace lc {

OperatorCoeffs CoeffSet::to_operator(const RadialGrid& g) const {
  const std::size_t n = g.size();
  OperatorCoeffs c{Vec(n), Vec(n), Vec(n), Vec(n), Vec(n), Vec(n)};
  for (std::size_t j = 0; j < n; ++j) {
    const double rho = g.nodes[j];
    c.P0[j] = base0[j] + a0[j];
    c.P1[j] = base1[j] + a1[j];
    c.P2[j] = base2[j] + a2[j];
    c.P3[j] = base3[j] + a3[j];
    c.rP4[j] = rho * base4[j] + rho * a4[j];
    c.P5[j] = base5[j] + a5[j];
  }
  return c;
}

void EnergyParams::validate() const {
  if (!(mu1 > 0 && mu1 < 1 && mu2 > 1)) throw DomainError("energy multipliers need 0 < mu1 < 1 < mu2");
}

CoeffSet base_coeffs(const RadialGrid& g, double kappa) {
  const std::size_t n = g.size();
  const double k2 = kappa * kappa;
  const double q = 1.0 - k2;
  CoeffSet c;
  c.kappa = kappa;
  for (Vec* a : {&c.a0, &c.a1, &c.a2, &c.a3, &c.a4, &c.a5}) a->assign(n, 0.0);
  for (Vec* b : {&c.base0, &c.base1, &c.base2, &c.base3, &c.base4, &c.base5}) b->resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = g.nodes[j];
    const double om = 1.0 - r * r;
    c.base0[j] = 1.0 + (k2 - 1.0) * r * r;
    c.base1[j] = q * om * om;
    c.base2[j] = 4.0 * k2 - 1.0 + (kappa - 1.0) * (kappa - 1.0) * r * r;
    c.base3[j] = 2.0 * r * q * om;
    c.base4[j] = -q * om / r;
    c.base5[j] = -4.0 * k2;
  }
  return c;
}

CoeffSet assemble_coeffs(const RadialGrid& g, double kappa, const JetArrays& w) {
  if (w.size() != g.size()) throw DomainError("background size does not match the grid");
  CoeffSet c = base_coeffs(g, kappa);
  const double k = kappa;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g.nodes[j];
    if (!(r > 0)) throw DomainError("singular coefficient at rho=0");
    const double om = 1.0 - r * r;
    const double s = std::sqrt(om);
    const double W = w.w[j], Wr = w.wr[j], Wrr = w.wrr[j], Wt = w.wt[j], Wtr = w.wtr[j],
                 Wtt = w.wtt[j];
    c.a0[j] = -2.0 * k * r / s * Wr + Wr * Wr;
    c.a1[j] = 2.0 * k * s * (W + Wt) - (W + Wt) * (W + Wt);
    c.a2[j] = 2.0 * ((Wt - W) / r - Wtr - k * (1.0 + 2.0 / r) * s) * Wr +
              2.0 * (k * (2.0 - r * r) / (om * s) - Wrr) * (W - Wt) + Wr * Wr - 2.0 * k * s * Wrr +
              2.0 * k * r / s * Wtr;
    c.a3[j] = 2.0 * k * r / s * (Wt - W) - 2.0 * Wr * (Wt - W - k * s);
    c.a4[j] = 2.0 * k / (r * s) * ((1.0 + r * r) * W + 5.0 * r * om * Wr - Wt - r * r * Wtt) -
              2.0 * Wr * (Wtt + Wt - 2.0 * W) - 2.0 * Wtr * (Wt - W) + (Wt - W) * (Wt - W) / r -
              3.0 / r * om * Wr * Wr;
    c.a5[j] = 2.0 * k / (r * s) * (r * r * r / om * (W - Wt) + (1.0 + r * r) * Wr - r * Wrr - r * r * Wtr) -
              2.0 * Wr * Wr - 2.0 * Wrr * (W - Wt) + 2.0 * Wtr * Wr - 2.0 / r * Wr * (Wt - W);
  }
  return c;
}

JetArrays jets_from_state(const RadialGrid& g, const Vec& v, const Vec& vt, const Vec& vtt) {
  JetArrays j(g.size());
  j.w = v;
  j.wr = diff1(g, v);
  j.wrr = diff2(g, v);
  j.wt = vt;
  j.wtr = diff1(g, vt);
  j.wtt = vtt;
  return j;
}

Vec nonlinear_forcing(const RadialGrid& g, double kappa, const JetArrays& w) {
  Vec f(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    JetT<double> p{w.w[j], w.wr[j], w.wrr[j], w.wt[j], w.wtr[j], w.wtt[j]};
    f[j] = forcing_point(g.nodes[j], kappa, p);
  }
  return f;
}

double stable_dt(const RadialGrid& g, const OperatorCoeffs& c, double cfl) {
  double cmax = 0.0;
  double ode = 1.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double P0 = c.P0[j], P1 = c.P1[j], P3 = c.P3[j];
    const double disc = std::sqrt(std::max(0.0, P3 * P3 + 4.0 * P0 * P1));
    cmax = std::max(cmax, (std::abs(P3) + disc) / (2.0 * P0));
    ode = std::max({ode, std::abs(c.P2[j] / P0), std::sqrt(std::abs(c.P5[j] / P0))});
  }
  const double ode_dt = 1.0 / ode;
  if (cmax <= 0.0) return ode_dt;
  return std::min(cfl * g.h / cmax, ode_dt);
}

namespace {

void check_finite(const Vec& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x))
      throw NumericalError(std::string("non-finite ") + what + " (signals loss of hyperbolicity)");
}

struct Rk4Work {
  Vec k1v, k1a, k2v, k2a, k3v, k3a, k4v, k4a, tv, tvt;
  explicit Rk4Work(std::size_t n)
      : k1v(n), k1a(n), k2v(n), k2a(n), k3v(n), k3a(n), k4v(n), k4a(n), tv(n), tvt(n) {}
};

// Classical RK4 for (v, v_t)' = (v_t, acc(v, v_t)).
template <class Acc>
FieldState rk4(const FieldState& s, double dt, Acc&& acc) {
  const std::size_t n = s.v.size();
  Rk4Work w(n);
  w.k1v = s.v_tau;
  acc(s.v, s.v_tau, w.k1a);
  for (std::size_t j = 0; j < n; ++j) {
    w.tv[j] = s.v[j] + 0.5 * dt * w.k1v[j];
    w.tvt[j] = s.v_tau[j] + 0.5 * dt * w.k1a[j];
  }
  w.k2v = w.tvt;
  acc(w.tv, w.tvt, w.k2a);
  for (std::size_t j = 0; j < n; ++j) {
    w.tv[j] = s.v[j] + 0.5 * dt * w.k2v[j];
    w.tvt[j] = s.v_tau[j] + 0.5 * dt * w.k2a[j];
  }
  w.k3v = w.tvt;
  acc(w.tv, w.tvt, w.k3a);
  for (std::size_t j = 0; j < n; ++j) {
    w.tv[j] = s.v[j] + dt * w.k3v[j];
    w.tvt[j] = s.v_tau[j] + dt * w.k3a[j];
  }
  w.k4v = w.tvt;
  acc(w.tv, w.tvt, w.k4a);
  FieldState out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.v[j] = s.v[j] + dt / 6.0 * (w.k1v[j] + 2 * w.k2v[j] + 2 * w.k3v[j] + w.k4v[j]);
    out.v_tau[j] = s.v_tau[j] + dt / 6.0 * (w.k1a[j] + 2 * w.k2a[j] + 2 * w.k3a[j] + w.k4a[j]);
  }
  out.tau = s.tau + dt;
  return out;
}

}  // namespace

FieldState step_linear(const RadialGrid& g, const FieldState& s, const CoeffSet& coeffs,
                       const Vec* forcing, double dt, Exec exec) {
  if (s.v.size() != g.size() || s.v_tau.size() != g.size())
    throw DomainError("state size does not match the grid");
  const OperatorCoeffs c = coeffs.to_operator(g);
  const double margin = 0.5 * coeffs.kappa * coeffs.kappa;
  for (std::size_t j = 0; j < g.size(); ++j)
    if (!(c.P0[j] >= margin))
      throw HyperbolicityError("time coefficient " + std::to_string(c.P0[j]) + " below kappa^2/2 at node " +
                               std::to_string(j));
  const double limit = stable_dt(g, c);
  if (!(dt > 0) || dt > limit * (1.0 + 1e-12))
    throw CflError("dt=" + std::to_string(dt) + " exceeds the stable limit " + std::to_string(limit));
  const double* f = forcing ? forcing->data() : nullptr;
  FieldState out = rk4(s, dt, [&](const Vec& v, const Vec& vt, Vec& a) {
    kernels::linear_accel(exec, g, c, v.data(), vt.data(), f, a.data());
  });
  check_finite(out.v, "state");
  check_finite(out.v_tau, "state");
  return out;
}

double energy_L2(const RadialGrid& g, const FieldState& s) {
  const Vec vr = diff1(g, s.v);
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    acc += s.v_tau[j] * s.v_tau[j] + vr[j] * vr[j] + s.v[j] * s.v[j];
  return acc * g.h;
}

double energy_functional(const RadialGrid& g, const FieldState& s, const CoeffSet& c,
                         const EnergyParams& p) {
  const double k = c.kappa, q = 1.0 - k * k;
  const double m1 = p.mu1, m2 = p.mu2;
  const Vec vr = diff1(g, s.v);
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g.nodes[j], om = 1.0 - r * r;
    const double v = s.v[j], vt = s.v_tau[j], dv = vr[j];
    const double cv = 4.0 * (m2 - 1.0) * k * k - m2 + m2 * (k - 1.0) * (k - 1.0) * r * r + m2 * c.a2[j] + c.a5[j];
    const double ct = 1.0 + (k * k - 1.0) * r * r + c.a0[j];
    const double cx = 2.0 * r * q * om + c.a3[j];
    const double cr = q * om * (1.0 - 2.0 * m1 * r - r * r) + c.a1[j] - m1 * c.a3[j];
    acc += 0.5 * cv * v * v + ct * (vt * (m2 * v - m1 * dv) + 0.5 * vt * vt) + m2 * cx * dv * v +
           0.5 * cr * dv * dv;
  }
  return acc * g.h;
}

double sobolev_norm(const RadialGrid& g, const Vec& v, int level) {
  if (level < 0 || level > 2) throw DomainError("Sobolev level must be 0, 1 or 2");
  if (v.size() != g.size()) throw DomainError("array size does not match the grid");
  double acc = 0.0;
  for (double x : v) acc += x * x;
  if (level >= 1)
    for (double x : diff1(g, v)) acc += x * x;
  if (level >= 2)
    for (double x : diff2(g, v)) acc += x * x;
  return std::sqrt(acc * g.h);
}

std::pair<double, double> fit_decay_rate(const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 10) throw DomainError("decay fit needs at least 10 samples");
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!(series[i].second > 0)) throw NumericalError("degenerate fit: non-positive energy sample");
    if (i > 0 && !(series[i].first > series[i - 1].first))
      throw DomainError("decay fit needs strictly increasing tau");
  }
  const std::size_t start = series.size() / 2;
  const double m = static_cast<double>(series.size() - start);
  double sx = 0, sy = 0;
  for (std::size_t i = start; i < series.size(); ++i) {
    sx += series[i].first;
    sy += std::log(series[i].second);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = start; i < series.size(); ++i) {
    const double dx = series[i].first - mx, dy = std::log(series[i].second) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  const double r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {slope, r2};
}

BackgroundFn TrajectoryRecorder::background() const {
  if (levels_.size() < 2) throw DomainError("background needs at least two recorded levels");
  const std::size_t L = levels_.size();
  std::vector<Vec> acc(L, Vec(grid_.size()));
  for (std::size_t k = 0; k < L; ++k) {
    const std::size_t lo = k == 0 ? 0 : k - 1, hi = k + 1 == L ? k : k + 1;
    const double span = (hi - lo) * dt_;
    for (std::size_t j = 0; j < grid_.size(); ++j)
      acc[k][j] = (levels_[hi].v_tau[j] - levels_[lo].v_tau[j]) / span;
  }
  return [grid = grid_, levels = levels_, acc = std::move(acc), dt = dt_](double tau) {
    const double t0 = levels.front().tau;
    const double x = std::clamp((tau - t0) / dt, 0.0, static_cast<double>(levels.size() - 1));
    const std::size_t k = std::min(static_cast<std::size_t>(x), levels.size() - 2);
    const double th = x - static_cast<double>(k);
    const std::size_t n = grid.size();
    Vec v(n), vt(n), vtt(n);
    for (std::size_t j = 0; j < n; ++j) {
      v[j] = (1 - th) * levels[k].v[j] + th * levels[k + 1].v[j];
      vt[j] = (1 - th) * levels[k].v_tau[j] + th * levels[k + 1].v_tau[j];
      vtt[j] = (1 - th) * acc[k][j] + th * acc[k + 1][j];
    }
    return jets_from_state(grid, v, vt, vtt);
  };
}

namespace {

TrajectoryRow make_row(const RadialGrid& g, const FieldState& s, const CoeffSet& c, const EnergyParams& p) {
  const double flux = std::max(std::abs(boundary_slope_left(g, s.v)), std::abs(boundary_slope_right(g, s.v)));
  return {s.tau, energy_L2(g, s), energy_functional(g, s, c, p), sobolev_norm(g, s.v, 1), flux};
}

}  // namespace

EvolveResult evolve(const RadialGrid& g, const FieldState& s0, double kappa, const EvolveOptions& opt) {
  if (!(opt.tau_max > 0)) throw DomainError("tau_max must be positive");
  if (!(kappa > 0 && kappa <= 1)) throw DomainError("kappa must lie in (0,1]");
  opt.energy.validate();
  const bool has_bg = static_cast<bool>(opt.background);
  auto coeffs_at = [&](double tau) {
    return has_bg ? assemble_coeffs(g, kappa, opt.background(tau)) : base_coeffs(g, kappa);
  };
  Vec forcing;
  if (opt.forcing) forcing = nonlinear_forcing(g, kappa, JetArrays(g.size()));

  EvolveResult res;
  CoeffSet c = coeffs_at(s0.tau);
  double dt = opt.dt > 0 ? opt.dt : stable_dt(g, c.to_operator(g));
  const long steps = std::max(1L, static_cast<long>(std::ceil(opt.tau_max / dt - 1e-9)));
  dt = opt.tau_max / static_cast<double>(steps);
  res.dt = dt;

  FieldState s = s0;
  res.energy0 = energy_L2(g, s);
  double bracket_prev = energy_functional(g, s, c, opt.energy);
  res.rows.push_back(make_row(g, s, c, opt.energy));
  for (long n = 1; n <= steps; ++n) {
    const CoeffSet cm = has_bg ? coeffs_at(s.tau + 0.5 * dt) : c;
    s = step_linear(g, s, cm, opt.forcing ? &forcing : nullptr, dt, opt.exec);
    const CoeffSet cn = has_bg ? coeffs_at(s.tau) : c;
    const double bracket = energy_functional(g, s, cn, opt.energy);
    res.max_bracket_increase = std::max(res.max_bracket_increase, bracket - bracket_prev);
    bracket_prev = bracket;
    if (n % opt.sample_every == 0 || n == steps) res.rows.push_back(make_row(g, s, cn, opt.energy));
  }
  res.final_state = s;
  for (const auto& r : res.rows) res.decay.series.emplace_back(r.tau, r.energy_L2);
  if (res.decay.series.size() >= 10 &&
      std::all_of(res.decay.series.begin(), res.decay.series.end(), [](auto& p) { return p.second > 0; })) {
    auto [rate, r2] = fit_decay_rate(res.decay.series);
    res.decay.rate = rate;
    res.decay.r_squared = r2;
  }
  return res;
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blowup: return "blowup";
    case RunStatus::hyperbolicity_lost: return "hyperbolicity_lost";
    case RunStatus::non_finite: return "non_finite";
  }
  return "unknown";
}

double physical_h1_ratio(const RadialGrid& g, double T, double kappa, double tau, const Vec& w) {
  const double S = T * std::exp(-tau);
  const Vec wr = diff1(g, w);
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g.nodes[j];
    const double s = std::sqrt(1.0 - r * r);
    const double d = (kappa - 1.0) * s + w[j];
    const double dr = (kappa - 1.0) * (-r / s) + wr[j];
    acc += S * S * d * d + dr * dr;
  }
  return std::sqrt(acc * g.h / S);
}

NonlinearResult evolve_nonlinear(const RadialGrid& g, const FieldState& s0, double kappa,
                                 const NonlinearOptions& opt) {
  if (!(opt.tau_max > 0)) throw DomainError("tau_max must be positive");
  if (!(kappa > 0 && kappa <= 1)) throw DomainError("kappa must lie in (0,1]");
  const std::size_t n = g.size();
  const CoeffSet base = base_coeffs(g, kappa);
  const OperatorCoeffs c = base.to_operator(g);
  NonlinearResult res;
  double dt = opt.dt > 0 ? opt.dt : stable_dt(g, c);
  const long steps = std::max(1L, static_cast<long>(std::ceil(opt.tau_max / dt - 1e-9)));
  dt = opt.tau_max / static_cast<double>(steps);
  res.dt = dt;
  res.min_time_margin = 1e300;
  res.min_space_margin = 1e300;

  Vec A(n), B(n);
  auto accel = [&](const Vec& w, const Vec& wt, Vec& out) {
    kernels::nonlinear_split(opt.exec, g, kappa, w.data(), wt.data(), A.data(), B.data());
    kernels::linear_accel(opt.exec, g, c, w.data(), wt.data(), B.data(), out.data());
    for (std::size_t j = 0; j < n; ++j) out[j] *= c.P0[j] / (c.P0[j] - A[j]);
  };
  auto snapshot = [&](const FieldState& s) {
    Vec acc(n);
    accel(s.v, s.v_tau, acc);
    const CoeffSet cs = assemble_coeffs(g, kappa, jets_from_state(g, s.v, s.v_tau, acc));
    res.rows.push_back(make_row(g, s, cs, opt.energy));
    const double t = opt.T * (1.0 - std::exp(-s.tau));
    res.physical.push_back({s.tau, t, physical_h1_ratio(g, opt.T, kappa, s.tau, s.v)});
  };
  // Effective principal symbol: time coefficient P0 - df/dw_tt and
  // diffusion P1 + df/dw_rr, evaluated on the current state.
  auto margins = [&](const FieldState& s, double& tm, double& sm) {
    Vec acc(n);
    accel(s.v, s.v_tau, acc);
    const JetArrays jet = jets_from_state(g, s.v, s.v_tau, acc);
    ForcingPartials fp(n);
    kernels::forcing_partials(opt.exec, g, kappa, jet, fp);
    tm = 1e300;
    sm = 1e300;
    for (std::size_t j = 0; j < n; ++j) {
      tm = std::min(tm, c.P0[j] - fp.ftt[j]);
      sm = std::min(sm, c.P1[j] + fp.frr[j]);
    }
  };

  FieldState s = s0;
  snapshot(s);
  const double tol = 1e-14;
  for (long k = 1; k <= steps; ++k) {
    double tm, sm;
    margins(s, tm, sm);
    res.min_time_margin = std::min(res.min_time_margin, tm);
    res.min_space_margin = std::min(res.min_space_margin, sm);
    if (tm < 0.5 * kappa * kappa || sm < -tol) {
      res.status = RunStatus::hyperbolicity_lost;
      std::ostringstream os;
      os << "principal symbol degenerate at tau=" << s.tau << " (time margin " << tm
         << ", diffusion margin " << sm << ")";
      res.message = os.str();
      break;
    }
    FieldState next = rk4(s, dt, accel);
    bool finite = true;
    double vmax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(next.v[j]) || !std::isfinite(next.v_tau[j])) finite = false;
      vmax = std::max(vmax, std::abs(next.v[j]));
    }
    if (!finite) {
      res.status = RunStatus::non_finite;
      res.message = "non-finite state at tau=" + std::to_string(next.tau);
      break;
    }
    s = next;
    if (vmax > opt.ceiling) {
      res.status = RunStatus::blowup;
      res.message = "state norm exceeded the ceiling at tau=" + std::to_string(s.tau);
      snapshot(s);
      break;
    }
    if (k % opt.sample_every == 0 || k == steps) snapshot(s);
  }
  res.tau_reached = s.tau;
  res.final_state = s;
  for (const auto& r : res.rows) res.decay.series.emplace_back(r.tau, r.energy_L2);
  if (res.decay.series.size() >= 10 &&
      std::all_of(res.decay.series.begin(), res.decay.series.end(), [](auto& p) { return p.second > 0; })) {
    auto [rate, r2] = fit_decay_rate(res.decay.series);
    res.decay.rate = rate;
    res.decay.r_squared = r2;
  }
  return res;
}

namespace {

void put_f64(std::ostream& os, double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("truncated checkpoint");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double x;
  std::memcpy(&x, &u, 8);
  return x;
}

}  // namespace

void write_checkpoint(const std::string& path, const RadialGrid& g, double kappa, const FieldState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path);
  os.write("LCL1", 4);
  put_f64(os, g.sigma);
  put_f64(os, kappa);
  put_f64(os, s.tau);
  put_f64(os, static_cast<double>(g.n_cells));
  for (double x : s.v) put_f64(os, x);
  for (double x : s.v_tau) put_f64(os, x);
  if (!os) throw IoError("failed writing " + path);
}

std::pair<FieldState, std::pair<double, double>> read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "LCL1", 4) != 0) throw IoError("bad checkpoint magic");
  const double sigma = get_f64(is), kappa = get_f64(is), tau = get_f64(is);
  const double nd = get_f64(is);
  if (!(nd >= 1 && nd < 1e8)) throw IoError("bad checkpoint size");
  const std::size_t n = static_cast<std::size_t>(nd);
  FieldState s(n);
  s.tau = tau;
  for (auto& x : s.v) x = get_f64(is);
  for (auto& x : s.v_tau) x = get_f64(is);
  return {s, {sigma, kappa}};
}

}  // namespace lc
