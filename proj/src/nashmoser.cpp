#include "lightcone/nashmoser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lightcone/errors.hpp"
#include "lightcone/forcing.hpp"
#include "lightcone/linearized.hpp"
#include "lightcone/spectral.hpp"

namespace lc {

void ScheduleParams::validate() const {
  if (!(N0 > 1)) throw DomainError("N0 must exceed 1");
  if (!(l >= 2)) throw DomainError("top regularity l must be at least 2");
  if (!(2 <= k_bar && k_bar < k0 && k0 <= k && k <= l))
    throw DomainError("norm ladder requires 2 <= k_bar < k0 <= k <= l");
  if (!(d > 0 && d < 1)) throw DomainError("contraction target d must lie in (0,1)");
  if (m_max < 1) throw DomainError("m_max must be at least 1");
  if (!(tau_horizon > 0)) throw DomainError("tau_horizon must be positive");
  if (!(dt > 0 && dt <= tau_horizon)) throw DomainError("dt must lie in (0, tau_horizon]");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  if (!(c_cap > 0)) throw DomainError("c_cap must be positive");
}

double ScheduleParams::k_level(int m) const { return k_bar + (k - k_bar) / std::pow(2.0, m); }

int ScheduleParams::theta(int m, int basis_size) const {
  const double t = std::pow(N0, m);
  return t >= basis_size ? basis_size : std::max(1, static_cast<int>(std::floor(t + 1e-9)));
}

int ScheduleParams::levels() const { return static_cast<int>(std::lround(tau_horizon / dt)) + 1; }

Trajectory zero_trajectory(const RadialGrid& g, const ScheduleParams& s) {
  s.validate();
  Trajectory t;
  t.dt = s.dt;
  t.levels.assign(static_cast<std::size_t>(s.levels()) + 1, Vec(g.size(), 0.0));
  return t;
}

JetArrays trajectory_jets(const RadialGrid& g, const Trajectory& w, std::size_t k) {
  if (k + 1 >= w.size()) throw DomainError("trajectory level out of range");
  const std::size_t n = g.size();
  const double dt = w.dt;
  const Vec& cur = w.levels[k];
  const Vec& nxt = w.levels[k + 1];
  const Vec& prv = k == 0 ? w.levels[1] : w.levels[k - 1];
  Vec vt(n), vtt(n);
  for (std::size_t j = 0; j < n; ++j) {
    vt[j] = k == 0 ? 0.0 : (nxt[j] - prv[j]) / (2.0 * dt);
    vtt[j] = (nxt[j] - 2.0 * cur[j] + prv[j]) / (dt * dt);
  }
  return jets_from_state(g, cur, vt, vtt);
}

namespace {

Vec linear_part(const RadialGrid& g, const OperatorCoeffs& c, const JetArrays& j) {
  const Vec G = inv_rho_diff1(g, j.w);
  Vec out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    out[i] = c.P0[i] * j.wtt[i] - c.P1[i] * j.wrr[i] + c.P2[i] * j.wt[i] + c.P3[i] * j.wtr[i] +
             c.rP4[i] * G[i] + c.P5[i] * j.w[i];
  return out;
}

double l2(const RadialGrid& g, const Vec& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc * g.h);
}

}  // namespace

Trajectory approx_residual(const Trajectory& w, double kappa, const RadialGrid& g, const SmoothingOp& op,
                           Exec exec) {
  if (w.size() < 2) throw DomainError("trajectory needs at least two levels");
  const OperatorCoeffs c = base_coeffs(g, kappa).to_operator(g);
  Trajectory e;
  e.dt = w.dt;
  e.levels.resize(w.size() - 1);
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const JetArrays j = trajectory_jets(g, w, k);
    const Vec L = linear_part(g, c, j);
    const Vec f = smoothing_apply(op, nonlinear_forcing(g, kappa, j), exec);
    Vec r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) r[i] = L[i] - f[i];
    e.levels[k] = std::move(r);
  }
  return e;
}

double residual_norm(const RadialGrid& g, const Trajectory& e) {
  double s = 0.0;
  for (const auto& v : e.levels) s = std::max(s, l2(g, v));
  return s;
}

double trajectory_norm(const RadialGrid& g, const Trajectory& w) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    Vec vt(g.size(), 0.0);
    if (k > 0)
      for (std::size_t j = 0; j < g.size(); ++j) vt[j] = (w.levels[k + 1][j] - w.levels[k - 1][j]) / (2.0 * w.dt);
    s = std::max(s, sobolev_norm(g, w.levels[k], 2) + sobolev_norm(g, vt, 1));
  }
  return s;
}

namespace {

// Partial derivatives of the (smoothed) source with respect to the jet, in
// the selected linearization.
ForcingPartials source_partials(const RadialGrid& g, double kappa, const JetArrays& j, LinearizationMode mode,
                                Exec exec) {
  ForcingPartials fp(g.size());
  if (mode == LinearizationMode::consistent) {
    kernels::forcing_partials(exec, g, kappa, j, fp);
    return fp;
  }
  const CoeffSet cs = assemble_coeffs(g, kappa, j);
  for (std::size_t i = 0; i < g.size(); ++i) {
    fp.ftt[i] = -cs.a0[i];
    fp.frr[i] = cs.a1[i];
    fp.ft[i] = -cs.a2[i];
    fp.ftr[i] = -cs.a3[i];
    fp.fr[i] = -cs.a4[i];
    fp.fw[i] = -cs.a5[i];
  }
  return fp;
}

// Y = M * T for the tridiagonal stencil matrix T.
Eigen::MatrixXd times_tridiagonal(const Eigen::MatrixXd& M, const Eigen::MatrixXd& T) {
  const int n = static_cast<int>(T.rows());
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(M.rows(), n);
  for (int j = 0; j < n; ++j)
    for (int i = std::max(0, j - 1); i <= std::min(n - 1, j + 1); ++i)
      if (T(i, j) != 0.0) Y.col(j) += M.col(i) * T(i, j);
  return Y;
}

}  // namespace

NewtonStepResult newton_step(const Trajectory& w, const Trajectory& E, double kappa, const RadialGrid& g,
                             const SmoothingOp& op, const ScheduleParams& s) {
  s.validate();
  op.validate();
  if (E.size() + 1 != w.size()) throw DomainError("residual and trajectory lengths are inconsistent");
  const int n = g.n_cells;
  const std::size_t K = E.size() - 1;
  const double dt = w.dt;
  const OperatorCoeffs c = base_coeffs(g, kappa).to_operator(g);
  const Eigen::MatrixXd D1 = diff1_matrix(g);
  const bool smooth = s.mode == LinearizationMode::consistent;
  const Eigen::MatrixXd Pi = smooth ? smoothing_matrix(op) : Eigen::MatrixXd::Identity(n, n);
  auto project = [&](const Vec& v) { return smooth ? smoothing_apply(op, v, s.exec) : v; };

  NewtonStepResult res;
  res.norm_E = residual_norm(g, E);
  res.h.dt = dt;
  res.h.levels.assign(w.size(), Vec(g.size(), 0.0));
  res.min_time_margin = std::numeric_limits<double>::infinity();
  if (res.norm_E == 0.0) return res;

  for (std::size_t k = 0; k <= K; ++k) {
    const JetArrays jet = trajectory_jets(g, w, k);
    const ForcingPartials fp = source_partials(g, kappa, jet, s.mode, s.exec);
    for (int i = 0; i < n; ++i) {
      const double margin = c.P0[i] - fp.ftt[i];
      res.min_time_margin = std::min(res.min_time_margin, margin);
      if (!(margin >= 0.5 * kappa * kappa)) {
        std::ostringstream os;
        os << "effective time coefficient " << margin << " at tau=" << k * dt << ", rho=" << g.nodes[i];
        throw HyperbolicityError(os.str());
      }
    }
    const double ctt = (k == 0 ? 2.0 : 1.0) / (dt * dt);
    const double ct = k == 0 ? 0.0 : 1.0 / (2.0 * dt);

    // Coefficient matrix of h^{k+1}.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd PF(n, n), PG(n, n);
    for (int i = 0; i < n; ++i) {
      PF.col(i) = Pi.col(i) * (fp.ftt[i] * ctt + fp.ft[i] * ct);
      PG.col(i) = Pi.col(i) * (fp.ftr[i] * ct);
    }
    A -= PF + times_tridiagonal(PG, D1);
    for (int i = 0; i < n; ++i) {
      A(i, i) += c.P0[i] * ctt + c.P2[i] * ct;
      A.row(i) += c.P3[i] * ct * D1.row(i);
    }

    Vec rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -E.levels[k][i];
    if (k >= 1) {
      const Vec& hk = res.h.levels[k];
      const Vec hr = diff1(g, hk), hrr = diff2(g, hk), hG = inv_rho_diff1(g, hk);
      Vec src(n);
      for (int i = 0; i < n; ++i)
        src[i] = fp.fw[i] * hk[i] + fp.fr[i] * hr[i] + fp.frr[i] * hrr[i] - 2.0 * fp.ftt[i] * hk[i] / (dt * dt);
      const Vec psrc = project(src);
      for (int i = 0; i < n; ++i) {
        const double lin = -2.0 * c.P0[i] * hk[i] / (dt * dt) - c.P1[i] * hrr[i] + c.rP4[i] * hG[i] + c.P5[i] * hk[i];
        rhs[i] -= lin - psrc[i];
      }
    }
    if (k >= 2) {
      const Vec& hm = res.h.levels[k - 1];
      const Vec hr = diff1(g, hm);
      Vec src(n);
      for (int i = 0; i < n; ++i)
        src[i] = fp.ftt[i] * hm[i] / (dt * dt) - fp.ft[i] * hm[i] / (2.0 * dt) - fp.ftr[i] * hr[i] / (2.0 * dt);
      const Vec psrc = project(src);
      for (int i = 0; i < n; ++i) {
        const double lin = c.P0[i] * hm[i] / (dt * dt) - c.P2[i] * hm[i] / (2.0 * dt) - c.P3[i] * hr[i] / (2.0 * dt);
        rhs[i] -= lin - psrc[i];
      }
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (!(lu.rcond() > 1e-14)) throw NumericalError("singular level matrix in the Newton solve");
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
    const Eigen::VectorXd x = lu.solve(b);
    const double resid = (A * x - b).norm() * std::sqrt(g.h);
    res.solve_residual = std::max(res.solve_residual, resid / res.norm_E);
    Vec& out = res.h.levels[k + 1];
    for (int i = 0; i < n; ++i) out[i] = x[i];
    if (!x.allFinite()) throw NumericalError("non-finite correction in the Newton solve");
  }
  res.norm_h = trajectory_norm(g, res.h);
  res.ratio = res.norm_h / res.norm_E;
  return res;
}

ErrorBoundReport error_bound_check(double norm_h, double norm_E_next, int m, const ScheduleParams& s) {
  ErrorBoundReport r;
  if (norm_h == 0.0) {
    r.c_m = 0.0;
    r.within_cap = norm_E_next == 0.0;
    return r;
  }
  const double Nm = std::pow(s.N0, m);
  r.c_m = norm_E_next / (std::pow(Nm, 4) * norm_h * norm_h);
  r.within_cap = r.c_m <= s.c_cap;
  return r;
}

std::string to_string(IterationStatus s) {
  switch (s) {
    case IterationStatus::converged: return "converged";
    case IterationStatus::max_iterations: return "max_iterations";
    case IterationStatus::diverged: return "diverged";
    case IterationStatus::hyperbolicity_lost: return "hyperbolicity_lost";
    case IterationStatus::precondition_failed: return "precondition_failed";
  }
  return "unknown";
}

IterationOutcome run_iteration(const Trajectory& w0, double kappa, const RadialGrid& g, const ScheduleParams& s) {
  s.validate();
  if (!(kappa > 0 && kappa <= 1)) throw DomainError("kappa must lie in (0,1]");
  if (static_cast<int>(w0.size()) != s.levels() + 1) throw DomainError("initial trajectory length does not match the schedule");
  const int n = g.n_cells;
  IterationOutcome out;
  IterationState& st = out.state;
  ConvergenceReport& rep = out.report;
  st.w0 = w0;
  st.w = w0;
  Trajectory sum_h = w0;
  for (auto& v : sum_h.levels) std::fill(v.begin(), v.end(), 0.0);

  auto full_band = [&](const Trajectory& w) { return residual_norm(g, approx_residual(w, kappa, g, {n, n}, s.exec)); };

  st.E = approx_residual(st.w, kappa, g, {s.theta(0, n), n}, s.exec);
  rep.E0 = residual_norm(g, st.E);
  rep.precondition = std::pow(s.N0, 8) * rep.E0;
  rep.log_E.push_back(std::log(rep.E0));
  st.history.push_back({0, s.theta(0, n), s.k_level(0), 0.0, rep.E0, 0.0, 0.0, 0.0, trajectory_norm(g, st.w)});
  if (rep.E0 < s.tol && full_band(st.w) < s.tol) {
    rep.status = IterationStatus::converged;
    rep.final_residual = rep.E0;
    rep.message = "initial approximation already solves the equation";
    return out;
  }
  if (!(rep.precondition < 1.0)) {
    rep.status = IterationStatus::precondition_failed;
    std::ostringstream os;
    os << "N0^8 ||E0|| = " << rep.precondition << " is not below 1";
    rep.message = os.str();
    rep.final_residual = rep.E0;
    return out;
  }

  double prev = rep.E0;
  int increases = 0;
  rep.status = IterationStatus::max_iterations;
  for (int m = 1; m <= s.m_max; ++m) {
    const int theta = s.theta(m, n);
    const SmoothingOp op{theta, n};
    const Trajectory Em1 = approx_residual(st.w, kappa, g, op, s.exec);
    NewtonStepResult step;
    try {
      step = newton_step(st.w, Em1, kappa, g, op, s);
    } catch (const HyperbolicityError& e) {
      rep.status = IterationStatus::hyperbolicity_lost;
      rep.message = std::string("step ") + std::to_string(m) + ": " + e.what();
      break;
    } catch (const NumericalError& e) {
      rep.status = IterationStatus::diverged;
      rep.message = std::string("step ") + std::to_string(m) + ": " + e.what();
      break;
    }
    for (std::size_t k = 0; k < st.w.size(); ++k)
      for (int i = 0; i < n; ++i) {
        st.w.levels[k][i] += step.h.levels[k][i];
        sum_h.levels[k][i] += step.h.levels[k][i];
      }
    st.h = step.h;
    st.E = approx_residual(st.w, kappa, g, op, s.exec);
    st.m = m;
    const double normE = residual_norm(g, st.E);
    const ErrorBoundReport eb = error_bound_check(step.norm_h, normE, m, s);
    st.history.push_back({m, theta, s.k_level(m), step.norm_h, normE, eb.c_m, step.ratio, step.solve_residual,
                          trajectory_norm(g, st.w)});
    rep.log_E.push_back(std::log(normE));
    const double lp = rep.log_E[rep.log_E.size() - 2];
    rep.doubling_ratios.push_back(lp != 0.0 ? rep.log_E.back() / lp : std::numeric_limits<double>::quiet_NaN());
    rep.final_residual = normE;
    if (!std::isfinite(normE)) {
      rep.status = IterationStatus::diverged;
      rep.message = "non-finite residual at step " + std::to_string(m);
      break;
    }
    if (normE < s.tol && theta >= n) {
      rep.status = IterationStatus::converged;
      rep.message = "residual below tolerance at full band";
      break;
    }
    increases = normE > prev ? increases + 1 : 0;
    prev = normE;
    if (increases >= 2) {
      rep.status = IterationStatus::diverged;
      rep.message = "residual increased on two consecutive steps (step " + std::to_string(m) + ")";
      break;
    }
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < st.w.size(); ++k)
    for (int i = 0; i < n; ++i)
      acc = std::max(acc, std::abs(st.w.levels[k][i] - (w0.levels[k][i] + sum_h.levels[k][i])));
  rep.accumulation_error = acc;
  return out;
}

Trajectory shift_initial_data(const Trajectory& w, const RadialGrid& g, double eps, const Vec& w0p,
                              const Vec& w1p) {
  if (w0p.size() != g.size() || w1p.size() != g.size()) throw DomainError("profile length does not match the grid");
  for (const Vec* p : {&w0p, &w1p}) {
    double mx = 0.0;
    for (double x : *p) mx = std::max(mx, std::abs(x));
    const double tol = 10.0 * g.h * mx / (g.sigma * g.sigma) + 1e-14;
    if (std::abs(boundary_slope_left(g, *p)) > tol || std::abs(boundary_slope_right(g, *p)) > tol ||
        std::abs(boundary_value_left(g, *p)) > tol * g.h)
      throw DomainError("profile must vanish with its first derivative at both boundary points");
  }
  Trajectory out = w;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double e = std::exp(-static_cast<double>(k) * w.dt) - 1.0;
    for (std::size_t i = 0; i < g.size(); ++i) out.levels[k][i] += -eps * w0p[i] + eps * e * w1p[i];
  }
  return out;
}

}  // namespace lc
