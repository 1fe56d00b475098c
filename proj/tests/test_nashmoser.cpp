#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lightcone/errors.hpp"
#include "lightcone/nashmoser.hpp"

using namespace lc;

namespace {

Vec quartic_bump(const RadialGrid& g) {
  Vec b(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double s = std::sin(std::numbers::pi * g.nodes[j] / g.sigma);
    b[j] = s * s * s * s;
  }
  return b;
}

Vec wiggle(const RadialGrid& g) {
  Vec v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g.nodes[j] / g.sigma;
    v[j] = std::cos(0.5 * std::numbers::pi * r) + 0.3 * std::cos(4.5 * std::numbers::pi * r) * r;
  }
  return v;
}

double max_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ScheduleParams short_schedule() {
  ScheduleParams s;
  s.tau_horizon = 0.2;
  s.dt = 0.01;
  s.m_max = 4;
  return s;
}

}  // namespace

TEST_CASE("full band smoothing is the identity") {
  RadialGrid g(0.6, 32);
  const Vec v = wiggle(g);
  CHECK(max_diff(smoothing_apply({32, 32}, v), v) <= 1e-12);
}

TEST_CASE("smoothing is a projection and nests") {
  RadialGrid g(0.6, 40);
  const Vec v = wiggle(g);
  for (int th : {1, 3, 8, 20}) {
    const Vec p = smoothing_apply({th, 40}, v);
    CHECK(max_diff(smoothing_apply({th, 40}, p), p) <= 1e-12);
  }
  const Vec a = smoothing_apply({5, 40}, smoothing_apply({12, 40}, v));
  const Vec b = smoothing_apply({12, 40}, smoothing_apply({5, 40}, v));
  const Vec c = smoothing_apply({5, 40}, v);
  CHECK(max_diff(a, c) <= 1e-12);
  CHECK(max_diff(b, c) <= 1e-12);
}

TEST_CASE("smoothing matrix agrees with the kernel and serial path") {
  RadialGrid g(0.6, 24);
  const Vec v = wiggle(g);
  const SmoothingOp op{7, 24};
  const Eigen::MatrixXd P = smoothing_matrix(op);
  const Eigen::VectorXd pv = P * Eigen::Map<const Eigen::VectorXd>(v.data(), 24);
  const Vec k = smoothing_apply(op, v, Exec::serial);
  for (int i = 0; i < 24; ++i) CHECK(pv[i] == doctest::Approx(k[i]).epsilon(1e-12));
  CHECK((P * P - P).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(k == smoothing_apply(op, v, Exec::parallel));
}

TEST_CASE("smoothing operator validation") {
  CHECK_THROWS_AS(smoothing_apply({0, 10}, Vec(10, 1.0)), DomainError);
  CHECK(smoothing_apply({11, 10}, Vec(10, 1.0)) == smoothing_apply({10, 10}, Vec(10, 1.0)));
  CHECK_THROWS_AS(smoothing_apply({4, 10}, Vec(9, 1.0)), DomainError);
}

TEST_CASE("measured smoothing constants are finite and positive") {
  RadialGrid g(0.6, 64);
  for (auto [k1, k2] : {std::pair{1, 0}, std::pair{2, 1}, std::pair{0, 2}}) {
    const SmoothingConstant c = measure_smoothing_constant(g, k1, k2, 20, 5);
    CHECK(std::isfinite(c.C));
    CHECK(c.C > 0.0);
    CHECK(c.worst_theta >= 1);
  }
  const SmoothingConstant a = measure_smoothing_constant(g, 1, 0, 10, 9);
  const SmoothingConstant b = measure_smoothing_constant(g, 1, 0, 10, 9);
  CHECK(a.C == b.C);
}

TEST_CASE("schedule validation and norm ladder") {
  ScheduleParams s;
  CHECK_NOTHROW(s.validate());
  for (int m = 0; m < 10; ++m) CHECK(s.k_level(m + 1) < s.k_level(m));
  CHECK(s.k_level(0) == doctest::Approx(s.k));
  CHECK(s.theta(0, 50) == 1);
  CHECK(s.theta(3, 50) == 8);
  CHECK(s.theta(9, 50) == 50);
  CHECK(s.levels() == 1001);

  ScheduleParams bad = s;
  bad.N0 = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = s;
  bad.d = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = s;
  bad.k0 = 1.5;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = s;
  bad.dt = 20.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("kappa one with the zero trajectory is an exact solution") {
  RadialGrid g(0.6, 20);
  const ScheduleParams s = short_schedule();
  const Trajectory w = zero_trajectory(g, s);
  CHECK(w.size() == static_cast<std::size_t>(s.levels()) + 1);
  const Trajectory E = approx_residual(w, 1.0, g, {20, 20});
  CHECK(residual_norm(g, E) == 0.0);

  const NewtonStepResult st = newton_step(w, E, 1.0, g, {20, 20}, s);
  CHECK(st.norm_h == 0.0);

  const IterationOutcome out = run_iteration(w, 1.0, g, s);
  CHECK(out.report.converged());
  CHECK(out.state.m == 0);
  CHECK(out.report.E0 == 0.0);
}

TEST_CASE("Newton step solves the smoothed linear system") {
  RadialGrid g(0.6, 20);
  const ScheduleParams s = short_schedule();
  const Trajectory w = zero_trajectory(g, s);
  const Trajectory E = approx_residual(w, 0.95, g, {20, 20});
  CHECK(residual_norm(g, E) > 0.0);
  const NewtonStepResult st = newton_step(w, E, 0.95, g, {20, 20}, s);
  CHECK(st.solve_residual <= 1e-6);
  CHECK(st.norm_h > 0.0);
  for (double x : st.h.levels[0]) CHECK(x == 0.0);
}

TEST_CASE("error bound constant") {
  ScheduleParams s;
  const ErrorBoundReport z = error_bound_check(0.0, 0.0, 3, s);
  CHECK(z.c_m == 0.0);
  CHECK(z.within_cap);
  CHECK_FALSE(error_bound_check(0.0, 1e-3, 3, s).within_cap);
  const ErrorBoundReport r = error_bound_check(0.1, 0.02, 2, s);
  CHECK(r.c_m == doctest::Approx(0.02 / (256.0 * 0.01)));
  CHECK(r.within_cap);
}

TEST_CASE("precondition failure is reported") {
  RadialGrid g(0.6, 16);
  const ScheduleParams s = short_schedule();
  const IterationOutcome out = run_iteration(zero_trajectory(g, s), 0.5, g, s);
  CHECK(out.report.status == IterationStatus::precondition_failed);
  CHECK(out.report.precondition >= 1.0);
  CHECK(to_string(out.report.status) == "precondition_failed");
}

TEST_CASE("iterate equals initial guess plus accumulated corrections") {
  RadialGrid g(0.6, 16);
  ScheduleParams s = short_schedule();
  s.m_max = 3;
  const IterationOutcome out = run_iteration(zero_trajectory(g, s), 0.9999, g, s);
  CHECK(out.report.precondition < 1.0);
  CHECK(out.state.history.size() >= 2);
  CHECK(out.report.accumulation_error <= 1e-10);
  CHECK(out.report.log_E.size() == out.report.doubling_ratios.size() + 1);
}

TEST_CASE("initial data shift") {
  RadialGrid g(0.6, 40);
  ScheduleParams s = short_schedule();
  const Trajectory w = zero_trajectory(g, s);
  const Vec p0 = quartic_bump(g);
  Vec p1 = p0;
  for (double& x : p1) x *= 0.5;

  const Trajectory same = shift_initial_data(w, g, 0.0, p0, p1);
  for (std::size_t k = 0; k < w.size(); ++k) CHECK(same.levels[k] == w.levels[k]);

  const Trajectory sh = shift_initial_data(w, g, 0.1, p0, p1);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(sh.levels[0][i] == doctest::Approx(-0.1 * p0[i]));
  const double e = std::exp(-5 * s.dt) - 1.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(sh.levels[5][i] == doctest::Approx(-0.1 * p0[i] + 0.1 * e * p1[i]));

  Vec bad(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) bad[j] = std::cos(0.5 * std::numbers::pi * g.nodes[j] / g.sigma);
  CHECK_THROWS_AS(shift_initial_data(w, g, 0.1, bad, p1), DomainError);
  CHECK_THROWS_AS(shift_initial_data(w, g, 0.1, Vec(3, 0.0), p1), DomainError);
}
