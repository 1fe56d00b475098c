#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "lightcone/errors.hpp"
#include "lightcone/linearized.hpp"

using namespace lc;

namespace {

Vec bump(const RadialGrid& g, int mode = 1) {
  Vec b(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double s = std::sin(mode * std::numbers::pi * g.nodes[j] / g.sigma);
    b[j] = s * s;
  }
  return b;
}

JetArrays constant_jet(std::size_t n, double c) {
  JetArrays j(n);
  std::fill(j.w.begin(), j.w.end(), c);
  return j;
}

}  // namespace

TEST_CASE("zero background gives zero perturbation coefficients") {
  const RadialGrid g(0.5, 40);
  const double k = 0.95;
  const CoeffSet c = assemble_coeffs(g, k, JetArrays(g.size()));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g.nodes[j];
    CHECK(c.a0[j] == 0.0);
    CHECK(c.a1[j] == 0.0);
    CHECK(c.a2[j] == 0.0);
    CHECK(c.a3[j] == 0.0);
    CHECK(c.a4[j] == 0.0);
    CHECK(c.a5[j] == 0.0);
    CHECK(c.base0[j] == doctest::Approx(1.0 + (k * k - 1.0) * r * r));
    CHECK(c.base0[j] >= k * k);
  }
}

TEST_CASE("constant background") {
  const RadialGrid g(0.5, 40);
  const double k = 0.9, cst = 0.01;
  const CoeffSet c = assemble_coeffs(g, k, constant_jet(g.size(), cst));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g.nodes[j];
    CHECK(c.a0[j] == 0.0);
    CHECK(c.a1[j] == doctest::Approx(2.0 * k * std::sqrt(1.0 - r * r) * cst - cst * cst).epsilon(1e-14));
  }
}

TEST_CASE("a3 vanishes where w_tau = w and w_rho = 0") {
  const RadialGrid g(0.5, 10);
  JetArrays w = constant_jet(g.size(), 0.02);
  w.wt = w.w;
  w.wrr.assign(g.size(), 0.3);
  w.wtt.assign(g.size(), -0.2);
  const CoeffSet c = assemble_coeffs(g, 0.95, w);
  for (double x : c.a3) CHECK(x == 0.0);
}

TEST_CASE("non-autonomous forcing") {
  const RadialGrid g(0.8, 4);  // nodes 0.1, 0.3, 0.5, 0.7
  const Vec f = nonlinear_forcing(g, 0.99, JetArrays(g.size()));
  CHECK(std::abs(f[2]) == doctest::Approx(0.045497).epsilon(1e-5 / 0.045497));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g.nodes[j];
    CHECK(f[j] == doctest::Approx(-2.0 * 0.99 * (1.0 - 0.99 * 0.99) / std::sqrt(1.0 - r * r)).epsilon(1e-14));
  }
  for (double x : nonlinear_forcing(g, 1.0, JetArrays(g.size()))) CHECK(x == 0.0);
}

TEST_CASE("stepper basics") {
  const RadialGrid g(0.5, 50);
  const CoeffSet c = base_coeffs(g, 0.95);
  const double dt = stable_dt(g, c.to_operator(g));
  const FieldState z(g.size());
  const FieldState z1 = step_linear(g, z, c, nullptr, dt);
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(z1.v[j] == 0.0);
    CHECK(z1.v_tau[j] == 0.0);
  }
  CHECK_THROWS_AS(step_linear(g, z, c, nullptr, 10.0 * dt), CflError);
}

TEST_CASE("one step of a smooth bump does not raise the bracket energy") {
  const RadialGrid g(0.5, 100);
  const CoeffSet c = base_coeffs(g, 0.95);
  FieldState s(g.size());
  s.v = bump(g);
  const double dt = stable_dt(g, c.to_operator(g));
  const EnergyParams p;
  const double e0 = energy_functional(g, s, c, p);
  const double e1 = energy_functional(g, step_linear(g, s, c, nullptr, dt), c, p);
  MESSAGE("bracket energy before " << e0 << " after " << e1 << " dt " << dt);
  CHECK(e1 <= e0 + dt * 1e-6 * std::abs(e0));
}

TEST_CASE("second-order spatial convergence") {
  const double tau = 0.2, dt = 2.5e-4, k = 0.95;
  auto run = [&](int n) {
    const RadialGrid g(0.5, n);
    const CoeffSet c = base_coeffs(g, k);
    FieldState s(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) s.v[j] = std::cos(0.5 * std::numbers::pi * g.nodes[j] / g.sigma);
    for (int i = 0; i < static_cast<int>(std::lround(tau / dt)); ++i) s = step_linear(g, s, c, nullptr, dt);
    return s.v;
  };
  const Vec fine = run(640);
  auto err = [&](int n) {
    const Vec v = run(n);
    const int r = 640 / n;
    double e = 0.0;
    for (int j = 0; j < n; ++j) {
      // cell j of the coarse grid has the same centre as the average of
      // the two middle fine cells
      const double ref = 0.5 * (fine[j * r + r / 2 - 1] + fine[j * r + r / 2]);
      e = std::max(e, std::abs(v[j] - ref));
    }
    return e;
  };
  const double ratio = err(40) / err(80);
  MESSAGE("refinement ratio " << ratio);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("kappa = 1 reduces to the pointwise mode ODE") {
  const RadialGrid g(0.5, 20);
  const CoeffSet c = base_coeffs(g, 1.0);
  FieldState s(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    s.v[j] = 1.0 + g.nodes[j];
    s.v_tau[j] = -0.5 * g.nodes[j];
  }
  const FieldState s0 = s;
  const double dt = 1e-3;
  for (int i = 0; i < 1000; ++i) s = step_linear(g, s, c, nullptr, dt);
  // v'' + 3v' - 4v = 0: roots 1 and -4
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double v0 = s0.v[j], v1 = s0.v_tau[j];
    const double c1 = (4.0 * v0 + v1) / 5.0, c2 = (v0 - v1) / 5.0;
    CHECK(std::abs(s.v[j] - (c1 * std::exp(1.0) + c2 * std::exp(-4.0))) < 1e-6);
  }
}

TEST_CASE("bracket energy against an independent evaluation") {
  const RadialGrid g(0.5, 64);
  const double k = 0.95, m1 = 1e-3, m2 = 2.0;
  const CoeffSet c = base_coeffs(g, k);
  FieldState s(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) s.v[j] = std::sin(std::numbers::pi * g.nodes[j] / g.sigma);
  s.v_tau = s.v;
  double oracle = 0.0;
  const int n = g.n_cells;
  for (int j = 0; j < n; ++j) {
    const double r = g.nodes[j];
    const double v = s.v[j];
    const double vr = stencil::d1(s.v.data(), j, n, g.h);
    const double q = 1.0 - k * k;
    const double density = 0.5 * (4.0 * (m2 - 1.0) * k * k - m2 + m2 * (k - 1.0) * (k - 1.0) * r * r) * v * v +
                           (1.0 - q * r * r) * (v * (m2 * v - m1 * vr) + 0.5 * v * v) +
                           m2 * 2.0 * r * q * (1.0 - r * r) * vr * v +
                           0.5 * q * (1.0 - r * r) * (1.0 - 2.0 * m1 * r - r * r) * vr * vr;
    oracle += density * g.h;
  }
  CHECK(std::abs(energy_functional(g, s, c, {m1, m2}) - oracle) < 1e-10);
  CHECK(energy_functional(g, FieldState(g.size()), c, {m1, m2}) == 0.0);
  CHECK_THROWS_AS(EnergyParams({1.2, 2.0}).validate(), DomainError);
}

TEST_CASE("Sobolev norm") {
  const RadialGrid g(0.5, 2000);
  Vec v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) v[j] = std::sin(std::numbers::pi * g.nodes[j] / g.sigma);
  CHECK(std::abs(sobolev_norm(g, v, 0) - std::sqrt(0.25)) < 1e-4);
  CHECK(sobolev_norm(g, Vec(g.size(), 0.0), 2) == 0.0);
  Vec w = v;
  for (auto& x : w) x *= -3.0;
  for (int l = 0; l <= 2; ++l)
    CHECK(std::abs(sobolev_norm(g, w, l) - 3.0 * sobolev_norm(g, v, l)) < 1e-12 * sobolev_norm(g, w, l));
  CHECK_THROWS_AS(sobolev_norm(g, v, 3), DomainError);
}

TEST_CASE("decay fit") {
  std::vector<std::pair<double, double>> a, b, c;
  for (int i = 0; i <= 200; ++i) {
    const double t = 0.1 * i;
    a.emplace_back(t, std::exp(-2.0 * t));
    b.emplace_back(t, 3.0);
    c.emplace_back(t, std::exp(-2.0 * t) * (1.0 + 0.01 * std::sin(t)));
  }
  CHECK(fit_decay_rate(a).first == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(std::abs(fit_decay_rate(b).first) < 1e-12);
  CHECK(std::abs(fit_decay_rate(c).first + 2.0) < 0.02);
  b[5].second = 0.0;
  CHECK_THROWS_AS(fit_decay_rate(b), NumericalError);
  CHECK_THROWS_AS(fit_decay_rate({{0.0, 1.0}, {1.0, 0.5}}), DomainError);
}

TEST_CASE("evolve with zero data at kappa = 1 stays at zero energy") {
  const RadialGrid g(0.5, 30);
  EvolveOptions opt;
  opt.tau_max = 1.0;
  const EvolveResult r = evolve(g, FieldState(g.size()), 1.0, opt);
  for (const auto& row : r.rows) CHECK(row.energy_L2 == 0.0);
}

TEST_CASE("nonlinear evolution") {
  const RadialGrid g(0.5, 50);
  NonlinearOptions opt;
  opt.tau_max = 1.0;
  const NonlinearResult z = evolve_nonlinear(g, FieldState(g.size()), 1.0, opt);
  CHECK(z.status == RunStatus::completed);
  for (double x : z.final_state.v) CHECK(x == 0.0);

  const double kappa = 0.99;
  const double eps0 = 2.0 * kappa * (1.0 - kappa * kappa) / std::sqrt(1.0 - g.sigma * g.sigma);
  const NonlinearResult r = evolve_nonlinear(g, FieldState(g.size()), kappa, opt);
  MESSAGE("kappa 0.99 zero data: status " << to_string(r.status) << " tau reached " << r.tau_reached);
  double vmax = 0.0;
  for (double x : r.final_state.v) vmax = std::max(vmax, std::abs(x));
  CHECK(vmax <= 10.0 * eps0 * std::max(1.0, r.tau_reached));
}

TEST_CASE("hyperbolicity loss is reported as an error by the linear stepper") {
  const RadialGrid g(0.5, 20);
  CoeffSet c = base_coeffs(g, 0.95);
  c.a0.assign(g.size(), -0.8);
  FieldState s(g.size());
  s.v = bump(g);
  CHECK_THROWS_AS(step_linear(g, s, c, nullptr, 1e-4), HyperbolicityError);
}

TEST_CASE("checkpoint round trip") {
  const RadialGrid g(0.5, 17);
  FieldState s(g.size());
  s.v = bump(g);
  s.v_tau = bump(g, 2);
  s.tau = 1.25;
  const auto path = (std::filesystem::temp_directory_path() / "lcl_checkpoint_test.bin").string();
  write_checkpoint(path, g, 0.95, s);
  const auto [back, meta] = read_checkpoint(path);
  CHECK(meta.first == 0.5);
  CHECK(meta.second == 0.95);
  CHECK(back.tau == 1.25);
  CHECK(back.v == s.v);
  CHECK(back.v_tau == s.v_tau);
  std::filesystem::remove(path);
}
