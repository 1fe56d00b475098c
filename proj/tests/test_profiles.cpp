#include <cmath>
#include <vector>

#include "doctest.h"
#include "lightcone/errors.hpp"
#include "lightcone/profiles.hpp"

using namespace lc;

TEST_CASE("profile values and domain") {
  CHECK(profile_value({+1}, 0.0, 0) == 1.0);
  CHECK(profile_value({+1}, 1.0, 0) == 0.0);
  CHECK(profile_value({+1}, 0.6, 0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(profile_value({-1}, 0.6, 0) == doctest::Approx(-0.8).epsilon(1e-15));
  CHECK_THROWS_AS(profile_value({+1}, 1.0, 1), DomainError);
  CHECK_THROWS_AS(profile_value({+1}, -0.1, 0), DomainError);
  CHECK_THROWS_AS(profile_value({+1}, 1.1, 0), DomainError);
}

TEST_CASE("lightlike identity on rational samples") {
  for (int i = 1; i < 1000; ++i) {
    const double rho = i / 1000.0;
    const double phi = profile_value({+1}, rho, 0);
    CHECK(std::abs(1.0 - rho * rho - phi * phi) <= 1e-14);
  }
}

TEST_CASE("explicit solution values") {
  const SimilarityFrame f(1.0, 0.5, 1.0);
  CHECK(explicit_solution(f, +1, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(explicit_solution(f, +1, 0.5, 0.3) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(std::abs(explicit_solution(f, +1, 0.2, 0.8)) < 1e-15);
  CHECK_THROWS_AS(explicit_solution(f, +1, 0.5, 0.6), DomainError);
}

TEST_CASE("membrane residual") {
  const SimilarityFrame f(1.0, 0.5, 1.0);
  std::vector<std::pair<double, double>> pts{{0.3, 0.2}, {0.1, 0.5}, {0.6, 0.1}};

  Field constant = [](double, double) { return Jet{2.5, 0, 0, 0, 0, 0}; };
  CHECK(membrane_residual(constant, pts).max_abs == 0.0);
  Field linear_t = [](double t, double) { return Jet{t, 1.0, 0, 0, 0, 0}; };
  CHECK(membrane_residual(linear_t, pts).max_abs == 0.0);

  CHECK(membrane_residual(explicit_field(f, +1), pts).max_abs < 1e-10);
  CHECK(membrane_residual(explicit_field(f, -1), pts).max_abs < 1e-10);

  std::vector<std::pair<double, double>> origin{{0.3, 0.0}};
  CHECK_THROWS_AS(membrane_residual(explicit_field(f, +1), origin), DomainError);
}

TEST_CASE("finite-difference fallback agrees with analytic derivatives") {
  const SimilarityFrame f(1.0, 0.5, 1.0);
  const Field fd = with_fd_derivatives([&](double t, double r) { return explicit_solution(f, +1, t, r); });
  const Jet a = explicit_field(f, +1)(0.3, 0.2), b = fd(0.3, 0.2);
  CHECK(b.ut == doctest::Approx(a.ut).epsilon(1e-8));
  CHECK(b.urr == doctest::Approx(a.urr).epsilon(1e-5));
  CHECK(b.utr == doctest::Approx(a.utr).epsilon(1e-5));
}

TEST_CASE("profile ODE residual") {
  CHECK(std::abs(ode_residual({+1}, 0.5)) < 1e-12);
  CHECK(std::abs(ode_residual({-1}, 0.5)) < 1e-12);
  for (int i = 0; i < 1000; ++i) {
    const double rho = 0.01 + 0.98 * (i + 0.5) / 1000.0;
    CHECK(std::abs(ode_residual({+1}, rho)) < 1e-12);
  }
  // phi = 1 - rho at rho = 1/2: phi = 1/2, phi' = -1, phi'' = 0 gives
  // -1 + 1/4 + 1/2 - 3/4 = -1.
  CHECK(ode_residual_of(0.5, -1.0, 0.0, 0.5) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(ode_residual({+1}, 0.0), DomainError);
  CHECK_THROWS_AS(ode_residual({+1}, 1.0), DomainError);
}

TEST_CASE("similarity map") {
  const SimilarityFrame f(1.0, 0.5, 1.0);
  auto p = similarity_map(f, MapDirection::forward, {0.0, 0.5});
  CHECK(p.first == doctest::Approx(0.0));
  CHECK(p.second == doctest::Approx(0.5));
  p = similarity_map(f, MapDirection::forward, {1.0 - std::exp(-1.0), 0.5 * std::exp(-1.0)});
  CHECK(p.first == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(p.second == doctest::Approx(0.5).epsilon(1e-13));
  const auto q = similarity_map(f, MapDirection::forward, {0.3, 0.1});
  const auto back = similarity_map(f, MapDirection::backward, q);
  CHECK(back.first == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(back.second == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(similarity_map(f, MapDirection::forward, {1.0, 0.0}), DomainError);
}

TEST_CASE("scaling invariance") {
  const SimilarityFrame f1(1.0, 0.5, 1.0), f2(2.0, 0.5, 1.0);
  const Field u1 = explicit_field(f1, +1);
  const Field id = scaling_apply(u1, 1.0);
  const Field s2 = scaling_apply(u1, 2.0);
  const Field u2 = explicit_field(f2, +1);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 10; ++i)
    for (int j = 1; j <= 10; ++j) {
      const double t = 1.8 * i / 10.0;
      pts.emplace_back(t, 0.9 * (2.0 - t) * j / 10.0);
    }
  for (const auto& [t, r] : pts) {
    CHECK(s2(t, r).u == doctest::Approx(u2(t, r).u).epsilon(1e-13));
    CHECK(s2(t, r).urr == doctest::Approx(u2(t, r).urr).epsilon(1e-12));
    if (t < 0.9 && r < 0.9 * (1.0 - t)) CHECK(id(t, r).u == u1(t, r).u);
  }
  std::vector<std::pair<double, double>> inner;
  for (int j = 1; j <= 10; ++j) inner.emplace_back(0.5, 0.9 * 2.5 * j / 10.0);
  CHECK(membrane_residual(scaling_apply(u1, 3.0), inner).max_abs < 1e-10);
  CHECK_THROWS_AS(scaling_apply(u1, 0.0), DomainError);
}

TEST_CASE("kappa threshold") {
  CHECK(kappa_threshold(1.0, 1.0, 0.5, 0.0) == 1.0);
  CHECK(kappa_threshold(1.0, 1.0, 0.5, 0.01) == doctest::Approx(0.9945567).epsilon(1e-6));
  CHECK(kappa_threshold(1.0, 1.0, 0.5, 0.02) < kappa_threshold(1.0, 1.0, 0.5, 0.01));
  CHECK_THROWS_AS(kappa_threshold(1.0, 0.4, 0.5, 0.01), DomainError);
}

TEST_CASE("origin second derivative") {
  const SimilarityFrame f(1.0, 0.5, 1.0);
  CHECK(origin_second_derivative(f, +1, 0.0) == 1.0);
  CHECK(origin_second_derivative(f, +1, 0.9) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(origin_second_derivative(f, -1, 0.9) == doctest::Approx(-10.0).epsilon(1e-14));
  CHECK_THROWS_AS(origin_second_derivative(f, +1, 1.0), DomainError);
}

TEST_CASE("initial data formula, velocity factor kept verbatim") {
  const SimilarityFrame f(2.0, 0.5, 0.9);
  const auto d = initial_data(f, [](double x) { return x * x; }, [](double x) { return 3.0 * x; }, 0.5);
  const double shift = 0.1 * std::sqrt(0.75);
  CHECK(d.v0 == doctest::Approx(0.5 + shift).epsilon(1e-15));
  CHECK(d.v1 == doctest::Approx(0.5 + 0.5 * 3.0 + shift).epsilon(1e-15));
}
