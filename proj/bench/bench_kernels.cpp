// Times the serial reference kernels against their OpenMP counterparts and
// reports whether the outputs agree bit for bit.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

#include <omp.h>

#include "lightcone/kernels.hpp"
#include "lightcone/linearized.hpp"
#include "lightcone/profiles.hpp"

namespace {

double seconds_per_call(const std::function<void()>& f, int reps) {
  f();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

bool same_bits(const lc::Vec& a, const lc::Vec& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void report(const char* name, double ts, double tp, bool identical) {
  std::printf("%-18s serial %10.3e s  omp %10.3e s  speedup %5.2fx  %s\n", name, ts, tp, ts / tp,
              identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int cells = argc > 1 ? std::stoi(argv[1]) : 4000;
  const int reps = argc > 2 ? std::stoi(argv[2]) : 50;
  std::printf("cells=%d reps=%d threads=%d\n", cells, reps, omp_get_max_threads());
  bool ok = true;

  const lc::RadialGrid g(0.5, cells);
  const double kappa = 0.95;
  lc::Vec v(g.size()), vt(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    v[j] = std::sin(M_PI * g.nodes[j] / g.sigma);
    vt[j] = 0.3 * std::sin(2 * M_PI * g.nodes[j] / g.sigma);
  }

  {
    const lc::OperatorCoeffs c = lc::base_coeffs(g, kappa).to_operator(g);
    lc::Vec a(g.size()), b(g.size());
    const double ts = seconds_per_call([&] { lc::kernels::serial::linear_accel(g, c, v.data(), vt.data(), nullptr, a.data()); }, reps);
    const double tp = seconds_per_call([&] { lc::kernels::omp::linear_accel(g, c, v.data(), vt.data(), nullptr, b.data()); }, reps);
    ok &= same_bits(a, b);
    report("linear_accel", ts, tp, same_bits(a, b));
  }
  {
    lc::Vec A1(g.size()), B1(g.size()), A2(g.size()), B2(g.size());
    const double ts = seconds_per_call([&] { lc::kernels::serial::nonlinear_split(g, kappa, v.data(), vt.data(), A1.data(), B1.data()); }, reps);
    const double tp = seconds_per_call([&] { lc::kernels::omp::nonlinear_split(g, kappa, v.data(), vt.data(), A2.data(), B2.data()); }, reps);
    const bool same = same_bits(A1, A2) && same_bits(B1, B2);
    ok &= same;
    report("nonlinear_split", ts, tp, same);
  }
  {
    lc::Vec vtt(g.size(), 0.1);
    const lc::JetArrays jet = lc::jets_from_state(g, v, vt, vtt);
    lc::ForcingPartials p1(g.size()), p2(g.size());
    const double ts = seconds_per_call([&] { lc::kernels::serial::forcing_partials(g, kappa, jet, p1); }, reps);
    const double tp = seconds_per_call([&] { lc::kernels::omp::forcing_partials(g, kappa, jet, p2); }, reps);
    const bool same = same_bits(p1.f, p2.f) && same_bits(p1.ftt, p2.ftt) && same_bits(p1.frr, p2.frr);
    ok &= same;
    report("forcing_partials", ts, tp, same);
  }
  {
    const int n = std::min(cells, 1024);
    const lc::ModeTable tab(n);
    lc::Vec in(n), a(n), b(n);
    for (int j = 0; j < n; ++j) in[j] = std::cos(0.37 * j) * std::exp(-0.001 * j);
    const double ts = seconds_per_call([&] { lc::kernels::serial::mode_project(tab, n / 2, in.data(), a.data()); }, reps);
    const double tp = seconds_per_call([&] { lc::kernels::omp::mode_project(tab, n / 2, in.data(), b.data()); }, reps);
    ok &= same_bits(a, b);
    report("mode_project", ts, tp, same_bits(a, b));
  }
  {
    const lc::SimilarityFrame frame(1.0, 0.5, 1.0);
    const lc::Field u = lc::explicit_field(frame, +1);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < cells * 10; ++i) {
      const double t = 0.9 * (i % 97) / 97.0;
      pts.emplace_back(t, 0.9 * (1.0 - t) * ((i % 89) + 1) / 90.0);
    }
    lc::Vec a(pts.size()), b(pts.size());
    const double ts = seconds_per_call([&] { lc::kernels::serial::membrane_eval(u, pts, a.data()); }, reps);
    const double tp = seconds_per_call([&] { lc::kernels::omp::membrane_eval(u, pts, b.data()); }, reps);
    ok &= same_bits(a, b);
    report("membrane_eval", ts, tp, same_bits(a, b));
  }
  return ok ? 0 : 1;
}
