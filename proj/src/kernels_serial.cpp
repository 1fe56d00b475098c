#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

#include "kernel_points.hpp"

namespace lc {

ModeTable::ModeTable(int n_) : n(n_), s(static_cast<std::size_t>(n_) * n_) {
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      s[static_cast<std::size_t>(k) * n + j] = std::cos((k + 0.5) * std::numbers::pi * (j + 0.5) / n);
}

namespace kernels {
namespace serial {

void membrane_eval(const Field& u, std::span<const std::pair<double, double>> pts, double* out) {
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = detail::membrane_point(u, pts[i]);
}

void linear_accel(const RadialGrid& g, const OperatorCoeffs& c, const double* v, const double* vt,
                  const double* forcing, double* out) {
  for (int j = 0; j < g.n_cells; ++j) out[j] = detail::linear_accel_point(g, c, v, vt, forcing, j);
}

void nonlinear_split(const RadialGrid& g, double kappa, const double* w, const double* wt,
                     double* A, double* B) {
  for (int j = 0; j < g.n_cells; ++j) detail::nonlinear_split_point(g, kappa, w, wt, j, A[j], B[j]);
}

void forcing_partials(const RadialGrid& g, double kappa, const JetArrays& jet, ForcingPartials& out) {
  for (std::size_t j = 0; j < jet.size(); ++j) detail::forcing_partials_point(g, kappa, jet, out, j);
}

void mode_project(const ModeTable& tab, int theta, const double* v, double* out) {
  const int kmax = std::clamp(theta, 0, tab.n);
  Vec c(kmax);
  for (int k = 0; k < kmax; ++k) c[k] = detail::mode_coeff_point(tab, v, k);
  for (int j = 0; j < tab.n; ++j) out[j] = detail::mode_synth_point(tab, c.data(), kmax, j);
}

}  // namespace serial

namespace {
std::atomic<Exec> g_default{Exec::parallel};
}

Exec default_exec() { return g_default.load(); }
void set_default_exec(Exec e) { g_default.store(e); }

void membrane_eval(Exec e, const Field& u, std::span<const std::pair<double, double>> pts, double* out) {
  e == Exec::serial ? serial::membrane_eval(u, pts, out) : omp::membrane_eval(u, pts, out);
}

void linear_accel(Exec e, const RadialGrid& g, const OperatorCoeffs& c, const double* v,
                  const double* vt, const double* forcing, double* out) {
  e == Exec::serial ? serial::linear_accel(g, c, v, vt, forcing, out)
                    : omp::linear_accel(g, c, v, vt, forcing, out);
}

void nonlinear_split(Exec e, const RadialGrid& g, double kappa, const double* w, const double* wt,
                     double* A, double* B) {
  e == Exec::serial ? serial::nonlinear_split(g, kappa, w, wt, A, B)
                    : omp::nonlinear_split(g, kappa, w, wt, A, B);
}

void forcing_partials(Exec e, const RadialGrid& g, double kappa, const JetArrays& jet,
                      ForcingPartials& out) {
  e == Exec::serial ? serial::forcing_partials(g, kappa, jet, out)
                    : omp::forcing_partials(g, kappa, jet, out);
}

void mode_project(Exec e, const ModeTable& tab, int theta, const double* v, double* out) {
  e == Exec::serial ? serial::mode_project(tab, theta, v, out) : omp::mode_project(tab, theta, v, out);
}

}  // namespace kernels
}  // namespace lc
