#include <algorithm>

#include "kernel_points.hpp"

namespace lc::kernels::omp {

void membrane_eval(const Field& u, std::span<const std::pair<double, double>> pts, double* out) {
  const long n = static_cast<long>(pts.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = detail::membrane_point(u, pts[i]);
}

void linear_accel(const RadialGrid& g, const OperatorCoeffs& c, const double* v, const double* vt,
                  const double* forcing, double* out) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.n_cells; ++j) out[j] = detail::linear_accel_point(g, c, v, vt, forcing, j);
}

void nonlinear_split(const RadialGrid& g, double kappa, const double* w, const double* wt,
                     double* A, double* B) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.n_cells; ++j) detail::nonlinear_split_point(g, kappa, w, wt, j, A[j], B[j]);
}

void forcing_partials(const RadialGrid& g, double kappa, const JetArrays& jet, ForcingPartials& out) {
  const long n = static_cast<long>(jet.size());
#pragma omp parallel for schedule(static)
  for (long j = 0; j < n; ++j)
    detail::forcing_partials_point(g, kappa, jet, out, static_cast<std::size_t>(j));
}

void mode_project(const ModeTable& tab, int theta, const double* v, double* out) {
  const int kmax = std::clamp(theta, 0, tab.n);
  Vec c(kmax);
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (int k = 0; k < kmax; ++k) c[k] = detail::mode_coeff_point(tab, v, k);
#pragma omp for schedule(static)
    for (int j = 0; j < tab.n; ++j) out[j] = detail::mode_synth_point(tab, c.data(), kmax, j);
  }
}

}  // namespace lc::kernels::omp
