#pragma once

#include "lightcone/dual.hpp"
#include "lightcone/forcing.hpp"
#include "lightcone/kernels.hpp"

namespace lc::detail {

inline double linear_accel_point(const RadialGrid& g, const OperatorCoeffs& c, const double* v,
                                 const double* vt, const double* forcing, int j) {
  const int n = g.n_cells;
  const double h = g.h;
  double rhs = c.P1[j] * stencil::d2(v, j, n, h) - c.P2[j] * vt[j] -
               c.P3[j] * stencil::d1(vt, j, n, h) -
               c.rP4[j] * stencil::inv_rho_d1(v, j, n, h, g.nodes[j]) - c.P5[j] * v[j];
  if (forcing) rhs += forcing[j];
  return rhs / c.P0[j];
}

inline void nonlinear_split_point(const RadialGrid& g, double kappa, const double* w,
                                  const double* wt, int j, double& A, double& B) {
  const int n = g.n_cells;
  const double h = g.h;
  JetT<Dual<1>> jet;
  jet.w = w[j];
  jet.wr = stencil::d1(w, j, n, h);
  jet.wrr = stencil::d2(w, j, n, h);
  jet.wt = wt[j];
  jet.wtr = stencil::d1(wt, j, n, h);
  jet.wtt = Dual<1>::variable(0.0, 0);
  const Dual<1> f = forcing_point(g.nodes[j], kappa, jet);
  A = f.d[0];
  B = f.v;
}

inline void forcing_partials_point(const RadialGrid& g, double kappa, const JetArrays& in,
                                   ForcingPartials& out, std::size_t j) {
  using D = Dual<6>;
  JetT<D> jet;
  jet.w = D::variable(in.w[j], 0);
  jet.wr = D::variable(in.wr[j], 1);
  jet.wrr = D::variable(in.wrr[j], 2);
  jet.wt = D::variable(in.wt[j], 3);
  jet.wtr = D::variable(in.wtr[j], 4);
  jet.wtt = D::variable(in.wtt[j], 5);
  const D f = forcing_point(g.nodes[j], kappa, jet);
  out.f[j] = f.v;
  out.fw[j] = f.d[0];
  out.fr[j] = f.d[1];
  out.frr[j] = f.d[2];
  out.ft[j] = f.d[3];
  out.ftr[j] = f.d[4];
  out.ftt[j] = f.d[5];
}

inline double mode_coeff_point(const ModeTable& tab, const double* v, int k) {
  const int n = tab.n;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += v[j] * tab(k, j);
  return acc * (2.0 / n);
}

inline double mode_synth_point(const ModeTable& tab, const double* c, int kmax, int j) {
  double acc = 0.0;
  for (int k = 0; k < kmax; ++k) acc += c[k] * tab(k, j);
  return acc;
}

inline double membrane_point(const Field& u, const std::pair<double, double>& p) {
  return membrane_pointwise(u(p.first, p.second), p.second);
}

}  // namespace lc::detail
