#pragma once

#include <cmath>

namespace lc {

/// Pointwise jet of the perturbation w: value, rho/tau derivatives up to
/// second order.
template <class T>
struct JetT {
  T w{}, wr{}, wrr{}, wt{}, wtr{}, wtt{};
};

/// Right-hand side f(rho, w) of the kappa-perturbed nonlinear equation,
/// including the non-autonomous term -2 kappa (1 - kappa^2) / sqrt(1 - rho^2).
/// Templated so the same expression can be differentiated with dual numbers.
template <class T>
T forcing_point(double rho, double kappa, const JetT<T>& j) {
  const double om = 1.0 - rho * rho;
  const double s = std::sqrt(om);
  const double om32 = om * s;
  const T wmt = j.w - j.wt;
  const T bracket = wmt * wmt + (2.0 * kappa * s) * wmt;
  const T wr2 = j.wr * j.wr;

  T f = (2.0 * kappa * om32) * wr2;
  f -= om * (j.wr * (j.wtt + j.wt - 2.0 * j.w) * (j.wr - 2.0 * kappa * rho / s));
  f += (kappa / s) * (wmt * wmt);
  f -= om * (j.wrr * bracket);
  f -= (2.0 * kappa * rho * s) * (j.wtr * (-wmt));
  f -= (2.0 * kappa * om32) * (j.wr * j.wtr);
  f += (2.0 * om) * (j.wr * j.wtr * (-wmt));
  f -= (om / rho) * (j.wr * bracket);
  f += (kappa * s) * (wmt * wmt);
  f -= ((rho - 1.0 / rho) * om) * (wr2 * j.wr - (3.0 * kappa * rho / s) * wr2);
  f -= 2.0 * kappa * (1.0 - kappa * kappa) / s;
  return f;
}

/// Right-hand side of the unperturbed (kappa = 1) reduction
/// v_tt + 3 v_t - 4 v = f. Kept as a cross-check oracle.
template <class T>
T forcing_point_unperturbed(double rho, const JetT<T>& j) {
  const double om = 1.0 - rho * rho;
  const double s = std::sqrt(om);
  const T vmt = j.w - j.wt;
  const T bracket = vmt * vmt + (2.0 * s) * vmt;
  const T wr2 = j.wr * j.wr;

  T f = (2.0 * s) * wr2;
  f -= j.wr * (j.wtt + j.wt - 2.0 * j.w) * (j.wr - 2.0 * rho / s);
  f += (1.0 / (om * s)) * (vmt * vmt);
  f -= j.wrr * bracket;
  f -= (2.0 * rho / s) * (j.wtr * (-vmt));
  f -= (2.0 * s) * (j.wr * j.wtr);
  f += 2.0 * (j.wr * j.wtr * (-vmt));
  f -= (1.0 / rho) * (j.wr * bracket);
  f += (1.0 / s) * (vmt * vmt);
  f -= (rho - 1.0 / rho) * (wr2 * j.wr - (3.0 * rho / s) * wr2);
  return f;
}

}  // namespace lc
