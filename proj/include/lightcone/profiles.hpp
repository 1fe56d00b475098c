#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace lc {

enum class Exec { serial, parallel };

/// Blowup time T, lightcone fraction sigma, perturbation parameter kappa and
/// reference time t_star. Owns the maps between physical (t, r) and
/// similarity (tau, rho) coordinates.
struct SimilarityFrame {
  double T = 1.0;
  double sigma = 0.5;
  double kappa = 1.0;
  double t_star = 1.0;

  SimilarityFrame(double T, double sigma, double kappa, double t_star = -1.0);

  std::pair<double, double> forward(double t, double r) const;
  std::pair<double, double> backward(double tau, double rho) const;
};

/// phi(rho) = sign * sqrt(1 - rho^2).
struct SelfSimilarProfile {
  int sign = +1;
};

/// Field value together with its first and second partial derivatives.
struct Jet {
  double u = 0, ut = 0, ur = 0, utt = 0, urr = 0, utr = 0;
};

using Field = std::function<Jet(double t, double r)>;

struct ResidualSample {
  double t, r, residual;
};

struct ResidualReport {
  double max_abs = 0.0;
  std::pair<double, double> at_point{0.0, 0.0};
  std::vector<ResidualSample> samples;
};

double profile_value(const SelfSimilarProfile& p, double rho, int deriv_order);

double explicit_solution(const SimilarityFrame& frame, int sign, double t, double r);

/// u_T^{sign} with analytic derivatives.
Field explicit_field(const SimilarityFrame& frame, int sign);

/// Builds derivative callbacks for a scalar field by 5-point centered
/// differences with step 1e-5 * scale.
Field with_fd_derivatives(std::function<double(double, double)> u, double scale = 1.0);

double membrane_pointwise(const Jet& j, double r);

ResidualReport membrane_residual(const Field& u, std::span<const std::pair<double, double>> points,
                                 Exec exec = Exec::parallel);

/// Residual of the profile equation for an arbitrary function with
/// derivatives (phi, phi', phi'').
double ode_residual_of(double phi, double dphi, double ddphi, double rho);
double ode_residual(const SelfSimilarProfile& p, double rho);

enum class MapDirection { forward, backward };
std::pair<double, double> similarity_map(const SimilarityFrame& frame, MapDirection dir,
                                         std::pair<double, double> point);

/// u_lambda(t, r) = lambda * u(t / lambda, r / lambda).
Field scaling_apply(Field u, double lambda);

double kappa_threshold(double T, double t_star, double sigma, double eps);

double origin_second_derivative(const SimilarityFrame& frame, int sign, double t);

/// Similarity-coordinate initial data of the linearized problem built from
/// physical data (u0, u1). The velocity formula contains the factor
/// (1 - rho) * u1(T rho) verbatim; see README.
struct InitialData {
  double v0, v1;
};
InitialData initial_data(const SimilarityFrame& frame, const std::function<double(double)>& u0,
                         const std::function<double(double)>& u1, double rho);

}  // namespace lc
