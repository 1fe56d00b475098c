#include "lightcone/profiles.hpp"

#include <cmath>
#include <limits>

#include "lightcone/errors.hpp"
#include "lightcone/kernels.hpp"

namespace lc {

SimilarityFrame::SimilarityFrame(double T_, double sigma_, double kappa_, double t_star_)
    : T(T_), sigma(sigma_), kappa(kappa_), t_star(t_star_ < 0 ? T_ : t_star_) {
  if (!(T > 0)) throw DomainError("T must be positive");
  if (!(sigma > 0 && sigma < 1)) throw DomainError("sigma must lie in (0,1)");
  if (!(kappa > 0 && kappa <= 1)) throw DomainError("kappa must lie in (0,1]");
  if (!(t_star > 0)) throw DomainError("t_star must be positive");
}

std::pair<double, double> SimilarityFrame::forward(double t, double r) const {
  return similarity_map(*this, MapDirection::forward, {t, r});
}

std::pair<double, double> SimilarityFrame::backward(double tau, double rho) const {
  return similarity_map(*this, MapDirection::backward, {tau, rho});
}

double profile_value(const SelfSimilarProfile& p, double rho, int order) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("rho outside [0,1]");
  if (order < 0 || order > 2) throw DomainError("derivative order must be 0, 1 or 2");
  if (order >= 1 && rho >= 1.0) throw DomainError("derivative of the profile is singular at rho=1");
  const double om = 1.0 - rho * rho;
  const double s = std::sqrt(om);
  switch (order) {
    case 0: return p.sign * s;
    case 1: return -p.sign * rho / s;
    default: return -p.sign / (om * s);
  }
}

double explicit_solution(const SimilarityFrame& f, int sign, double t, double r) {
  if (!(t >= 0 && t < f.T)) throw DomainError("t outside [0,T)");
  const double S = f.T - t;
  if (r < 0 || r > S) throw DomainError("point outside the backward lightcone");
  const double x = r / S;
  return sign * S * std::sqrt(std::max(0.0, 1.0 - x * x));
}

Field explicit_field(const SimilarityFrame& f, int sign) {
  const double T = f.T;
  return [T, sign](double t, double r) {
    const double S = T - t;
    const double Q = S * S - r * r;
    if (!(Q > 0)) throw DomainError("explicit field derivatives require r < T - t");
    const double sq = std::sqrt(Q);
    const double q32 = Q * sq;
    Jet j;
    j.u = sign * sq;
    j.ut = -sign * S / sq;
    j.ur = -sign * r / sq;
    j.utt = -sign * r * r / q32;
    j.urr = -sign * S * S / q32;
    j.utr = -sign * S * r / q32;
    return j;
  };
}

Field with_fd_derivatives(std::function<double(double, double)> u, double scale) {
  const double hs = 1e-5 * scale;
  return [u = std::move(u), hs](double t, double r) {
    auto d1 = [&](auto&& g) {
      return (-g(2 * hs) + 8 * g(hs) - 8 * g(-hs) + g(-2 * hs)) / (12 * hs);
    };
    auto d2 = [&](auto&& g) {
      return (-g(2 * hs) + 16 * g(hs) - 30 * g(0.0) + 16 * g(-hs) - g(-2 * hs)) / (12 * hs * hs);
    };
    auto along_t = [&](double dt) { return u(t + dt, r); };
    auto along_r = [&](double dr) { return u(t, r + dr); };
    Jet j;
    j.u = u(t, r);
    j.ut = d1(along_t);
    j.ur = d1(along_r);
    j.utt = d2(along_t);
    j.urr = d2(along_r);
    j.utr = d1([&](double dr) {
      return (-u(t + 2 * hs, r + dr) + 8 * u(t + hs, r + dr) - 8 * u(t - hs, r + dr) +
              u(t - 2 * hs, r + dr)) /
             (12 * hs);
    });
    return j;
  };
}

double membrane_pointwise(const Jet& j, double r) {
  if (!(r > 0)) throw DomainError("membrane residual is undefined at r=0");
  const double ur2 = j.ur * j.ur;
  const double ut2 = j.ut * j.ut;
  return j.utt - j.urr - j.ur / r + j.utt * ur2 + j.urr * ut2 - 2.0 * j.ut * j.ur * j.utr +
         j.ur * ut2 / r - ur2 * j.ur / r;
}

ResidualReport membrane_residual(const Field& u, std::span<const std::pair<double, double>> points,
                                 Exec exec) {
  for (const auto& p : points)
    if (!(p.second > 0)) throw DomainError("membrane residual is undefined at r=0");
  std::vector<double> res(points.size());
  kernels::membrane_eval(exec, u, points, res.data());
  ResidualReport rep;
  rep.samples.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    rep.samples.push_back({points[i].first, points[i].second, res[i]});
    if (i == 0 || std::abs(res[i]) > rep.max_abs) {
      rep.max_abs = std::abs(res[i]);
      rep.at_point = points[i];
    }
  }
  return rep;
}

double ode_residual_of(double phi, double dphi, double ddphi, double rho) {
  return rho * (1 - rho * rho) * ddphi + dphi - dphi * phi * phi + 2 * rho * phi * dphi * dphi -
         rho * ddphi * phi * phi + (1 - rho * rho) * dphi * dphi * dphi;
}

double ode_residual(const SelfSimilarProfile& p, double rho) {
  if (!(rho > 0 && rho < 1)) throw DomainError("profile equation residual requires 0 < rho < 1");
  return ode_residual_of(profile_value(p, rho, 0), profile_value(p, rho, 1), profile_value(p, rho, 2),
                         rho);
}

std::pair<double, double> similarity_map(const SimilarityFrame& f, MapDirection dir,
                                         std::pair<double, double> pt) {
  if (dir == MapDirection::forward) {
    const auto [t, r] = pt;
    if (!(t < f.T)) throw DomainError("t must be smaller than T");
    if (r < 0) throw DomainError("r must be non-negative");
    const double S = f.T - t;
    return {-std::log(S) + std::log(f.T), r / S};
  }
  const auto [tau, rho] = pt;
  if (tau < 0 || rho < 0) throw DomainError("tau and rho must be non-negative");
  const double e = std::exp(-tau);
  return {f.T * (1.0 - e), f.T * rho * e};
}

Field scaling_apply(Field u, double lambda) {
  if (!(lambda > 0)) throw DomainError("scale must be positive");
  return [u = std::move(u), lambda](double t, double r) {
    const Jet b = u(t / lambda, r / lambda);
    Jet j;
    j.u = lambda * b.u;
    j.ut = b.ut;
    j.ur = b.ur;
    j.utt = b.utt / lambda;
    j.urr = b.urr / lambda;
    j.utr = b.utr / lambda;
    return j;
  };
}

double kappa_threshold(double T, double t_star, double sigma, double eps) {
  if (!(T > 0 && t_star > 0)) throw DomainError("T and t_star must be positive");
  if (!(sigma > 0 && sigma < 1)) throw DomainError("sigma must lie in (0,1)");
  if (eps < 0) throw DomainError("eps must be non-negative");
  const double x = sigma * T / t_star;
  if (!(x < 1)) throw DomainError("requires sigma*T < t_star");
  const double y = 1.0 - x * x;
  return 1.0 - std::sqrt(y / (T * sigma)) / (1.0 + sigma + T * y) * eps;
}

double origin_second_derivative(const SimilarityFrame& f, int sign, double t) {
  if (!(t >= 0 && t < f.T)) throw DomainError("t outside [0,T)");
  return sign / (f.T - t);
}

InitialData initial_data(const SimilarityFrame& f, const std::function<double(double)>& u0,
                         const std::function<double(double)>& u1, double rho) {
  const double shift = (f.kappa - 1.0) * profile_value({+1}, rho, 0);
  const double a = u0(f.T * rho) / f.T;
  return {a - shift, a + (1.0 - rho) * u1(f.T * rho) - shift};
}

}  // namespace lc
