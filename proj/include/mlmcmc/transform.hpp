#ifndef MLMCMC_TRANSFORM_HPP
#define MLMCMC_TRANSFORM_HPP

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "mlmcmc/grid.hpp"

namespace mlmcmc {

/// Parameters of the Gamma field the Gaussian field is mapped onto.
struct GammaTransformParams {
  double mu = 7.107725548431493e9;  ///< scale [Pa]; default puts the median at 26.1 GPa
  double kappa = 4.0;               ///< shape

  void validate() const {
    if (!(mu > 0.0) || !(kappa > 0.0))
      throw std::domain_error("GammaTransformParams: mu and kappa must be positive");
  }
};

namespace detail {

/// Inverse of the regularized lower incomplete gamma P(kappa, .) at probability
/// p, by bracketed Newton iteration with bisection fallback. Converges to
/// relative tolerance 1e-14 in x (well below 1e-12 in the probability
/// argument); Newton doubles digits per step, so the cost is a few evaluations.
inline double inverse_regularized_gamma(double kappa, double p) {
  const double log_norm = std::lgamma(kappa);
  auto P = [&](double x) { return boost::math::gamma_p(kappa, x); };
  auto pdf = [&](double x) {
    return std::exp((kappa - 1.0) * std::log(x) - x - log_norm);
  };
  // Expand a bracket around the mean.
  double lo = 0.0, hi = kappa;
  while (P(hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return hi;
  }
  double x = 0.5 * (lo + hi);
  // Wilson-Hilferty starting point when it lands inside the bracket.
  {
    const double z = std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
    const double wh = kappa * std::pow(1.0 - 1.0 / (9.0 * kappa) + z / (3.0 * std::sqrt(kappa)), 3.0);
    if (wh > lo && wh < hi) x = wh;
  }
  for (int it = 0; it < 200; ++it) {
    const double f = P(x) - p;
    if (f > 0.0) hi = x; else lo = x;
    const double d = pdf(x);
    double xn = d > 0.0 ? x - f / d : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= 1e-14 * x) return xn;
    if (xn == x) break;
    x = xn;
  }
  return x;
}

}  // namespace detail

/// Map a standard-normal value g to a Gamma(kappa, mu) value:
/// E = mu * gammainv(kappa, Gamma(kappa)/2 * (1 + erf(g/sqrt 2))).
/// The probability is clamped to [1e-16, 1-1e-16]; `saturated`, when given,
/// reports whether clamping occurred.
inline double gaussian_to_gamma(const GammaTransformParams& params, double g,
                                bool* saturated = nullptr) {
  params.validate();
  if (!std::isfinite(g)) throw std::domain_error("gaussian_to_gamma: non-finite input");
  constexpr double eps = 1e-16;
  double p = 0.5 * std::erfc(-g / std::sqrt(2.0));  // standard normal CDF
  bool sat = false;
  if (p < eps) { p = eps; sat = true; }
  if (p > 1.0 - eps) { p = 1.0 - eps; sat = true; }
  if (saturated) *saturated = sat;
  return params.mu * detail::inverse_regularized_gamma(params.kappa, p);
}

/// Elementwise transform of a Gaussian field realization to a Young's modulus
/// field on the same grid.
inline FieldRealization transform_field(const GammaTransformParams& params,
                                        const FieldRealization& g,
                                        int* saturated_count = nullptr) {
  Eigen::VectorXd out(g.values.size());
  int n_sat = 0;
  for (Eigen::Index k = 0; k < g.values.size(); ++k) {
    bool sat = false;
    out[k] = gaussian_to_gamma(params, g.values[k], &sat);
    n_sat += sat;
  }
  if (saturated_count) *saturated_count = n_sat;
  return {g.grid, std::move(out)};
}

/// Scale parameter that places the transform of g=0 (the Gamma median) at the
/// requested Young's modulus.
inline double gamma_scale_for_median(double kappa, double target_median) {
  return target_median / detail::inverse_regularized_gamma(kappa, 0.5);
}

}  // namespace mlmcmc

#endif
