#ifndef MLMCMC_COVARIANCE_HPP
#define MLMCMC_COVARIANCE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>
#include <stdexcept>

namespace mlmcmc {

/// Matern kernel parameters. Distances use the Euclidean norm (isotropic case).
struct MaternParams {
  double sigma2 = 1.0;  ///< variance of the Gaussian field
  double lambda = 0.5;  ///< length scale [m]
  double nu = 1.5;      ///< smoothness

  void validate() const {
    if (!(sigma2 > 0.0) || !(lambda > 0.0) || !(nu > 0.0))
      throw std::domain_error("MaternParams: sigma2, lambda, nu must be positive");
  }
};

/// Matern covariance C(r). Half-integer nu uses the closed polynomial-times-
/// exponential forms; other nu falls back to the modified Bessel function.
/// The r=0 value is the limit sigma2.
inline double matern(const MaternParams& p, double r) {
  p.validate();
  if (!std::isfinite(r) || r < 0.0) throw std::domain_error("matern: distance must be finite and nonnegative");
  if (r == 0.0) return p.sigma2;
  const double t = std::sqrt(2.0 * p.nu) * r / p.lambda;
  if (p.nu == 0.5) return p.sigma2 * std::exp(-t);
  if (p.nu == 1.5) return p.sigma2 * (1.0 + t) * std::exp(-t);
  if (p.nu == 2.5) return p.sigma2 * (1.0 + t + t * t / 3.0) * std::exp(-t);
  const double c = p.sigma2 * std::pow(2.0, 1.0 - p.nu) / std::tgamma(p.nu);
  double v = c * std::pow(t, p.nu) * std::cyl_bessel_k(p.nu, t);
  // K_nu underflows for large arguments; the kernel limit is 0 there.
  return std::isfinite(v) ? v : 0.0;
}

/// Dense covariance matrix between two point sets: entry (i,j) = C(|a_i-b_j|).
inline Eigen::MatrixXd covariance_matrix(const MaternParams& p,
                                         std::span<const Eigen::Vector2d> a,
                                         std::span<const Eigen::Vector2d> b) {
  if (a.empty() || b.empty()) throw std::domain_error("covariance_matrix: empty point set");
  for (const auto& x : a)
    if (!x.allFinite()) throw std::domain_error("covariance_matrix: non-finite point");
  for (const auto& x : b)
    if (!x.allFinite()) throw std::domain_error("covariance_matrix: non-finite point");
  Eigen::MatrixXd m(a.size(), b.size());
  for (std::size_t j = 0; j < b.size(); ++j)
    for (std::size_t i = 0; i < a.size(); ++i) m(i, j) = matern(p, (a[i] - b[j]).norm());
  return m;
}

namespace detail {
/// Composite Gauss-Legendre rule on [0,1]: n_gauss points per subinterval,
/// subdiv equal subintervals.
inline void composite_gauss_01(int n_gauss, int subdiv, std::vector<double>& nodes,
                               std::vector<double>& weights) {
  static constexpr double g4x[4] = {0.06943184420297371, 0.33000947820757187,
                                    0.66999052179242813, 0.93056815579702629};
  static constexpr double g4w[4] = {0.17392742256872693, 0.32607257743127307,
                                    0.32607257743127307, 0.17392742256872693};
  static constexpr double g2x[2] = {0.21132486540518713, 0.78867513459481287};
  static constexpr double g2w[2] = {0.5, 0.5};
  if ((n_gauss != 2 && n_gauss != 4) || subdiv < 1)
    throw std::domain_error("composite_gauss_01: unsupported rule");
  const double* gx = n_gauss == 2 ? g2x : g4x;
  const double* gw = n_gauss == 2 ? g2w : g4w;
  nodes.clear();
  weights.clear();
  for (int s = 0; s < subdiv; ++s)
    for (int q = 0; q < n_gauss; ++q) {
      nodes.push_back((s + gx[q]) / subdiv);
      weights.push_back(gw[q] / subdiv);
    }
}
}  // namespace detail

/// Covariance between the averages of two axis-aligned square cells, by
/// tensorized (composite) Gauss-Legendre quadrature. Cells are given by their
/// lower-left corner and side length. Touching or overlapping cells need
/// subdiv > 1: the kernel kink at r=0 degrades the plain rule there.
inline double cell_average_covariance(const MaternParams& p,
                                      const Eigen::Vector2d& corner_a, double side_a,
                                      const Eigen::Vector2d& corner_b, double side_b,
                                      int n_gauss = 4, int subdiv = 1) {
  std::vector<double> qx, qw;
  detail::composite_gauss_01(n_gauss, subdiv, qx, qw);
  const int n = static_cast<int>(qx.size());
  double acc = 0.0;
  for (int ax = 0; ax < n; ++ax)
    for (int ay = 0; ay < n; ++ay) {
      const Eigen::Vector2d xa = corner_a + side_a * Eigen::Vector2d(qx[ax], qx[ay]);
      const double wa = qw[ax] * qw[ay];
      for (int bx = 0; bx < n; ++bx)
        for (int by = 0; by < n; ++by) {
          const Eigen::Vector2d xb = corner_b + side_b * Eigen::Vector2d(qx[bx], qx[by]);
          acc += wa * qw[bx] * qw[by] * matern(p, (xa - xb).norm());
        }
    }
  return acc;
}

}  // namespace mlmcmc

#endif
