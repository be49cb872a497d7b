#ifndef MLMCMC_KL_HPP
#define MLMCMC_KL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlmcmc/covariance.hpp"
#include "mlmcmc/grid.hpp"

namespace mlmcmc {

/// Karhunen-Loeve basis: leading eigenpairs of the covariance operator,
/// discretized by Nystrom midpoint quadrature at the cell centers of `grid`.
/// Columns of `basis` are L2(D)-orthonormal under the quadrature inner product
/// <u,v> = h^2 sum u_i v_i.
struct KLBasis {
  Grid grid;
  Eigen::VectorXd eigenvalues;  ///< nonincreasing, clamped to >= 0
  Eigen::MatrixXd basis;        ///< cells x m_max, column m = b_m at cell centers
  Eigen::VectorXd mean_field;   ///< E[g] at cell centers (zero by default)
  double trace_all = 0.0;       ///< sum of ALL discrete eigenvalues (Mercer trace)

  int m_max() const { return static_cast<int>(eigenvalues.size()); }
};

/// Nystrom eigendecomposition of an arbitrary symmetric kernel on the grid.
/// With uniform square cells the quadrature weight matrix is W = h^2 I, so the
/// symmetrization W^{1/2} C W^{1/2} is h^2 C and eigenvectors scale by 1/h.
template <class Kernel>
KLBasis kl_precompute_kernel(Kernel&& kernel, const Grid& grid, int m_max) {
  const int n = grid.cells();
  if (m_max < 1 || m_max > n)
    throw std::domain_error("kl_precompute: m_max must be in [1, cells]");
  Eigen::MatrixXd a(n, n);
  for (int c = 0; c < n; ++c) {
    const Eigen::Vector2d xc = grid.cell_center(c);
    for (int r = c; r < n; ++r) {
      const double v = kernel(grid.cell_center(r), xc);
      a(r, c) = v;
      a(c, r) = v;
    }
  }
  a *= grid.cell_area();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("kl_precompute: eigen-solver failed on a " + std::to_string(n) +
                             "x" + std::to_string(n) + " matrix (diag max " +
                             std::to_string(a.diagonal().maxCoeff()) + ")");

  KLBasis out;
  out.grid = grid;
  out.trace_all = es.eigenvalues().sum();
  out.mean_field = Eigen::VectorXd::Zero(n);
  out.eigenvalues.resize(m_max);
  out.basis.resize(n, m_max);
  const double lam_max = es.eigenvalues().cwiseAbs().maxCoeff();

  // Leading m_max pairs, stably ordered on (-lambda, first-entry value) so the
  // rectangle's near-degenerate pairs come out deterministically.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int p, int q) {
    if (es.eigenvalues()[p] != es.eigenvalues()[q])
      return es.eigenvalues()[p] > es.eigenvalues()[q];
    return es.eigenvectors()(0, p) < es.eigenvectors()(0, q);
  });
  const double inv_h = 1.0 / grid.h();
  for (int m = 0; m < m_max; ++m) {
    double lam = es.eigenvalues()[idx[m]];
    if (lam < -1e-8 * lam_max)
      throw std::runtime_error("kl_precompute: covariance matrix is indefinite (eigenvalue " +
                               std::to_string(lam) + ")");
    out.eigenvalues[m] = std::max(lam, 0.0);
    Eigen::VectorXd v = es.eigenvectors().col(idx[m]) * inv_h;
    int peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    if (v[peak] < 0.0) v = -v;
    out.basis.col(m) = v;
  }
  return out;
}

inline KLBasis kl_precompute(const MaternParams& params, const Grid& grid, int m_max) {
  params.validate();
  return kl_precompute_kernel(
      [&](const Eigen::Vector2d& x, const Eigen::Vector2d& y) {
        return matern(params, (x - y).norm());
      },
      grid, m_max);
}

/// g = mean + sum_{k<m} sqrt(lambda_k) xi_k b_k at cell centers.
inline FieldRealization kl_sample(const KLBasis& basis, const Eigen::VectorXd& xi, int m) {
  if (m < 0 || m > basis.m_max())
    throw std::domain_error("kl_sample: truncation exceeds basis size");
  if (xi.size() < m) throw std::domain_error("kl_sample: coefficient vector too short");
  Eigen::VectorXd g = basis.mean_field;
  if (m > 0)
    g += basis.basis.leftCols(m) *
         basis.eigenvalues.head(m).cwiseSqrt().cwiseProduct(xi.head(m));
  return {basis.grid, std::move(g)};
}

/// Basis for a coarser nested grid by block-averaging each eigenfunction.
/// Sampling then commutes with field restriction: restricting a fine sample
/// equals sampling the restricted basis with the same coefficients.
inline KLBasis kl_restrict_basis(const KLBasis& fine, const Grid& coarse) {
  KLBasis out;
  out.grid = coarse;
  out.eigenvalues = fine.eigenvalues;
  out.trace_all = fine.trace_all;
  out.mean_field = restrict_field({fine.grid, fine.mean_field}, coarse).values;
  out.basis.resize(coarse.cells(), fine.m_max());
  for (int m = 0; m < fine.m_max(); ++m)
    out.basis.col(m) = restrict_field({fine.grid, fine.basis.col(m)}, coarse).values;
  return out;
}

}  // namespace mlmcmc

#endif
