#ifndef MLMCMC_LAS_HPP
#define MLMCMC_LAS_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlmcmc/covariance.hpp"
#include "mlmcmc/grid.hpp"

namespace mlmcmc {

/// One subdivision stencil: best-linear-estimator weights for the three
/// stochastic children of a parent cell given its (possibly clipped) 3x3
/// neighborhood, plus the lower Cholesky factor of the residual covariance.
struct LASStencil {
  std::vector<std::pair<int, int>> offsets;  ///< neighbor offsets (m,n), center included
  Eigen::MatrixXd a;                         ///< 3 x offsets.size() weights
  Eigen::Matrix3d c;                         ///< lower-triangular noise factor
};

/// Per-iteration stencils keyed by the clipped neighborhood extents
/// (mlo, mhi, nlo, nhi) in {-1,0} x {0,1} x {-1,0} x {0,1}.
struct LASIteration {
  std::map<std::array<int, 4>, LASStencil> variants;
};

struct LASCoefficients {
  MaternParams params;
  Domain domain;
  int nx0 = 4;  ///< initial cells along x (square cells of side Dy)
  Eigen::MatrixXd initial_cov;   ///< covariance of the initial cell averages
  Eigen::MatrixXd initial_chol;  ///< its lower Cholesky factor
  std::vector<LASIteration> iterations;

  int k_max() const { return static_cast<int>(iterations.size()); }
  Grid grid_at(int k) const {
    return Grid(nx0 << k, 1 << k, domain);
  }
  /// Total coefficient count to reach iteration k: one per cell.
  int coeff_count(int k) const { return nx0 << (2 * k); }
};

namespace detail {

/// Cell-average covariance with composite quadrature only where the kernel
/// kink matters (touching or overlapping boxes), memoized on the integer
/// offset/size key in units of `unit`.
class CellCovCache {
 public:
  CellCovCache(const MaternParams& p, double unit) : p_(p), unit_(unit) {}

  double operator()(const Eigen::Vector2d& ca, double sa, const Eigen::Vector2d& cb, double sb) {
    auto q = [&](double v) { return static_cast<long>(std::llround(v / unit_)); };
    const std::array<long, 6> key{q(cb[0] - ca[0]), q(cb[1] - ca[1]), q(sa), q(sb), 0, 0};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    // Gap between the boxes along each axis (corner-based).
    const double gap_x = std::max(std::max(cb[0] - (ca[0] + sa), ca[0] - (cb[0] + sb)), 0.0);
    const double gap_y = std::max(std::max(cb[1] - (ca[1] + sa), ca[1] - (cb[1] + sb)), 0.0);
    const int subdiv = (gap_x > 0.0 || gap_y > 0.0) ? 1 : 4;
    const double v = cell_average_covariance(p_, ca, sa, cb, sb, 4, subdiv);
    cache_.emplace(key, v);
    return v;
  }

 private:
  MaternParams p_;
  double unit_;
  std::map<std::array<long, 6>, double> cache_;
};

/// Lower Cholesky of a PSD 3x3 matrix, tolerating zero pivots; throws `what`
/// if the matrix is indefinite beyond roundoff.
inline Eigen::Matrix3d chol3_psd(Eigen::Matrix3d r, const std::string& what) {
  const double scale = std::max(r.diagonal().maxCoeff(), 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(r);
  if (es.eigenvalues().minCoeff() < -1e-8 * std::max(scale, 1e-300))
    throw std::runtime_error(what + ": residual covariance is indefinite (eigenvalue " +
                             std::to_string(es.eigenvalues().minCoeff()) + ")");
  Eigen::Matrix3d l = Eigen::Matrix3d::Zero();
  for (int j = 0; j < 3; ++j) {
    double d = r(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 1e-14 * std::max(scale, 1e-300)) continue;  // rank-deficient direction
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < 3; ++i) {
      double s = r(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

}  // namespace detail

/// Precompute the subdivision coefficients of Eq-(15)-style LAS for the 4:1
/// beam: initial row of nx0 unit squares, then k_max quartering iterations.
/// Children of parent (i,j), 0-based: s=1 -> (2i+1,2j+1), s=2 -> (2i+1,2j),
/// s=3 -> (2i,2j+1); the fourth child (2i,2j) is determined by conservation.
inline LASCoefficients las_precompute(const MaternParams& params, const Domain& domain,
                                      int k_max) {
  params.validate();
  if (k_max < 0) throw std::domain_error("las_precompute: k_max must be nonnegative");
  const double ratio = domain.Dx / domain.Dy;
  const int nx0 = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - nx0) > 1e-12 || nx0 < 1)
    throw std::domain_error("las_precompute: Dx/Dy must be a positive integer");

  LASCoefficients out;
  out.params = params;
  out.domain = domain;
  out.nx0 = nx0;

  const double h0 = domain.Dy;
  detail::CellCovCache cov(params, h0 / (2 << k_max));

  out.initial_cov.resize(nx0, nx0);
  for (int j = 0; j < nx0; ++j)
    for (int i = 0; i < nx0; ++i)
      out.initial_cov(i, j) = cov({i * h0, 0.0}, h0, {j * h0, 0.0}, h0);
  Eigen::LLT<Eigen::MatrixXd> llt(out.initial_cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("las_precompute: initial covariance is not positive definite");
  out.initial_chol = llt.matrixL();

  out.iterations.resize(k_max);
  for (int k = 0; k < k_max; ++k) {
    const double hp = h0 / (1 << k), hc = 0.5 * hp;
    // Child corners relative to the parent corner, stochastic order s=1..3.
    const std::array<Eigen::Vector2d, 3> child{
        Eigen::Vector2d{hc, hc}, Eigen::Vector2d{hc, 0.0}, Eigen::Vector2d{0.0, hc}};
    const Grid pgrid = out.grid_at(k);
    for (int mlo = -1; mlo <= 0; ++mlo)
      for (int mhi = 0; mhi <= 1; ++mhi)
        for (int nlo = -1; nlo <= 0; ++nlo)
          for (int nhi = 0; nhi <= 1; ++nhi) {
            // Skip variants no parent cell can have on this grid.
            if (pgrid.nx == 1 && (mlo < 0 || mhi > 0)) continue;
            if (pgrid.ny == 1 && (nlo < 0 || nhi > 0)) continue;
            LASStencil st;
            for (int n = nlo; n <= nhi; ++n)
              for (int m = mlo; m <= mhi; ++m) st.offsets.emplace_back(m, n);
            const int np = static_cast<int>(st.offsets.size());

            Eigen::MatrixXd cpp(np, np), cpt(np, 3);
            Eigen::Matrix3d ctt;
            for (int q = 0; q < np; ++q) {
              const Eigen::Vector2d pq{st.offsets[q].first * hp, st.offsets[q].second * hp};
              for (int r = 0; r < np; ++r) {
                const Eigen::Vector2d pr{st.offsets[r].first * hp, st.offsets[r].second * hp};
                cpp(r, q) = cov(pr, hp, pq, hp);
              }
              for (int s = 0; s < 3; ++s) cpt(q, s) = cov(pq, hp, child[s], hc);
            }
            for (int s = 0; s < 3; ++s)
              for (int t = 0; t < 3; ++t) ctt(s, t) = cov(child[s], hc, child[t], hc);

            // Best linear estimator of each child given the neighborhood;
            // the residual covariance is the Schur complement, PSD by
            // construction. Full 3x3 stencils reproduce constants to
            // quadrature accuracy; clipped boundary stencils do not, which is
            // inherent to the reduced conditioning set.
            Eigen::FullPivLU<Eigen::MatrixXd> lu(cpp);
            if (!lu.isInvertible())
              throw std::runtime_error(
                  "las_precompute: singular covariance system at iteration " + std::to_string(k) +
                  ", stencil (" + std::to_string(mlo) + "," + std::to_string(mhi) + "," +
                  std::to_string(nlo) + "," + std::to_string(nhi) + ")");
            st.a = lu.solve(cpt).transpose();  // 3 x np
            const Eigen::Matrix3d resid = ctt - st.a * cpt;
            st.c = detail::chol3_psd(
                resid, "las_precompute: iteration " + std::to_string(k) + ", stencil (" +
                           std::to_string(mlo) + "," + std::to_string(mhi) + "," +
                           std::to_string(nlo) + "," + std::to_string(nhi) + ")");
            out.iterations[k].variants.emplace(std::array<int, 4>{mlo, mhi, nlo, nhi},
                                               std::move(st));
          }
  }
  return out;
}

namespace detail {

/// One quartering step. `xi_at` returns the three fresh normals of a parent
/// (or zeros past the truncation point); parents are visited top-to-bottom,
/// left-to-right, which defines the coefficient order.
template <class XiFn>
FieldRealization las_refine(const LASCoefficients& coeffs, const FieldRealization& parent, int k,
                            XiFn&& xi_at) {
  const Grid& pg = parent.grid;
  const Grid cg = coeffs.grid_at(k + 1);
  FieldRealization child{cg, Eigen::VectorXd::Zero(cg.cells())};
  const auto& iter = coeffs.iterations[k];
  int parent_rank = 0;
  for (int j = pg.ny - 1; j >= 0; --j)
    for (int i = 0; i < pg.nx; ++i, ++parent_rank) {
      const std::array<int, 4> key{i > 0 ? -1 : 0, i < pg.nx - 1 ? 1 : 0, j > 0 ? -1 : 0,
                                   j < pg.ny - 1 ? 1 : 0};
      const LASStencil& st = iter.variants.at(key);
      Eigen::VectorXd p(st.offsets.size());
      for (std::size_t q = 0; q < st.offsets.size(); ++q)
        p[q] = parent(i + st.offsets[q].first, j + st.offsets[q].second);
      const Eigen::Vector3d eta = st.c * xi_at(parent_rank);
      const Eigen::Vector3d vals = st.a * p + eta;
      child(2 * i + 1, 2 * j + 1) = vals[0];
      child(2 * i + 1, 2 * j) = vals[1];
      child(2 * i, 2 * j + 1) = vals[2];
      child(2 * i, 2 * j) = 4.0 * parent(i, j) - vals.sum();
    }
  return child;
}

}  // namespace detail

/// Sample the cell-average field at iteration k_target. xi is consumed as:
/// nx0 initial values, then per iteration three values per parent in
/// top-to-bottom, left-to-right order.
inline FieldRealization las_sample(const LASCoefficients& coeffs, const Eigen::VectorXd& xi,
                                   int k_target) {
  if (k_target < 0 || k_target > coeffs.k_max())
    throw std::domain_error("las_sample: k_target exceeds precomputed iterations");
  if (xi.size() != coeffs.coeff_count(k_target))
    throw std::domain_error("las_sample: expected " +
                            std::to_string(coeffs.coeff_count(k_target)) + " coefficients, got " +
                            std::to_string(xi.size()));
  FieldRealization g{coeffs.grid_at(0), coeffs.initial_chol * xi.head(coeffs.nx0)};
  int consumed = coeffs.nx0;
  for (int k = 0; k < k_target; ++k) {
    g = detail::las_refine(coeffs, g, k, [&](int rank) {
      return Eigen::Vector3d(xi.segment(consumed + 3 * rank, 3));
    });
    consumed += 3 * (coeffs.nx0 << (2 * k));
  }
  return g;
}

/// Truncated sample: only the first m coefficients are used, the rest behave
/// as zero (conditional-mean refinement), and the field is still produced at
/// iteration k_target.
inline FieldRealization las_truncated(const LASCoefficients& coeffs, const Eigen::VectorXd& xi,
                                      int m, int k_target) {
  if (k_target < 0 || k_target > coeffs.k_max())
    throw std::domain_error("las_truncated: k_target exceeds precomputed iterations");
  const int full = coeffs.coeff_count(k_target);
  if (m < coeffs.nx0 || m > full)
    throw std::domain_error("las_truncated: m must be in [" + std::to_string(coeffs.nx0) + ", " +
                            std::to_string(full) + "]");
  if (xi.size() < m) throw std::domain_error("las_truncated: coefficient vector too short");
  FieldRealization g{coeffs.grid_at(0), coeffs.initial_chol * xi.head(coeffs.nx0)};
  int consumed = coeffs.nx0;
  for (int k = 0; k < k_target; ++k) {
    g = detail::las_refine(coeffs, g, k, [&](int rank) {
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      for (int s = 0; s < 3; ++s) {
        const int idx = consumed + 3 * rank + s;
        if (idx < m) v[s] = xi[idx];
      }
      return v;
    });
    consumed += 3 * (coeffs.nx0 << (2 * k));
  }
  return g;
}

}  // namespace mlmcmc

#endif
