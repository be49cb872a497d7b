#ifndef MLMCMC_DIAGNOSTICS_HPP
#define MLMCMC_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlmcmc/grid.hpp"
#include "mlmcmc/kl.hpp"
#include "mlmcmc/las.hpp"
#include "mlmcmc/mcmc.hpp"
#include "mlmcmc/wavelet.hpp"

namespace mlmcmc {

/// Integrated autocorrelation time, 1 + 2 sum rho_k, with Sokal's automatic
/// window: the smallest W with W >= c * IAT(W), c = 5. A constant series is
/// degenerate; its IAT is defined as the series length and flagged.
inline double estimate_iat(const Eigen::VectorXd& series, bool* degenerate = nullptr,
                           double c = 5.0) {
  const long n = series.size();
  if (n < 100) throw std::domain_error("estimate_iat: need at least 100 samples");
  if (degenerate) *degenerate = false;
  if ((series.array() == series[0]).all()) {
    if (degenerate) *degenerate = true;
    return static_cast<double>(n);
  }
  const double mean = series.mean();
  const Eigen::ArrayXd d = series.array() - mean;
  const double var = d.square().sum() / n;
  double iat = 1.0;
  for (long k = 1; k < n; ++k) {
    const double rho = (d.head(n - k) * d.tail(n - k)).sum() / (n * var);
    iat += 2.0 * rho;
    if (static_cast<double>(k) >= c * iat) break;
  }
  return iat;
}

struct LevelDiagnostics {
  double var_y = 0.0;
  double iat = 1.0;
  long n_samples = 0;
  double rejection_rate = 0.0;
  double cost_per_sample = 0.0;  ///< seconds, excluding precompute
};

/// Post-burn-in Y_l series of one chain; Y_0 := Q_0.
inline Eigen::VectorXd correction_series(const ChainRecord& rec) {
  const long n = rec.steps() - rec.burn_in;
  if (n < 1) throw std::domain_error("correction_series: burn-in exhausts the chain");
  if (rec.level == 0) return rec.qoi.tail(n);
  return rec.qoi.tail(n) - rec.qoi_coarse.tail(n);
}

/// Pool replica chains per level: variance over the pooled post-burn-in Y
/// samples, IAT averaged across replicas, rejection rate over all steps.
inline std::vector<LevelDiagnostics> compute_level_diagnostics(
    const std::vector<std::vector<ChainRecord>>& replicas) {
  if (replicas.empty() || replicas[0].empty())
    throw std::domain_error("compute_level_diagnostics: no chains");
  const std::size_t levels = replicas[0].size();
  std::vector<LevelDiagnostics> out(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    std::vector<double> pooled;
    double iat_sum = 0.0, rej_sum = 0.0;
    for (const auto& rep : replicas) {
      if (rep.size() != levels)
        throw std::domain_error("compute_level_diagnostics: ragged replica list");
      const Eigen::VectorXd y = correction_series(rep[l]);
      pooled.insert(pooled.end(), y.data(), y.data() + y.size());
      iat_sum += std::max(1.0, estimate_iat(y));
      rej_sum += 1.0 - rep[l].acceptance_rate();
    }
    Eigen::Map<const Eigen::VectorXd> p(pooled.data(), static_cast<long>(pooled.size()));
    const double m = p.mean();
    out[l].var_y = (p.array() - m).square().sum() / std::max<long>(1, p.size() - 1);
    out[l].iat = iat_sum / replicas.size();
    out[l].n_samples = p.size();
    out[l].rejection_rate = rej_sum / replicas.size();
  }
  return out;
}

/// Eq (26): eps^2 = sum_l V(Y_l) IAT_l / N_l.
inline double sampling_error(const std::vector<LevelDiagnostics>& diag) {
  double e2 = 0.0;
  for (const auto& d : diag) {
    if (d.n_samples < 1) throw std::domain_error("sampling_error: empty level");
    e2 += d.var_y * d.iat / static_cast<double>(d.n_samples);
  }
  return std::sqrt(e2);
}

/// Least-squares slope of log(y) against log(x).
inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::domain_error("fit_loglog_slope: need matching arrays of length >= 2");
  const long n = static_cast<long>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (long i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::domain_error("fit_loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// One method's truncation-error curve and its fitted log-log rate.
struct TruncationCurve {
  std::vector<int> m;
  std::vector<double> error;  ///< L2(D) distance to the reference realization
  double slope = 0.0;
};

namespace detail {
/// Slope over the strictly positive entries; 0 when fewer than two remain
/// (exact-reproduction points sit at the floor and carry no rate).
inline double truncation_slope(const std::vector<int>& m, const std::vector<double>& err) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (err[i] > 0.0) {
      x.push_back(static_cast<double>(m[i]));
      y.push_back(err[i]);
    }
  return x.size() >= 2 ? fit_loglog_slope(x, y) : 0.0;
}
}  // namespace detail

/// L2-projection truncation: project the reference onto the first m
/// eigenfunctions (they are L2-orthonormal) and measure the remainder.
inline TruncationCurve kl_truncation_curve(const KLBasis& basis, const FieldRealization& ref,
                                           const std::vector<int>& m_grid) {
  if (!(ref.grid == basis.grid))
    throw std::domain_error("kl_truncation_curve: reference grid mismatch");
  const double h2 = ref.grid.h() * ref.grid.h();
  const Eigen::VectorXd centered = ref.values - basis.mean_field;
  const Eigen::VectorXd coeffs = h2 * (basis.basis.transpose() * centered);
  TruncationCurve out;
  for (int m : m_grid) {
    if (m > basis.m_max()) continue;
    const Eigen::VectorXd resid = centered - basis.basis.leftCols(m) * coeffs.head(m);
    out.m.push_back(m);
    out.error.push_back(FieldRealization{ref.grid, resid}.l2_norm());
  }
  out.slope = detail::truncation_slope(out.m, out.error);
  return out;
}

/// Coefficient truncation of a known wavelet expansion.
inline TruncationCurve wavelet_truncation_curve(const WaveletBasis& basis,
                                                const Eigen::VectorXd& xi,
                                                const std::vector<int>& m_grid) {
  const int m_full = static_cast<int>(std::min<Eigen::Index>(xi.size(), basis.basis.cols()));
  const FieldRealization full = wavelet_sample(basis, xi, m_full);
  TruncationCurve out;
  for (int m : m_grid) {
    if (m > m_full) continue;
    const FieldRealization part = wavelet_sample(basis, xi, m);
    out.m.push_back(m);
    out.error.push_back(FieldRealization{full.grid, full.values - part.values}.l2_norm());
  }
  out.slope = detail::truncation_slope(out.m, out.error);
  return out;
}

/// Local-mean truncation at the resolution m coefficients buy. Full stages
/// are plain block averages; between stages the first parents (in the
/// sampler's traversal order) are refined, three new coefficients each.
inline TruncationCurve las_truncation_curve(const FieldRealization& ref, int nx0,
                                            const std::vector<int>& m_grid) {
  const Grid& rg = ref.grid;
  if (nx0 < 1 || rg.nx % nx0 != 0 || rg.nx / nx0 != rg.ny)
    throw std::domain_error("las_truncation_curve: reference grid is not an LAS stage grid");
  int k_ref = 0;
  while ((1 << k_ref) < rg.ny) ++k_ref;
  if ((1 << k_ref) != rg.ny)
    throw std::domain_error("las_truncation_curve: reference grid is not an LAS stage grid");
  LASCoefficients shape;  // only for grid/count bookkeeping
  shape.nx0 = nx0;
  shape.domain = rg.domain;

  TruncationCurve out;
  for (int m : m_grid) {
    if (m < nx0 || m > shape.coeff_count(k_ref)) continue;
    int k = 0;
    while (shape.coeff_count(k) < m) ++k;
    // Stage-k local means, with parents of rank >= p kept at stage k-1.
    const Grid gk = shape.grid_at(std::min(k, k_ref));
    FieldRealization avg = restrict_field(ref, gk);
    if (shape.coeff_count(k) != m && k > 0) {
      const long p = (m - shape.coeff_count(k - 1)) / 3;
      const Grid gp = shape.grid_at(k - 1);
      const FieldRealization coarse = restrict_field(ref, gp);
      long rank = 0;
      for (int j = gp.ny - 1; j >= 0; --j)
        for (int i = 0; i < gp.nx; ++i, ++rank) {
          if (rank < p) continue;
          for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di)
              avg.values[gk.index(2 * i + di, 2 * j + dj)] = coarse(i, j);
        }
    }
    // Prolong back to the reference grid and measure the L2 gap.
    const int r = rg.nx / avg.grid.nx;
    Eigen::VectorXd diff = ref.values;
    for (int j = 0; j < rg.ny; ++j)
      for (int i = 0; i < rg.nx; ++i) diff[rg.index(i, j)] -= avg(i / r, j / r);
    out.m.push_back(m);
    out.error.push_back(FieldRealization{rg, diff}.l2_norm());
  }
  out.slope = detail::truncation_slope(out.m, out.error);
  return out;
}

/// Streaming (Welford) posterior mean and pointwise standard deviation of the
/// transformed fields along a chain's post-burn-in states.
inline std::pair<FieldRealization, FieldRealization> posterior_field_maps(
    const ChainRecord& rec,
    const std::function<FieldRealization(const Eigen::VectorXd&)>& field_of, int thin = 1) {
  if (thin < 1) throw std::domain_error("posterior_field_maps: thin must be >= 1");
  if (rec.steps() - rec.burn_in < 1)
    throw std::domain_error("posterior_field_maps: no post-burn-in samples");
  Eigen::VectorXd mean, m2;
  Grid grid(4, 1);  // placeholder; replaced by the first sample's grid
  long count = 0;
  for (long n = rec.burn_in; n < rec.steps(); n += thin) {
    const FieldRealization f = field_of(rec.states.col(n));
    if (count == 0) {
      grid = f.grid;
      mean = Eigen::VectorXd::Zero(f.values.size());
      m2 = mean;
    }
    ++count;
    const Eigen::VectorXd delta = f.values - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta.cwiseProduct(f.values - mean);
  }
  // Population normalization: a two-state alternating chain reports exactly
  // half the gap.
  const Eigen::VectorXd var = m2 / static_cast<double>(count);
  return {FieldRealization{grid, mean}, FieldRealization{grid, var.cwiseSqrt()}};
}

struct RejectionCurve {
  std::vector<double> rate;   ///< per level, 1 - mean accept flag
  double slope = 0.0;         ///< log-log fit against R_l (0 if degenerate)
};

/// Per-level rejection rates with a log-log fit against the element counts.
inline RejectionCurve rejection_rate_curve(const std::vector<ChainRecord>& records,
                                           const std::vector<double>& r_elements) {
  if (records.size() < 2 || records.size() != r_elements.size())
    throw std::domain_error("rejection_rate_curve: need >= 2 levels with element counts");
  RejectionCurve out;
  for (const auto& r : records) out.rate.push_back(1.0 - r.acceptance_rate());
  bool positive = true;
  for (double v : out.rate) positive = positive && v > 0.0;
  if (positive) out.slope = fit_loglog_slope(r_elements, out.rate);
  return out;
}

}  // namespace mlmcmc

#endif
