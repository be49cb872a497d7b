#ifndef MLMCMC_WAVELET_HPP
#define MLMCMC_WAVELET_HPP

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlmcmc/covariance.hpp"
#include "mlmcmc/grid.hpp"

namespace mlmcmc {

/// Torus T = [-gamma,gamma]^2 embedding the domain, with the smooth radial
/// cutoff phi: phi(r)=1 for r <= delta = diam(D), phi(r)=0 for r >= 2gamma-delta.
struct TorusEmbedding {
  double gamma = 0.0;      ///< torus half-width [m]
  double delta = 0.0;      ///< diam(D) [m]
  double kappa_cut = 0.0;  ///< 2 gamma - delta [m]

  static TorusEmbedding for_domain(const Domain& d, double factor = 1.25) {
    TorusEmbedding t;
    t.delta = d.diameter();
    t.gamma = factor * t.delta;
    t.kappa_cut = 2.0 * t.gamma - t.delta;
    if (!(t.kappa_cut > t.delta))
      throw std::domain_error("TorusEmbedding: cutoff band is empty (need gamma > delta)");
    return t;
  }

  /// Smooth cutoff, radial in the Euclidean norm.
  double cutoff(double r) const {
    auto zeta = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    if (r <= delta) return 1.0;
    if (r >= kappa_cut) return 0.0;
    const double a = zeta((kappa_cut - r) / (kappa_cut - delta));
    const double b = zeta((r - delta) / (kappa_cut - delta));
    return a / (a + b);
  }
};

namespace meyer {

/// Standard polynomial auxiliary function: smooth monotone 0->1 on [0,1].
inline double aux(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * x * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x);
}

/// Fourier transform of the Meyer scaling function (real, even).
inline double scaling_hat(double w) {
  constexpr double pi = std::numbers::pi;
  const double a = std::abs(w);
  if (a <= 2.0 * pi / 3.0) return 1.0;
  if (a >= 4.0 * pi / 3.0) return 0.0;
  return std::cos(pi / 2.0 * aux(3.0 * a / (2.0 * pi) - 1.0));
}

/// Fourier transform of the Meyer mother wavelet.
inline std::complex<double> wavelet_hat(double w) {
  constexpr double pi = std::numbers::pi;
  const double a = std::abs(w);
  double mag = 0.0;
  if (a > 2.0 * pi / 3.0 && a < 4.0 * pi / 3.0)
    mag = std::sin(pi / 2.0 * aux(3.0 * a / (2.0 * pi) - 1.0));
  else if (a >= 4.0 * pi / 3.0 && a < 8.0 * pi / 3.0)
    mag = std::cos(pi / 2.0 * aux(3.0 * a / (4.0 * pi) - 1.0));
  if (mag == 0.0) return {0.0, 0.0};
  return std::polar(mag, w / 2.0);
}

/// Fourier coefficient on the unit torus of the periodized factor phi_{j,k} or
/// psi_{j,k}: 2^{-j/2} what(2 pi n / 2^j) exp(-2 pi i n k / 2^j).
inline std::complex<double> factor_coeff(bool is_wavelet, int j, int k, int n) {
  constexpr double pi = std::numbers::pi;
  const double scale = std::pow(2.0, j);
  const double w = 2.0 * pi * n / scale;
  const std::complex<double> hat = is_wavelet ? wavelet_hat(w) : std::complex<double>(scaling_hat(w), 0.0);
  if (hat == std::complex<double>(0.0, 0.0)) return hat;
  return hat * std::polar(1.0 / std::sqrt(scale), -2.0 * pi * n * k / scale);
}

/// Frequencies |n| strictly below this bound can be nonzero for the factor.
inline int support_bound(bool is_wavelet, int j) {
  const double scale = std::pow(2.0, j);
  return static_cast<int>(std::ceil((is_wavelet ? 4.0 / 3.0 : 2.0 / 3.0) * scale));
}

}  // namespace meyer

/// Label of one 2D basis function. m=1 is the scaling term ('s'); scale j
/// holds orientations 'h' (psi_j x phi_j), 'v' (phi_j x psi_j), 'd'
/// (psi_j x psi_j), each with translations (kx,ky) in row-major order
/// (ky outer, kx inner).
struct WaveletLabel {
  int scale = 0;
  int kx = 0;
  int ky = 0;
  char orientation = 's';
};

/// Coarse-to-fine ordering of the first m_max basis functions.
inline std::vector<WaveletLabel> wavelet_ordering(int m_max) {
  if (m_max < 1) throw std::domain_error("wavelet_ordering: m_max must be positive");
  std::vector<WaveletLabel> out;
  out.reserve(m_max);
  out.push_back({0, 0, 0, 's'});
  for (int j = 0; static_cast<int>(out.size()) < m_max; ++j) {
    const int t = 1 << j;
    for (char o : {'h', 'v', 'd'})
      for (int ky = 0; ky < t; ++ky)
        for (int kx = 0; kx < t; ++kx) {
          if (static_cast<int>(out.size()) == m_max) return out;
          out.push_back({j, kx, ky, o});
        }
  }
  return out;
}

/// Fourier coefficient table of a torus covariance: sqrt_c(i1,i2) holds
/// sqrt(c_n(C^T)) for n = (i1 - n_max, i2 - n_max).
struct CovarianceCoeffTable {
  double gamma = 0.0;
  int n_max = 0;
  Eigen::ArrayXXd sqrt_c;
  double c0 = 0.0;          ///< DC coefficient
  double clamped_mass = 0.0;  ///< total negative mass clamped to zero
};

/// Coefficients c_n = int_T C^T(z) exp(-i pi n.z / gamma) dz of a covariance
/// function given directly on the torus, by FFT on an fft_resolution^2 grid.
/// Negative coefficients are clamped to zero; clamped mass beyond 1e-4 c_0
/// throws in strict mode.
template <class TorusCov>
CovarianceCoeffTable torus_covariance_coeffs(TorusCov&& ct, double gamma, int fft_resolution,
                                             int n_max, bool strict = false) {
  const int nf = fft_resolution;
  if (nf < 2 || (nf & (nf - 1)) != 0)
    throw std::domain_error("torus_covariance_coeffs: fft_resolution must be a power of two");
  if (n_max < 0 || 2 * n_max >= nf)
    throw std::domain_error(
        "torus_covariance_coeffs: fft_resolution too small for the requested band (need > 2 n_max)");

  Eigen::MatrixXcd s(nf, nf);
  for (int k2 = 0; k2 < nf; ++k2) {
    const double z2 = -gamma + 2.0 * gamma * k2 / nf;
    for (int k1 = 0; k1 < nf; ++k1) {
      const double z1 = -gamma + 2.0 * gamma * k1 / nf;
      s(k1, k2) = ct(Eigen::Vector2d(z1, z2));
    }
  }
  Eigen::FFT<double> fft;
  Eigen::VectorXcd buf(nf);
  for (int c = 0; c < nf; ++c) {
    fft.fwd(buf, Eigen::VectorXcd(s.col(c)));
    s.col(c) = buf;
  }
  for (int r = 0; r < nf; ++r) {
    fft.fwd(buf, Eigen::VectorXcd(s.row(r).transpose()));
    s.row(r) = buf.transpose();
  }

  CovarianceCoeffTable out;
  out.gamma = gamma;
  out.n_max = n_max;
  out.sqrt_c.resize(2 * n_max + 1, 2 * n_max + 1);
  const double quad = std::pow(2.0 * gamma / nf, 2);
  for (int n2 = -n_max; n2 <= n_max; ++n2)
    for (int n1 = -n_max; n1 <= n_max; ++n1) {
      // e^{-i pi n z/gamma} at z_k = -gamma + 2 gamma k/nf gives (-1)^n times
      // the DFT phase.
      const int sgn = ((n1 + n2) & 1) ? -1 : 1;
      double c = sgn * quad * s((n1 + nf) % nf, (n2 + nf) % nf).real();
      if (c < 0.0) {
        out.clamped_mass += -c;
        c = 0.0;
      }
      if (n1 == 0 && n2 == 0) out.c0 = c;
      out.sqrt_c(n1 + n_max, n2 + n_max) = std::sqrt(c);
    }
  if (strict && out.clamped_mass > 1e-4 * out.c0)
    throw std::runtime_error("torus_covariance_coeffs: clamped mass " +
                             std::to_string(out.clamped_mass) + " exceeds 1e-4 c0 = " +
                             std::to_string(1e-4 * out.c0));
  return out;
}

/// Coefficients of the periodized cutoff covariance
/// C^T(z) = sum_{n in {-1,0,1}^2} C(|z + 2 gamma n|) phi(|z + 2 gamma n|).
template <class RadialKernel>
CovarianceCoeffTable periodized_covariance_coeffs_kernel(RadialKernel&& kernel,
                                                         const TorusEmbedding& emb,
                                                         int fft_resolution, int n_max,
                                                         bool strict = false) {
  auto ct = [&](const Eigen::Vector2d& z) {
    double v = 0.0;
    for (int p1 = -1; p1 <= 1; ++p1)
      for (int p2 = -1; p2 <= 1; ++p2) {
        const double r = (z + 2.0 * emb.gamma * Eigen::Vector2d(p1, p2)).norm();
        if (r < emb.kappa_cut) v += kernel(r) * emb.cutoff(r);
      }
    return v;
  };
  return torus_covariance_coeffs(ct, emb.gamma, fft_resolution, n_max, strict);
}

inline CovarianceCoeffTable periodized_covariance_coeffs(const MaternParams& params,
                                                         const TorusEmbedding& emb,
                                                         int fft_resolution = 1024, int n_max = 128,
                                                         bool strict = false) {
  params.validate();
  return periodized_covariance_coeffs_kernel([&](double r) { return matern(params, r); }, emb,
                                             fft_resolution, n_max, strict);
}

/// Wavelet basis fields b_m^T evaluated at the cell centers of `grid`.
struct WaveletBasis {
  Grid grid;
  Eigen::MatrixXd basis;  ///< cells x m_max
  std::vector<WaveletLabel> ordering;
  Eigen::VectorXd norm_t;  ///< L2(T) norm of each b_m^T
  TorusEmbedding embedding;

  int m_max() const { return static_cast<int>(ordering.size()); }
};

namespace detail {

/// Nonzero band of a factor at scale j and the coefficient values there.
inline void factor_band(bool is_wavelet, int j, int k, std::vector<int>& ns,
                        std::vector<std::complex<double>>& coeffs) {
  const int bound = meyer::support_bound(is_wavelet, j);
  ns.clear();
  coeffs.clear();
  for (int n = -bound; n <= bound; ++n) {
    const auto c = meyer::factor_coeff(is_wavelet, j, k, n);
    if (c != std::complex<double>(0.0, 0.0)) {
      ns.push_back(n);
      coeffs.push_back(c);
    }
  }
}

}  // namespace detail

/// Build the first m_max fields of Eq-style synthesis
/// b_m^T(x) = (2 gamma)^{-1} sum_n sqrt(c_n(C^T)) c_n(b~_m) e^{i pi n.x/gamma},
/// using the tensor structure of both the basis and the evaluation grid.
inline WaveletBasis wavelet_precompute(const CovarianceCoeffTable& table, const Grid& grid,
                                       int m_max) {
  WaveletBasis out;
  out.grid = grid;
  out.ordering = wavelet_ordering(m_max);
  out.embedding.gamma = table.gamma;
  const int j_max = out.ordering.back().scale;
  if (meyer::support_bound(true, j_max) > table.n_max)
    throw std::domain_error("wavelet_precompute: coefficient table band too small for scale " +
                            std::to_string(j_max) + " (need n_max >= " +
                            std::to_string(meyer::support_bound(true, j_max)) + ")");

  const double gamma = table.gamma;
  constexpr double pi = std::numbers::pi;
  // Complex exponentials on the tensor grid, per frequency index.
  const int nb = 2 * table.n_max + 1;
  Eigen::MatrixXcd ex(grid.nx, nb), ey(grid.ny, nb);
  for (int n = -table.n_max; n <= table.n_max; ++n) {
    for (int i = 0; i < grid.nx; ++i)
      ex(i, n + table.n_max) = std::polar(1.0, pi * n * grid.cell_center(i, 0)[0] / gamma);
    for (int j = 0; j < grid.ny; ++j)
      ey(j, n + table.n_max) = std::polar(1.0, pi * n * grid.cell_center(0, j)[1] / gamma);
  }

  out.basis.resize(grid.cells(), m_max);
  out.norm_t.resize(m_max);
  std::vector<int> n1s, n2s;
  std::vector<std::complex<double>> c1s, c2s;
  for (int m = 0; m < m_max; ++m) {
    const auto& lab = out.ordering[m];
    const bool w1 = lab.orientation == 'h' || lab.orientation == 'd';
    const bool w2 = lab.orientation == 'v' || lab.orientation == 'd';
    detail::factor_band(w1, lab.scale, lab.kx, n1s, c1s);
    detail::factor_band(w2, lab.scale, lab.ky, n2s, c2s);
    // c_n(b~_m) = 2 gamma (-1)^{n1+n2} chat_{n1}(f1) chat_{n2}(f2); combined
    // with the (2 gamma)^{-1} prefactors of Eq-style e_n this leaves
    // (2 gamma)^{-1} sqrt(c_n) times the unit-torus coefficients.
    Eigen::MatrixXcd mid(n1s.size(), n2s.size());
    double norm2 = 0.0;
    for (std::size_t b2 = 0; b2 < n2s.size(); ++b2)
      for (std::size_t b1 = 0; b1 < n1s.size(); ++b1) {
        const int sgn = ((n1s[b1] + n2s[b2]) & 1) ? -1 : 1;
        const double sc = table.sqrt_c(n1s[b1] + table.n_max, n2s[b2] + table.n_max);
        mid(b1, b2) = sgn * sc * c1s[b1] * c2s[b2];
        norm2 += std::norm(mid(b1, b2));
      }
    out.norm_t[m] = std::sqrt(norm2);
    Eigen::MatrixXcd exs(grid.nx, n1s.size()), eys(grid.ny, n2s.size());
    for (std::size_t b1 = 0; b1 < n1s.size(); ++b1)
      exs.col(b1) = ex.col(n1s[b1] + table.n_max);
    for (std::size_t b2 = 0; b2 < n2s.size(); ++b2)
      eys.col(b2) = ey.col(n2s[b2] + table.n_max);
    const Eigen::MatrixXd field = ((exs * mid * eys.transpose()) / (2.0 * gamma)).real();
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) out.basis(grid.index(i, j), m) = field(i, j);
  }
  return out;
}

inline WaveletBasis wavelet_precompute(const MaternParams& params, const TorusEmbedding& emb,
                                       const Grid& grid, int m_max, int fft_resolution = 1024,
                                       bool strict = false) {
  const int j_max = wavelet_ordering(m_max).back().scale;
  const int n_max = meyer::support_bound(true, j_max);
  auto table = periodized_covariance_coeffs(params, emb, fft_resolution, n_max, strict);
  return wavelet_precompute(table, grid, m_max);
}

/// Direct synthesis g = sum_m xi_m b_m^T without storing the dense basis:
/// the per-mode coefficients are accumulated in frequency space first, so
/// arbitrarily many modes cost one grid evaluation. Matches wavelet_sample
/// of a basis built from the same table.
inline FieldRealization wavelet_draw_field(const CovarianceCoeffTable& table, const Grid& grid,
                                           const Eigen::VectorXd& xi) {
  const int m_max = static_cast<int>(xi.size());
  const auto ordering = wavelet_ordering(m_max);
  const int j_max = ordering.back().scale;
  if (meyer::support_bound(true, j_max) > table.n_max)
    throw std::domain_error("wavelet_draw_field: coefficient table band too small for scale " +
                            std::to_string(j_max));
  const int nb = 2 * table.n_max + 1;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(nb, nb);
  std::vector<int> n1s, n2s;
  std::vector<std::complex<double>> c1s, c2s;
  for (int m = 0; m < m_max; ++m) {
    if (xi[m] == 0.0) continue;
    const auto& lab = ordering[m];
    detail::factor_band(lab.orientation == 'h' || lab.orientation == 'd', lab.scale, lab.kx, n1s,
                        c1s);
    detail::factor_band(lab.orientation == 'v' || lab.orientation == 'd', lab.scale, lab.ky, n2s,
                        c2s);
    for (std::size_t b2 = 0; b2 < n2s.size(); ++b2)
      for (std::size_t b1 = 0; b1 < n1s.size(); ++b1) {
        const int sgn = ((n1s[b1] + n2s[b2]) & 1) ? -1 : 1;
        const double sc = table.sqrt_c(n1s[b1] + table.n_max, n2s[b2] + table.n_max);
        acc(n1s[b1] + table.n_max, n2s[b2] + table.n_max) += xi[m] * sgn * sc * c1s[b1] * c2s[b2];
      }
  }
  constexpr double pi = std::numbers::pi;
  Eigen::MatrixXcd ex(grid.nx, nb), ey(grid.ny, nb);
  for (int n = -table.n_max; n <= table.n_max; ++n) {
    for (int i = 0; i < grid.nx; ++i)
      ex(i, n + table.n_max) = std::polar(1.0, pi * n * grid.cell_center(i, 0)[0] / table.gamma);
    for (int j = 0; j < grid.ny; ++j)
      ey(j, n + table.n_max) = std::polar(1.0, pi * n * grid.cell_center(0, j)[1] / table.gamma);
  }
  const Eigen::MatrixXd field = ((ex * acc * ey.transpose()) / (2.0 * table.gamma)).real();
  Eigen::VectorXd g(grid.cells());
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) g[grid.index(i, j)] = field(i, j);
  return {grid, std::move(g)};
}

/// g = sum_{k<m} xi_k b_k^T restricted to D; no separate mean term.
inline FieldRealization wavelet_sample(const WaveletBasis& basis, const Eigen::VectorXd& xi,
                                       int m) {
  if (m < 0 || m > basis.m_max())
    throw std::domain_error("wavelet_sample: truncation exceeds basis size");
  if (xi.size() < m) throw std::domain_error("wavelet_sample: coefficient vector too short");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(basis.grid.cells());
  if (m > 0) g = basis.basis.leftCols(m) * xi.head(m);
  return {basis.grid, std::move(g)};
}

/// Basis on a coarser nested grid by block-averaging, as in kl_restrict_basis.
inline WaveletBasis wavelet_restrict_basis(const WaveletBasis& fine, const Grid& coarse) {
  WaveletBasis out;
  out.grid = coarse;
  out.ordering = fine.ordering;
  out.norm_t = fine.norm_t;
  out.embedding = fine.embedding;
  out.basis.resize(coarse.cells(), fine.m_max());
  for (int m = 0; m < fine.m_max(); ++m)
    out.basis.col(m) = restrict_field({fine.grid, fine.basis.col(m)}, coarse).values;
  return out;
}

}  // namespace mlmcmc

#endif
