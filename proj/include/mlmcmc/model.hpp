#ifndef MLMCMC_MODEL_HPP
#define MLMCMC_MODEL_HPP

#include <chrono>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlmcmc/inverse.hpp"
#include "mlmcmc/kl.hpp"
#include "mlmcmc/las.hpp"
#include "mlmcmc/mcmc.hpp"
#include "mlmcmc/qoi.hpp"
#include "mlmcmc/transform.hpp"
#include "mlmcmc/wavelet.hpp"

namespace mlmcmc {

/// The three field representations behind one per-level sampling interface.
/// KL and wavelet bases are built on the finest grid and block-averaged down
/// so that coarse-level sampling commutes with field restriction; LAS levels
/// are its native subdivision stages.
struct RepresentationHierarchy {
  std::string kind;  ///< kl | wavelet | las
  std::vector<Grid> grids;
  std::vector<int> truncations;

  std::vector<KLBasis> kl;           // per level
  std::vector<WaveletBasis> wavelet;  // per level
  LASCoefficients las;
  std::vector<int> las_stage;  // subdivision stage per level

  int levels() const { return static_cast<int>(grids.size()); }

  /// Gaussian field at `level` from the first truncations[level] entries.
  FieldRealization gaussian_field(int level, const Eigen::VectorXd& xi) const {
    const int m = truncations[level];
    if (xi.size() < m)
      throw std::domain_error("gaussian_field: coefficient vector shorter than the truncation");
    if (kind == "kl") return kl_sample(kl[level], xi, m);
    if (kind == "wavelet") return wavelet_sample(wavelet[level], xi, m);
    return las_sample(las, xi.head(m), las_stage[level]);
  }
};

inline int las_stage_of(const Grid& grid, int nx0) {
  if (grid.nx % nx0 != 0) throw std::domain_error("las_stage_of: grid does not match nx0");
  const int r = grid.nx / nx0;
  int k = 0;
  while ((1 << k) < r) ++k;
  if ((1 << k) != r || grid.ny != r)
    throw std::domain_error("las_stage_of: grid is not an LAS subdivision stage");
  return k;
}

inline RepresentationHierarchy build_representation_hierarchy(
    const std::string& kind, const MaternParams& matern, const std::vector<Grid>& grids,
    const std::vector<int>& truncations, int fft_resolution = 1024, bool strict = false) {
  if (grids.empty() || grids.size() != truncations.size())
    throw std::domain_error("build_representation_hierarchy: need one truncation per grid");
  RepresentationHierarchy rep;
  rep.kind = kind;
  rep.grids = grids;
  rep.truncations = truncations;
  const Grid& finest = grids.back();
  if (kind == "kl") {
    KLBasis fine = kl_precompute(matern, finest, truncations.back());
    for (std::size_t l = 0; l + 1 < grids.size(); ++l)
      rep.kl.push_back(kl_restrict_basis(fine, grids[l]));
    rep.kl.push_back(std::move(fine));
  } else if (kind == "wavelet") {
    WaveletBasis fine = wavelet_precompute(matern, TorusEmbedding::for_domain(finest.domain),
                                           finest, truncations.back(), fft_resolution, strict);
    for (std::size_t l = 0; l + 1 < grids.size(); ++l)
      rep.wavelet.push_back(wavelet_restrict_basis(fine, grids[l]));
    rep.wavelet.push_back(std::move(fine));
  } else if (kind == "las") {
    const int nx0 = static_cast<int>(std::lround(finest.domain.Dx / finest.domain.Dy));
    for (const Grid& g : grids) rep.las_stage.push_back(las_stage_of(g, nx0));
    rep.las = las_precompute(matern, finest.domain, rep.las_stage.back());
    for (std::size_t l = 0; l < grids.size(); ++l)
      if (truncations[l] != rep.las.coeff_count(rep.las_stage[l]))
        throw std::domain_error(
            "build_representation_hierarchy: LAS truncation must equal the stage coefficient "
            "count (" +
            std::to_string(rep.las.coeff_count(rep.las_stage[l])) + " at level " +
            std::to_string(l) + ")");
  } else {
    throw std::domain_error("build_representation_hierarchy: unknown representation '" + kind +
                            "'");
  }
  return rep;
}

/// Per-level initialization cost of an independent precompute at that level's
/// own resolution and truncation (the Fig.-10-style accounting). The level-0
/// build runs once untimed first so one-time process costs (allocator warmup,
/// cached FFT plans) don't land on the first measured level; `repetitions`
/// takes the minimum over that many timed runs per level.
inline std::vector<double> measure_precompute_seconds(const std::string& kind,
                                                      const MaternParams& matern,
                                                      const std::vector<Grid>& grids,
                                                      const std::vector<int>& truncations,
                                                      int fft_resolution = 1024,
                                                      int repetitions = 1) {
  using clock = std::chrono::steady_clock;
  if (repetitions < 1) throw std::domain_error("measure_precompute_seconds: repetitions < 1");
  std::vector<double> seconds;
  bool warm = false;
  for (std::size_t l = 0; l < grids.size(); ++l) {
    double best = std::numeric_limits<double>::infinity();
    const int runs = repetitions + (warm ? 0 : 1);
    for (int rep = 0; rep < runs; ++rep) {
    const bool warmup_run = !warm;
    const auto t0 = clock::now();
    if (kind == "kl") {
      volatile double sink = kl_precompute(matern, grids[l], truncations[l]).trace_all;
      (void)sink;
    } else if (kind == "wavelet") {
      volatile double sink =
          wavelet_precompute(matern, TorusEmbedding::for_domain(grids[l].domain), grids[l],
                             truncations[l], fft_resolution, false)
              .norm_t.sum();
      (void)sink;
    } else if (kind == "las") {
      const int nx0 = static_cast<int>(std::lround(grids[l].domain.Dx / grids[l].domain.Dy));
      volatile double sink =
          las_precompute(matern, grids[l].domain, las_stage_of(grids[l], nx0)).initial_cov.sum();
      (void)sink;
    } else {
      throw std::domain_error("measure_precompute_seconds: unknown representation");
    }
    const double dt = std::chrono::duration<double>(clock::now() - t0).count();
    if (warmup_run) {
      warm = true;  // discard the warmup run
      continue;
    }
    best = std::min(best, dt);
    }
    seconds.push_back(best);
  }
  return seconds;
}

/// Compose representation, gamma transform, FE likelihood, and QoI into the
/// coefficient-space level models the MCMC engine consumes.
inline std::vector<LevelModel> make_level_models(
    std::shared_ptr<const RepresentationHierarchy> rep, const GammaTransformParams& transform,
    const MaterialModel& material, const LineLoad& load, const ObservationSet& obs,
    bool per_node = true) {
  std::vector<LevelModel> models;
  for (int l = 0; l < rep->levels(); ++l) {
    auto like = std::make_shared<LevelLikelihood>(Mesh(rep->grids[l]), material, load, obs,
                                                  per_node);
    LevelModel m;
    m.truncation = rep->truncations[l];
    m.log_like = [rep, like, transform, l](const Eigen::VectorXd& xi) {
      return (*like)(transform_field(transform, rep->gaussian_field(l, xi), nullptr));
    };
    m.qoi = [rep, transform, l](const Eigen::VectorXd& xi) {
      return compute_qoi(transform_field(transform, rep->gaussian_field(l, xi), nullptr));
    };
    models.push_back(std::move(m));
  }
  return models;
}

/// Ground-truth stiffness field on the data grid for either experiment.
inline FieldRealization truth_field(const GroundTruth& truth, const Grid& grid,
                                    const MaternParams& matern,
                                    const GammaTransformParams& transform,
                                    int fft_resolution = 1024) {
  if (truth.kind == GroundTruth::Kind::piecewise_constant)
    return piecewise_truth_field(truth, grid);
  const auto ordering = wavelet_ordering(truth.coeff_count);
  const int n_max = meyer::support_bound(true, ordering.back().scale);
  const auto table = periodized_covariance_coeffs(
      matern, TorusEmbedding::for_domain(grid.domain), fft_resolution, n_max, false);
  auto rng = make_rng(truth.seed, -1, 0);
  const Eigen::VectorXd xi = standard_normal_vector(rng, truth.coeff_count);
  return transform_field(transform, wavelet_draw_field(table, grid, xi), nullptr);
}

}  // namespace mlmcmc

#endif
