#ifndef MLMCMC_INVERSE_HPP
#define MLMCMC_INVERSE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "mlmcmc/fem.hpp"
#include "mlmcmc/grid.hpp"

namespace mlmcmc {

/// Synthetic displacement observations on the data-generation mesh:
/// (ux,uy) per top-edge node by increasing x, then the bottom edge.
struct ObservationSet {
  Eigen::VectorXd values;
  double sigma_f = 0.0;  ///< per-component noise standard deviation [m]
  int data_nx = 0;
  int data_ny = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma_f > 0.0)) throw std::domain_error("ObservationSet: sigma_f must be positive");
    if (values.size() != 4 * (data_nx + 1))
      throw std::domain_error("ObservationSet: value count does not match the data mesh");
  }
};

/// Ground-truth stiffness profiles of the two experiments.
struct GroundTruth {
  enum class Kind { prior_sampled_wavelet, piecewise_constant };
  Kind kind = Kind::piecewise_constant;

  // prior_sampled_wavelet: xi ~ N(0,1) with this seed, truncated expansion.
  int coeff_count = 5000;
  std::uint64_t seed = 0;

  // piecewise_constant: damaged rectangle in an otherwise uniform beam.
  double e_background = 47e9;
  double e_damaged = 12e9;
  double damage_x0 = 4.0 / 3.0, damage_x1 = 8.0 / 3.0;  ///< middle third
  double damage_y0 = 0.0, damage_y1 = 0.5;              ///< bottom half
};

/// The piecewise-constant truth evaluated at cell centers. The wavelet-drawn
/// truth is composed by the caller from the wavelet sampler plus the gamma
/// transform (it needs the basis machinery).
inline FieldRealization piecewise_truth_field(const GroundTruth& t, const Grid& grid) {
  if (t.kind != GroundTruth::Kind::piecewise_constant)
    throw std::domain_error("piecewise_truth_field: wrong ground-truth kind");
  Eigen::VectorXd e(grid.cells());
  for (int c = 0; c < grid.cells(); ++c) {
    const Eigen::Vector2d x = grid.cell_center(c);
    const bool damaged = x[0] > t.damage_x0 && x[0] < t.damage_x1 && x[1] > t.damage_y0 &&
                         x[1] < t.damage_y1;
    e[c] = damaged ? t.e_damaged : t.e_background;
  }
  return {grid, std::move(e)};
}

/// Solve the forward problem for the ground-truth stiffness field and perturb
/// the edge observations with iid N(0, sigma_f^2) noise.
inline ObservationSet generate_synthetic_data(const FieldRealization& youngs,
                                              const MaterialModel& mat, const LineLoad& load,
                                              double sigma_f, std::uint64_t seed) {
  if (!(sigma_f > 0.0))
    throw std::domain_error("generate_synthetic_data: sigma_f must be positive");
  Mesh mesh(youngs.grid.nx, youngs.grid.ny, youngs.grid.domain);
  ElasticitySolver solver(mesh, mat, load);
  ObservationSet obs;
  obs.values = observe(solver.solve(youngs), mesh);
  obs.sigma_f = sigma_f;
  obs.data_nx = mesh.grid.nx;
  obs.data_ny = mesh.grid.ny;
  obs.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (Eigen::Index k = 0; k < obs.values.size(); ++k) obs.values[k] += sigma_f * nd(rng);
  return obs;
}

/// W_l: restriction of the data-mesh edge observations onto the coinciding
/// edge nodes of a nested coarser level mesh.
inline Eigen::VectorXd weight_observations(const ObservationSet& obs, const Mesh& level_mesh) {
  obs.validate();
  const int nxl = level_mesh.grid.nx;
  if (obs.data_nx % nxl != 0)
    throw std::domain_error("weight_observations: level mesh is not nested in the data mesh");
  const int r = obs.data_nx / nxl;
  const int stride_data = 2 * (obs.data_nx + 1), stride_level = 2 * (nxl + 1);
  Eigen::VectorXd out(2 * stride_level);
  for (int edge = 0; edge < 2; ++edge)
    for (int i = 0; i <= nxl; ++i) {
      out[edge * stride_level + 2 * i] = obs.values[edge * stride_data + 2 * (i * r)];
      out[edge * stride_level + 2 * i + 1] = obs.values[edge * stride_data + 2 * (i * r) + 1];
    }
  return out;
}

/// Level likelihood of Eq-(22) form:
///   log L = -||F_l(E_l) - W_l(u_obs)||^2 / (2 N_l sigma_F^2),
/// with N_l the number of observed nodes. per_node = false drops the N_l
/// factor (the single-level form).
class LevelLikelihood {
 public:
  LevelLikelihood(const Mesh& mesh, const MaterialModel& mat, const LineLoad& load,
                  const ObservationSet& obs, bool per_node = true)
      : mesh_(mesh),
        solver_(mesh_, mat, load),
        w_obs_(weight_observations(obs, mesh_)),
        n_nodes_(2 * (mesh_.grid.nx + 1)),
        inv_two_sigma2_(1.0 / (2.0 * obs.sigma_f * obs.sigma_f)),
        per_node_(per_node) {}

  double operator()(const FieldRealization& youngs) const {
    const Eigen::VectorXd f = observe(solver_.solve(youngs), mesh_);
    const double misfit2 = (f - w_obs_).squaredNorm();
    return -misfit2 * inv_two_sigma2_ / (per_node_ ? n_nodes_ : 1.0);
  }

  const Mesh& mesh() const { return mesh_; }
  const Eigen::VectorXd& weighted_observations() const { return w_obs_; }
  int observed_nodes() const { return n_nodes_; }

 private:
  Mesh mesh_;
  ElasticitySolver solver_;
  Eigen::VectorXd w_obs_;
  int n_nodes_;
  double inv_two_sigma2_;
  bool per_node_;
};

}  // namespace mlmcmc

#endif
