#ifndef MLMCMC_FEM_HPP
#define MLMCMC_FEM_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <map>
#include <stdexcept>
#include <vector>

#include "mlmcmc/grid.hpp"

namespace mlmcmc {

/// FE mesh of square bilinear elements; element layout is the cell grid,
/// node (i,j) sits at (i*h, j*h) with linear index j*(nx+1)+i.
struct Mesh {
  Grid grid;

  Mesh() = default;
  explicit Mesh(Grid g) : grid(g) {}
  Mesh(int nx, int ny, Domain d = {}) : grid(nx, ny, d) {}

  int nodes_x() const { return grid.nx + 1; }
  int nodes_y() const { return grid.ny + 1; }
  int n_nodes() const { return nodes_x() * nodes_y(); }
  int node(int i, int j) const { return j * nodes_x() + i; }
  Eigen::Vector2d node_coord(int i, int j) const { return {i * grid.h(), j * grid.h()}; }

  std::vector<int> top_nodes() const {
    std::vector<int> v(nodes_x());
    for (int i = 0; i < nodes_x(); ++i) v[i] = node(i, grid.ny);
    return v;
  }
  std::vector<int> bottom_nodes() const {
    std::vector<int> v(nodes_x());
    for (int i = 0; i < nodes_x(); ++i) v[i] = node(i, 0);
    return v;
  }
  std::vector<int> left_nodes() const {
    std::vector<int> v(nodes_y());
    for (int j = 0; j < nodes_y(); ++j) v[j] = node(0, j);
    return v;
  }
  std::vector<int> right_nodes() const {
    std::vector<int> v(nodes_y());
    for (int j = 0; j < nodes_y(); ++j) v[j] = node(grid.nx, j);
    return v;
  }
};

/// Downward line load on the top edge, in N/m over [x_start, x_end].
struct LineLoad {
  double magnitude = 1000.0;
  double x_start = 4.0 / 3.0;
  double x_end = 8.0 / 3.0;
};

struct MaterialModel {
  double poisson = 0.25;
  double density = 2500.0;       ///< kg/m^3, used for self-weight
  bool include_gravity = true;
  double gravity_accel = 9.81;
  bool plane_strain = false;     ///< strict Eq-reproduction switch; default plane stress
};

struct DisplacementField {
  Eigen::VectorXd u;  ///< 2 per node: (ux, uy), node-major
};

namespace detail {

/// 8x8 stiffness of a square bilinear element with E=1 (independent of side
/// length). Local node order: (0,0),(1,0),(1,1),(0,1).
inline Eigen::Matrix<double, 8, 8> element_stiffness_unit(double poisson, bool plane_strain) {
  if (!(poisson > 0.0 && poisson < 0.5))
    throw std::domain_error("element_stiffness_unit: Poisson ratio must be in (0, 0.5)");
  Eigen::Matrix3d D;
  if (plane_strain) {
    const double c = 1.0 / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    D << (1.0 - poisson) * c, poisson * c, 0.0,
         poisson * c, (1.0 - poisson) * c, 0.0,
         0.0, 0.0, (1.0 - 2.0 * poisson) / 2.0 * c;
  } else {
    const double c = 1.0 / (1.0 - poisson * poisson);
    D << c, poisson * c, 0.0,
         poisson * c, c, 0.0,
         0.0, 0.0, (1.0 - poisson) / 2.0 * c;
  }
  const double gp = 1.0 / std::sqrt(3.0);
  const double xi_n[4] = {-1.0, 1.0, 1.0, -1.0};
  const double eta_n[4] = {-1.0, -1.0, 1.0, 1.0};
  Eigen::Matrix<double, 8, 8> K = Eigen::Matrix<double, 8, 8>::Zero();
  for (int gx = 0; gx < 2; ++gx)
    for (int gy = 0; gy < 2; ++gy) {
      const double xi = gx ? gp : -gp, eta = gy ? gp : -gp;
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        // d/dx = (2/h) d/dxi; the h factors cancel against the h^2/4 area
        // Jacobian, so we fold them out entirely.
        const double dNdx = 0.25 * xi_n[a] * (1.0 + eta_n[a] * eta);
        const double dNdy = 0.25 * eta_n[a] * (1.0 + xi_n[a] * xi);
        B(0, 2 * a) = dNdx;
        B(1, 2 * a + 1) = dNdy;
        B(2, 2 * a) = dNdy;
        B(2, 2 * a + 1) = dNdx;
      }
      K += B.transpose() * D * B;  // weight 1 per point, 4 points, area factor 4
    }
  return K;
}

}  // namespace detail

/// Consistent nodal forces of the line load on the top edge (exact integration
/// of the hat functions over the loaded interval). Total equals
/// magnitude * (x_end - x_start) to machine precision.
inline Eigen::VectorXd line_load_vector(const Mesh& mesh, const LineLoad& load) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * mesh.n_nodes());
  const double h = mesh.grid.h();
  for (int i = 0; i < mesh.grid.nx; ++i) {
    const double xa = i * h, xb = (i + 1) * h;
    const double c = std::max(xa, load.x_start), d = std::min(xb, load.x_end);
    if (d <= c) continue;
    const int nl = mesh.node(i, mesh.grid.ny), nr = mesh.node(i + 1, mesh.grid.ny);
    const double len = d - c;
    f[2 * nl + 1] -= load.magnitude * len * (2.0 * xb - c - d) / (2.0 * h);
    f[2 * nr + 1] -= load.magnitude * len * (c + d - 2.0 * xa) / (2.0 * h);
  }
  return f;
}

/// Consistent self-weight vector: h^2/4 of the element weight to each node.
inline Eigen::VectorXd gravity_load_vector(const Mesh& mesh, const MaterialModel& mat) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * mesh.n_nodes());
  const double h = mesh.grid.h();
  const double per_node = mat.density * mat.gravity_accel * h * h / 4.0;
  for (int j = 0; j < mesh.grid.ny; ++j)
    for (int i = 0; i < mesh.grid.nx; ++i) {
      const int n[4] = {mesh.node(i, j), mesh.node(i + 1, j), mesh.node(i + 1, j + 1),
                        mesh.node(i, j + 1)};
      for (int a = 0; a < 4; ++a) f[2 * n[a] + 1] -= per_node;
    }
  return f;
}

/// Plane-stress elasticity solver for one mesh. Clamps the left and right
/// edges; reuses the symbolic factorization across solves with different
/// stiffness fields. Not safe for concurrent use of one instance; give each
/// worker its own solver.
class ElasticitySolver {
 public:
  ElasticitySolver(Mesh mesh, MaterialModel material, LineLoad load)
      : mesh_(mesh), material_(material) {
    k_unit_ = detail::element_stiffness_unit(material.poisson, material.plane_strain);
    load_full_ = line_load_vector(mesh_, load);
    if (material_.include_gravity) load_full_ += gravity_load_vector(mesh_, material_);

    // Free-dof numbering: all dofs except the clamped left/right nodes.
    const int ndof = 2 * mesh_.n_nodes();
    dof_map_.assign(ndof, -1);
    std::vector<bool> clamped(mesh_.n_nodes(), false);
    for (int n : mesh_.left_nodes()) clamped[n] = true;
    for (int n : mesh_.right_nodes()) clamped[n] = true;
    int nf = 0;
    for (int n = 0; n < mesh_.n_nodes(); ++n)
      if (!clamped[n]) {
        dof_map_[2 * n] = nf++;
        dof_map_[2 * n + 1] = nf++;
      }
    n_free_ = nf;
    f_free_.resize(n_free_);
    for (int d = 0; d < ndof; ++d)
      if (dof_map_[d] >= 0) f_free_[dof_map_[d]] = load_full_[d];

    // Element -> free-dof index table.
    elem_dofs_.resize(mesh_.grid.cells());
    for (int j = 0; j < mesh_.grid.ny; ++j)
      for (int i = 0; i < mesh_.grid.nx; ++i) {
        const int n[4] = {mesh_.node(i, j), mesh_.node(i + 1, j), mesh_.node(i + 1, j + 1),
                          mesh_.node(i, j + 1)};
        auto& ed = elem_dofs_[mesh_.grid.index(i, j)];
        for (int a = 0; a < 4; ++a) {
          ed[2 * a] = dof_map_[2 * n[a]];
          ed[2 * a + 1] = dof_map_[2 * n[a] + 1];
        }
      }
  }

  const Mesh& mesh() const { return mesh_; }
  const MaterialModel& material() const { return material_; }

  DisplacementField solve(const FieldRealization& youngs) const {
    if (!(youngs.grid == mesh_.grid))
      throw std::domain_error("ElasticitySolver: field grid does not match mesh");
    if ((youngs.values.array() <= 0.0).any())
      throw std::domain_error("ElasticitySolver: Young's modulus must be positive");

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh_.grid.cells()) * 64);
    for (int c = 0; c < mesh_.grid.cells(); ++c) {
      const double e = youngs.values[c];
      const auto& ed = elem_dofs_[c];
      for (int a = 0; a < 8; ++a) {
        if (ed[a] < 0) continue;
        for (int b = 0; b < 8; ++b)
          if (ed[b] >= 0) trip.emplace_back(ed[a], ed[b], e * k_unit_(a, b));
      }
    }
    Eigen::SparseMatrix<double> K(n_free_, n_free_);
    K.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed_) {
      solver_.analyzePattern(K);
      analyzed_ = true;
    }
    solver_.factorize(K);
    if (solver_.info() != Eigen::Success)
      throw std::runtime_error("ElasticitySolver: factorization failed (singular stiffness; "
                               "check for vanishing stiffness regions)");
    Eigen::VectorXd uf = solver_.solve(f_free_);
    const double denom = f_free_.norm();
    const double res = (K.selfadjointView<Eigen::Lower>() * uf - f_free_).norm();
    if (denom > 0.0 && res > 1e-10 * denom)
      throw std::runtime_error("ElasticitySolver: solve residual above tolerance");

    DisplacementField out;
    out.u = Eigen::VectorXd::Zero(2 * mesh_.n_nodes());
    for (int d = 0; d < 2 * mesh_.n_nodes(); ++d)
      if (dof_map_[d] >= 0) out.u[d] = uf[dof_map_[d]];
    return out;
  }

 private:
  Mesh mesh_;
  MaterialModel material_;
  Eigen::Matrix<double, 8, 8> k_unit_;
  Eigen::VectorXd load_full_, f_free_;
  std::vector<int> dof_map_;
  std::vector<std::array<int, 8>> elem_dofs_;
  int n_free_ = 0;
  mutable Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> solver_;
  mutable bool analyzed_ = false;
};

/// General-Dirichlet solve used by verification (e.g. the patch test):
/// prescribed displacements at `bc` nodes, optional external loads off.
inline DisplacementField solve_with_dirichlet(const Mesh& mesh, const MaterialModel& mat,
                                              const FieldRealization& youngs,
                                              const std::map<int, Eigen::Vector2d>& bc,
                                              const Eigen::VectorXd* loads = nullptr) {
  const int ndof = 2 * mesh.n_nodes();
  const auto k_unit = detail::element_stiffness_unit(mat.poisson, mat.plane_strain);
  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 0; j < mesh.grid.ny; ++j)
    for (int i = 0; i < mesh.grid.nx; ++i) {
      const int n[4] = {mesh.node(i, j), mesh.node(i + 1, j), mesh.node(i + 1, j + 1),
                        mesh.node(i, j + 1)};
      const double e = youngs(i, j);
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
          trip.emplace_back(2 * n[a / 2] + a % 2, 2 * n[b / 2] + b % 2,
                            e * k_unit(a, b));
    }
  Eigen::SparseMatrix<double> K(ndof, ndof);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd f = loads ? *loads : Eigen::VectorXd::Zero(ndof);

  std::vector<int> map(ndof, -1);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(ndof);
  for (const auto& [node, val] : bc) {
    full[2 * node] = val[0];
    full[2 * node + 1] = val[1];
  }
  int nf = 0;
  for (int d = 0; d < ndof; ++d)
    if (!bc.count(d / 2)) map[d] = nf++;
  f -= K * full;
  Eigen::SparseMatrix<double> Kr(nf, nf);
  std::vector<Eigen::Triplet<double>> rtrip;
  for (int k = 0; k < K.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it)
      if (map[it.row()] >= 0 && map[it.col()] >= 0)
        rtrip.emplace_back(map[it.row()], map[it.col()], it.value());
  Kr.setFromTriplets(rtrip.begin(), rtrip.end());
  Eigen::VectorXd fr(nf);
  for (int d = 0; d < ndof; ++d)
    if (map[d] >= 0) fr[map[d]] = f[d];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Kr);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("solve_with_dirichlet: factorization failed");
  Eigen::VectorXd ur = solver.solve(fr);
  DisplacementField out;
  out.u = full;
  for (int d = 0; d < ndof; ++d)
    if (map[d] >= 0) out.u[d] = ur[map[d]];
  return out;
}

/// Observation operator: (ux, uy) at every top-edge node ordered by increasing
/// x, then the same for the bottom edge. Length 4*(nx+1).
inline Eigen::VectorXd observe(const DisplacementField& u, const Mesh& mesh) {
  const auto top = mesh.top_nodes(), bottom = mesh.bottom_nodes();
  Eigen::VectorXd out(2 * (top.size() + bottom.size()));
  Eigen::Index k = 0;
  for (int n : top) {
    out[k++] = u.u[2 * n];
    out[k++] = u.u[2 * n + 1];
  }
  for (int n : bottom) {
    out[k++] = u.u[2 * n];
    out[k++] = u.u[2 * n + 1];
  }
  return out;
}

}  // namespace mlmcmc

#endif
