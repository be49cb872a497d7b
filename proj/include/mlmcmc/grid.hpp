#ifndef MLMCMC_GRID_HPP
#define MLMCMC_GRID_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mlmcmc {

struct Domain {
  double Dx = 4.0;
  double Dy = 1.0;

  double area() const { return Dx * Dy; }
  double diameter() const { return std::sqrt(Dx * Dx + Dy * Dy); }
};

/// Uniform grid of square cells over [0,Dx] x [0,Dy]. Cell (i,j) covers
/// [i*h,(i+1)*h] x [j*h,(j+1)*h]; linear index j*nx+i (x fastest).
struct Grid {
  int nx = 0;
  int ny = 0;
  Domain domain;

  Grid() = default;
  Grid(int nx_, int ny_, Domain d = {}) : nx(nx_), ny(ny_), domain(d) {
    if (nx <= 0 || ny <= 0) throw std::domain_error("Grid: cell counts must be positive");
    const double hx = domain.Dx / nx, hy = domain.Dy / ny;
    if (std::abs(hx - hy) > 1e-12 * hx)
      throw std::domain_error("Grid: cells must be square (Dx/nx == Dy/ny)");
  }

  double h() const { return domain.Dx / nx; }
  int cells() const { return nx * ny; }
  double cell_area() const { return h() * h(); }

  int index(int i, int j) const { return j * nx + i; }
  Eigen::Vector2d cell_center(int i, int j) const {
    return {(i + 0.5) * h(), (j + 0.5) * h()};
  }
  Eigen::Vector2d cell_center(int c) const { return cell_center(c % nx, c / nx); }

  bool operator==(const Grid& o) const {
    return nx == o.nx && ny == o.ny && domain.Dx == o.domain.Dx && domain.Dy == o.domain.Dy;
  }
};

/// Scalar field as one value per cell (cell averages / cell-center values).
struct FieldRealization {
  Grid grid;
  Eigen::VectorXd values;

  FieldRealization() = default;
  FieldRealization(Grid g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.cells())
      throw std::domain_error("FieldRealization: value count does not match grid");
  }

  double operator()(int i, int j) const { return values[grid.index(i, j)]; }
  double& operator()(int i, int j) { return values[grid.index(i, j)]; }

  /// Discrete L2(D) norm of the piecewise-constant field.
  double l2_norm() const { return std::sqrt(values.squaredNorm() * grid.cell_area()); }
};

/// Block-average restriction onto a coarser grid whose resolution divides the
/// fine one. Exact adjoint of piecewise-constant prolongation.
inline FieldRealization restrict_field(const FieldRealization& fine, const Grid& coarse) {
  if (fine.grid.nx % coarse.nx != 0 || fine.grid.ny % coarse.ny != 0)
    throw std::domain_error("restrict_field: grids are not nested");
  const int rx = fine.grid.nx / coarse.nx, ry = fine.grid.ny / coarse.ny;
  if (fine.grid.nx / rx != coarse.nx || rx != ry)
    throw std::domain_error("restrict_field: refinement ratio must be isotropic");
  Eigen::VectorXd out(coarse.cells());
  for (int J = 0; J < coarse.ny; ++J)
    for (int I = 0; I < coarse.nx; ++I) {
      double s = 0.0;
      for (int j = J * ry; j < (J + 1) * ry; ++j)
        for (int i = I * rx; i < (I + 1) * rx; ++i) s += fine(i, j);
      out[coarse.index(I, J)] = s / (rx * ry);
    }
  return {coarse, std::move(out)};
}

}  // namespace mlmcmc

#endif
