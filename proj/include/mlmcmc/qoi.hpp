#ifndef MLMCMC_QOI_HPP
#define MLMCMC_QOI_HPP

#include <stdexcept>

#include "mlmcmc/grid.hpp"

namespace mlmcmc {

/// Neutral line (barycenter of stiffness) of one column of elements:
/// y0(x) = int E y dy / int E dy, with E piecewise constant per element.
/// Integrals of y against constant E per cell are exact.
inline double neutral_line(const FieldRealization& field, int x_column) {
  const Grid& g = field.grid;
  if (x_column < 0 || x_column >= g.nx) throw std::domain_error("neutral_line: column out of range");
  const double h = g.h();
  double num = 0.0, den = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const double e = field(x_column, j);
    if (!(e > 0.0)) throw std::domain_error("neutral_line: field must be positive");
    const double yc = (j + 0.5) * h;
    num += e * yc * h;  // int_cell y dy = h * y_center
    den += e * h;
  }
  return num / den;
}

/// Mean integrated bending stiffness along the beam axis:
/// Q = (1/Dx) int_0^Dx int_0^Dy E (y - y0(x))^2 dy dx,
/// with y0 per element column and the cubic y-moments integrated exactly
/// against elementwise-constant E.
inline double compute_qoi(const FieldRealization& field) {
  const Grid& g = field.grid;
  const double h = g.h();
  double q = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    const double y0 = neutral_line(field, i);
    double col = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      const double yb = j * h - y0, yt = (j + 1) * h - y0;
      col += field(i, j) * (yt * yt * yt - yb * yb * yb) / 3.0;
    }
    q += col * h;
  }
  return q / g.domain.Dx;
}

}  // namespace mlmcmc

#endif
