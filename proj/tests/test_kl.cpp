#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mlmcmc/kl.hpp"

using namespace mlmcmc;

namespace {
const MaternParams kDefault{1.0, 0.5, 1.5};
}

TEST_CASE("Mercer trace identity: sum of all eigenvalues is sigma2 |D|") {
  Grid g(32, 8);
  auto basis = kl_precompute(kDefault, g, 10);
  // Midpoint quadrature makes this exact: trace = h^2 N sigma2 = sigma2 Dx Dy.
  CHECK_THAT(basis.trace_all, Catch::Matchers::WithinRel(1.0 * 4.0, 1e-10));

  MaternParams scaled{2.5, 0.3, 1.5};
  auto basis2 = kl_precompute(scaled, g, 5);
  CHECK_THAT(basis2.trace_all, Catch::Matchers::WithinRel(2.5 * 4.0, 1e-10));
}

TEST_CASE("constant kernel degenerates to a single mode") {
  Grid g(16, 4);
  const double sigma2 = 1.7;
  auto basis = kl_precompute_kernel(
      [&](const Eigen::Vector2d&, const Eigen::Vector2d&) { return sigma2; }, g, 4);
  CHECK_THAT(basis.eigenvalues[0], Catch::Matchers::WithinRel(sigma2 * 4.0, 1e-10));
  for (int m = 1; m < 4; ++m) CHECK(basis.eigenvalues[m] < 1e-10 * basis.eigenvalues[0]);
  // Eigenfunction is the constant 1/sqrt(|D|), positive by the sign rule.
  const double expect = 1.0 / std::sqrt(4.0);
  CHECK((basis.basis.col(0).array() - expect).abs().maxCoeff() < 1e-10);
}

TEST_CASE("eigenvalues sorted, nonnegative, orthonormal basis") {
  Grid g(32, 8);
  const int m_max = 60;
  auto basis = kl_precompute(kDefault, g, m_max);
  for (int m = 0; m + 1 < m_max; ++m) CHECK(basis.eigenvalues[m] >= basis.eigenvalues[m + 1]);
  CHECK(basis.eigenvalues.minCoeff() >= 0.0);
  Eigen::MatrixXd gram = basis.basis.transpose() * basis.basis * g.cell_area();
  CHECK((gram - Eigen::MatrixXd::Identity(m_max, m_max)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("eigenvalue decay follows m^-2.5") {
  // nu=1.5 in d=2: lambda_m ~ m^-(1+2nu/d) = m^-2.5 asymptotically.
  Grid g(64, 16);
  auto basis = kl_precompute(kDefault, g, 200);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int m = 20; m <= 200; ++m) {
    const double x = std::log(static_cast<double>(m)), y = std::log(basis.eigenvalues[m - 1]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK_THAT(slope, Catch::Matchers::WithinAbs(-2.5, 0.4));
}

TEST_CASE("quadrature refinement leaves leading eigenvalues stable") {
  auto coarse = kl_precompute(kDefault, Grid(32, 8), 10);
  auto fine = kl_precompute(kDefault, Grid(64, 16), 10);
  for (int m = 0; m < 10; ++m)
    CHECK_THAT(coarse.eigenvalues[m], Catch::Matchers::WithinRel(fine.eigenvalues[m], 1e-2));
}

TEST_CASE("kl_sample is affine in the coefficients") {
  Grid g(16, 4);
  auto basis = kl_precompute(kDefault, g, 30);
  CHECK(kl_sample(basis, Eigen::VectorXd::Zero(30), 30).values.cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Eigen::VectorXd a(30), b(30);
  for (int k = 0; k < 30; ++k) { a[k] = nd(rng); b[k] = nd(rng); }
  auto ga = kl_sample(basis, a, 30), gb = kl_sample(basis, b, 30);
  auto gab = kl_sample(basis, a + b, 30);
  CHECK((gab.values - ga.values - gb.values).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(kl_sample(basis, a, 31), std::domain_error);
  CHECK_THROWS_AS(kl_sample(basis, Eigen::VectorXd::Zero(5), 10), std::domain_error);
}

TEST_CASE("truncation error is monotone in m for fixed coefficients") {
  Grid g(32, 8);
  const int M = 120;
  auto basis = kl_precompute(kDefault, g, M);
  std::mt19937_64 rng(19);
  std::normal_distribution<double> nd;
  Eigen::VectorXd xi(M);
  for (auto& v : xi.reshaped()) v = nd(rng);
  auto full = kl_sample(basis, xi, M);
  double prev = std::numeric_limits<double>::infinity();
  for (int m : {10, 30, 60, 90, 120}) {
    auto gm = kl_sample(basis, xi, m);
    const double err = FieldRealization{g, full.values - gm.values}.l2_norm();
    CHECK(err <= prev + 1e-14);
    prev = err;
  }
}

TEST_CASE("empirical variance at the domain center matches the Mercer sum") {
  Grid g(32, 8);
  const int m = 100;
  auto basis = kl_precompute(kDefault, g, m);
  const int c = g.index(g.nx / 2, g.ny / 2);
  const Eigen::VectorXd row =
      basis.basis.row(c).head(m).transpose().cwiseProduct(basis.eigenvalues.head(m).cwiseSqrt());
  const double expect = row.squaredNorm();  // sum lambda_k b_k(x)^2
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  double s2 = 0.0;
  const int n_samp = 10000;
  for (int s = 0; s < n_samp; ++s) {
    double v = 0.0;
    for (int k = 0; k < m; ++k) v += row[k] * nd(rng);
    s2 += v * v;
  }
  CHECK_THAT(s2 / n_samp, Catch::Matchers::WithinRel(expect, 0.05));
}

TEST_CASE("sampling commutes with restriction to a coarser level") {
  Grid fine(32, 8), coarse(16, 4);
  const int m = 40;
  auto basis = kl_precompute(kDefault, fine, m);
  auto cbasis = kl_restrict_basis(basis, coarse);
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  Eigen::VectorXd xi(m);
  for (auto& v : xi.reshaped()) v = nd(rng);
  auto restricted = restrict_field(kl_sample(basis, xi, m), coarse);
  auto direct = kl_sample(cbasis, xi, m);
  CHECK((restricted.values - direct.values).cwiseAbs().maxCoeff() < 1e-12);
}
