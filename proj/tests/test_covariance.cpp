#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mlmcmc/covariance.hpp"

using namespace mlmcmc;

TEST_CASE("matern limit at zero distance is the variance") {
  CHECK(matern({1.0, 0.5, 1.5}, 0.0) == 1.0);
  CHECK(matern({3.7, 0.2, 0.5}, 0.0) == 3.7);
}

TEST_CASE("matern half-integer closed forms agree with the Bessel route") {
  // nu = 1/2 reduces to the exponential kernel.
  CHECK_THAT(matern({1.0, 1.0, 0.5}, 1.0), Catch::Matchers::WithinRel(std::exp(-1.0), 1e-12));
  // nu = 3/2 closed form (1 + sqrt(3) r / lambda) exp(-sqrt(3) r / lambda).
  const double expect = (1.0 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0));
  CHECK_THAT(matern({1.0, 1.0, 1.5}, 1.0), Catch::Matchers::WithinRel(expect, 1e-12));
  // Bessel evaluation at nearly half-integer nu approaches the closed form.
  for (double r : {0.1, 0.5, 1.0, 2.5}) {
    MaternParams bessel{1.0, 1.0, 0.5 + 1e-8};
    CHECK_THAT(matern(bessel, r), Catch::Matchers::WithinRel(std::exp(-r), 1e-6));
    MaternParams bessel32{1.0, 1.0, 1.5 + 1e-8};
    CHECK_THAT(matern(bessel32, r), Catch::Matchers::WithinRel(matern({1.0, 1.0, 1.5}, r), 1e-6));
  }
}

TEST_CASE("matern rejects invalid input") {
  CHECK_THROWS_AS(matern({1.0, 0.5, 1.5}, -1.0), std::domain_error);
  CHECK_THROWS_AS(matern({1.0, 0.5, 1.5}, std::nan("")), std::domain_error);
  CHECK_THROWS_AS(matern({-1.0, 0.5, 1.5}, 1.0), std::domain_error);
}

TEST_CASE("matern decays monotonically in distance") {
  MaternParams p{2.0, 0.5, 1.5};
  double prev = matern(p, 0.0);
  for (int k = 1; k <= 100; ++k) {
    const double c = matern(p, 0.05 * k);
    CHECK(c <= prev + 1e-15);
    prev = c;
  }
}

TEST_CASE("covariance matrix basics") {
  MaternParams p{1.0, 0.5, 1.5};
  std::vector<Eigen::Vector2d> one{{0.3, 0.7}};
  auto m = covariance_matrix(p, one, one);
  REQUIRE(m.rows() == 1);
  CHECK(m(0, 0) == 1.0);

  std::vector<Eigen::Vector2d> same{{0.3, 0.7}, {0.3, 0.7}};
  auto m2 = covariance_matrix(p, same, same);
  CHECK((m2.array() == 1.0).all());

  CHECK_THROWS_AS(covariance_matrix(p, {}, one), std::domain_error);
}

TEST_CASE("collinear points with exponential kernel give a Toeplitz matrix") {
  MaternParams p{1.3, 0.5, 0.5};
  // Spacing lambda; sqrt(2 nu) = 1, so off-diagonals are sigma2 e^-1, sigma2 e^-2.
  std::vector<Eigen::Vector2d> pts{{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
  auto m = covariance_matrix(p, pts, pts);
  CHECK_THAT(m(0, 1), Catch::Matchers::WithinRel(1.3 * std::exp(-1.0), 1e-12));
  CHECK_THAT(m(1, 2), Catch::Matchers::WithinRel(1.3 * std::exp(-1.0), 1e-12));
  CHECK_THAT(m(0, 2), Catch::Matchers::WithinRel(1.3 * std::exp(-2.0), 1e-12));
}

TEST_CASE("covariance matrix is symmetric positive semidefinite") {
  MaternParams p{1.7, 0.4, 1.5};
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ux(0.0, 4.0), uy(0.0, 1.0);
  std::vector<Eigen::Vector2d> pts(200);
  for (auto& q : pts) q = {ux(rng), uy(rng)};
  auto m = covariance_matrix(p, pts, pts);
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8 * p.sigma2);
}

TEST_CASE("cell average covariance refines consistently") {
  MaternParams p{1.0, 0.5, 1.5};
  // Production rule (4/dim, composite 4) against a refined oracle on the worst
  // cases: cell variance and touching neighbors at the coarsest cell size.
  for (auto pair : {std::pair{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}}) {
    const Eigen::Vector2d b{pair.first, pair.second};
    const double prod = cell_average_covariance(p, {0.0, 0.0}, 1.0, b, 1.0, 4, 4);
    const double oracle = cell_average_covariance(p, {0.0, 0.0}, 1.0, b, 1.0, 4, 8);
    CHECK_THAT(prod, Catch::Matchers::WithinRel(oracle, 1e-4));
  }
}
