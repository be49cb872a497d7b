#include <catch2/catch_amalgamated.hpp>

#include "mlmcmc/model.hpp"

using namespace mlmcmc;

TEST_CASE("streaming wavelet synthesis matches the dense basis") {
  Grid g(16, 4);
  const auto emb = TorusEmbedding::for_domain(g.domain);
  const int m = 64;
  const int n_max = meyer::support_bound(true, wavelet_ordering(m).back().scale);
  const auto table = periodized_covariance_coeffs(MaternParams{}, emb, 512, n_max, false);
  const auto basis = wavelet_precompute(table, g, m);
  std::mt19937_64 rng(12);
  const Eigen::VectorXd xi = standard_normal_vector(rng, m);
  const auto dense = wavelet_sample(basis, xi, m);
  const auto stream = wavelet_draw_field(table, g, xi);
  CHECK((dense.values - stream.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hierarchy sampling commutes with restriction") {
  const std::vector<Grid> grids{Grid(16, 4), Grid(32, 8)};
  struct Case {
    const char* kind;
    std::vector<int> trunc;
  };
  for (const Case& c : {Case{"kl", {8, 20}}, Case{"wavelet", {16, 64}}, Case{"las", {64, 256}}}) {
    INFO(c.kind);
    auto rep = build_representation_hierarchy(c.kind, MaternParams{}, grids, c.trunc, 512);
    std::mt19937_64 rng(7);
    Eigen::VectorXd xi = standard_normal_vector(rng, c.trunc[1]);
    // Zero the fine-only modes: the restricted fine field must equal the
    // coarse-level field built from the shared coefficients.
    Eigen::VectorXd xi_coarse_only = xi;
    xi_coarse_only.tail(c.trunc[1] - c.trunc[0]).setZero();
    const auto fine = rep.gaussian_field(1, xi_coarse_only);
    const auto coarse = rep.gaussian_field(0, xi.head(c.trunc[0]).eval());
    const auto restricted = restrict_field(fine, grids[0]);
    CHECK((restricted.values - coarse.values).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("hierarchy validation") {
  const std::vector<Grid> grids{Grid(16, 4), Grid(32, 8)};
  CHECK_THROWS_AS(build_representation_hierarchy("las", MaternParams{}, grids, {64, 200}),
                  std::domain_error);
  CHECK_THROWS_AS(build_representation_hierarchy("spectral", MaternParams{}, grids, {8, 16}),
                  std::domain_error);
  CHECK_THROWS_AS(build_representation_hierarchy("kl", MaternParams{}, grids, {8}),
                  std::domain_error);
  CHECK(las_stage_of(Grid(64, 16), 4) == 4);
  CHECK_THROWS_AS(las_stage_of(Grid(48, 12), 4), std::domain_error);
}

TEST_CASE("level models compose transform, FE, and QoI") {
  const std::vector<Grid> grids{Grid(16, 4), Grid(32, 8)};
  auto rep = std::make_shared<const RepresentationHierarchy>(
      build_representation_hierarchy("kl", MaternParams{}, grids, {8, 20}));
  GammaTransformParams tp;
  MaterialModel mat;
  LineLoad load;
  auto truth = piecewise_truth_field(GroundTruth{}, Grid(64, 16));
  auto obs = generate_synthetic_data(truth, mat, load, 1e-8, 5);
  auto models = make_level_models(rep, tp, mat, load, obs);
  REQUIRE(models.size() == 2);
  CHECK(models[0].truncation == 8);
  CHECK(models[1].truncation == 20);

  // xi = 0: the transformed field is the uniform prior median, so the QoI is
  // the closed-form uniform-beam value E h^3 / 12 with h = 1.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(20);
  const double e_median = gaussian_to_gamma(tp, 0.0, nullptr);
  CHECK_THAT(models[1].qoi(zero), Catch::Matchers::WithinRel(e_median / 12.0, 1e-12));
  CHECK(models[0].log_like(zero) <= 0.0);
  CHECK(std::isfinite(models[0].log_like(zero)));
  // Deterministic in xi.
  CHECK(models[1].log_like(zero) == models[1].log_like(zero));
}

TEST_CASE("precompute timing accounting") {
  const std::vector<Grid> grids{Grid(16, 4), Grid(32, 8)};
  auto s = measure_precompute_seconds("kl", MaternParams{}, grids, {8, 20});
  REQUIRE(s.size() == 2);
  CHECK(s[0] > 0.0);
  CHECK(s[1] > 0.0);
  CHECK_THROWS_AS(measure_precompute_seconds("nope", MaternParams{}, grids, {8, 20}),
                  std::domain_error);
}

TEST_CASE("ground-truth fields") {
  Grid g(32, 8);
  GroundTruth pw;
  auto a = truth_field(pw, g, MaternParams{}, GammaTransformParams{});
  auto b = piecewise_truth_field(pw, g);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);

  GroundTruth prior;
  prior.kind = GroundTruth::Kind::prior_sampled_wavelet;
  prior.coeff_count = 300;  // desk-sized stand-in for the 5000-mode draw
  prior.seed = 42;
  auto t1 = truth_field(prior, g, MaternParams{}, GammaTransformParams{}, 512);
  auto t2 = truth_field(prior, g, MaternParams{}, GammaTransformParams{}, 512);
  CHECK((t1.values - t2.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(t1.values.minCoeff() > 0.0);  // gamma marginals are positive
  prior.seed = 43;
  auto t3 = truth_field(prior, g, MaternParams{}, GammaTransformParams{}, 512);
  CHECK((t1.values - t3.values).cwiseAbs().maxCoeff() > 0.0);
}
