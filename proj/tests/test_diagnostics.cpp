#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "mlmcmc/diagnostics.hpp"

using namespace mlmcmc;

TEST_CASE("integrated autocorrelation time") {
  SECTION("iid white noise") {
    std::mt19937_64 rng(1);
    Eigen::VectorXd x = standard_normal_vector(rng, 100000);
    const double iat = estimate_iat(x);
    CHECK(iat > 0.9);
    CHECK(iat < 1.2);
  }
  SECTION("AR(1) closed form") {
    const double rho = 0.9, target = (1 + rho) / (1 - rho);  // 19
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    Eigen::VectorXd x(1000000);
    x[0] = nd(rng);
    for (long n = 1; n < x.size(); ++n)
      x[n] = rho * x[n - 1] + std::sqrt(1 - rho * rho) * nd(rng);
    CHECK_THAT(estimate_iat(x), Catch::Matchers::WithinRel(target, 0.15));
  }
  SECTION("shift and positive-scale invariance") {
    std::mt19937_64 rng(3);
    Eigen::VectorXd x = standard_normal_vector(rng, 5000);
    CHECK_THAT(estimate_iat((3.0 * x.array() + 2.0).matrix().eval()),
               Catch::Matchers::WithinRel(estimate_iat(x), 1e-10));
  }
  SECTION("degenerate and invalid input") {
    bool flag = false;
    CHECK(estimate_iat(Eigen::VectorXd::Constant(500, 4.2), &flag) == 500.0);
    CHECK(flag);
    CHECK_THROWS_AS(estimate_iat(Eigen::VectorXd::Zero(99)), std::domain_error);
  }
}

TEST_CASE("sampling error arithmetic") {
  LevelDiagnostics d0;
  d0.var_y = 1.0;
  d0.iat = 1.0;
  d0.n_samples = 100;
  CHECK(sampling_error({d0}) == 0.1);

  LevelDiagnostics d1;
  d1.var_y = 0.04;
  d1.iat = 5.0;
  d1.n_samples = 50;
  // eps^2 = 1/100 + 0.04*5/50 = 0.014
  CHECK_THAT(sampling_error({d0, d1}), Catch::Matchers::WithinRel(std::sqrt(0.014), 1e-14));

  auto doubled = std::vector<LevelDiagnostics>{d0, d1};
  for (auto& d : doubled) d.n_samples *= 2;
  CHECK_THAT(sampling_error(doubled),
             Catch::Matchers::WithinRel(sampling_error({d0, d1}) / std::sqrt(2.0), 1e-14));
}

TEST_CASE("log-log slope fit") {
  std::vector<double> x{2, 4, 8, 16}, y;
  for (double v : x) y.push_back(3.5 * std::pow(v, -0.75));
  CHECK_THAT(fit_loglog_slope(x, y), Catch::Matchers::WithinAbs(-0.75, 1e-12));
  CHECK_THROWS_AS(fit_loglog_slope({1.0}, {1.0}), std::domain_error);
  CHECK_THROWS_AS(fit_loglog_slope({1.0, -2.0}, {1.0, 1.0}), std::domain_error);
}

TEST_CASE("level diagnostics pooling") {
  auto make_rec = [](int level, std::initializer_list<double> q,
                     std::initializer_list<double> qc, std::initializer_list<int> acc) {
    ChainRecord r;
    r.level = level;
    r.burn_in = 0;
    r.qoi = Eigen::VectorXd::Zero(static_cast<long>(q.size()));
    long i = 0;
    for (double v : q) r.qoi[i++] = v;
    if (level > 0) {
      r.qoi_coarse = Eigen::VectorXd::Zero(static_cast<long>(qc.size()));
      i = 0;
      for (double v : qc) r.qoi_coarse[i++] = v;
    }
    for (int a : acc) r.accepted.push_back(static_cast<std::uint8_t>(a));
    r.log_like = Eigen::VectorXd::Zero(r.qoi.size());
    return r;
  };
  // Y_0 = Q_0; Y_1 = Q_1 - Q_0 pairing.
  auto r0 = make_rec(0, {1, 2, 3, 4}, {}, {1, 1, 0, 1});
  auto r1 = make_rec(1, {2, 2, 4, 4}, {1, 1, 1, 1}, {1, 0, 1, 0});
  // correction_series needs >= 100 samples for IAT, so tile the records.
  auto tile = [](ChainRecord r, int times) {
    const long n = r.qoi.size();
    ChainRecord out = r;
    out.qoi = r.qoi.replicate(times, 1);
    out.log_like = r.log_like.replicate(times, 1);
    if (r.level > 0) out.qoi_coarse = r.qoi_coarse.replicate(times, 1);
    out.accepted.clear();
    for (int t = 0; t < times; ++t)
      out.accepted.insert(out.accepted.end(), r.accepted.begin(), r.accepted.end());
    (void)n;
    return out;
  };
  auto diag = compute_level_diagnostics({{tile(r0, 50), tile(r1, 50)}});
  REQUIRE(diag.size() == 2);
  // Pooled Y_0 cycles 1,2,3,4: variance 5/4 * 200/199.
  CHECK_THAT(diag[0].var_y, Catch::Matchers::WithinRel(1.25 * 200.0 / 199.0, 1e-12));
  // Y_1 cycles 1,1,3,3: mean 2, variance 1 * 200/199.
  CHECK_THAT(diag[1].var_y, Catch::Matchers::WithinRel(200.0 / 199.0, 1e-12));
  CHECK_THAT(diag[0].rejection_rate, Catch::Matchers::WithinRel(0.25, 1e-12));
  CHECK_THAT(diag[1].rejection_rate, Catch::Matchers::WithinRel(0.5, 1e-12));
  CHECK(diag[0].iat >= 1.0);
}

TEST_CASE("KL truncation curve") {
  Grid g(16, 4);
  auto basis = kl_precompute(MaternParams{}, g, g.cells());
  Eigen::VectorXd v(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    const auto x = g.cell_center(c);
    v[c] = std::sin(x[0]) + 0.5 * std::cos(2 * x[1]);
  }
  FieldRealization ref{g, v};
  auto curve = kl_truncation_curve(basis, ref, {4, 8, 16, 32, 64});
  REQUIRE(curve.m.size() == 5);
  for (std::size_t i = 1; i < curve.error.size(); ++i)
    CHECK(curve.error[i] <= curve.error[i - 1] + 1e-12);
  // Complete basis reproduces the field to the quadrature floor.
  CHECK(curve.error.back() / ref.l2_norm() < 1e-6);
  CHECK(curve.slope < 0.0);
}

TEST_CASE("wavelet truncation curve") {
  static const WaveletBasis basis = [] {
    Grid g(16, 4);
    return wavelet_precompute(MaternParams{}, TorusEmbedding::for_domain(g.domain), g, 256, 512,
                              false);
  }();
  std::mt19937_64 rng(9);
  Eigen::VectorXd xi = standard_normal_vector(rng, 256);
  auto curve = wavelet_truncation_curve(basis, xi, {16, 64, 128, 256});
  REQUIRE(curve.m.size() == 4);
  CHECK(curve.error.back() == 0.0);  // full coefficient set: exact identity
  for (std::size_t i = 1; i + 1 < curve.error.size(); ++i)
    CHECK(curve.error[i] < curve.error[i - 1]);
  // Manual check at m = 64.
  auto full = wavelet_sample(basis, xi, 256);
  auto part = wavelet_sample(basis, xi, 64);
  const double manual = FieldRealization{full.grid, full.values - part.values}.l2_norm();
  CHECK_THAT(curve.error[1], Catch::Matchers::WithinRel(manual, 1e-12));
}

TEST_CASE("LAS truncation curve") {
  Grid g(64, 16);  // stage-4 grid for nx0 = 4
  Eigen::VectorXd v(g.cells());
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int c = 0; c < g.cells(); ++c) {
    const auto x = g.cell_center(c);
    v[c] = std::sin(1.3 * x[0]) * std::cos(2.1 * x[1]) + 0.05 * nd(rng);
  }
  FieldRealization ref{g, v};
  auto curve = las_truncation_curve(ref, 4, {4, 16, 40, 64, 256, 1024});
  REQUIRE(curve.m.size() == 6);
  for (std::size_t i = 1; i < curve.error.size(); ++i) CHECK(curve.error[i] < curve.error[i - 1]);

  // Full-stage entries agree with a plain block-average projection.
  const FieldRealization avg = restrict_field(ref, Grid(16, 4));
  Eigen::VectorXd diff = ref.values;
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 64; ++i) diff[g.index(i, j)] -= avg(i / 4, j / 4);
  CHECK_THAT(curve.error[3], Catch::Matchers::WithinRel(FieldRealization{g, diff}.l2_norm(),
                                                        1e-12));
  // The partial stage sits between its neighbors.
  CHECK(curve.error[2] < curve.error[1]);
  CHECK(curve.error[2] > curve.error[3]);

  // Full resolution: zero remainder.
  auto full = las_truncation_curve(ref, 4, {1024});
  CHECK(full.m.empty() == false);
  auto exact = las_truncation_curve(ref, 4, {4, 1024});
  CHECK(exact.error.back() == 0.0);

  CHECK_THROWS_AS(las_truncation_curve(FieldRealization{Grid(48, 12), v.head(48 * 12)}, 4, {4}),
                  std::domain_error);
}

TEST_CASE("posterior field maps") {
  Grid g(4, 1);
  auto field_of = [&](const Eigen::VectorXd& xi) { return FieldRealization{g, xi}; };

  SECTION("identical states have zero spread") {
    ChainRecord rec;
    rec.burn_in = 2;
    rec.states = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0).replicate(1, 10);
    rec.log_like = Eigen::VectorXd::Zero(10);
    rec.qoi = rec.log_like;
    auto [mean, sd] = posterior_field_maps(rec, field_of);
    CHECK((mean.values - Eigen::VectorXd::LinSpaced(4, 1.0, 4.0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sd.values.maxCoeff() == 0.0);
  }
  SECTION("two-state alternating chain") {
    ChainRecord rec;
    rec.burn_in = 0;
    rec.states.resize(4, 100);
    Eigen::VectorXd a = Eigen::VectorXd::Constant(4, 1.0), b = Eigen::VectorXd::Constant(4, 3.0);
    for (int n = 0; n < 100; ++n) rec.states.col(n) = n % 2 ? b : a;
    rec.log_like = Eigen::VectorXd::Zero(100);
    rec.qoi = rec.log_like;
    auto [mean, sd] = posterior_field_maps(rec, field_of);
    CHECK((mean.values.array() - 2.0).abs().maxCoeff() < 1e-14);
    CHECK((sd.values.array() - 1.0).abs().maxCoeff() < 1e-14);
  }
  SECTION("matches a two-pass recomputation") {
    std::mt19937_64 rng(8);
    ChainRecord rec;
    rec.burn_in = 100;
    rec.states.resize(4, 1000);
    for (int n = 0; n < 1000; ++n) rec.states.col(n) = standard_normal_vector(rng, 4);
    rec.log_like = Eigen::VectorXd::Zero(1000);
    rec.qoi = rec.log_like;
    auto [mean, sd] = posterior_field_maps(rec, field_of);
    Eigen::MatrixXd post = rec.states.rightCols(900);
    for (int i = 0; i < 4; ++i) {
      const double m = post.row(i).mean();
      const double var = (post.row(i).array() - m).square().sum() / 900.0;
      CHECK_THAT(mean.values[i], Catch::Matchers::WithinAbs(m, 1e-10));
      CHECK_THAT(sd.values[i], Catch::Matchers::WithinAbs(std::sqrt(var), 1e-10));
    }
  }
  SECTION("empty post-burn-in throws") {
    ChainRecord rec;
    rec.burn_in = 5;
    rec.states.resize(4, 5);
    rec.log_like = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(posterior_field_maps(rec, field_of), std::domain_error);
  }
}

TEST_CASE("rejection rate curve") {
  auto make = [](std::initializer_list<int> acc) {
    ChainRecord r;
    for (int a : acc) r.accepted.push_back(static_cast<std::uint8_t>(a));
    r.log_like = Eigen::VectorXd::Zero(static_cast<long>(r.accepted.size()));
    return r;
  };
  auto flat = rejection_rate_curve({make({1, 1, 1, 1}), make({1, 1, 1, 1})}, {64, 256});
  CHECK(flat.rate[0] == 0.0);
  CHECK(flat.rate[1] == 0.0);
  CHECK(flat.slope == 0.0);

  auto curve =
      rejection_rate_curve({make({0, 0, 1, 1}), make({0, 1, 1, 1})}, {64.0, 256.0});
  CHECK(curve.rate[0] == 0.5);
  CHECK(curve.rate[1] == 0.25);
  CHECK_THAT(curve.slope, Catch::Matchers::WithinRel(std::log(0.5) / std::log(4.0), 1e-12));

  CHECK_THROWS_AS(rejection_rate_curve({make({1})}, {64.0}), std::domain_error);
}
