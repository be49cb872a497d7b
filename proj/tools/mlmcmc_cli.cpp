#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "mlmcmc/diagnostics.hpp"
#include "mlmcmc/io.hpp"
#include "mlmcmc/model.hpp"

namespace fs = std::filesystem;
using namespace mlmcmc;

namespace {

ExperimentConfig load_cfg(const std::string& path, std::uint64_t seed_override,
                          const std::string& out_override) {
  ExperimentConfig cfg = load_config(path);
  if (seed_override != 0) cfg.seed = seed_override;
  if (!out_override.empty()) cfg.output_dir = out_override;
  return cfg;
}

std::vector<Grid> level_grids(const ExperimentConfig& cfg) {
  std::vector<Grid> grids;
  for (const auto& l : cfg.levels) grids.push_back(Grid(l.nx, l.ny, cfg.domain));
  return grids;
}

json hierarchy_meta(const ExperimentConfig& cfg, int fft_resolution) {
  const auto& fl = cfg.levels.back();
  return json{{"kind", cfg.representation},
              {"matern", {cfg.matern.sigma2, cfg.matern.lambda, cfg.matern.nu}},
              {"domain", {cfg.domain.Dx, cfg.domain.Dy}},
              {"grid", {fl.nx, fl.ny}},
              {"truncation", fl.truncation},
              {"fft", fft_resolution}};
}

/// Load the hierarchy from the artifact cache, or build and store it.
RepresentationHierarchy get_hierarchy(const ExperimentConfig& cfg, bool strict,
                                      int fft_resolution = 1024) {
  ArtifactStore store;
  const json meta = hierarchy_meta(cfg, fft_resolution);
  const auto grids = level_grids(cfg);
  std::vector<int> trunc;
  for (const auto& l : cfg.levels) trunc.push_back(l.truncation);

  RepresentationHierarchy rep;
  rep.kind = cfg.representation;
  rep.grids = grids;
  rep.truncations = trunc;
  if (cfg.representation == "kl" && store.contains("kl", meta)) {
    KLBasis fine = store.load_kl(meta);
    for (std::size_t l = 0; l + 1 < grids.size(); ++l)
      rep.kl.push_back(kl_restrict_basis(fine, grids[l]));
    rep.kl.push_back(std::move(fine));
    return rep;
  }
  if (cfg.representation == "wavelet" && store.contains("wavelet", meta)) {
    WaveletBasis fine = store.load_wavelet(meta);
    for (std::size_t l = 0; l + 1 < grids.size(); ++l)
      rep.wavelet.push_back(wavelet_restrict_basis(fine, grids[l]));
    rep.wavelet.push_back(std::move(fine));
    return rep;
  }
  if (cfg.representation == "las" && store.contains("las", meta)) {
    const int nx0 = static_cast<int>(std::lround(cfg.domain.Dx / cfg.domain.Dy));
    for (const Grid& g : grids) rep.las_stage.push_back(las_stage_of(g, nx0));
    rep.las = store.load_las(meta);
    return rep;
  }
  rep = build_representation_hierarchy(cfg.representation, cfg.matern, grids, trunc,
                                       fft_resolution, strict);
  if (cfg.representation == "kl")
    store.store_kl(rep.kl.back(), meta);
  else if (cfg.representation == "wavelet")
    store.store_wavelet(rep.wavelet.back(), meta);
  else
    store.store_las(rep.las, meta);
  return rep;
}

void save_observations(const fs::path& path, const ObservationSet& obs) {
  json j{{"values", std::vector<double>(obs.values.data(), obs.values.data() + obs.values.size())},
         {"sigma_f", obs.sigma_f},
         {"data_nx", obs.data_nx},
         {"data_ny", obs.data_ny},
         {"seed", obs.seed}};
  std::ofstream(path) << j.dump(2) << "\n";
}

ObservationSet load_observations(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open observations file " + path.string());
  json j = json::parse(in);
  ObservationSet obs;
  const auto vals = j.at("values").get<std::vector<double>>();
  obs.values = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<long>(vals.size()));
  obs.sigma_f = j.at("sigma_f").get<double>();
  obs.data_nx = j.at("data_nx").get<int>();
  obs.data_ny = j.at("data_ny").get<int>();
  obs.seed = j.at("seed").get<std::uint64_t>();
  obs.validate();
  return obs;
}

ObservationSet make_observations(const ExperimentConfig& cfg, const fs::path& out) {
  const Grid data_grid(cfg.effective_data_nx(), cfg.effective_data_ny(), cfg.domain);
  const FieldRealization truth = truth_field(cfg.truth, data_grid, cfg.matern, cfg.transform);
  const ObservationSet obs =
      generate_synthetic_data(truth, cfg.material, cfg.load, cfg.sigma_f, cfg.seed);
  fs::create_directories(out);
  write_field(out / "truth_field.bin", truth);
  save_observations(out / "observations.json", obs);
  return obs;
}

int cmd_precompute(const ExperimentConfig& cfg, bool strict) {
  const auto t0 = std::chrono::steady_clock::now();
  get_hierarchy(cfg, strict);
  const double build_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  // Per-level initialization cost table (independent precompute per level).
  std::vector<int> trunc;
  for (const auto& l : cfg.levels) trunc.push_back(l.truncation);
  const auto seconds =
      measure_precompute_seconds(cfg.representation, cfg.matern, level_grids(cfg), trunc);
  fs::create_directories(cfg.output_dir);
  json j{{"method", cfg.representation}, {"seconds", seconds}, {"hierarchy_seconds", build_s}};
  std::ofstream(fs::path(cfg.output_dir) / ("precompute_costs_" + cfg.representation + ".json"))
      << j.dump(2) << "\n";
  std::printf("level  seconds\n");
  for (std::size_t l = 0; l < seconds.size(); ++l) std::printf("%5zu  %.4f\n", l, seconds[l]);
  return 0;
}

int cmd_synth_data(const ExperimentConfig& cfg) {
  make_observations(cfg, cfg.output_dir);
  std::printf("wrote %s and %s\n",
              (fs::path(cfg.output_dir) / "observations.json").string().c_str(),
              (fs::path(cfg.output_dir) / "truth_field.bin").string().c_str());
  return 0;
}

int cmd_run(const ExperimentConfig& cfg, bool store_coeffs, bool strict) {
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  ObservationSet obs;
  if (fs::exists(out / "observations.json"))
    obs = load_observations(out / "observations.json");
  else
    obs = make_observations(cfg, out);

  auto rep = std::make_shared<const RepresentationHierarchy>(get_hierarchy(cfg, strict));
  auto models = make_level_models(rep, cfg.transform, cfg.material, cfg.load, obs,
                                  cfg.levels.size() > 1);
  // Wrap each level's likelihood with a wall-clock accumulator for the
  // cost-per-sample split.
  std::vector<std::shared_ptr<std::pair<double, long>>> cost(models.size());
  for (std::size_t l = 0; l < models.size(); ++l) {
    cost[l] = std::make_shared<std::pair<double, long>>(0.0, 0);
    auto inner = models[l].log_like;
    auto acc = cost[l];
    models[l].log_like = [inner, acc](const Eigen::VectorXd& xi) {
      const auto t0 = std::chrono::steady_clock::now();
      const double v = inner(xi);
      acc->first += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      acc->second += 1;
      return v;
    };
  }

  std::vector<LevelSchedule> schedule;
  for (const auto& l : cfg.levels) schedule.push_back({l.n_steps, l.burn_in, l.tau, l.beta});

  const int fl = static_cast<int>(models.size()) - 1;
  Eigen::VectorXd pm_mean, pm_m2;
  long pm_count = 0;
  std::vector<std::vector<ChainRecord>> replicas;
  std::vector<double> estimates;
  for (int r = 0; r < cfg.replicas; ++r) {
    auto records = mlmcmc_run(models, schedule, cfg.seed, r);
    estimates.push_back(telescoping_estimate(records));
    for (std::size_t l = 0; l < records.size(); ++l) {
      char name[64];
      std::snprintf(name, sizeof name, "chain_l%zu_r%d.csv", l, r);
      write_chain_csv(out / name, records[l]);
      if (store_coeffs) {
        std::snprintf(name, sizeof name, "coeffs_l%zu_r%d.bin", l, r);
        detail::BinaryWriter w(out / name);
        w.mat(records[l].states);
      }
    }
    // Streaming posterior field maps over finest-level post-burn-in states.
    const ChainRecord& fr = records[fl];
    for (long n = fr.burn_in; n < fr.steps(); ++n) {
      const FieldRealization f =
          transform_field(cfg.transform, rep->gaussian_field(fl, fr.states.col(n)), nullptr);
      if (pm_count == 0) {
        pm_mean = Eigen::VectorXd::Zero(f.values.size());
        pm_m2 = pm_mean;
      }
      ++pm_count;
      const Eigen::VectorXd delta = f.values - pm_mean;
      pm_mean += delta / static_cast<double>(pm_count);
      pm_m2 += delta.cwiseProduct(f.values - pm_mean);
    }
    // Keep only what diagnostics needs to bound memory across replicas.
    for (auto& rec : records)
      if (&rec != &records[fl]) rec.states.resize(0, 0);
    replicas.push_back(std::move(records));
  }

  auto diag = compute_level_diagnostics(replicas);
  for (std::size_t l = 0; l < diag.size(); ++l)
    diag[l].cost_per_sample = cost[l]->second > 0 ? cost[l]->first / cost[l]->second : 0.0;
  const double eps = sampling_error(diag);
  double estimate = 0.0;
  for (double e : estimates) estimate += e;
  estimate /= estimates.size();

  json jlev = json::array();
  for (std::size_t l = 0; l < diag.size(); ++l)
    jlev.push_back(json{{"level", l},
                        {"var_y", diag[l].var_y},
                        {"iat", diag[l].iat},
                        {"n_samples", diag[l].n_samples},
                        {"rejection_rate", diag[l].rejection_rate},
                        {"cost_per_sample", diag[l].cost_per_sample}});
  json jd{{"method", cfg.representation},
          {"seed", cfg.seed},
          {"replicas", cfg.replicas},
          {"levels", jlev},
          {"estimate", estimate},
          {"epsilon", eps}};
  std::ofstream(out / "diagnostics.json") << jd.dump(2) << "\n";

  const Grid fg = rep->grids[fl];
  write_field(out / ("post_mean_" + cfg.representation + ".bin"),
              FieldRealization{fg, pm_mean});
  write_field(out / ("post_std_" + cfg.representation + ".bin"),
              FieldRealization{fg, (pm_m2 / static_cast<double>(pm_count)).cwiseSqrt()});

  std::printf("estimate %.8e  epsilon %.3e\n", estimate, eps);
  return 0;
}

int cmd_truncation_study(const ExperimentConfig& cfg, bool strict) {
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  const Grid grid = level_grids(cfg).back();
  const int m_ref = cfg.truth.coeff_count;

  // Reference realization: a Gaussian wavelet draw with known coefficients.
  const auto emb = TorusEmbedding::for_domain(cfg.domain);
  const int n_max = meyer::support_bound(true, wavelet_ordering(m_ref).back().scale);
  const auto table = periodized_covariance_coeffs(cfg.matern, emb, 1024, n_max, strict);
  auto rng = make_rng(cfg.truth.seed, -1, 0);
  const Eigen::VectorXd xi = standard_normal_vector(rng, m_ref);
  const FieldRealization ref = wavelet_draw_field(table, grid, xi);
  write_field(out / "truncation_reference.bin", ref);

  std::vector<int> m_grid;
  for (int m = 4; m <= m_ref; m *= 2) m_grid.push_back(m);

  const auto kl_basis = kl_precompute(cfg.matern, grid, grid.cells());
  const auto kl_curve = kl_truncation_curve(kl_basis, ref, m_grid);
  const auto wav_basis = wavelet_precompute(table, grid, m_ref);
  const auto wav_curve = wavelet_truncation_curve(wav_basis, xi, m_grid);
  const int nx0 = static_cast<int>(std::lround(cfg.domain.Dx / cfg.domain.Dy));
  const auto las_curve = las_truncation_curve(ref, nx0, m_grid);

  std::ofstream csv(out / "fig7_truncation.csv");
  csv << "method,m,l2_error\n";
  auto emit = [&](const char* name, const TruncationCurve& c) {
    char buf[96];
    for (std::size_t i = 0; i < c.m.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s,%d,%.17g\n", name, c.m[i], c.error[i]);
      csv << buf;
    }
  };
  emit("kl", kl_curve);
  emit("wavelet", wav_curve);
  emit("las", las_curve);
  json slopes{{"kl", kl_curve.slope}, {"wavelet", wav_curve.slope}, {"las", las_curve.slope}};
  std::ofstream(out / "truncation_slopes.json") << slopes.dump(2) << "\n";
  std::printf("slopes: kl %.3f  wavelet %.3f  las %.3f\n", kl_curve.slope, wav_curve.slope,
              las_curve.slope);
  return 0;
}

int cmd_report(const std::string& run_dir) {
  const fs::path dir(run_dir);
  const bool has_diag = fs::exists(dir / "diagnostics.json");
  bool has_costs = false;
  for (const char* m : {"kl", "wavelet", "las"})
    has_costs = has_costs || fs::exists(dir / (std::string("precompute_costs_") + m + ".json"));
  if (!has_diag && !has_costs && !fs::exists(dir / "fig7_truncation.csv")) {
    std::fprintf(stderr, "nothing to report in %s\n", run_dir.c_str());
    return 3;
  }

  json diag;
  std::string method = "unknown";
  if (has_diag) {
    std::ifstream in(dir / "diagnostics.json");
    diag = json::parse(in);
    method = diag.at("method").get<std::string>();

    std::ofstream t2(dir / "table2_var_iat.csv");
    t2 << "level,method,var_Y,iat\n";
    std::ofstream f11(dir / "fig11_rates_error.csv");
    f11 << "level,method,rejection_rate,epsilon\n";
    char buf[160];
    for (const auto& l : diag.at("levels")) {
      std::snprintf(buf, sizeof buf, "%ld,%s,%.17g,%.17g\n", l.at("level").get<long>(),
                    method.c_str(), l.at("var_y").get<double>(), l.at("iat").get<double>());
      t2 << buf;
      std::snprintf(buf, sizeof buf, "%ld,%s,%.17g,%.17g\n", l.at("level").get<long>(),
                    method.c_str(), l.at("rejection_rate").get<double>(),
                    diag.at("epsilon").get<double>());
      f11 << buf;
    }
  }

  std::ofstream f10(dir / "fig10_costs.csv");
  f10 << "level,method,precompute_seconds,cost_per_sample\n";
  for (const char* m : {"kl", "wavelet", "las"}) {
    const fs::path p = dir / (std::string("precompute_costs_") + m + ".json");
    if (!fs::exists(p)) continue;
    std::ifstream in(p);
    json costs = json::parse(in);
    const auto seconds = costs.at("seconds").get<std::vector<double>>();
    for (std::size_t l = 0; l < seconds.size(); ++l) {
      double per_sample = 0.0;
      if (has_diag && method == m && l < diag.at("levels").size())
        per_sample = diag.at("levels")[l].at("cost_per_sample").get<double>();
      char buf[160];
      std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g\n", l, m, seconds[l], per_sample);
      f10 << buf;
    }
  }
  std::printf("report written to %s\n", run_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-field multilevel MCMC experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, run_dir;
  std::uint64_t seed = 0;
  bool store_coeffs = false, strict = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
    if (needs_config) cmd->add_option("--config", config_path, "experiment config JSON")->required();
    cmd->add_option("--seed", seed, "override the experiment seed");
    cmd->add_option("--out", out_dir, "override the output directory");
    cmd->add_flag("--strict", strict, "fail on clamped torus covariance coefficients");
  };

  auto* pre = app.add_subcommand("precompute", "build and cache basis artifacts");
  add_common(pre);
  auto* synth = app.add_subcommand("synth-data", "generate synthetic observations");
  add_common(synth);
  auto* run = app.add_subcommand("run", "run the (multilevel) MCMC experiment");
  add_common(run);
  run->add_flag("--store-coeffs", store_coeffs, "persist full coefficient chains");
  auto* study = app.add_subcommand("truncation-study", "truncation-error comparison");
  add_common(study);
  auto* report = app.add_subcommand("report", "assemble figure/table CSVs from a run directory");
  report->add_option("--out", run_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) return cmd_report(run_dir);
    const ExperimentConfig cfg = load_cfg(config_path, seed, out_dir);
    if (pre->parsed()) return cmd_precompute(cfg, strict);
    if (synth->parsed()) return cmd_synth_data(cfg);
    if (run->parsed()) return cmd_run(cfg, store_coeffs, strict);
    if (study->parsed()) return cmd_truncation_study(cfg, strict);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
