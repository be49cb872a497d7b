#ifndef MLMCMC_IO_HPP
#define MLMCMC_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlmcmc/covariance.hpp"
#include "mlmcmc/fem.hpp"
#include "mlmcmc/grid.hpp"
#include "mlmcmc/inverse.hpp"
#include "mlmcmc/kl.hpp"
#include "mlmcmc/las.hpp"
#include "mlmcmc/mcmc.hpp"
#include "mlmcmc/transform.hpp"
#include "mlmcmc/wavelet.hpp"

namespace mlmcmc {

using nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) throw std::domain_error("config: unknown key '" + item.key() + "' in " + where);
  }
}

/// FNV-1a 64-bit over raw bytes; used for content hashes of artifacts.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Little-endian binary streams (asserted at runtime on open).
inline void check_little_endian() {
  const std::uint16_t one = 1;
  if (*reinterpret_cast<const unsigned char*>(&one) != 1)
    throw std::runtime_error("io: big-endian hosts are unsupported by the binary format");
}

struct BinaryWriter {
  std::ofstream out;
  std::uint64_t hash = 0xcbf29ce484222325ull;

  explicit BinaryWriter(const std::filesystem::path& p) : out(p, std::ios::binary) {
    check_little_endian();
    if (!out) throw std::runtime_error("io: cannot open for writing: " + p.string());
  }
  void raw(const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    hash = fnv1a(data, n, hash);
  }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void vec(const Eigen::VectorXd& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  void mat(const Eigen::MatrixXd& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
};

struct BinaryReader {
  std::ifstream in;

  explicit BinaryReader(const std::filesystem::path& p) : in(p, std::ios::binary) {
    check_little_endian();
    if (!in) throw std::runtime_error("io: cannot open for reading: " + p.string());
  }
  void raw(void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("io: truncated binary file");
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  Eigen::VectorXd vec() {
    Eigen::VectorXd v(static_cast<long>(u64()));
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
    return v;
  }
  Eigen::MatrixXd mat() {
    const long r = static_cast<long>(u64()), c = static_cast<long>(u64());
    Eigen::MatrixXd m(r, c);
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    return m;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Field dumps: raw little-endian doubles, row-major with x fastest, plus a
// JSON sidecar (<path>.json) carrying the grid shape, domain, and hash.
// ---------------------------------------------------------------------------

inline void write_field(const std::filesystem::path& path, const FieldRealization& field) {
  detail::check_little_endian();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_field: cannot open " + path.string());
  // values are already stored x-fastest (index = j*nx + i)
  out.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(sizeof(double) * field.values.size()));
  json side{{"nx", field.grid.nx},
            {"ny", field.grid.ny},
            {"dx", field.grid.domain.Dx},
            {"dy", field.grid.domain.Dy},
            {"hash", detail::hex64(detail::fnv1a(
                         field.values.data(), sizeof(double) * field.values.size()))}};
  std::ofstream(path.string() + ".json") << side.dump(2) << "\n";
}

inline FieldRealization read_field(const std::filesystem::path& path) {
  std::ifstream sf(path.string() + ".json");
  if (!sf) throw std::runtime_error("read_field: missing sidecar for " + path.string());
  json side = json::parse(sf);
  Grid grid(side.at("nx").get<int>(), side.at("ny").get<int>(),
            Domain{side.at("dx").get<double>(), side.at("dy").get<double>()});
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_field: cannot open " + path.string());
  Eigen::VectorXd v(grid.cells());
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(double) * v.size()));
  if (!in) throw std::runtime_error("read_field: truncated file " + path.string());
  const std::string h = detail::hex64(detail::fnv1a(v.data(), sizeof(double) * v.size()));
  if (h != side.at("hash").get<std::string>())
    throw std::runtime_error("read_field: content hash mismatch for " + path.string());
  return {grid, std::move(v)};
}

// ---------------------------------------------------------------------------
// Experiment configuration (single JSON document, unknown keys rejected).
// ---------------------------------------------------------------------------

struct LevelConfig {
  int nx = 16, ny = 4;
  int truncation = 16;
  int tau = 1;        ///< unused at level 0
  long n_steps = 0;   ///< N_l (post burn-in)
  long burn_in = -1;  ///< B_l; negative selects the 10% default
  double beta = 0.1;
};

struct ExperimentConfig {
  Domain domain{};
  std::string representation = "kl";  ///< kl | wavelet | las
  MaternParams matern{};
  GammaTransformParams transform{};
  std::vector<LevelConfig> levels;
  LineLoad load{};
  MaterialModel material{};
  double sigma_f = 1e-8;
  GroundTruth truth{};
  std::uint64_t seed = 1;
  int replicas = 1;
  std::string output_dir = "out";
  int data_nx = 0, data_ny = 0;  ///< 0,0: one refinement of the finest level

  int effective_data_nx() const { return data_nx > 0 ? data_nx : 2 * levels.back().nx; }
  int effective_data_ny() const { return data_ny > 0 ? data_ny : 2 * levels.back().ny; }

  void validate() const {
    matern.validate();
    if (representation != "kl" && representation != "wavelet" && representation != "las")
      throw std::domain_error("config: representation must be kl, wavelet, or las");
    if (levels.empty()) throw std::domain_error("config: at least one level required");
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto& lv = levels[l];
      if (lv.n_steps < 1) throw std::domain_error("config: n_steps must be positive");
      if (l > 0 && levels[l].truncation <= levels[l - 1].truncation)
        throw std::domain_error("config: truncations must be strictly increasing");
      if (l > 0 && lv.tau < 1) throw std::domain_error("config: tau must be >= 1");
    }
    if (!(sigma_f > 0.0)) throw std::domain_error("config: sigma_f must be positive");
    if (replicas < 1) throw std::domain_error("config: replicas must be >= 1");
  }
};

/// Section 5.1 defaults: four levels of 2^(l+4) x 2^(l+2) elements with the
/// Table-1 truncation ladder of the chosen representation.
inline ExperimentConfig default_experiment_config(const std::string& representation) {
  ExperimentConfig cfg;
  cfg.representation = representation;
  std::vector<int> trunc;
  if (representation == "kl")
    trunc = {16, 40, 100, 250};
  else if (representation == "wavelet")
    trunc = {64, 256, 500, 1400};
  else if (representation == "las")
    trunc = {64, 256, 1024, 4096};
  else
    throw std::domain_error("config: representation must be kl, wavelet, or las");
  const std::vector<long> n_steps = {200000, 1800, 320, 50};
  for (int l = 0; l < 4; ++l) {
    LevelConfig lv;
    lv.nx = 1 << (l + 4);
    lv.ny = 1 << (l + 2);
    lv.truncation = trunc[l];
    lv.tau = l == 0 ? 1 : (l == 1 ? 100 : 5);
    lv.n_steps = n_steps[l];
    lv.beta = 0.1;
    cfg.levels.push_back(lv);
  }
  return cfg;
}

inline json to_json(const ExperimentConfig& c) {
  json levels = json::array();
  for (const auto& l : c.levels)
    levels.push_back(json{{"nx", l.nx},
                          {"ny", l.ny},
                          {"truncation", l.truncation},
                          {"tau", l.tau},
                          {"n_steps", l.n_steps},
                          {"burn_in", l.burn_in},
                          {"beta", l.beta}});
  return json{
      {"domain", {{"dx", c.domain.Dx}, {"dy", c.domain.Dy}}},
      {"representation", c.representation},
      {"matern",
       {{"sigma2", c.matern.sigma2}, {"lambda", c.matern.lambda}, {"nu", c.matern.nu}}},
      {"transform", {{"mu", c.transform.mu}, {"kappa", c.transform.kappa}}},
      {"levels", levels},
      {"load",
       {{"magnitude", c.load.magnitude}, {"x0", c.load.x_start}, {"x1", c.load.x_end}}},
      {"material",
       {{"poisson", c.material.poisson},
        {"density", c.material.density},
        {"gravity", c.material.include_gravity}}},
      {"noise", {{"sigma_f", c.sigma_f}}},
      {"truth",
       {{"kind", c.truth.kind == GroundTruth::Kind::piecewise_constant ? "piecewise_constant"
                                                                       : "prior_sampled_wavelet"},
        {"coeff_count", c.truth.coeff_count},
        {"seed", c.truth.seed},
        {"e_background", c.truth.e_background},
        {"e_damaged", c.truth.e_damaged},
        {"damage_x0", c.truth.damage_x0},
        {"damage_x1", c.truth.damage_x1},
        {"damage_y0", c.truth.damage_y0},
        {"damage_y1", c.truth.damage_y1}}},
      {"seed", c.seed},
      {"replicas", c.replicas},
      {"output_dir", c.output_dir},
      {"data_mesh", {{"nx", c.data_nx}, {"ny", c.data_ny}}}};
}

inline ExperimentConfig config_from_json(const json& j) {
  detail::reject_unknown_keys(j,
                              {"domain", "representation", "matern", "transform", "levels",
                               "load", "material", "noise", "truth", "seed", "replicas",
                               "output_dir", "data_mesh"},
                              "top level");
  ExperimentConfig c;
  const json& d = j.at("domain");
  detail::reject_unknown_keys(d, {"dx", "dy"}, "domain");
  c.domain = {d.at("dx").get<double>(), d.at("dy").get<double>()};
  c.representation = j.at("representation").get<std::string>();
  const json& m = j.at("matern");
  detail::reject_unknown_keys(m, {"sigma2", "lambda", "nu"}, "matern");
  c.matern = {m.at("sigma2").get<double>(), m.at("lambda").get<double>(),
              m.at("nu").get<double>()};
  const json& t = j.at("transform");
  detail::reject_unknown_keys(t, {"mu", "kappa"}, "transform");
  c.transform = {t.at("mu").get<double>(), t.at("kappa").get<double>()};
  c.levels.clear();
  for (const json& lj : j.at("levels")) {
    detail::reject_unknown_keys(
        lj, {"nx", "ny", "truncation", "tau", "n_steps", "burn_in", "beta"}, "levels[]");
    LevelConfig l;
    l.nx = lj.at("nx").get<int>();
    l.ny = lj.at("ny").get<int>();
    l.truncation = lj.at("truncation").get<int>();
    l.tau = lj.at("tau").get<int>();
    l.n_steps = lj.at("n_steps").get<long>();
    l.burn_in = lj.value("burn_in", -1L);
    l.beta = lj.at("beta").get<double>();
    c.levels.push_back(l);
  }
  const json& ld = j.at("load");
  detail::reject_unknown_keys(ld, {"magnitude", "x0", "x1"}, "load");
  c.load = {ld.at("magnitude").get<double>(), ld.at("x0").get<double>(),
            ld.at("x1").get<double>()};
  const json& mt = j.at("material");
  detail::reject_unknown_keys(mt, {"poisson", "density", "gravity"}, "material");
  c.material.poisson = mt.at("poisson").get<double>();
  c.material.density = mt.at("density").get<double>();
  c.material.include_gravity = mt.at("gravity").get<bool>();
  const json& ns = j.at("noise");
  detail::reject_unknown_keys(ns, {"sigma_f"}, "noise");
  c.sigma_f = ns.at("sigma_f").get<double>();
  const json& tr = j.at("truth");
  detail::reject_unknown_keys(tr,
                              {"kind", "coeff_count", "seed", "e_background", "e_damaged",
                               "damage_x0", "damage_x1", "damage_y0", "damage_y1"},
                              "truth");
  const std::string kind = tr.at("kind").get<std::string>();
  if (kind == "piecewise_constant")
    c.truth.kind = GroundTruth::Kind::piecewise_constant;
  else if (kind == "prior_sampled_wavelet")
    c.truth.kind = GroundTruth::Kind::prior_sampled_wavelet;
  else
    throw std::domain_error("config: unknown truth kind '" + kind + "'");
  c.truth.coeff_count = tr.at("coeff_count").get<int>();
  c.truth.seed = tr.at("seed").get<std::uint64_t>();
  c.truth.e_background = tr.at("e_background").get<double>();
  c.truth.e_damaged = tr.at("e_damaged").get<double>();
  c.truth.damage_x0 = tr.at("damage_x0").get<double>();
  c.truth.damage_x1 = tr.at("damage_x1").get<double>();
  c.truth.damage_y0 = tr.at("damage_y0").get<double>();
  c.truth.damage_y1 = tr.at("damage_y1").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.replicas = j.at("replicas").get<int>();
  c.output_dir = j.at("output_dir").get<std::string>();
  const json& dm = j.at("data_mesh");
  detail::reject_unknown_keys(dm, {"nx", "ny"}, "data_mesh");
  c.data_nx = dm.at("nx").get<int>();
  c.data_ny = dm.at("ny").get<int>();
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open " + path.string());
  return config_from_json(json::parse(in));
}

inline void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_config: cannot open " + path.string());
  out << to_json(cfg).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Basis artifact cache: binary blobs keyed by a content hash of the
// generating parameters, with a JSON sidecar holding those parameters.
// Mismatched metadata under the same key refuses to overwrite.
// ---------------------------------------------------------------------------

class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path dir = default_dir()) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  static std::filesystem::path default_dir() {
    if (const char* env = std::getenv("MLMCMC_CACHE_DIR")) return env;
    return ".mlmcmc_cache";
  }

  std::filesystem::path path_for(const std::string& kind, const json& meta) const {
    const std::string dump = meta.dump();
    return dir_ / (kind + "_" + detail::hex64(detail::fnv1a(dump.data(), dump.size())) + ".bin");
  }

  bool contains(const std::string& kind, const json& meta) const {
    return std::filesystem::exists(path_for(kind, meta));
  }

  void store_kl(const KLBasis& b, const json& meta) {
    store(path_for("kl", meta), meta, [&](detail::BinaryWriter& w) {
      write_grid(w, b.grid);
      w.vec(b.eigenvalues);
      w.mat(b.basis);
      w.vec(b.mean_field);
      w.f64(b.trace_all);
    });
  }
  KLBasis load_kl(const json& meta) const {
    detail::BinaryReader r = open(path_for("kl", meta), meta);
    KLBasis b;
    b.grid = read_grid(r);
    b.eigenvalues = r.vec();
    b.basis = r.mat();
    b.mean_field = r.vec();
    b.trace_all = r.f64();
    return b;
  }

  void store_wavelet(const WaveletBasis& b, const json& meta) {
    store(path_for("wavelet", meta), meta, [&](detail::BinaryWriter& w) {
      write_grid(w, b.grid);
      w.mat(b.basis);
      w.u64(b.ordering.size());
      for (const auto& l : b.ordering) {
        w.i64(l.scale);
        w.i64(l.kx);
        w.i64(l.ky);
        w.i64(l.orientation);
      }
      w.vec(b.norm_t);
      w.f64(b.embedding.gamma);
      w.f64(b.embedding.delta);
      w.f64(b.embedding.kappa_cut);
    });
  }
  WaveletBasis load_wavelet(const json& meta) const {
    detail::BinaryReader r = open(path_for("wavelet", meta), meta);
    WaveletBasis b;
    b.grid = read_grid(r);
    b.basis = r.mat();
    b.ordering.resize(r.u64());
    for (auto& l : b.ordering) {
      l.scale = static_cast<int>(r.i64());
      l.kx = static_cast<int>(r.i64());
      l.ky = static_cast<int>(r.i64());
      l.orientation = static_cast<char>(r.i64());
    }
    b.norm_t = r.vec();
    b.embedding.gamma = r.f64();
    b.embedding.delta = r.f64();
    b.embedding.kappa_cut = r.f64();
    return b;
  }

  void store_las(const LASCoefficients& c, const json& meta) {
    store(path_for("las", meta), meta, [&](detail::BinaryWriter& w) {
      w.f64(c.params.sigma2);
      w.f64(c.params.lambda);
      w.f64(c.params.nu);
      w.f64(c.domain.Dx);
      w.f64(c.domain.Dy);
      w.i64(c.nx0);
      w.mat(c.initial_cov);
      w.mat(c.initial_chol);
      w.u64(c.iterations.size());
      for (const auto& it : c.iterations) {
        w.u64(it.variants.size());
        for (const auto& [key, st] : it.variants) {
          for (int v : key) w.i64(v);
          w.u64(st.offsets.size());
          for (auto [m, n] : st.offsets) {
            w.i64(m);
            w.i64(n);
          }
          w.mat(st.a);
          w.mat(st.c);
        }
      }
    });
  }
  LASCoefficients load_las(const json& meta) const {
    detail::BinaryReader r = open(path_for("las", meta), meta);
    LASCoefficients c;
    c.params.sigma2 = r.f64();
    c.params.lambda = r.f64();
    c.params.nu = r.f64();
    c.domain.Dx = r.f64();
    c.domain.Dy = r.f64();
    c.nx0 = static_cast<int>(r.i64());
    c.initial_cov = r.mat();
    c.initial_chol = r.mat();
    c.iterations.resize(r.u64());
    for (auto& it : c.iterations) {
      const std::size_t nv = r.u64();
      for (std::size_t v = 0; v < nv; ++v) {
        std::array<int, 4> key;
        for (int& x : key) x = static_cast<int>(r.i64());
        LASStencil st;
        st.offsets.resize(r.u64());
        for (auto& [m, n] : st.offsets) {
          m = static_cast<int>(r.i64());
          n = static_cast<int>(r.i64());
        }
        st.a = r.mat();
        st.c = r.mat();
        it.variants.emplace(key, std::move(st));
      }
    }
    return c;
  }

 private:
  static void write_grid(detail::BinaryWriter& w, const Grid& g) {
    w.i64(g.nx);
    w.i64(g.ny);
    w.f64(g.domain.Dx);
    w.f64(g.domain.Dy);
  }
  static Grid read_grid(detail::BinaryReader& r) {
    const int nx = static_cast<int>(r.i64()), ny = static_cast<int>(r.i64());
    const double dx = r.f64(), dy = r.f64();
    return Grid(nx, ny, Domain{dx, dy});
  }

  template <class Fn>
  void store(const std::filesystem::path& path, const json& meta, Fn&& write_body) {
    const std::filesystem::path side = path.string() + ".json";
    if (std::filesystem::exists(path)) {
      std::ifstream sf(side);
      if (!sf) throw std::runtime_error("ArtifactStore: existing artifact lacks a sidecar");
      json existing = json::parse(sf);
      if (existing.at("meta") != meta)
        throw std::runtime_error(
            "ArtifactStore: refusing to overwrite artifact with mismatched metadata: " +
            path.string());
      return;  // idempotent cache hit
    }
    detail::BinaryWriter w(path);
    write_body(w);
    w.out.flush();
    std::ofstream(side) << json{{"meta", meta}, {"hash", detail::hex64(w.hash)}}.dump(2) << "\n";
  }

  detail::BinaryReader open(const std::filesystem::path& path, const json& meta) const {
    if (!std::filesystem::exists(path))
      throw std::runtime_error("ArtifactStore: missing artifact " + path.string() +
                               "; run precompute first");
    std::ifstream sf(path.string() + ".json");
    if (!sf) throw std::runtime_error("ArtifactStore: missing sidecar for " + path.string());
    json side = json::parse(sf);
    if (side.at("meta") != meta)
      throw std::runtime_error("ArtifactStore: metadata mismatch for " + path.string());
    return detail::BinaryReader(path);
  }

  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Chain CSV: step, accepted, log_like_fine, log_like_coarse, qoi.
// ---------------------------------------------------------------------------

inline void write_chain_csv(const std::filesystem::path& path, const ChainRecord& rec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_chain_csv: cannot open " + path.string());
  out << "step,accepted,log_like_fine,log_like_coarse,qoi\n";
  char buf[128];
  for (long n = 0; n < rec.steps(); ++n) {
    const double llc = rec.level > 0 ? rec.log_like_coarse[n]
                                     : std::numeric_limits<double>::quiet_NaN();
    std::snprintf(buf, sizeof buf, "%ld,%d,%.17g,%.17g,%.17g\n", n, int(rec.accepted[n]),
                  rec.log_like[n], llc, rec.qoi[n]);
    out << buf;
  }
}

inline ChainRecord read_chain_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_chain_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "step,accepted,log_like_fine,log_like_coarse,qoi")
    throw std::runtime_error("read_chain_csv: bad header in " + path.string());
  std::vector<double> ll, llc, q;
  std::vector<std::uint8_t> acc;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    long step;
    int a;
    double v1, v2, v3;
    if (std::sscanf(line.c_str(), "%ld,%d,%lg,%lg,%lg", &step, &a, &v1, &v2, &v3) != 5)
      throw std::runtime_error("read_chain_csv: bad row in " + path.string());
    acc.push_back(static_cast<std::uint8_t>(a));
    ll.push_back(v1);
    llc.push_back(v2);
    q.push_back(v3);
  }
  ChainRecord rec;
  rec.accepted = std::move(acc);
  rec.log_like = Eigen::Map<Eigen::VectorXd>(ll.data(), static_cast<long>(ll.size()));
  rec.qoi = Eigen::Map<Eigen::VectorXd>(q.data(), static_cast<long>(q.size()));
  const bool has_coarse = !llc.empty() && std::isfinite(llc[0]);
  if (has_coarse) {
    rec.level = 1;  // coarse-paired chain; the actual level lives in the filename
    rec.log_like_coarse = Eigen::Map<Eigen::VectorXd>(llc.data(), static_cast<long>(llc.size()));
  }
  return rec;
}

}  // namespace mlmcmc

#endif
