#ifndef MLMCMC_RNG_HPP
#define MLMCMC_RNG_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace mlmcmc {

/// splitmix64 step; used only to derive well-separated seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d2a68b561576b5ull;
  return z ^ (z >> 31);
}

/// Deterministic seed lineage: experiment seed -> level -> replica.
inline std::uint64_t derive_seed(std::uint64_t experiment_seed, int level, int replica = 0) {
  std::uint64_t s = experiment_seed;
  splitmix64(s);
  s ^= 0x1000003ull * static_cast<std::uint64_t>(level + 1);
  splitmix64(s);
  s ^= 0x100000001b3ull * static_cast<std::uint64_t>(replica + 1);
  return splitmix64(s);
}

inline std::mt19937_64 make_rng(std::uint64_t experiment_seed, int level, int replica = 0) {
  return std::mt19937_64(derive_seed(experiment_seed, level, replica));
}

inline Eigen::VectorXd standard_normal_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

}  // namespace mlmcmc

#endif
