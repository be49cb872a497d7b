#ifndef MLMCMC_MCMC_HPP
#define MLMCMC_MCMC_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlmcmc/rng.hpp"

namespace mlmcmc {

struct ProposalConfig {
  enum class Kind { random_walk, pcn };
  Kind kind = Kind::pcn;
  double beta = 0.1;

  void validate() const {
    if (kind == Kind::pcn) {
      if (!(beta >= 0.0 && beta <= 1.0))
        throw std::domain_error("ProposalConfig: pCN requires 0 <= beta <= 1");
    } else if (!(beta >= 0.0)) {
      throw std::domain_error("ProposalConfig: random walk requires beta >= 0");
    }
  }
};

/// Eq-(19)/(20) proposal moves in coefficient space.
inline Eigen::VectorXd propose(const ProposalConfig& config, const Eigen::VectorXd& current,
                               std::mt19937_64& rng) {
  config.validate();
  const Eigen::VectorXd xi = standard_normal_vector(rng, current.size());
  if (config.kind == ProposalConfig::Kind::random_walk) return current + config.beta * xi;
  return std::sqrt(1.0 - config.beta * config.beta) * current + config.beta * xi;
}

/// One Markov chain: states are stored column-wise alongside per-step
/// log-likelihoods, QoI values, and accept flags. For level > 0 the chain
/// additionally carries the coarse-level log-likelihood and QoI of each
/// state's coarse modes (the Y_l pairing of Eq 21).
struct ChainRecord {
  int level = 0;
  long burn_in = 0;
  Eigen::MatrixXd states;  ///< dim x steps
  Eigen::VectorXd log_like;
  Eigen::VectorXd qoi;
  Eigen::VectorXd log_like_coarse;  ///< empty at level 0
  Eigen::VectorXd qoi_coarse;       ///< empty at level 0
  std::vector<std::uint8_t> accepted;

  long steps() const { return static_cast<long>(log_like.size()); }

  double acceptance_rate() const {
    if (accepted.empty()) return 0.0;
    double n = 0;
    for (std::uint8_t a : accepted) n += a;
    return n / static_cast<double>(accepted.size());
  }
};

/// A level of the inverse problem reduced to coefficient space: the
/// log-likelihood and QoI as functions of the first M_l expansion
/// coefficients. The representation/transform/FE composition is supplied by
/// the caller.
struct LevelModel {
  int truncation = 0;
  std::function<double(const Eigen::VectorXd&)> log_like;
  std::function<double(const Eigen::VectorXd&)> qoi;
};

/// Metropolis-Hastings (Alg. 1). For pCN the Gaussian prior cancels out of
/// the ratio and acceptance uses the likelihood alone; the symmetric random
/// walk targets the posterior, so the prior term is kept.
inline ChainRecord mh_run(const LevelModel& model, const ProposalConfig& config,
                          const Eigen::VectorXd& init, long n_steps, long burn_in,
                          std::mt19937_64& rng) {
  config.validate();
  if (n_steps < 1) throw std::domain_error("mh_run: n_steps must be >= 1");
  if (burn_in < 0 || burn_in >= n_steps)
    throw std::domain_error("mh_run: burn_in must lie in [0, n_steps)");

  const bool rw = config.kind == ProposalConfig::Kind::random_walk;
  const auto log_target = [&](const Eigen::VectorXd& xi) {
    double t = model.log_like(xi);
    if (rw) t -= 0.5 * xi.squaredNorm();
    return t;
  };

  Eigen::VectorXd cur = init;
  double cur_lt = log_target(cur);
  double cur_ll = model.log_like(cur);
  if (!std::isfinite(cur_lt))
    throw std::domain_error("mh_run: log-posterior is not finite at the initial state");

  ChainRecord rec;
  rec.burn_in = burn_in;
  rec.states.resize(init.size(), n_steps);
  rec.log_like.resize(n_steps);
  rec.qoi.resize(n_steps);
  rec.accepted.resize(n_steps);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double cur_q = model.qoi ? model.qoi(cur) : 0.0;
  for (long n = 0; n < n_steps; ++n) {
    const Eigen::VectorXd prop = propose(config, cur, rng);
    const double prop_lt = log_target(prop);
    const bool accept = std::log(unif(rng)) < prop_lt - cur_lt;
    if (accept) {
      cur = prop;
      cur_lt = prop_lt;
      cur_ll = rw ? prop_lt + 0.5 * cur.squaredNorm() : prop_lt;
      cur_q = model.qoi ? model.qoi(cur) : 0.0;
    }
    rec.states.col(n) = cur;
    rec.log_like[n] = cur_ll;
    rec.qoi[n] = cur_q;
    rec.accepted[n] = accept;
  }
  return rec;
}

/// Per-level chain schedule (§5.1 terminology).
struct LevelSchedule {
  long n_steps = 0;   ///< N_l, post burn-in
  long burn_in = -1;  ///< B_l; negative means the 10% default
  int tau = 1;        ///< subsampling rate, unused at level 0
  double beta = 0.1;  ///< pCN step size

  long effective_burn_in() const { return burn_in >= 0 ? burn_in : n_steps / 10; }
  long total_steps() const { return n_steps + effective_burn_in(); }
};

/// Multilevel MCMC (Alg. 2). Level 0 runs plain pCN Metropolis-Hastings; at
/// level l the coarse modes are proposed from the post-burn-in subsampled
/// level-(l-1) chain (pointer advances on rejection too) and the fine modes
/// move by pCN, accepted with the two-level ratio
///   alpha_l = min{1, L_l(E') L_{l-1}(E^C) / (L_l(E) L_{l-1}((E^C)'))}.
inline std::vector<ChainRecord> mlmcmc_run(const std::vector<LevelModel>& models,
                                           const std::vector<LevelSchedule>& schedule,
                                           std::uint64_t seed, int replica = 0) {
  if (models.empty() || models.size() != schedule.size())
    throw std::domain_error("mlmcmc_run: need one schedule entry per level model");
  for (std::size_t l = 1; l < models.size(); ++l) {
    if (models[l].truncation <= models[l - 1].truncation)
      throw std::domain_error("mlmcmc_run: truncations must be strictly increasing");
    if (schedule[l].tau < 1) throw std::domain_error("mlmcmc_run: tau must be >= 1");
  }

  std::vector<ChainRecord> records;
  records.reserve(models.size());
  {
    ProposalConfig cfg{ProposalConfig::Kind::pcn, schedule[0].beta};
    auto rng = make_rng(seed, 0, replica);
    records.push_back(mh_run(models[0], cfg, Eigen::VectorXd::Zero(models[0].truncation),
                             schedule[0].total_steps(), schedule[0].effective_burn_in(), rng));
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t l = 1; l < models.size(); ++l) {
    const ChainRecord& coarse = records[l - 1];
    const LevelModel& cm = models[l - 1];
    const LevelModel& fm = models[l];
    const int mc = cm.truncation, mf = fm.truncation;
    const long total = schedule[l].total_steps();
    const int tau = schedule[l].tau;
    if (coarse.burn_in + (total - 1) * static_cast<long>(tau) >= coarse.steps())
      throw std::domain_error(
          "mlmcmc_run: subsampled coarse chain exhausted at level " + std::to_string(l) +
          "; increase the level-" + std::to_string(l - 1) + " chain length");

    auto rng = make_rng(seed, static_cast<int>(l), replica);
    ProposalConfig cfg{ProposalConfig::Kind::pcn, schedule[l].beta};

    Eigen::VectorXd cur = Eigen::VectorXd::Zero(mf);
    double cur_ll = fm.log_like(cur);
    double cur_q = fm.qoi ? fm.qoi(cur) : 0.0;
    double cur_llc = cm.log_like(Eigen::VectorXd::Zero(mc));
    double cur_qc = cm.qoi ? cm.qoi(Eigen::VectorXd::Zero(mc)) : 0.0;
    if (!std::isfinite(cur_ll) || !std::isfinite(cur_llc))
      throw std::domain_error("mlmcmc_run: log-likelihood is not finite at the initial state");

    ChainRecord rec;
    rec.level = static_cast<int>(l);
    rec.burn_in = schedule[l].effective_burn_in();
    rec.states.resize(mf, total);
    rec.log_like.resize(total);
    rec.qoi.resize(total);
    rec.log_like_coarse.resize(total);
    rec.qoi_coarse.resize(total);
    rec.accepted.resize(total);

    for (long n = 0; n < total; ++n) {
      const long idx = coarse.burn_in + n * static_cast<long>(tau);
      Eigen::VectorXd prop(mf);
      prop.head(mc) = coarse.states.col(idx);
      prop.tail(mf - mc) = propose(cfg, Eigen::VectorXd(cur.tail(mf - mc)), rng);
      const double prop_ll = fm.log_like(prop);
      const double prop_llc = coarse.log_like[idx];
      const double log_alpha = (prop_ll - cur_ll) + (cur_llc - prop_llc);
      const bool accept = std::log(unif(rng)) < log_alpha;
      if (accept) {
        cur = prop;
        cur_ll = prop_ll;
        cur_llc = prop_llc;
        cur_qc = coarse.qoi[idx];
        cur_q = fm.qoi ? fm.qoi(cur) : 0.0;
      }
      rec.states.col(n) = cur;
      rec.log_like[n] = cur_ll;
      rec.qoi[n] = cur_q;
      rec.log_like_coarse[n] = cur_llc;
      rec.qoi_coarse[n] = cur_qc;
      rec.accepted[n] = accept;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

/// Eq (21): level-0 post-burn-in QoI mean plus per-level means of the paired
/// corrections Y_l = Q_l(E_l^n) - Q_{l-1}(E_{l-1}^n).
inline double telescoping_estimate(const std::vector<ChainRecord>& records) {
  if (records.empty()) throw std::domain_error("telescoping_estimate: no chains");
  double total = 0.0;
  for (std::size_t l = 0; l < records.size(); ++l) {
    const ChainRecord& r = records[l];
    const long n_post = r.steps() - r.burn_in;
    if (n_post < 1) throw std::domain_error("telescoping_estimate: burn-in exhausts the chain");
    if (l > 0 && r.qoi_coarse.size() != r.qoi.size())
      throw std::domain_error("telescoping_estimate: missing coarse QoI pairing");
    double sum = 0.0;
    for (long n = r.burn_in; n < r.steps(); ++n)
      sum += l == 0 ? r.qoi[n] : r.qoi[n] - r.qoi_coarse[n];
    total += sum / static_cast<double>(n_post);
  }
  return total;
}

}  // namespace mlmcmc

#endif
