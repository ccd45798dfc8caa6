#include "freqattack/cmaes.hpp"

#include "freqattack/errors.hpp"
#include "freqattack/rng.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace freqattack {

void CmaConfig::validate() const {
  if (population < 4 || population % 2 != 0) throw ConfigError("CMA-ES population must be even and at least 4");
  if (!(sigma_init > 0.0)) throw ConfigError("CMA-ES initial step size must be positive");
  if (low_freq < 1 || low_freq > block) throw ConfigError("low-frequency side must lie in [1, block size]");
  if (epsilon < 0.0) throw ConfigError("epsilon must be non-negative");
  if (iters < 1) throw ConfigError("CMA-ES needs at least one generation");
  if (loss.lambda < 0.0) throw ConfigError("lambda must be non-negative");
}

SearchSpace CmaConfig::search_space(int views, int height, int width) const {
  return use_dct ? SearchSpace::low_frequency(views, height, width, block, low_freq)
                 : SearchSpace::pixel(views, height, width);
}

CmaState cma_init(Eigen::Index blocks, Eigen::Index block_dim, const CmaConfig& cfg) {
  cfg.validate();
  if (blocks < 1 || block_dim < 1) throw ConfigError("CMA-ES needs at least one block of positive dimension");

  CmaState st;
  st.blocks = blocks;
  st.block_dim = block_dim;
  const Eigen::Index dim = st.dimension();
  st.mean = Eigen::VectorXd::Zero(dim);
  st.variance = Eigen::VectorXd::Ones(dim);
  st.path_c = Eigen::VectorXd::Zero(dim);
  st.path_s = Eigen::VectorXd::Zero(dim);
  st.sigma = cfg.sigma_init;

  st.mu = cfg.population / 2;
  st.weights.resize(st.mu);
  for (int b = 0; b < st.mu; ++b) st.weights[b] = std::log(st.mu + 0.5) - std::log(b + 1.0);
  st.weights /= st.weights.sum();
  st.mu_eff = 1.0 / st.weights.squaredNorm();

  const double d = static_cast<double>(dim);
  const double me = st.mu_eff;
  st.c_c = (4.0 + me / d) / (d + 4.0 + 2.0 * me / d);
  st.c_s = (me + 2.0) / (d + me + 5.0);
  st.c_1 = 2.0 / ((d + 1.3) * (d + 1.3) + me);
  st.c_mu = std::min(1.0 - st.c_1, 2.0 * (me - 2.0 + 1.0 / me) / ((d + 2.0) * (d + 2.0) + me));
  st.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((me - 1.0) / (d + 1.0)) - 1.0) + st.c_s;
  st.chi_n = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
  return st;
}

CmaState cma_init(Eigen::Index blocks, const CmaConfig& cfg) {
  return cma_init(blocks, Eigen::Index{ImageSet::kChannels} * cfg.low_freq * cfg.low_freq, cfg);
}

CmaSample cma_sample(const CmaState& state, int population, std::uint64_t seed) {
  CmaSample out;
  out.candidates.reserve(static_cast<std::size_t>(population));
  out.z.reserve(static_cast<std::size_t>(population));
  const Eigen::VectorXd scale = state.sigma * state.variance.cwiseSqrt();
  for (int b = 0; b < population; ++b) {
    Eigen::VectorXd z = keyed_normal(seed, static_cast<std::uint64_t>(state.generation), static_cast<std::uint64_t>(b),
                                     state.dimension(), state.block_dim);
    out.candidates.push_back(state.mean + scale.cwiseProduct(z));
    out.z.push_back(std::move(z));
  }
  return out;
}

Ranking rank_descending(std::vector<double> losses) {
  Ranking r;
  r.order.resize(losses.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](int a, int b) { return losses[a] > losses[b]; });
  r.losses = std::move(losses);
  return r;
}

ImageSet candidate_image(const ImageSet& clean, const SearchSpace& space, const Eigen::VectorXd& delta,
                         double epsilon) {
  ImageSet perturbed = space.synthesize(delta);
  perturbed.data() += clean.data();
  return linf_project(perturbed, clean, epsilon);
}

Ranking cma_evaluate_and_rank(const Victim& victim, const ImageSet& clean, const SearchSpace& space,
                              std::span<const Eigen::VectorXd> candidates, const CmaConfig& cfg,
                              QueryLedger& ledger) {
  std::vector<double> losses(candidates.size());
  detail::parallel_for(candidates.size(), victim.capabilities().thread_safe, [&](std::size_t b) {
    const ImageSet x = candidate_image(clean, space, candidates[b], cfg.epsilon);
    losses[b] = adv_loss(x, render(victim, x, ledger), cfg.loss);
  });
  return rank_descending(std::move(losses));
}

CmaState cma_update(const CmaState& state, std::span<const Eigen::VectorXd> selected) {
  if (static_cast<int>(selected.size()) != state.mu) {
    throw RankCountError("CMA-ES update needs exactly " + std::to_string(state.mu) + " selected candidates, got " +
                         std::to_string(selected.size()));
  }
  CmaState st = state;
  const Eigen::Index dim = st.dimension();
  const Eigen::VectorXd old_mean = st.mean;
  const Eigen::VectorXd old_variance = st.variance;
  const double old_sigma = st.sigma;
  const Eigen::VectorXd inv_sqrt_v = old_variance.cwiseSqrt().cwiseInverse();

  st.mean.setZero();
  for (int b = 0; b < st.mu; ++b) {
    if (selected[b].size() != dim) throw RankCountError("selected candidate has the wrong dimension");
    st.mean += st.weights[b] * selected[b];
  }
  const Eigen::VectorXd y = (st.mean - old_mean) / old_sigma;

  st.path_s = (1.0 - st.c_s) * st.path_s + std::sqrt(st.c_s * (2.0 - st.c_s) * st.mu_eff) * inv_sqrt_v.cwiseProduct(y);

  const double ps_norm = st.path_s.norm();
  const double dim_d = static_cast<double>(dim);
  const double correction = std::sqrt(1.0 - std::pow(1.0 - st.c_s, 2.0 * (st.generation + 1)));
  const double h_sigma = ps_norm / correction < (1.4 + 2.0 / (dim_d + 1.0)) * st.chi_n ? 1.0 : 0.0;

  st.path_c = (1.0 - st.c_c) * st.path_c + h_sigma * std::sqrt(st.c_c * (2.0 - st.c_c) * st.mu_eff) * y;

  st.sigma = old_sigma * std::exp((st.c_s / st.d_sigma) * (ps_norm / st.chi_n - 1.0));

  // Rank-mu term whitened by the pre-update variance and scaled by the
  // updated step size, in the order the update lines are written.
  Eigen::VectorXd rank_mu = Eigen::VectorXd::Zero(dim);
  for (int b = 0; b < st.mu; ++b) {
    const Eigen::VectorXd step = inv_sqrt_v.cwiseProduct(selected[b] - old_mean) / st.sigma;
    rank_mu += st.weights[b] * step.cwiseAbs2();
  }
  st.variance = (1.0 - st.c_1 - st.c_mu) * old_variance +
                st.c_1 * (st.path_c.cwiseAbs2() + (1.0 - h_sigma) * st.c_c * (2.0 - st.c_c) * old_variance) +
                st.c_mu * rank_mu;
  st.variance = st.variance.cwiseMax(kVarianceFloor);

  ++st.generation;
  return st;
}

namespace {

std::vector<Eigen::VectorXd> top_mu(const CmaSample& sample, const Ranking& ranking, int mu) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(mu));
  for (int i = 0; i < mu; ++i) out.push_back(sample.candidates[ranking.order[i]]);
  return out;
}

}  // namespace

CmaState cma_maximize(CmaState state, const BatchFitness& fitness, int population, int generations,
                      std::uint64_t seed) {
  for (int t = 0; t < generations; ++t) {
    const CmaSample sample = cma_sample(state, population, seed);
    const Ranking ranking = rank_descending(fitness(sample.candidates));
    state = cma_update(state, top_mu(sample, ranking, state.mu));
  }
  return state;
}

AttackResult cmaes_attack(const Victim& victim, const ImageSet& clean, const CmaConfig& cfg) {
  cfg.validate();
  const SearchSpace space = cfg.search_space(clean.views(), clean.height(), clean.width());
  CmaState state = cma_init(space.spatial_blocks(), space.block_dimension(), cfg);

  QueryLedger ledger;
  Eigen::VectorXd best_delta = state.mean;
  double best_loss = -std::numeric_limits<double>::infinity();

  for (int t = 0; t < cfg.iters; ++t) {
    const CmaSample sample = cma_sample(state, cfg.population, cfg.seed);
    const Ranking ranking = cma_evaluate_and_rank(victim, clean, space, sample.candidates, cfg, ledger);
    const int leader = ranking.order.front();
    ledger.record_loss(ranking.losses[leader]);
    if (ranking.losses[leader] > best_loss) {
      best_loss = ranking.losses[leader];
      best_delta = sample.candidates[leader];
    }
    state = cma_update(state, top_mu(sample, ranking, state.mu));
  }

  AttackResult result;
  result.queries = ledger.query_count();
  result.trace = ledger.trace();
  if (cfg.keep_best) {
    result.adversarial = candidate_image(clean, space, best_delta, cfg.epsilon);
    result.loss = best_loss;
  } else {
    result.adversarial = candidate_image(clean, space, state.mean, cfg.epsilon);
  }
  return result;
}

}  // namespace freqattack
