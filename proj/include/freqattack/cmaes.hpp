#pragma once

#include "freqattack/attack.hpp"
#include "freqattack/objective.hpp"
#include "freqattack/search_space.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace freqattack {

struct CmaConfig {
  int population = 40;  // B, even
  double sigma_init = 1.0;
  int block = 8;
  int low_freq = 3;
  double epsilon = 8.0 / 255.0;
  int iters = 10000;
  LossConfig loss;
  std::uint64_t seed = 0;
  /// Return the best evaluated candidate instead of the final mean.
  bool keep_best = true;
  bool use_dct = true;

  /// Throws ConfigError unless population >= 4 is even and sigma_init > 0.
  void validate() const;
  SearchSpace search_space(int views, int height, int width) const;
};

/// Block-diagonal CMA-ES state. Vectors are flat over all blocks
/// (block j occupies [j*block_dim, (j+1)*block_dim)); every update is
/// per coordinate except the global path norm and step size.
struct CmaState {
  Eigen::Index blocks = 0;
  Eigen::Index block_dim = 0;

  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // diagonal covariance
  Eigen::VectorXd path_c;
  Eigen::VectorXd path_s;
  double sigma = 1.0;
  int generation = 0;  // completed updates

  int mu = 0;
  Eigen::VectorXd weights;
  double mu_eff = 0.0;
  double c_c = 0.0;
  double c_s = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double d_sigma = 0.0;
  double chi_n = 0.0;

  Eigen::Index dimension() const { return blocks * block_dim; }
};

inline constexpr double kVarianceFloor = 1e-20;

/// Fresh state: zero mean and paths, unit variance, sigma = sigma_init and
/// the derived strategy constants for D_total = blocks * block_dim.
CmaState cma_init(Eigen::Index blocks, Eigen::Index block_dim, const CmaConfig& cfg);
/// block_dim = 3 s^2.
CmaState cma_init(Eigen::Index blocks, const CmaConfig& cfg);

struct CmaSample {
  std::vector<Eigen::VectorXd> candidates;  // a + sigma sqrt(V) z
  std::vector<Eigen::VectorXd> z;
};

/// B candidates; candidate b, block j uses substream (seed, generation, b, j).
CmaSample cma_sample(const CmaState& state, int population, std::uint64_t seed);

struct Ranking {
  std::vector<int> order;  // candidate indices by descending loss
  std::vector<double> losses;  // indexed by candidate
};

/// Sorts by descending loss, ties by ascending index.
Ranking rank_descending(std::vector<double> losses);

/// The image a candidate is scored on: clean + synth(delta), projected into
/// the epsilon box and [0,1].
ImageSet candidate_image(const ImageSet& clean, const SearchSpace& space, const Eigen::VectorXd& delta,
                         double epsilon);

/// Scores every candidate with adv_loss(x, render(x)); exactly B queries.
Ranking cma_evaluate_and_rank(const Victim& victim, const ImageSet& clean, const SearchSpace& space,
                              std::span<const Eigen::VectorXd> candidates, const CmaConfig& cfg,
                              QueryLedger& ledger);

/// One recombination/adaptation step from the top-mu candidates in rank
/// order. Throws RankCountError unless exactly mu are given.
CmaState cma_update(const CmaState& state, std::span<const Eigen::VectorXd> selected);

/// Maximises `fitness` (called once per generation with all candidates) for
/// `generations` generations. Returns the final state.
using BatchFitness = std::function<std::vector<double>(std::span<const Eigen::VectorXd>)>;
CmaState cma_maximize(CmaState state, const BatchFitness& fitness, int population, int generations,
                      std::uint64_t seed);

/// Query count is iters * B.
AttackResult cmaes_attack(const Victim& victim, const ImageSet& clean, const CmaConfig& cfg);

}  // namespace freqattack
