#pragma once

#include "freqattack/attack.hpp"
#include "freqattack/objective.hpp"
#include "freqattack/search_space.hpp"

#include <cstdint>
#include <span>

namespace freqattack {

struct NesConfig {
  int samples = 40;  // M antithetic pairs
  double sigma = 0.1;
  int block = 8;  // n
  int low_freq = 3;  // s
  double epsilon = 8.0 / 255.0;
  double eta = 2.0 / 255.0;
  int iters = 10000;
  LossConfig loss;
  std::uint64_t seed = 0;
  /// Evaluate each projected iterate (one extra query) and return the best.
  bool keep_best = true;
  /// false: search raw pixels instead of low-frequency DCT coefficients.
  bool use_dct = true;

  void validate() const;
  SearchSpace search_space(int views, int height, int width) const;
};

/// The M noise vectors of one iteration, u_m drawn per block from the
/// substream (seed, iteration, m, block).
std::vector<Eigen::VectorXd> nes_noise(const SearchSpace& space, const NesConfig& cfg, std::uint64_t iteration);

/// Antithetic estimate (1 / 2 M sigma) sum_m (L+ - L-) synth(u_m), with probes
/// built around `current` in `space` and clamped to [0,1] before querying.
/// Makes exactly 2 M queries; accumulation follows sample order.
ImageSet nes_gradient_from_noise(const Victim& victim, const ImageSet& current, const SearchSpace& space,
                                 double sigma, const LossConfig& loss, std::span<const Eigen::VectorXd> noise,
                                 QueryLedger& ledger);

/// nes_gradient_from_noise with nes_noise(space, cfg, iteration).
ImageSet nes_gradient(const Victim& victim, const ImageSet& current, const SearchSpace& space,
                      const NesConfig& cfg, std::uint64_t iteration, QueryLedger& ledger);

/// Black-box sign-PGD driven by NES estimates. Query count is
/// iters * (2M + 1) with keep_best, iters * 2M without.
AttackResult nes_pgd_attack(const Victim& victim, const ImageSet& clean, const NesConfig& cfg);

}  // namespace freqattack
