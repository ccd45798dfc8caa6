#pragma once

#include "freqattack/attack.hpp"
#include "freqattack/objective.hpp"

namespace freqattack {

struct PgdConfig {
  double epsilon = 8.0 / 255.0;
  double eta = 2.0 / 255.0;
  int iters = 50;
  LossConfig loss;
  bool keep_best = true;

  /// Throws ConfigError unless 0 < eta <= epsilon and iters >= 1.
  void validate() const;
};

/// Gradient of adv_loss(x, render(x)) with respect to x, through both loss
/// arguments and the victim's VJP. Also returns the loss at x.
struct TotalGradient {
  double loss = 0.0;
  ImageSet gradient;
};
TotalGradient total_loss_gradient(const Victim& victim, const ImageSet& x, const LossConfig& loss,
                                  QueryLedger& ledger);

/// White-box sign-gradient ascent with L-infinity projection. Iterates
/// x <- project(x + eta sign(g)); the loss is evaluated at the clean input and
/// after every step (iters + 1 renders). Returns the best-loss iterate when
/// keep_best, else the last one. Throws Unsupported for non-differentiable
/// victims.
AttackResult pgd_attack(const Victim& victim, const ImageSet& clean, const PgdConfig& cfg);

}  // namespace freqattack
