#include "freqattack/nes.hpp"

#include "freqattack/errors.hpp"
#include "freqattack/rng.hpp"
#include "parallel.hpp"

#include <limits>

namespace freqattack {

void NesConfig::validate() const {
  if (samples < 1) throw ConfigError("NES needs at least one sample");
  if (!(sigma > 0.0)) throw ConfigError("NES sigma must be positive");
  if (low_freq < 1 || low_freq > block) throw ConfigError("low-frequency side must lie in [1, block size]");
  if (epsilon < 0.0) throw ConfigError("epsilon must be non-negative");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (iters < 1) throw ConfigError("NES needs at least one iteration");
  if (loss.lambda < 0.0) throw ConfigError("lambda must be non-negative");
}

SearchSpace NesConfig::search_space(int views, int height, int width) const {
  return use_dct ? SearchSpace::low_frequency(views, height, width, block, low_freq)
                 : SearchSpace::pixel(views, height, width);
}

std::vector<Eigen::VectorXd> nes_noise(const SearchSpace& space, const NesConfig& cfg, std::uint64_t iteration) {
  // One substream per per-channel block (DCT) or per pixel.
  const Eigen::Index chunk =
      space.uses_dct() ? Eigen::Index{space.low_freq()} * space.low_freq() : Eigen::Index{ImageSet::kChannels};
  std::vector<Eigen::VectorXd> noise;
  noise.reserve(static_cast<std::size_t>(cfg.samples));
  for (int m = 0; m < cfg.samples; ++m) {
    noise.push_back(keyed_normal(cfg.seed, iteration, static_cast<std::uint64_t>(m), space.dimension(), chunk));
  }
  return noise;
}

ImageSet nes_gradient_from_noise(const Victim& victim, const ImageSet& current, const SearchSpace& space,
                                 double sigma, const LossConfig& loss, std::span<const Eigen::VectorXd> noise,
                                 QueryLedger& ledger) {
  if (noise.empty()) throw ConfigError("NES needs at least one noise sample");
  const SearchSpace::Anchor anchor = space.anchor(current);
  const bool concurrent = victim.capabilities().thread_safe;

  // Slot 2m holds L+ of sample m, slot 2m+1 holds L-.
  std::vector<double> losses(2 * noise.size());
  detail::parallel_for(losses.size(), concurrent, [&](std::size_t i) {
    const double direction = i % 2 == 0 ? sigma : -sigma;
    const ImageSet probe = clamp_pixels(space.perturb(anchor, direction * noise[i / 2]));
    losses[i] = adv_loss(probe, render(victim, probe, ledger), loss);
  });

  Eigen::VectorXd accumulated = Eigen::VectorXd::Zero(space.dimension());
  for (std::size_t m = 0; m < noise.size(); ++m) accumulated += (losses[2 * m] - losses[2 * m + 1]) * noise[m];

  ImageSet gradient = space.synthesize(accumulated);
  gradient.data() /= 2.0 * static_cast<double>(noise.size()) * sigma;
  return gradient;
}

ImageSet nes_gradient(const Victim& victim, const ImageSet& current, const SearchSpace& space,
                      const NesConfig& cfg, std::uint64_t iteration, QueryLedger& ledger) {
  cfg.validate();
  const std::vector<Eigen::VectorXd> noise = nes_noise(space, cfg, iteration);
  return nes_gradient_from_noise(victim, current, space, cfg.sigma, cfg.loss, noise, ledger);
}

AttackResult nes_pgd_attack(const Victim& victim, const ImageSet& clean, const NesConfig& cfg) {
  cfg.validate();
  const SearchSpace space = cfg.search_space(clean.views(), clean.height(), clean.width());

  QueryLedger ledger;
  ImageSet current = clean;
  ImageSet best = clean;
  double best_loss = -std::numeric_limits<double>::infinity();

  for (int t = 0; t < cfg.iters; ++t) {
    const ImageSet gradient = nes_gradient(victim, current, space, cfg, static_cast<std::uint64_t>(t), ledger);
    ImageSet next = current;
    next.data() += cfg.eta * gradient.data().unaryExpr([](double g) { return sign(g); });
    current = linf_project(next, clean, cfg.epsilon);

    if (cfg.keep_best) {
      const double loss = adv_loss(current, render(victim, current, ledger), cfg.loss);
      ledger.record_loss(loss);
      if (loss > best_loss) {
        best_loss = loss;
        best = current;
      }
    }
  }

  AttackResult result;
  result.queries = ledger.query_count();
  result.trace = ledger.trace();
  if (cfg.keep_best) {
    result.adversarial = std::move(best);
    result.loss = best_loss;
  } else {
    result.adversarial = std::move(current);
  }
  return result;
}

}  // namespace freqattack
