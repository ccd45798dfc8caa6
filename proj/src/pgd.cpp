#include "freqattack/pgd.hpp"

#include "freqattack/errors.hpp"

#include <limits>

namespace freqattack {

void PgdConfig::validate() const {
  if (!(eta > 0.0) || !(eta <= epsilon)) throw ConfigError("PGD needs 0 < eta <= epsilon");
  if (iters < 1) throw ConfigError("PGD needs at least one iteration");
  if (loss.lambda < 0.0) throw ConfigError("lambda must be non-negative");
}

TotalGradient total_loss_gradient(const Victim& victim, const ImageSet& x, const LossConfig& loss,
                                  QueryLedger& ledger) {
  const ImageSet rendered = render(victim, x, ledger);
  LossGradient partial = adv_loss_grad(x, rendered, loss);
  ImageSet through_victim = victim.render_grad(x, partial.rendered);
  partial.reference.data() += through_victim.data();
  return {adv_loss(x, rendered, loss), std::move(partial.reference)};
}

AttackResult pgd_attack(const Victim& victim, const ImageSet& clean, const PgdConfig& cfg) {
  cfg.validate();
  const VictimCapabilities caps = victim.capabilities();
  if (!caps.differentiable) throw Unsupported("white-box PGD needs a differentiable victim, " + caps.name + " is not");

  QueryLedger ledger;
  ImageSet current = clean;
  ImageSet best = clean;
  double best_loss = -std::numeric_limits<double>::infinity();
  double current_loss = 0.0;

  for (int t = 0;; ++t) {
    const TotalGradient step = total_loss_gradient(victim, current, cfg.loss, ledger);
    current_loss = step.loss;
    ledger.record_loss(current_loss);
    if (current_loss > best_loss) {
      best_loss = current_loss;
      best = current;
    }
    if (t == cfg.iters) break;

    ImageSet next = current;
    next.data() += cfg.eta * step.gradient.data().unaryExpr([](double g) { return sign(g); });
    current = linf_project(next, clean, cfg.epsilon);
  }

  AttackResult result;
  result.queries = ledger.query_count();
  result.trace = ledger.trace();
  if (cfg.keep_best) {
    result.adversarial = std::move(best);
    result.loss = best_loss;
  } else {
    result.adversarial = std::move(current);
    result.loss = current_loss;
  }
  return result;
}

}  // namespace freqattack
