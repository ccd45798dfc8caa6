#include "freqattack/victim.hpp"

#include "freqattack/errors.hpp"

#include <string>

namespace freqattack {

ImageSet Victim::render(const ImageSet& inputs) const {
  const VictimCapabilities caps = capabilities();
  if (caps.expected_views && *caps.expected_views != inputs.views()) {
    throw ViewCountMismatch(caps.name + " expects " + std::to_string(*caps.expected_views) + " views, got " +
                            std::to_string(inputs.views()));
  }
  if (!inputs.in_unit_range()) throw ConfigError(caps.name + ": input pixels outside [0,1]");
  return do_render(inputs);
}

ImageSet Victim::render_grad(const ImageSet& inputs, const ImageSet& upstream) const {
  const VictimCapabilities caps = capabilities();
  if (!caps.differentiable) throw Unsupported(caps.name + " is not differentiable");
  require_same_shape(inputs, upstream, "render_grad");
  if (caps.expected_views && *caps.expected_views != inputs.views()) {
    throw ViewCountMismatch(caps.name + " expects " + std::to_string(*caps.expected_views) + " views, got " +
                            std::to_string(inputs.views()));
  }
  return do_render_grad(inputs, upstream);
}

ImageSet Victim::do_render_grad(const ImageSet&, const ImageSet&) const {
  throw Unsupported(capabilities().name + " is not differentiable");
}

void QueryLedger::record_loss(double loss) {
  std::lock_guard lock(mutex_);
  trace_.push_back({count_.load(), loss});
}

std::vector<TracePoint> QueryLedger::trace() const {
  std::lock_guard lock(mutex_);
  return trace_;
}

ImageSet render(const Victim& victim, const ImageSet& inputs, QueryLedger& ledger) {
  ImageSet out = victim.render(inputs);
  ledger.add_query();
  return out;
}

}  // namespace freqattack
