#pragma once

#include "freqattack/image.hpp"
#include "freqattack/victim.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace freqattack {

/// Outcome of one attack run.
struct AttackResult {
  ImageSet adversarial;
  /// Loss of `adversarial` as evaluated during the run; NaN when the run
  /// never evaluated it.
  double loss = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t queries = 0;
  /// One point per iteration/generation, in query order.
  std::vector<TracePoint> trace;
};

/// +1, -1 or 0.
inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace freqattack
