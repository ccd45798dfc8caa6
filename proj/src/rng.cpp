#include "freqattack/rng.hpp"

#include <random>

namespace freqattack {

void fill_standard_normal(Substream& stream, Eigen::Ref<Eigen::VectorXd> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal(stream);
}

Eigen::VectorXd keyed_normal(std::uint64_t seed, std::uint64_t key0, std::uint64_t key1, Eigen::Index size,
                             Eigen::Index chunk) {
  Eigen::VectorXd out(size);
  std::uint64_t piece = 0;
  for (Eigen::Index offset = 0; offset < size; offset += chunk, ++piece) {
    Substream stream(seed, {key0, key1, piece});
    fill_standard_normal(stream, out.segment(offset, std::min(chunk, size - offset)));
  }
  return out;
}

}  // namespace freqattack
