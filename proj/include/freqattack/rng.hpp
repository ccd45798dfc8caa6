#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace freqattack {

/// splitmix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Random bit generator whose state is derived from a seed and a tuple of
/// counters, e.g. (iteration, sample, block). Draws for one key never depend
/// on how many draws other keys consumed.
class Substream {
 public:
  using result_type = std::uint64_t;

  Substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) : state_(mix64(seed)) {
    for (std::uint64_t k : keys) state_ = mix64(state_ ^ mix64(k + 0x632be59bd9b4e019ULL));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Standard normal draws into `out`.
void fill_standard_normal(Substream& stream, Eigen::Ref<Eigen::VectorXd> out);

/// A standard normal vector of length `size` made of `chunk`-sized pieces,
/// piece k drawn from Substream(seed, {keys..., k}).
Eigen::VectorXd keyed_normal(std::uint64_t seed, std::uint64_t key0, std::uint64_t key1, Eigen::Index size,
                             Eigen::Index chunk);

}  // namespace freqattack
