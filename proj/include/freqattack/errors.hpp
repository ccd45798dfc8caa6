#pragma once

#include <stdexcept>
#include <string>

namespace freqattack {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FREQATTACK_DEFINE_ERROR(Name)         \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

// Image height/width not divisible by the block size, s > n, misaligned grids.
FREQATTACK_DEFINE_ERROR(DimensionError);
FREQATTACK_DEFINE_ERROR(ShapeMismatch);
// Image smaller than the SSIM window.
FREQATTACK_DEFINE_ERROR(WindowError);
FREQATTACK_DEFINE_ERROR(ConfigError);
// Operation not offered by this victim or loss configuration.
FREQATTACK_DEFINE_ERROR(Unsupported);
FREQATTACK_DEFINE_ERROR(ViewCountMismatch);
FREQATTACK_DEFINE_ERROR(RemoteError);
FREQATTACK_DEFINE_ERROR(TimeoutError);
FREQATTACK_DEFINE_ERROR(RankCountError);
FREQATTACK_DEFINE_ERROR(IoError);

#undef FREQATTACK_DEFINE_ERROR

}  // namespace freqattack
