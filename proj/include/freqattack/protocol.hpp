#pragma once

// AVSP v1 framing: "AVSP" | u16 version | u32 header_len | JSON header |
// payload of n_views*height*width*3 little-endian f64 (op "render" only).

#include "freqattack/image.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace freqattack {

class Victim;

namespace avsp {

inline constexpr char kMagic[4] = {'A', 'V', 'S', 'P'};
inline constexpr std::uint16_t kVersion = 1;
// Refuse absurd headers before allocating.
inline constexpr std::uint32_t kMaxHeaderBytes = 1u << 20;

struct Frame {
  std::uint64_t id = 0;
  std::string op;  // "render", "capabilities" or "error"
  int n_views = 0;
  int height = 0;
  int width = 0;
  nlohmann::json extra = nlohmann::json::object();
  std::vector<double> payload;

  static Frame render_request(std::uint64_t id, const ImageSet& images);
  static Frame capabilities_request(std::uint64_t id);
  static Frame error(std::uint64_t id, const std::string& message);

  /// Payload as an ImageSet; throws RemoteError on a size mismatch.
  ImageSet images() const;
};

/// Serialises a frame to its exact byte sequence.
std::vector<std::byte> encode(const Frame& frame);

/// Blocking byte transport.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  /// Fills `out` completely or throws RemoteError / TimeoutError.
  virtual void read_exact(std::span<std::byte> out) = 0;
  virtual void write_all(std::span<const std::byte> bytes) = 0;
};

/// Reads one frame; throws RemoteError on bad magic, version or framing.
Frame read_frame(ByteStream& stream);
void write_frame(ByteStream& stream, const Frame& frame);

/// In-memory stream over a byte buffer, for decoding recorded frames.
class BufferStream final : public ByteStream {
 public:
  explicit BufferStream(std::vector<std::byte> input = {}) : input_(std::move(input)) {}
  void read_exact(std::span<std::byte> out) override;
  void write_all(std::span<const std::byte> bytes) override;
  const std::vector<std::byte>& written() const { return output_; }

 private:
  std::vector<std::byte> input_;
  std::size_t cursor_ = 0;
  std::vector<std::byte> output_;
};

/// Stream over POSIX file descriptors (a socket, or a pipe pair). Owns and
/// closes them. timeout_ms <= 0 waits forever.
class FdStream final : public ByteStream {
 public:
  FdStream(int read_fd, int write_fd, int timeout_ms);
  ~FdStream() override;
  FdStream(const FdStream&) = delete;
  FdStream& operator=(const FdStream&) = delete;

  void read_exact(std::span<std::byte> out) override;
  void write_all(std::span<const std::byte> bytes) override;

 private:
  int read_fd_;
  int write_fd_;
  int timeout_ms_;
};

/// Opens a TCP connection to host:port.
std::unique_ptr<ByteStream> connect_tcp(const std::string& host, int port, int timeout_ms);

/// Answers frames from `stream` with `victim` until the peer closes.
/// Malformed frames get an error reply, then the loop ends.
void serve(ByteStream& stream, const Victim& victim);

}  // namespace avsp
}  // namespace freqattack
