#pragma once

#include "freqattack/protocol.hpp"
#include "freqattack/victim.hpp"

#include <memory>
#include <mutex>
#include <string>
#include <sys/types.h>

namespace freqattack {

/// A victim behind the AVSP v1 protocol. Construction performs the
/// capabilities handshake. Requests on one connection are serialised and
/// every response must echo its request id.
class RemoteVictim final : public Victim {
 public:
  explicit RemoteVictim(std::unique_ptr<avsp::ByteStream> stream);
  ~RemoteVictim() override;

  /// "host:port" over TCP.
  static std::unique_ptr<RemoteVictim> connect(const std::string& address, int timeout_ms = 30000);
  /// Launches `command` through /bin/sh and speaks the protocol over its
  /// stdin/stdout.
  static std::unique_ptr<RemoteVictim> spawn(const std::string& command, int timeout_ms = 30000);

  VictimCapabilities capabilities() const override { return caps_; }

 protected:
  ImageSet do_render(const ImageSet& inputs) const override;

 private:
  avsp::Frame exchange(const avsp::Frame& request) const;

  mutable std::mutex mutex_;
  std::unique_ptr<avsp::ByteStream> stream_;
  mutable std::uint64_t next_id_ = 1;
  VictimCapabilities caps_;
  pid_t child_ = -1;
};

}  // namespace freqattack
