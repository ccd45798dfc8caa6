#include "freqattack/remote.hpp"

#include "freqattack/errors.hpp"

#include <csignal>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace freqattack {

RemoteVictim::RemoteVictim(std::unique_ptr<avsp::ByteStream> stream) : stream_(std::move(stream)) {
  const avsp::Frame reply = exchange(avsp::Frame::capabilities_request(next_id_++));
  if (reply.op != "capabilities") throw RemoteError("expected a capabilities reply, got '" + reply.op + "'");
  try {
    caps_.name = reply.extra.at("name").get<std::string>();
    caps_.differentiable = false;  // gradients never cross the wire
    caps_.thread_safe = false;
    const auto& views = reply.extra.at("expected_views");
    if (views.is_number_integer()) caps_.expected_views = views.get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError(std::string("malformed capabilities reply: ") + e.what());
  }
}

RemoteVictim::~RemoteVictim() {
  stream_.reset();
  if (child_ > 0) {
    ::kill(child_, SIGTERM);
    ::waitpid(child_, nullptr, 0);
  }
}

std::unique_ptr<RemoteVictim> RemoteVictim::connect(const std::string& address, int timeout_ms) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw ConfigError("remote address must be host:port, got '" + address + "'");
  }
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad port in remote address '" + address + "'");
  }
  return std::make_unique<RemoteVictim>(avsp::connect_tcp(address.substr(0, colon), port, timeout_ms));
}

std::unique_ptr<RemoteVictim> RemoteVictim::spawn(const std::string& command, int timeout_ms) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw RemoteError("pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw RemoteError("pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw RemoteError("fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  auto stream = std::make_unique<avsp::FdStream>(from_child[0], to_child[1], timeout_ms);
  try {
    auto victim = std::make_unique<RemoteVictim>(std::move(stream));
    victim->child_ = pid;
    return victim;
  } catch (...) {
    ::kill(pid, SIGTERM);
    ::waitpid(pid, nullptr, 0);
    throw;
  }
}

avsp::Frame RemoteVictim::exchange(const avsp::Frame& request) const {
  std::lock_guard lock(mutex_);
  avsp::write_frame(*stream_, request);
  avsp::Frame reply = avsp::read_frame(*stream_);
  if (reply.id != request.id) {
    throw RemoteError("response id " + std::to_string(reply.id) + " does not match request id " +
                      std::to_string(request.id));
  }
  if (reply.op == "error") {
    throw RemoteError("remote victim error: " + reply.extra.value("message", std::string("(no message)")));
  }
  return reply;
}

ImageSet RemoteVictim::do_render(const ImageSet& inputs) const {
  std::uint64_t id = 0;
  {
    std::lock_guard lock(mutex_);
    id = next_id_++;
  }
  const avsp::Frame reply = exchange(avsp::Frame::render_request(id, inputs));
  if (reply.op != "render") throw RemoteError("expected a render reply, got '" + reply.op + "'");
  if (reply.n_views != inputs.views() || reply.height != inputs.height() || reply.width != inputs.width()) {
    throw RemoteError("remote returned shape " + std::to_string(reply.n_views) + "x" + std::to_string(reply.height) +
                      "x" + std::to_string(reply.width) + ", expected " + std::to_string(inputs.views()) + "x" +
                      std::to_string(inputs.height()) + "x" + std::to_string(inputs.width()));
  }
  return reply.images();
}

}  // namespace freqattack
