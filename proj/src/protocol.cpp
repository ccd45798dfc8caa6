#include "freqattack/protocol.hpp"

#include "freqattack/errors.hpp"
#include "freqattack/victim.hpp"

#include <bit>
#include <cerrno>
#include <cstring>
#include <string>

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

static_assert(std::endian::native == std::endian::little, "AVSP payloads are copied as native doubles");

namespace freqattack::avsp {
namespace {

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(std::byte(v & 0xff));
  out.push_back(std::byte(v >> 8));
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::byte((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::byte* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::to_integer<std::uint8_t>(p[i])) << (8 * i);
  return v;
}

std::size_t payload_values(const Frame& f) {
  return static_cast<std::size_t>(f.n_views) * f.height * f.width * ImageSet::kChannels;
}

}  // namespace

Frame Frame::render_request(std::uint64_t id, const ImageSet& images) {
  Frame f;
  f.id = id;
  f.op = "render";
  f.n_views = images.views();
  f.height = images.height();
  f.width = images.width();
  f.payload.assign(images.data().data(), images.data().data() + images.size());
  return f;
}

Frame Frame::capabilities_request(std::uint64_t id) {
  Frame f;
  f.id = id;
  f.op = "capabilities";
  return f;
}

Frame Frame::error(std::uint64_t id, const std::string& message) {
  Frame f;
  f.id = id;
  f.op = "error";
  f.extra = {{"message", message}};
  return f;
}

ImageSet Frame::images() const {
  if (n_views < 1 || height < 1 || width < 1) {
    throw RemoteError("frame shape " + std::to_string(n_views) + "x" + std::to_string(height) + "x" +
                      std::to_string(width) + " is not a valid image set");
  }
  if (payload.size() != payload_values(*this)) throw RemoteError("payload length mismatch");
  ImageSet out(n_views, height, width);
  out.data() = Eigen::Map<const Eigen::ArrayXd>(payload.data(), static_cast<Eigen::Index>(payload.size()));
  return out;
}

std::vector<std::byte> encode(const Frame& frame) {
  const nlohmann::json header = {{"id", frame.id},         {"op", frame.op},       {"n_views", frame.n_views},
                                 {"height", frame.height}, {"width", frame.width}, {"dtype", "f64"},
                                 {"extra", frame.extra}};
  const std::string text = header.dump();
  std::vector<std::byte> out;
  out.reserve(10 + text.size() + frame.payload.size() * sizeof(double));
  for (char c : kMagic) out.push_back(std::byte(c));
  put_u16(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  for (char c : text) out.push_back(std::byte(c));
  if (frame.op == "render") {
    const auto* bytes = reinterpret_cast<const std::byte*>(frame.payload.data());
    out.insert(out.end(), bytes, bytes + frame.payload.size() * sizeof(double));
  }
  return out;
}

Frame read_frame(ByteStream& stream) {
  std::byte prefix[10];
  stream.read_exact(prefix);
  if (std::memcmp(prefix, kMagic, 4) != 0) throw RemoteError("bad frame magic");
  const std::uint16_t version =
      std::uint16_t(std::to_integer<std::uint8_t>(prefix[4]) | (std::to_integer<std::uint8_t>(prefix[5]) << 8));
  if (version != kVersion) throw RemoteError("unsupported protocol version " + std::to_string(version));
  const std::uint32_t header_len = get_u32(prefix + 6);
  if (header_len > kMaxHeaderBytes) throw RemoteError("frame header too large");

  std::string text(header_len, '\0');
  stream.read_exact(std::as_writable_bytes(std::span(text.data(), text.size())));

  Frame f;
  try {
    const nlohmann::json header = nlohmann::json::parse(text);
    f.id = header.at("id").get<std::uint64_t>();
    f.op = header.at("op").get<std::string>();
    f.n_views = header.value("n_views", 0);
    f.height = header.value("height", 0);
    f.width = header.value("width", 0);
    if (header.contains("dtype") && header.at("dtype") != "f64") throw RemoteError("unsupported dtype");
    if (header.contains("extra")) f.extra = header.at("extra");
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError(std::string("malformed frame header: ") + e.what());
  }

  if (f.op == "render") {
    if (f.n_views < 0 || f.height < 0 || f.width < 0) throw RemoteError("negative frame shape");
    f.payload.resize(payload_values(f));
    stream.read_exact(std::as_writable_bytes(std::span(f.payload)));
  } else if (f.op != "capabilities" && f.op != "error") {
    throw RemoteError("unknown frame op '" + f.op + "'");
  }
  return f;
}

void write_frame(ByteStream& stream, const Frame& frame) { stream.write_all(encode(frame)); }

void BufferStream::read_exact(std::span<std::byte> out) {
  if (input_.size() - cursor_ < out.size()) throw RemoteError("unexpected end of stream");
  std::memcpy(out.data(), input_.data() + cursor_, out.size());
  cursor_ += out.size();
}

void BufferStream::write_all(std::span<const std::byte> bytes) {
  output_.insert(output_.end(), bytes.begin(), bytes.end());
}

FdStream::FdStream(int read_fd, int write_fd, int timeout_ms)
    : read_fd_(read_fd), write_fd_(write_fd), timeout_ms_(timeout_ms) {}

FdStream::~FdStream() {
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
}

void FdStream::read_exact(std::span<std::byte> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    pollfd pfd{read_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, timeout_ms_ > 0 ? timeout_ms_ : -1);
    if (ready == 0) throw TimeoutError("timed out waiting for the remote victim");
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw RemoteError(std::string("poll failed: ") + std::strerror(errno));
    }
    const ssize_t n = ::read(read_fd_, out.data() + done, out.size() - done);
    if (n == 0) throw RemoteError("connection closed by peer");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw RemoteError(std::string("read failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

void FdStream::write_all(std::span<const std::byte> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    // send() on sockets so a vanished peer is an EPIPE error, not SIGPIPE.
    ssize_t n = ::send(write_fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) n = ::write(write_fd_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw RemoteError(std::string("write failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::unique_ptr<ByteStream> connect_tcp(const std::string& host, int port, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    throw RemoteError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* a = found; a != nullptr; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw RemoteError("cannot connect to " + host + ":" + service);
  return std::make_unique<FdStream>(fd, fd, timeout_ms);
}

void serve(ByteStream& stream, const Victim& victim) {
  for (;;) {
    Frame request;
    try {
      request = read_frame(stream);
    } catch (const RemoteError& e) {
      const std::string what = e.what();
      if (what == "connection closed by peer" || what == "unexpected end of stream") return;
      write_frame(stream, Frame::error(0, what));
      return;
    }

    if (request.op == "capabilities") {
      const VictimCapabilities caps = victim.capabilities();
      Frame reply = Frame::capabilities_request(request.id);
      reply.extra = {{"name", caps.name},
                     {"differentiable", caps.differentiable},
                     {"expected_views", caps.expected_views ? nlohmann::json(*caps.expected_views) : nlohmann::json()}};
      write_frame(stream, reply);
    } else if (request.op == "render") {
      try {
        write_frame(stream, Frame::render_request(request.id, victim.render(request.images())));
      } catch (const Error& e) {
        write_frame(stream, Frame::error(request.id, e.what()));
      }
    } else {
      write_frame(stream, Frame::error(request.id, "unexpected op '" + request.op + "'"));
      return;
    }
  }
}

}  // namespace freqattack::avsp
