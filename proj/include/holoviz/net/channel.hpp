#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace holoviz::net {

struct NetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BindError : NetError {
  using NetError::NetError;
};
struct ConnectError : NetError {
  using NetError::NetError;
};

/// ws://host:port/path selects WebSocket framing; tcp://host:port selects
/// newline-delimited JSON over a raw socket. A bare host:port means ws.
struct Endpoint {
  enum class Scheme { WebSocket, Tcp };

  Scheme scheme = Scheme::WebSocket;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::string path = "/";

  static Endpoint parse(std::string_view url);
  std::string str() const;
};

/// Message-oriented text channel. All methods are thread-safe; handlers run
/// on the owning I/O thread.
class Channel {
 public:
  using MessageHandler = std::function<void(std::string&&)>;
  using CloseHandler = std::function<void()>;

  virtual ~Channel() = default;

  /// Begins reading. `on_close` fires once, after the last message.
  virtual void start(MessageHandler on_message, CloseHandler on_close) = 0;
  virtual void send(std::shared_ptr<const std::string> message) = 0;
  void send(std::string message) { send(std::make_shared<const std::string>(std::move(message))); }
  virtual void close() = 0;
  /// Outgoing messages not yet written to the socket.
  virtual std::size_t pending() const = 0;
  virtual bool is_open() const = 0;
  virtual std::string peer() const = 0;
};

/// A single background thread running an I/O event loop.
class IoThread {
 public:
  IoThread();
  ~IoThread();
  IoThread(const IoThread&) = delete;
  IoThread& operator=(const IoThread&) = delete;

  /// Stops the loop and joins. Pending handlers are dropped, not run.
  void stop();

  struct Impl;
  Impl& impl() { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

/// Opens a client channel. Throws ConnectError on refusal or timeout.
std::shared_ptr<Channel> dial(IoThread& io, const Endpoint& endpoint, std::chrono::milliseconds timeout);

struct HttpResponse {
  int status = 404;
  std::string content_type = "text/plain";
  std::string body = "not found";
};

/// Accepts WebSocket upgrades, newline-JSON raw connections (first byte
/// '{'), and plain HTTP GETs on one port.
class Server {
 public:
  using ChannelHandler = std::function<void(std::shared_ptr<Channel>)>;
  using HttpHandler = std::function<HttpResponse(const std::string& method, const std::string& target)>;

  /// Binds and starts listening; port 0 picks an ephemeral port.
  Server(const Endpoint& bind, ChannelHandler on_channel, HttpHandler on_http = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  /// Closes the listener and every accepted connection.
  void stop();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  IoThread io_;
};

}  // namespace holoviz::net
