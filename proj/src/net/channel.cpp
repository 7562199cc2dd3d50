#include "holoviz/net/channel.hpp"

#include <atomic>
#include <deque>
#include <future>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace holoviz::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

Endpoint Endpoint::parse(std::string_view url) {
  Endpoint ep;
  std::string_view rest = url;
  if (auto pos = rest.find("://"); pos != std::string_view::npos) {
    const std::string_view scheme = rest.substr(0, pos);
    if (scheme == "ws") {
      ep.scheme = Scheme::WebSocket;
    } else if (scheme == "tcp") {
      ep.scheme = Scheme::Tcp;
    } else {
      throw NetError("unsupported URL scheme '" + std::string(scheme) + "' in " + std::string(url));
    }
    rest.remove_prefix(pos + 3);
  }
  if (auto slash = rest.find('/'); slash != std::string_view::npos) {
    ep.path = std::string(rest.substr(slash));
    rest = rest.substr(0, slash);
  }
  const auto colon = rest.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == rest.size()) {
    throw NetError("endpoint '" + std::string(url) + "' needs host:port");
  }
  ep.host = std::string(rest.substr(0, colon));
  const std::string port_text(rest.substr(colon + 1));
  std::size_t used = 0;
  int port = -1;
  try {
    port = std::stoi(port_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port_text.size() || port < 0 || port > 65535) throw NetError("bad port in '" + std::string(url) + "'");
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

std::string Endpoint::str() const {
  return std::string(scheme == Scheme::WebSocket ? "ws://" : "tcp://") + host + ":" + std::to_string(port) +
         (scheme == Scheme::WebSocket ? path : "");
}

struct IoThread::Impl {
  asio::io_context io;
  asio::executor_work_guard<asio::io_context::executor_type> guard{io.get_executor()};
  std::thread thread;
  std::once_flag stopped;
};

IoThread::IoThread() : impl_(std::make_unique<Impl>()) {
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

IoThread::~IoThread() { stop(); }

void IoThread::stop() {
  std::call_once(impl_->stopped, [this] {
    impl_->guard.reset();
    impl_->io.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
  });
}

namespace {

// Shared write queue and close bookkeeping. Derived classes provide the
// stream-specific read/write/close operations; everything runs on a strand.
template <typename Derived>
class ChannelBase : public Channel, public std::enable_shared_from_this<Derived> {
 public:
  void start(MessageHandler on_message, CloseHandler on_close) override {
    asio::post(derived().executor(), [self = this->shared_from_this(), m = std::move(on_message),
                                      c = std::move(on_close)]() mutable {
      self->on_message_ = std::move(m);
      self->on_close_ = std::move(c);
      self->started_ = true;
      if (self->failed_) {
        self->finish();
        return;
      }
      self->derived().do_read();
    });
  }

  void send(std::shared_ptr<const std::string> message) override {
    if (!open_) return;
    ++pending_;
    asio::post(derived().executor(), [self = this->shared_from_this(), message = std::move(message)] {
      if (!self->open_) {
        --self->pending_;
        return;
      }
      self->queue_.push_back(message);
      if (self->queue_.size() == 1) self->derived().do_write();
    });
  }

  void close() override {
    asio::post(derived().executor(), [self = this->shared_from_this()] {
      if (!self->open_) return;
      self->derived().do_close();
    });
  }

  std::size_t pending() const override { return pending_.load(); }
  bool is_open() const override { return open_.load(); }
  std::string peer() const override { return peer_; }

  /// Abrupt shutdown from any thread.
  void abort() {
    asio::post(derived().executor(), [self = this->shared_from_this()] {
      beast::error_code ec;
      self->derived().lowest_socket().shutdown(tcp::socket::shutdown_both, ec);
      self->derived().lowest_socket().close(ec);
      self->fail();
    });
  }

 protected:
  Derived& derived() { return static_cast<Derived&>(*this); }

  void deliver(std::string&& msg) {
    if (on_message_) on_message_(std::move(msg));
  }

  void wrote(beast::error_code ec) {
    if (!open_ || queue_.empty()) return;  // fail() already dropped the queue
    queue_.pop_front();
    --pending_;
    if (ec) {
      fail();
      return;
    }
    if (!queue_.empty()) derived().do_write();
  }

  void fail() {
    if (!open_.exchange(false) && closed_notified_) return;
    pending_ -= queue_.size();
    queue_.clear();
    failed_ = true;
    if (started_) finish();
  }

  void finish() {
    if (closed_notified_) return;
    closed_notified_ = true;
    if (on_close_) {
      auto cb = std::move(on_close_);
      on_close_ = nullptr;
      on_message_ = nullptr;
      cb();
    }
  }

  void set_peer(const tcp::socket& s) {
    beast::error_code ec;
    auto ep = s.remote_endpoint(ec);
    if (!ec) peer_ = ep.address().to_string() + ":" + std::to_string(ep.port());
  }

  std::deque<std::shared_ptr<const std::string>> queue_;
  std::atomic<std::size_t> pending_{0};
  std::atomic<bool> open_{true};
  bool started_ = false;
  bool failed_ = false;
  bool closed_notified_ = false;
  MessageHandler on_message_;
  CloseHandler on_close_;
  std::string peer_;
};

class WsChannel : public ChannelBase<WsChannel> {
 public:
  explicit WsChannel(tcp::socket&& socket) : ws_(std::move(socket)) { set_peer(beast::get_lowest_layer(ws_).socket()); }

  auto executor() { return ws_.get_executor(); }
  tcp::socket& lowest_socket() { return beast::get_lowest_layer(ws_).socket(); }
  websocket::stream<beast::tcp_stream>& stream() { return ws_; }

  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->fail();
        return;
      }
      std::string msg = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->deliver(std::move(msg));
      if (self->open_) self->do_read();
    });
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(*queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) { self->wrote(ec); });
  }

  void do_close() {
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {
      beast::error_code ignored;
      self->lowest_socket().close(ignored);
      self->fail();
    });
  }

 private:
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
};

class LineChannel : public ChannelBase<LineChannel> {
 public:
  explicit LineChannel(tcp::socket&& socket) : socket_(std::move(socket)) { set_peer(socket_); }

  auto executor() { return socket_.get_executor(); }
  tcp::socket& lowest_socket() { return socket_; }

  void do_read() {
    asio::async_read_until(socket_, asio::dynamic_buffer(buffer_), '\n',
                           [self = shared_from_this()](beast::error_code ec, std::size_t n) {
                             if (ec) {
                               self->fail();
                               return;
                             }
                             std::string line = self->buffer_.substr(0, n - 1);
                             self->buffer_.erase(0, n);
                             if (!line.empty() && line.back() == '\r') line.pop_back();
                             if (!line.empty()) self->deliver(std::move(line));
                             if (self->open_) self->do_read();
                           });
  }

  void do_write() {
    framed_ = *queue_.front() + "\n";
    asio::async_write(socket_, asio::buffer(framed_),
                      [self = shared_from_this()](beast::error_code ec, std::size_t) { self->wrote(ec); });
  }

  void do_close() {
    beast::error_code ignored;
    socket_.shutdown(tcp::socket::shutdown_both, ignored);
    socket_.close(ignored);
    fail();
  }

 private:
  tcp::socket socket_;
  std::string buffer_;
  std::string framed_;
};

}  // namespace

std::shared_ptr<Channel> dial(IoThread& io_thread, const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  auto& io = io_thread.impl().io;
  auto strand = asio::make_strand(io);
  auto promise = std::make_shared<std::promise<std::shared_ptr<Channel>>>();
  auto future = promise->get_future();
  auto resolver = std::make_shared<tcp::resolver>(strand);
  auto stream = std::make_shared<beast::tcp_stream>(strand);
  auto fail = [promise, endpoint](const std::string& what, beast::error_code ec) {
    promise->set_exception(std::make_exception_ptr(
        ConnectError("connecting to " + endpoint.str() + ": " + what + ": " + ec.message())));
  };

  asio::post(strand, [=] {
    resolver->async_resolve(
        endpoint.host, std::to_string(endpoint.port),
        [=](beast::error_code ec, tcp::resolver::results_type results) {
          if (ec) return fail("resolve", ec);
          stream->expires_after(timeout);
          stream->async_connect(results, [=](beast::error_code ec, const tcp::endpoint&) {
            if (ec) return fail("connect", ec);
            if (endpoint.scheme == Endpoint::Scheme::Tcp) {
              stream->expires_never();
              promise->set_value(std::make_shared<LineChannel>(stream->release_socket()));
              return;
            }
            auto ws = std::make_shared<WsChannel>(stream->release_socket());
            auto& s = ws->stream();
            beast::get_lowest_layer(s).expires_after(timeout);
            s.async_handshake(endpoint.host + ":" + std::to_string(endpoint.port), endpoint.path,
                              [=](beast::error_code ec) {
                                if (ec) return fail("handshake", ec);
                                beast::get_lowest_layer(ws->stream()).expires_never();
                                ws->stream().set_option(
                                    websocket::stream_base::timeout::suggested(beast::role_type::client));
                                promise->set_value(ws);
                              });
          });
        });
  });

  if (future.wait_for(timeout + std::chrono::milliseconds(500)) != std::future_status::ready) {
    asio::post(strand, [stream] { stream->cancel(); });
    throw ConnectError("connecting to " + endpoint.str() + ": timed out");
  }
  return future.get();
}

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
  Impl(asio::io_context& io, ChannelHandler on_channel, HttpHandler on_http)
      : io(io), acceptor(asio::make_strand(io)), on_channel(std::move(on_channel)), on_http(std::move(on_http)) {}

  asio::io_context& io;
  tcp::acceptor acceptor;
  ChannelHandler on_channel;
  HttpHandler on_http;
  std::mutex mutex;
  std::vector<std::weak_ptr<WsChannel>> ws_channels;
  std::vector<std::weak_ptr<LineChannel>> line_channels;
  std::atomic<bool> stopped{false};
  std::uint16_t port = 0;

  void do_accept() {
    acceptor.async_accept(asio::make_strand(io), [self = shared_from_this()](beast::error_code ec, tcp::socket s) {
      if (self->stopped) return;
      if (!ec) self->detect(std::move(s));
      self->do_accept();
    });
  }

  void detect(tcp::socket socket) {
    auto sock = std::make_shared<tcp::socket>(std::move(socket));
    sock->async_wait(tcp::socket::wait_read, [self = shared_from_this(), sock](beast::error_code ec) {
      if (ec || self->stopped) return;
      char first = 0;
      beast::error_code peek_ec;
      const auto n = sock->receive(asio::buffer(&first, 1), tcp::socket::message_peek, peek_ec);
      if (peek_ec || n == 0) return;
      if (first == '{') {
        auto ch = std::make_shared<LineChannel>(std::move(*sock));
        {
          std::lock_guard lock(self->mutex);
          self->line_channels.push_back(ch);
        }
        self->on_channel(ch);
      } else {
        self->serve_http(std::move(*sock));
      }
    });
  }

  void serve_http(tcp::socket socket) {
    struct HttpState {
      explicit HttpState(tcp::socket&& s) : stream(std::move(s)) {}
      beast::tcp_stream stream;
      beast::flat_buffer buffer;
      http::request<http::string_body> req;
      http::response<http::string_body> res;
    };
    auto st = std::make_shared<HttpState>(std::move(socket));
    st->stream.expires_after(std::chrono::seconds(10));
    http::async_read(st->stream, st->buffer, st->req, [self = shared_from_this(), st](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (websocket::is_upgrade(st->req)) {
        st->stream.expires_never();
        auto ch = std::make_shared<WsChannel>(st->stream.release_socket());
        ch->stream().set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ch->stream().async_accept(st->req, [self, ch](beast::error_code ec) {
          if (ec || self->stopped) return;
          {
            std::lock_guard lock(self->mutex);
            self->ws_channels.push_back(ch);
          }
          self->on_channel(ch);
        });
        return;
      }
      HttpResponse out;
      if (self->on_http) out = self->on_http(std::string(st->req.method_string()), std::string(st->req.target()));
      st->res.version(st->req.version());
      st->res.result(static_cast<http::status>(out.status));
      st->res.set(http::field::content_type, out.content_type);
      st->res.set(http::field::access_control_allow_origin, "*");
      st->res.keep_alive(false);
      st->res.body() = std::move(out.body);
      st->res.prepare_payload();
      http::async_write(st->stream, st->res, [st](beast::error_code, std::size_t) {
        beast::error_code ignored;
        st->stream.socket().shutdown(tcp::socket::shutdown_send, ignored);
      });
    });
  }

  void stop() {
    if (stopped.exchange(true)) return;
    std::promise<void> done;
    asio::post(acceptor.get_executor(), [this, &done] {
      beast::error_code ignored;
      acceptor.close(ignored);
      done.set_value();
    });
    done.get_future().wait();
    std::lock_guard lock(mutex);
    for (auto& w : ws_channels) {
      if (auto ch = w.lock()) ch->abort();
    }
    for (auto& w : line_channels) {
      if (auto ch = w.lock()) ch->abort();
    }
  }
};

Server::Server(const Endpoint& bind, ChannelHandler on_channel, HttpHandler on_http) {
  impl_ = std::make_shared<Impl>(io_.impl().io, std::move(on_channel), std::move(on_http));
  beast::error_code ec;
  auto address = asio::ip::make_address(bind.host == "localhost" ? "127.0.0.1" : bind.host, ec);
  if (ec) throw BindError("bad bind address '" + bind.host + "': " + ec.message());
  const tcp::endpoint ep(address, bind.port);
  auto& acc = impl_->acceptor;
  acc.open(ep.protocol(), ec);
  if (!ec) acc.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acc.bind(ep, ec);
  if (!ec) acc.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw BindError("cannot bind " + bind.host + ":" + std::to_string(bind.port) + ": " + ec.message());
  impl_->port = acc.local_endpoint(ec).port();
  asio::post(acc.get_executor(), [impl = impl_] { impl->do_accept(); });
}

Server::~Server() {
  stop();
  io_.stop();
}

std::uint16_t Server::port() const { return impl_->port; }

void Server::stop() {
  impl_->stop();
  // Give aborts a moment to flush through the loop before callers proceed.
  std::promise<void> drained;
  asio::post(impl_->io, [&drained] { drained.set_value(); });
  drained.get_future().wait_for(std::chrono::seconds(1));
}

}  // namespace holoviz::net
