#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "holoviz/net/channel.hpp"
#include "holoviz/plugins/types.hpp"
#include "holoviz/scene.hpp"

namespace holoviz {

struct SceneServerOptions {
  std::size_t max_pending = 128;  ///< unsent messages before a client is dropped
  double keepalive = 10.0;        ///< seconds of client silence before the session closes
  std::string web_root;           ///< static files for plain HTTP GETs; empty disables
};

/// Streams scene diffs to any number of viewer sessions and merges their
/// input into one sink. See docs/session-protocol.md.
class SceneServer {
 public:
  using InputSink = std::function<void(plugins::InputEvent)>;
  using Clock = std::chrono::steady_clock;

  SceneServer(const net::Endpoint& bind, InputSink on_input, SceneServerOptions options = {});
  ~SceneServer();

  std::uint16_t port() const { return server_->port(); }

  /// Sends one committed epoch to every session. Sessions that joined or
  /// asked for a resync get the full snapshot instead.
  void broadcast(const scene::SceneDiff& diff, const scene::Snapshot& snapshot);
  void broadcast_status(const plugins::Status& status);
  /// Plugin list sent to every session now and to each new session on join.
  void set_plugins(const std::vector<plugins::PluginDescriptor>& descriptors);

  std::size_t sessions() const;
  /// Blocks until at least one session is connected or the timeout expires.
  bool wait_for_session(std::chrono::milliseconds timeout) const;
  void stop();

 private:
  struct Client {
    std::shared_ptr<net::Channel> channel;
    Clock::time_point last_seen;
    bool needs_reset = true;
  };

  void accept(std::shared_ptr<net::Channel> channel);
  void receive(std::uint64_t id, std::string&& text);
  void drop(std::uint64_t id, const std::string& why);
  net::HttpResponse serve_file(const std::string& method, const std::string& target) const;
  static std::string envelope(const char* kind, const plugins::Json& payload);

  InputSink on_input_;
  SceneServerOptions options_;

  mutable std::mutex mutex_;
  mutable std::condition_variable joined_;
  std::map<std::uint64_t, Client> clients_;
  std::uint64_t next_id_ = 1;
  std::shared_ptr<const std::string> plugins_message_;

  std::unique_ptr<net::Server> server_;
};

}  // namespace holoviz
