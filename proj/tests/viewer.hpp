#pragma once

// Minimal session-protocol client for tests.

#include <condition_variable>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "holoviz/net/channel.hpp"
#include "holoviz/scene.hpp"
#include "wait.hpp"

class Viewer {
 public:
  using Json = nlohmann::ordered_json;

  explicit Viewer(std::uint16_t port, bool read = true) {
    holoviz::net::Endpoint e;
    e.port = port;
    e.path = "/session";
    channel_ = holoviz::net::dial(io_, e, std::chrono::milliseconds(2000));
    if (read) {
      channel_->start(
          [this](std::string&& text) {
            std::lock_guard lock(mutex_);
            messages_.push_back(Json::parse(text));
          },
          [this] { closed_ = true; });
    }
  }
  ~Viewer() {
    channel_->close();
    io_.stop();
  }

  void send(const std::string& kind, const Json& payload) {
    channel_->send(Json{{"kind", kind}, {"payload", payload}}.dump());
  }
  void send_raw(std::string text) { channel_->send(std::move(text)); }

  std::vector<Json> messages() const {
    std::lock_guard lock(mutex_);
    return messages_;
  }
  std::vector<Json> of_kind(const std::string& kind) const {
    std::vector<Json> out;
    for (const auto& m : messages()) {
      if (m["kind"] == kind) out.push_back(m["payload"]);
    }
    return out;
  }
  std::vector<holoviz::scene::SceneDiff> diffs() const {
    std::vector<holoviz::scene::SceneDiff> out;
    for (const auto& p : of_kind("diff")) out.push_back(holoviz::scene::diff_from_json(p));
    return out;
  }
  /// Folds every diff received so far, resetting where the server says so.
  holoviz::scene::Snapshot folded() const {
    holoviz::scene::Snapshot s;
    for (const auto& d : diffs()) s = holoviz::scene::apply_diff(s, d);
    return s;
  }
  bool closed() const { return closed_; }

 private:
  holoviz::net::IoThread io_;
  std::shared_ptr<holoviz::net::Channel> channel_;
  mutable std::mutex mutex_;
  std::vector<Json> messages_;
  std::atomic<bool> closed_{false};
};
