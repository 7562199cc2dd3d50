#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "holoviz/align.hpp"
#include "holoviz/bridge/session.hpp"
#include "holoviz/engine/config.hpp"
#include "holoviz/engine/script.hpp"
#include "holoviz/plugins/registry.hpp"
#include "holoviz/scene_server.hpp"
#include "holoviz/txgraph.hpp"

namespace holoviz::engine {

struct EngineOptions {
  double time_scale = 1.0;  ///< engine seconds per wall second
  bool headless = false;    ///< tick without waiting for a viewer
  bool serve_sessions = true;
  std::vector<ScriptEntry> script;
  /// Use this bus instead of connecting to config.bridge_url. Not owned.
  bridge::MessageBus* bus = nullptr;
};

/// Composition root: bridge, frame tree, plugins, alignment, scene and the
/// viewer session server, driven by one tick thread.
class Engine {
 public:
  using DiffObserver = std::function<void(const scene::SceneDiff&, const scene::Snapshot&)>;

  Engine(Config config, EngineOptions options = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Brings up the bridge, plugins and sessions, in that order, and starts
  /// ticking (after a viewer joins unless headless). Throws
  /// bridge::ConnectRefused, net::BindError, plugins::PluginError.
  void start();
  /// Reverse order of start(). Idempotent.
  void stop();
  void request_stop();

  /// Blocks until stop is requested or the script quits. Returns 0 when
  /// every script assertion held.
  int wait();

  void inject(plugins::InputEvent ev);
  /// Called on the tick thread after every commit.
  void add_diff_observer(DiffObserver observer);

  scene::Snapshot snapshot() const;
  std::uint64_t epoch() const;
  double now() const;
  bridge::MessageBus& bus();
  const txgraph::FrameTree& frames() const { return frames_; }
  plugins::Registry& registry() { return *registry_; }
  align::WorldAlignment alignment() const;
  std::uint16_t session_port() const;
  std::size_t assertion_failures() const { return failures_.load(); }
  std::size_t assertions_checked() const { return checked_.load(); }

 private:
  void on_tf(const bridge::TFMessage& m);
  void on_detection(const align::MarkerDetection& det);
  void tick_loop();
  void run_script(double now);

  Config config_;
  EngineOptions options_;
  txgraph::FrameTree frames_;
  std::unique_ptr<bridge::Session> session_;
  bridge::MessageBus* bus_ = nullptr;
  std::unique_ptr<plugins::Registry> registry_;
  std::unique_ptr<SceneServer> server_;
  std::vector<bridge::SubscriptionId> tf_subs_;

  mutable std::mutex align_mutex_;
  align::WorldAlignment alignment_;

  std::mutex observers_mutex_;
  std::vector<DiffObserver> observers_;

  std::size_t next_entry_ = 0;
  std::atomic<std::size_t> failures_{0};
  std::atomic<std::size_t> checked_{0};

  std::chrono::steady_clock::time_point started_;
  mutable std::mutex run_mutex_;
  std::condition_variable run_cv_;
  bool stop_requested_ = false;
  bool running_ = false;
  std::thread ticker_;
};

}  // namespace holoviz::engine
