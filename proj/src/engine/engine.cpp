#include "holoviz/engine/engine.hpp"

#include <spdlog/spdlog.h>

namespace holoviz::engine {

Engine::Engine(Config config, EngineOptions options) : config_(std::move(config)), options_(std::move(options)) {
  validate(config_);
  if (!(options_.time_scale > 0)) throw ConfigError("time_scale", "must be positive");
  std::lock_guard lock(align_mutex_);
  alignment_.marker_in_rwcs = config_.marker_in_rwcs;
}

Engine::~Engine() { stop(); }

void Engine::start() {
  if (options_.bus) {
    bus_ = options_.bus;
  } else {
    session_ = std::make_unique<bridge::Session>(config_.bridge_url);
    session_->set_status_handler([this](const std::string& level, const std::string& message) {
      if (registry_) registry_->report(plugins::Status{level, "bridge", message});
    });
    session_->connect();
    spdlog::info("bridge connected to {}", config_.bridge_url);
    bus_ = session_.get();
  }
  for (const auto& topic : config_.tf_topics) {
    tf_subs_.push_back(bridge::subscribe<bridge::TFMessage>(*bus_, topic, [this](const bridge::TFMessage& m) { on_tf(m); }));
  }

  registry_ = std::make_unique<plugins::Registry>(*bus_, frames_, config_.asset_registry());
  registry_->on_detection([this](const align::MarkerDetection& det) { on_detection(det); });
  for (const auto& d : config_.plugins) registry_->register_plugin(d);

  if (options_.serve_sessions) {
    net::Endpoint bind;
    bind.host = config_.session_host;
    bind.port = static_cast<std::uint16_t>(config_.session_port);
    SceneServerOptions so;
    so.web_root = config_.web_root;
    server_ = std::make_unique<SceneServer>(bind, [this](plugins::InputEvent ev) { inject(std::move(ev)); }, so);
    server_->set_plugins(registry_->descriptors());
    spdlog::info("viewer sessions on port {}", server_->port());
  }

  started_ = std::chrono::steady_clock::now();
  {
    std::lock_guard lock(run_mutex_);
    running_ = true;
    stop_requested_ = false;
  }
  ticker_ = std::thread([this] { tick_loop(); });
}

void Engine::request_stop() {
  {
    std::lock_guard lock(run_mutex_);
    stop_requested_ = true;
  }
  run_cv_.notify_all();
}

void Engine::stop() {
  request_stop();
  if (ticker_.joinable()) ticker_.join();
  server_.reset();
  if (bus_) {
    for (auto id : tf_subs_) bus_->unsubscribe(id);
  }
  tf_subs_.clear();
  registry_.reset();
  if (session_) session_->close();
  session_.reset();
  bus_ = nullptr;
}

int Engine::wait() {
  std::unique_lock lock(run_mutex_);
  run_cv_.wait(lock, [this] { return stop_requested_ || !running_; });
  lock.unlock();
  stop();
  if (failures_ > 0) {
    spdlog::error("{} of {} script assertions failed", failures_.load(), checked_.load());
    return 1;
  }
  return 0;
}

void Engine::inject(plugins::InputEvent ev) {
  if (registry_) registry_->post_input(std::move(ev));
}

void Engine::add_diff_observer(DiffObserver observer) {
  std::lock_guard lock(observers_mutex_);
  observers_.push_back(std::move(observer));
}

scene::Snapshot Engine::snapshot() const { return registry_ ? registry_->snapshot() : scene::Snapshot{}; }

std::uint64_t Engine::epoch() const { return registry_ ? registry_->epoch() : 0; }

double Engine::now() const {
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - started_;
  return wall.count() * options_.time_scale;
}

bridge::MessageBus& Engine::bus() { return *bus_; }

align::WorldAlignment Engine::alignment() const {
  std::lock_guard lock(align_mutex_);
  return alignment_;
}

std::uint16_t Engine::session_port() const { return server_ ? server_->port() : 0; }

void Engine::on_tf(const bridge::TFMessage& m) {
  for (const auto& t : m.transforms) {
    try {
      frames_.insert(t);
    } catch (const txgraph::TransformError& e) {
      spdlog::warn("tf {} -> {} rejected: {}", t.parent, t.child, e.what());
    }
  }
}

void Engine::on_detection(const align::MarkerDetection& det) {
  geom::Transformd root;
  {
    std::lock_guard lock(align_mutex_);
    align::update_alignment(alignment_, det);
    alignment_.aligned = true;
    root = alignment_.vwcs_to_rwcs;
  }
  registry_->set_device_root(root);
  registry_->set_device_nodes(align::detection_nodes(det));
  registry_->report(plugins::Status{"info", "align", "world alignment updated from marker sighting"});
}

void Engine::run_script(double now) {
  const auto& script = options_.script;
  while (next_entry_ < script.size() && script[next_entry_].t <= now) {
    const auto& e = script[next_entry_++];
    switch (e.kind) {
      case ScriptEntry::Kind::Input:
        registry_->post_input(e.event);
        break;
      case ScriptEntry::Kind::AssertFrame: {
        ++checked_;
        std::string verdict;
        try {
          const auto pose = frames_.lookup(e.check.target, e.check.source);
          const double err = (pose.translation - e.check.position).norm();
          if (err > e.check.tolerance) {
            verdict = "off by " + std::to_string(err) + " m";
          }
          spdlog::info("assert {} in {} at t={:.2f}: ({:.3f}, {:.3f}, {:.3f}) error {:.4f}", e.check.source,
                       e.check.target, now, pose.translation.x(), pose.translation.y(), pose.translation.z(), err);
        } catch (const txgraph::TransformError& ex) {
          verdict = ex.what();
        }
        if (!verdict.empty()) {
          ++failures_;
          spdlog::error("assertion failed: {} in {}: {}", e.check.source, e.check.target, verdict);
        }
        break;
      }
      case ScriptEntry::Kind::Quit:
        request_stop();
        return;
    }
  }
}

void Engine::tick_loop() {
  if (!options_.headless && server_) {
    spdlog::info("waiting for a viewer session on port {}", server_->port());
    for (;;) {
      if (server_->wait_for_session(std::chrono::milliseconds(200))) break;
      std::lock_guard lock(run_mutex_);
      if (stop_requested_) return;
    }
  }

  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / config_.tick_hz));
  auto deadline = clock::now();
  for (;;) {
    const double t = now();
    if (!options_.script.empty()) run_script(t);

    const auto diff = registry_->tick(t);
    const auto snap = registry_->snapshot();
    for (auto& s : registry_->take_statuses()) {
      if (s.level == "error") {
        spdlog::error("[{}] {}", s.source, s.message);
      } else if (s.level == "warning") {
        spdlog::warn("[{}] {}", s.source, s.message);
      } else {
        spdlog::info("[{}] {}", s.source, s.message);
      }
      if (server_) server_->broadcast_status(s);
    }
    if (server_) {
      server_->set_plugins(registry_->descriptors());
      server_->broadcast(diff, snap);
    }
    {
      std::lock_guard lock(observers_mutex_);
      for (auto& o : observers_) o(diff, snap);
    }
    if (!options_.script.empty() && next_entry_ >= options_.script.size()) {
      spdlog::info("script finished at t={:.2f}", t);
      request_stop();
    }

    deadline += period;
    std::unique_lock lock(run_mutex_);
    if (run_cv_.wait_until(lock, deadline, [this] { return stop_requested_; })) break;
    if (clock::now() - deadline > 10 * period) deadline = clock::now();
  }
  std::lock_guard lock(run_mutex_);
  running_ = false;
  run_cv_.notify_all();
}

}  // namespace holoviz::engine
