#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "holoviz/plugins/plugin.hpp"

namespace holoviz::plugins {

/// Owns the plugin instances and drives them once per tick: drain input,
/// update, render, commit into the scene.
///
/// post_input() and take_statuses() may be called from any thread; the rest
/// is meant for the thread that calls tick(), though every call locks.
class Registry {
 public:
  using DetectionHandler = std::function<void(const align::MarkerDetection&)>;

  Registry(bridge::MessageBus& bus, const txgraph::FrameTree& frames, AssetRegistry assets = AssetRegistry::builtin());
  ~Registry();
  Registry(const Registry&) = delete;
  Registry& operator=(const Registry&) = delete;

  /// Throws DuplicateId, UnknownType or SettingsError; an enabled plugin
  /// opens its subscriptions right away.
  void register_plugin(const PluginDescriptor& descriptor);
  void remove_plugin(const std::string& id);

  // Throw UnknownId, InvalidAction.
  void set_enabled(const std::string& id, bool enabled);
  void set_visibility(const std::string& id, const std::string& element, bool visible);
  /// Moves the subscription; an empty topic is rejected, the current one is a no-op.
  void set_topic(const std::string& id, const std::string& topic);
  void reset(const std::string& id);

  /// Queued until the next tick.
  void post_input(InputEvent ev);
  /// Detection events go here instead of to plugins.
  void on_detection(DetectionHandler handler);

  /// One frame: returns the scene change, advancing the epoch even when
  /// nothing changed.
  scene::SceneDiff tick(double now);

  /// Renders every enabled plugin without touching the scene.
  scene::NodeMap render_all(double now) const;

  /// Device-layer content for the following commits.
  void set_device_nodes(scene::NodeMap nodes);
  void set_device_root(const geom::Transformd& root);

  scene::Snapshot snapshot() const;
  std::uint64_t epoch() const;
  std::vector<PluginDescriptor> descriptors() const;
  std::vector<Status> take_statuses();
  void report(Status s);

  /// Borrowed view for inspection; hold no reference across tick().
  const Plugin* find(const std::string& id) const;

 private:
  PluginContext context(double now) const;
  Plugin& get(const std::string& id) const;
  void apply_menu(const MenuAction& action);
  void route(const InputEvent& ev, double now);
  void fail(Plugin& p, const char* stage, const std::exception& e, double now);
  void render_locked(double now, scene::NodeMap& out) const;

  bridge::MessageBus& bus_;
  const txgraph::FrameTree& frames_;
  AssetRegistry assets_;

  mutable std::recursive_mutex mutex_;
  std::vector<std::unique_ptr<Plugin>> plugins_;
  scene::Scene scene_;
  scene::NodeMap device_nodes_;
  DetectionHandler on_detection_;

  std::mutex input_mutex_;
  std::deque<InputEvent> inputs_;

  std::mutex status_mutex_;
  std::vector<Status> statuses_;
};

}  // namespace holoviz::plugins
