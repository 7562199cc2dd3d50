#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "holoviz/bridge/bus.hpp"
#include "holoviz/plugins/types.hpp"
#include "holoviz/scene.hpp"
#include "holoviz/txgraph.hpp"

namespace holoviz::plugins {

/// Named meshes a StampedPoseDisplay may show instead of its arrow.
class AssetRegistry {
 public:
  static AssetRegistry builtin();

  void add(std::string name, std::string uri) { assets_[std::move(name)] = std::move(uri); }
  bool contains(const std::string& name) const { return assets_.count(name) > 0; }
  const std::map<std::string, std::string>& all() const { return assets_; }

 private:
  std::map<std::string, std::string> assets_;
};

/// What a plugin may touch while it runs.
struct PluginContext {
  bridge::MessageBus& bus;
  const txgraph::FrameTree& frames;
  const AssetRegistry& assets;
  std::function<void(Status)> report;
  double now = 0;  ///< engine clock, seconds
};

class Plugin {
 public:
  explicit Plugin(PluginDescriptor descriptor) : descriptor_(std::move(descriptor)) {}
  virtual ~Plugin() = default;

  const PluginDescriptor& descriptor() const { return descriptor_; }
  const std::string& id() const { return descriptor_.id; }
  PluginKind kind() const { return descriptor_.kind(); }

  /// Opens subscriptions. Called when the plugin becomes enabled.
  virtual void open(PluginContext&) {}
  /// Closes subscriptions and drops cached data.
  virtual void close(PluginContext&) {}
  /// Start-of-tick: drain mailboxes, expire data.
  virtual void update(PluginContext&) {}
  /// Full render of this plugin's nodes; must not mutate state.
  virtual void render(const PluginContext&, scene::NodeMap&) const {}
  virtual void handle_input(PluginContext&, const InputEvent&) {}
  virtual void set_visibility(const std::string& element, bool visible);
  virtual void reset() {}

  void set_enabled(bool enabled) { descriptor_.enabled = enabled; }
  void set_topic(std::string topic) { descriptor_.topic = std::move(topic); }

 protected:
  PluginDescriptor descriptor_;
};

/// Holds the latest messages deposited by bus handlers until the tick
/// drains them.
template <typename Message>
class Mailbox {
 public:
  void put(Message m) {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(m));
  }
  std::vector<Message> take() {
    std::lock_guard lock(mutex_);
    return std::exchange(items_, {});
  }
  void clear() { take(); }

 private:
  std::mutex mutex_;
  std::vector<Message> items_;
};

/// Rejects unknown keys and wrong value types, then returns the settings
/// merged over the type's defaults.
Json effective_settings(PluginType type, const Json& given, const AssetRegistry& assets,
                        const std::string& where = "settings");

/// Type defaults, also the schema: every accepted key appears here.
const Json& default_settings(PluginType type);

std::unique_ptr<Plugin> make_plugin(const PluginDescriptor& descriptor, const AssetRegistry& assets);

}  // namespace holoviz::plugins
