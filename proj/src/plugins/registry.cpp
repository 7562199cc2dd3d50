#include "holoviz/plugins/registry.hpp"

#include <algorithm>

namespace holoviz::plugins {

Registry::Registry(bridge::MessageBus& bus, const txgraph::FrameTree& frames, AssetRegistry assets)
    : bus_(bus), frames_(frames), assets_(std::move(assets)) {}

Registry::~Registry() {
  std::lock_guard lock(mutex_);
  auto ctx = context(0);
  for (auto& p : plugins_) {
    try {
      p->close(ctx);
    } catch (...) {
    }
  }
}

PluginContext Registry::context(double now) const {
  auto* self = const_cast<Registry*>(this);
  return PluginContext{bus_, frames_, assets_, [self](Status s) { self->report(std::move(s)); }, now};
}

Plugin& Registry::get(const std::string& id) const {
  for (const auto& p : plugins_) {
    if (p->id() == id) return *p;
  }
  throw UnknownId("no plugin '" + id + "'");
}

const Plugin* Registry::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  for (const auto& p : plugins_) {
    if (p->id() == id) return p.get();
  }
  return nullptr;
}

void Registry::register_plugin(const PluginDescriptor& descriptor) {
  std::lock_guard lock(mutex_);
  if (descriptor.id.empty()) throw SettingsError("plugin id must be nonempty");
  for (const auto& p : plugins_) {
    if (p->id() == descriptor.id) throw DuplicateId("duplicate plugin id '" + descriptor.id + "'");
  }
  if (descriptor.type != PluginType::TfDisplay && descriptor.topic.empty()) {
    throw SettingsError(descriptor.id + ".topic: required for " + to_string(descriptor.type));
  }
  auto plugin = make_plugin(descriptor, assets_);
  if (plugin->descriptor().enabled) {
    auto ctx = context(0);
    plugin->open(ctx);
  }
  plugins_.push_back(std::move(plugin));
}

void Registry::remove_plugin(const std::string& id) {
  std::lock_guard lock(mutex_);
  Plugin& p = get(id);
  auto ctx = context(0);
  p.close(ctx);
  std::erase_if(plugins_, [&](const auto& q) { return q->id() == id; });
}

void Registry::set_enabled(const std::string& id, bool enabled) {
  std::lock_guard lock(mutex_);
  Plugin& p = get(id);
  if (p.descriptor().enabled == enabled) return;
  auto ctx = context(0);
  if (enabled) {
    p.open(ctx);
  } else {
    p.close(ctx);
  }
  p.set_enabled(enabled);
}

void Registry::set_visibility(const std::string& id, const std::string& element, bool visible) {
  std::lock_guard lock(mutex_);
  get(id).set_visibility(element, visible);
}

void Registry::set_topic(const std::string& id, const std::string& topic) {
  std::lock_guard lock(mutex_);
  Plugin& p = get(id);
  if (topic.empty()) throw InvalidAction(id + ": topic must be nonempty");
  if (p.descriptor().type == PluginType::TfDisplay) throw InvalidAction(id + ": TfDisplay has no topic");
  if (p.descriptor().topic == topic) return;
  auto ctx = context(0);
  const bool live = p.descriptor().enabled;
  if (live) p.close(ctx);
  p.set_topic(topic);
  if (live) p.open(ctx);
}

void Registry::reset(const std::string& id) {
  std::lock_guard lock(mutex_);
  get(id).reset();
}

void Registry::post_input(InputEvent ev) {
  std::lock_guard lock(input_mutex_);
  inputs_.push_back(std::move(ev));
}

void Registry::on_detection(DetectionHandler handler) {
  std::lock_guard lock(mutex_);
  on_detection_ = std::move(handler);
}

void Registry::report(Status s) {
  std::lock_guard lock(status_mutex_);
  statuses_.push_back(std::move(s));
}

std::vector<Status> Registry::take_statuses() {
  std::lock_guard lock(status_mutex_);
  return std::exchange(statuses_, {});
}

void Registry::fail(Plugin& p, const char* stage, const std::exception& e, double now) {
  report(Status{"error", p.id(), std::string(stage) + " failed, plugin disabled: " + e.what()});
  auto ctx = context(now);
  try {
    p.close(ctx);
  } catch (...) {
  }
  p.set_enabled(false);
}

void Registry::apply_menu(const MenuAction& m) {
  const Json& v = m.value;
  if (m.action == "set_enabled") {
    if (!v.is_boolean()) throw InvalidAction("set_enabled expects a boolean");
    set_enabled(m.plugin, v.get<bool>());
  } else if (m.action == "set_visibility") {
    if (!v.is_object() || !v.contains("element") || !v["element"].is_string() || !v.contains("visible") ||
        !v["visible"].is_boolean()) {
      throw InvalidAction("set_visibility expects {element, visible}");
    }
    set_visibility(m.plugin, v["element"].get<std::string>(), v["visible"].get<bool>());
  } else if (m.action == "set_topic") {
    if (!v.is_string()) throw InvalidAction("set_topic expects a string");
    set_topic(m.plugin, v.get<std::string>());
  } else if (m.action == "reset") {
    reset(m.plugin);
  } else {
    throw InvalidAction("unknown menu action '" + m.action + "'");
  }
}

void Registry::route(const InputEvent& ev, double now) {
  switch (ev.variant) {
    case InputEvent::Variant::MenuAction:
      try {
        apply_menu(ev.menu);
      } catch (const std::exception& e) {
        report(Status{"warning", ev.menu.plugin, e.what()});
      }
      return;
    case InputEvent::Variant::Detection:
      if (on_detection_) on_detection_(ev.detection);
      return;
    default:
      break;
  }

  if (ev.target && !std::any_of(plugins_.begin(), plugins_.end(), [&](const auto& p) { return p->id() == *ev.target; })) {
    report(Status{"warning", *ev.target, "input for unknown plugin"});
    return;
  }
  auto ctx = context(now);
  for (auto& p : plugins_) {
    if (!p->descriptor().enabled || p->kind() != PluginKind::Tool) continue;
    if (ev.target && p->id() != *ev.target) continue;
    try {
      p->handle_input(ctx, ev);
    } catch (const std::exception& e) {
      fail(*p, "input", e, now);
    }
  }
}

void Registry::render_locked(double now, scene::NodeMap& out) const {
  const auto ctx = context(now);
  for (const auto& p : plugins_) {
    if (!p->descriptor().enabled) continue;
    p->render(ctx, out);
  }
}

scene::SceneDiff Registry::tick(double now) {
  std::lock_guard lock(mutex_);
  std::deque<InputEvent> inputs;
  {
    std::lock_guard in(input_mutex_);
    inputs.swap(inputs_);
  }
  for (const auto& ev : inputs) route(ev, now);

  auto ctx = context(now);
  scene::NodeMap world;
  for (auto& p : plugins_) {
    if (!p->descriptor().enabled) continue;
    try {
      p->update(ctx);
      scene::NodeMap mine;
      p->render(ctx, mine);
      world.merge(mine);
    } catch (const std::exception& e) {
      fail(*p, "render", e, now);
    }
  }
  return scene_.commit(std::move(world), device_nodes_);
}

scene::NodeMap Registry::render_all(double now) const {
  std::lock_guard lock(mutex_);
  scene::NodeMap out;
  render_locked(now, out);
  return out;
}

void Registry::set_device_nodes(scene::NodeMap nodes) {
  std::lock_guard lock(mutex_);
  device_nodes_ = std::move(nodes);
}

void Registry::set_device_root(const geom::Transformd& root) {
  std::lock_guard lock(mutex_);
  scene_.set_device_root(root);
}

scene::Snapshot Registry::snapshot() const {
  std::lock_guard lock(mutex_);
  return scene_.snapshot();
}

std::uint64_t Registry::epoch() const {
  std::lock_guard lock(mutex_);
  return scene_.epoch();
}

std::vector<PluginDescriptor> Registry::descriptors() const {
  std::lock_guard lock(mutex_);
  std::vector<PluginDescriptor> out;
  for (const auto& p : plugins_) out.push_back(p->descriptor());
  return out;
}

}  // namespace holoviz::plugins
