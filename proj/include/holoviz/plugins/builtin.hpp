#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "holoviz/bridge/messages.hpp"
#include "holoviz/plugins/plugin.hpp"

namespace holoviz::plugins {

/// Node between two world points along the node's +x axis (Segment or ArrowMesh).
scene::SceneNode span_node(std::string id, scene::Primitive primitive, const Vec3d& from, const Vec3d& to,
                           double width, const scene::Rgba& color);

/// Far end of a Segment or ArrowMesh node.
Vec3d span_end(const scene::SceneNode& node);

/// One axis triad per frame (x red, y green, z blue), an optional name label
/// and an optional arrow from each frame to its parent. Reads the frame tree
/// directly and subscribes to nothing.
class TfDisplay : public Plugin {
 public:
  TfDisplay(PluginDescriptor d, Json settings);

  void render(const PluginContext& ctx, scene::NodeMap& out) const override;
  /// Elements: axes, names, arrows, frames (all at once), frame:<name>.
  void set_visibility(const std::string& element, bool visible) override;

 private:
  void sync_settings();

  Json settings_;
  std::string fixed_frame_;
  double axis_length_;
  double label_height_;
  bool show_axes_;
  bool show_names_;
  bool show_arrows_;
  bool show_frames_;
  std::set<std::string> hidden_;
};

/// Live visualization_msgs markers keyed by (ns, id) with ADD / DELETE /
/// DELETEALL and lifetime expiry.
class MarkerArrayDisplay : public Plugin {
 public:
  MarkerArrayDisplay(PluginDescriptor d, Json settings);

  void open(PluginContext& ctx) override;
  void close(PluginContext& ctx) override;
  void update(PluginContext& ctx) override;
  void render(const PluginContext& ctx, scene::NodeMap& out) const override;

  std::size_t live_markers() const { return live_.size(); }

 private:
  struct Live {
    bridge::Marker marker;
    double expires_at;
  };
  using Key = std::pair<std::string, std::int32_t>;

  std::string fixed_frame_;
  std::optional<bridge::SubscriptionId> sub_;
  Mailbox<bridge::MarkerArray> inbox_;
  std::map<Key, Live> live_;
  std::set<Key> warned_;
};

/// Latest PoseStamped as an arrow or a preloaded mesh, resolved into the
/// fixed frame.
class StampedPoseDisplay : public Plugin {
 public:
  StampedPoseDisplay(PluginDescriptor d, Json settings);

  void open(PluginContext& ctx) override;
  void close(PluginContext& ctx) override;
  void update(PluginContext& ctx) override;
  void render(const PluginContext& ctx, scene::NodeMap& out) const override;

 private:
  std::string fixed_frame_;
  std::string mesh_;
  double opacity_;
  double arrow_length_;
  double shaft_diameter_;
  scene::Rgba color_;
  std::optional<bridge::SubscriptionId> sub_;
  Mailbox<bridge::PoseStamped> inbox_;
  std::optional<bridge::PoseStamped> latest_;
};

/// Two taps on the ground plane: the first fixes the tail, the ray then
/// steers the tip, the second freezes it and publishes the pose.
class Arrow2dTool : public Plugin {
 public:
  enum class Phase { Idle, Orienting };

  Arrow2dTool(PluginDescriptor d, Json settings);

  void handle_input(PluginContext& ctx, const InputEvent& ev) override;
  void render(const PluginContext& ctx, scene::NodeMap& out) const override;
  void reset() override;

  Phase phase() const { return phase_; }

 private:
  std::string frame_id_;
  scene::Rgba color_;
  Phase phase_ = Phase::Idle;
  Vec3d tail_ = Vec3d::Zero();
  Vec3d tip_ = Vec3d::Zero();
  std::uint32_t seq_ = 0;
};

/// Maps recognized keywords to command strings published on its topic.
class CommandTool : public Plugin {
 public:
  CommandTool(PluginDescriptor d, Json settings);

  void handle_input(PluginContext& ctx, const InputEvent& ev) override;

 private:
  std::map<std::string, std::string> keywords_;
};

}  // namespace holoviz::plugins
