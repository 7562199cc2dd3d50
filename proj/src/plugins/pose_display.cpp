#include "holoviz/plugins/builtin.hpp"

namespace holoviz::plugins {

StampedPoseDisplay::StampedPoseDisplay(PluginDescriptor d, Json settings) : Plugin(std::move(d)) {
  fixed_frame_ = txgraph::normalize_frame_id(settings["fixed_frame"].get<std::string>());
  mesh_ = settings["mesh"].get<std::string>();
  opacity_ = settings["opacity"].get<double>();
  arrow_length_ = settings["arrow_length"].get<double>();
  shaft_diameter_ = settings["shaft_diameter"].get<double>();
  const Json& c = settings["color"];
  color_ = scene::Rgba{c[0].get<double>(), c[1].get<double>(), c[2].get<double>(), c[3].get<double>() * opacity_};
  descriptor_.settings = std::move(settings);
}

void StampedPoseDisplay::open(PluginContext& ctx) {
  if (sub_) return;
  sub_ = bridge::subscribe<bridge::PoseStamped>(ctx.bus, descriptor_.topic,
                                                [this](const bridge::PoseStamped& m) { inbox_.put(m); });
}

void StampedPoseDisplay::close(PluginContext& ctx) {
  if (sub_) ctx.bus.unsubscribe(*sub_);
  sub_.reset();
  inbox_.clear();
  latest_.reset();
}

void StampedPoseDisplay::update(PluginContext&) {
  auto fresh = inbox_.take();
  if (!fresh.empty()) latest_ = std::move(fresh.back());
}

void StampedPoseDisplay::render(const PluginContext& ctx, scene::NodeMap& out) const {
  if (!latest_) return;
  const auto& h = latest_->header;
  const std::string frame = h.frame_id.empty() ? fixed_frame_ : txgraph::normalize_frame_id(h.frame_id);
  geom::Transformd root;
  if (frame != fixed_frame_) {
    try {
      if (h.stamp.is_zero()) {
        root = ctx.frames.lookup(fixed_frame_, frame);
      } else {
        try {
          root = ctx.frames.lookup(fixed_frame_, frame, h.stamp);
        } catch (const txgraph::ExtrapolationTooFar&) {
          root = ctx.frames.lookup(fixed_frame_, frame);
        }
      }
    } catch (const txgraph::TransformError&) {
      return;
    }
  }

  scene::SceneNode n;
  n.node_id = id() + "/pose";
  n.pose_world = root * latest_->pose;
  n.color = color_;
  if (mesh_.empty()) {
    n.primitive = scene::Primitive::ArrowMesh;
    n.scale = Vec3d(arrow_length_, shaft_diameter_, shaft_diameter_);
  } else {
    n.primitive = scene::Primitive::MeshRef;
    n.text = mesh_;
  }
  out[n.node_id] = std::move(n);
}

}  // namespace holoviz::plugins
