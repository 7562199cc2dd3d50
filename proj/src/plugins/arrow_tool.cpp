#include "holoviz/plugins/builtin.hpp"

namespace holoviz::plugins {

Arrow2dTool::Arrow2dTool(PluginDescriptor d, Json settings) : Plugin(std::move(d)) {
  frame_id_ = txgraph::normalize_frame_id(settings["frame_id"].get<std::string>());
  const Json& c = settings["color"];
  color_ = scene::Rgba{c[0].get<double>(), c[1].get<double>(), c[2].get<double>(), c[3].get<double>()};
  descriptor_.settings = std::move(settings);
}

void Arrow2dTool::reset() {
  phase_ = Phase::Idle;
  tail_ = tip_ = Vec3d::Zero();
}

void Arrow2dTool::handle_input(PluginContext& ctx, const InputEvent& ev) {
  if (ev.variant != InputEvent::Variant::Tap && ev.variant != InputEvent::Variant::RayMove) return;
  const auto hit = geom::ray_ground_intersect(ev.ray.origin, ev.ray.direction);

  if (phase_ == Phase::Idle) {
    if (ev.variant == InputEvent::Variant::Tap && hit) {
      tail_ = tip_ = *hit;
      phase_ = Phase::Orienting;
    }
    return;
  }

  if (hit) tip_ = *hit;
  if (ev.variant != InputEvent::Variant::Tap) return;

  geom::UnitQuatd heading;
  try {
    heading = geom::yaw_quat(tail_, tip_);
  } catch (const geom::DegenerateDirection&) {
    return;
  }
  bridge::PoseStamped goal;
  goal.header.seq = ++seq_;
  goal.header.stamp = Stamp::from_seconds(ctx.now);
  goal.header.frame_id = frame_id_;
  goal.pose = geom::Transformd(Vec3d(tail_.x(), tail_.y(), 0), heading);
  bridge::publish(ctx.bus, descriptor_.topic, goal);
  reset();
}

void Arrow2dTool::render(const PluginContext&, scene::NodeMap& out) const {
  if (phase_ != Phase::Orienting) return;
  const std::string nid = id() + "/preview";
  out[nid] = span_node(nid, scene::Primitive::ArrowMesh, tail_, tip_, 0.05, color_);
}

}  // namespace holoviz::plugins
