#include <numbers>

#include "holoviz/plugins/builtin.hpp"

namespace holoviz::plugins {

scene::SceneNode span_node(std::string id, scene::Primitive primitive, const Vec3d& from, const Vec3d& to, double width,
                           const scene::Rgba& color) {
  scene::SceneNode n;
  n.node_id = std::move(id);
  n.primitive = primitive;
  n.pose_world = geom::Transformd(from, geom::align_x_axis<double>(to - from));
  n.scale = Vec3d((to - from).norm(), width, width);
  n.color = color;
  return n;
}

Vec3d span_end(const scene::SceneNode& node) { return node.pose_world.apply(Vec3d(node.scale.x(), 0, 0)); }

TfDisplay::TfDisplay(PluginDescriptor d, Json settings) : Plugin(std::move(d)), settings_(std::move(settings)) {
  fixed_frame_ = txgraph::normalize_frame_id(settings_["fixed_frame"].get<std::string>());
  axis_length_ = settings_["axis_length"].get<double>();
  label_height_ = settings_["label_height"].get<double>();
  show_axes_ = settings_["show_axes"].get<bool>();
  show_names_ = settings_["show_names"].get<bool>();
  show_arrows_ = settings_["show_arrows"].get<bool>();
  show_frames_ = settings_["show_frames"].get<bool>();
  for (const auto& f : settings_["hidden_frames"]) hidden_.insert(txgraph::normalize_frame_id(f.get<std::string>()));
  sync_settings();
}

void TfDisplay::sync_settings() {
  settings_["show_axes"] = show_axes_;
  settings_["show_names"] = show_names_;
  settings_["show_arrows"] = show_arrows_;
  settings_["show_frames"] = show_frames_;
  settings_["hidden_frames"] = Json(std::vector<std::string>(hidden_.begin(), hidden_.end()));
  descriptor_.settings = settings_;
}

void TfDisplay::set_visibility(const std::string& element, bool visible) {
  if (element == "axes") {
    show_axes_ = visible;
  } else if (element == "names") {
    show_names_ = visible;
  } else if (element == "arrows") {
    show_arrows_ = visible;
  } else if (element == "frames") {
    show_frames_ = visible;
  } else if (element.starts_with("frame:") && element.size() > 6) {
    const std::string frame = txgraph::normalize_frame_id(element.substr(6));
    if (visible) {
      hidden_.erase(frame);
    } else {
      hidden_.insert(frame);
    }
  } else {
    Plugin::set_visibility(element, visible);
  }
  sync_settings();
}

void TfDisplay::render(const PluginContext& ctx, scene::NodeMap& out) const {
  if (!show_frames_) return;

  const double width = axis_length_ * 0.1;
  const auto quarter = std::numbers::pi / 2;
  const auto to_y = geom::UnitQuatd::from_axis_angle(Vec3d::UnitZ(), quarter);
  const auto to_z = geom::UnitQuatd::from_axis_angle(Vec3d::UnitY(), -quarter);

  std::map<std::string, std::string> parents;
  for (const auto& info : ctx.frames.frames()) {
    if (info.parent) parents[info.frame] = *info.parent;
  }

  auto pose_of = [&](const std::string& frame) -> std::optional<geom::Transformd> {
    try {
      return ctx.frames.lookup(fixed_frame_, frame);
    } catch (const txgraph::TransformError&) {
      return std::nullopt;
    }
  };

  const std::string& pid = id();
  for (const auto& frame : ctx.frames.all_frames()) {
    if (hidden_.count(frame)) continue;
    const auto pose = pose_of(frame);
    if (!pose) continue;
    const std::string prefix = pid + "/" + frame + "/";

    if (show_axes_) {
      const scene::Rgba colors[] = {{1, 0, 0, 1}, {0, 1, 0, 1}, {0, 0, 1, 1}};
      const geom::UnitQuatd turns[] = {geom::UnitQuatd(), to_y, to_z};
      const char* names[] = {"axis_x", "axis_y", "axis_z"};
      for (int i = 0; i < 3; ++i) {
        scene::SceneNode n;
        n.node_id = prefix + names[i];
        n.primitive = scene::Primitive::Segment;
        n.pose_world = geom::Transformd(pose->translation, pose->rotation * turns[i]);
        n.scale = Vec3d(axis_length_, width, width);
        n.color = colors[i];
        out[n.node_id] = n;
      }
    }
    if (show_names_) {
      scene::SceneNode n;
      n.node_id = prefix + "label";
      n.primitive = scene::Primitive::Label;
      n.pose_world = geom::Transformd::from_translation(pose->translation + Vec3d(0, 0, label_height_));
      n.scale = Vec3d::Constant(label_height_);
      n.text = frame;
      out[n.node_id] = n;
    }
    if (show_arrows_) {
      const auto parent = parents.find(frame);
      if (parent == parents.end()) continue;
      const auto parent_pose = pose_of(parent->second);
      if (!parent_pose) continue;
      out[prefix + "parent_arrow"] = span_node(prefix + "parent_arrow", scene::Primitive::ArrowMesh, pose->translation,
                                               parent_pose->translation, width, scene::Rgba{1, 0.85, 0.2, 1});
    }
  }
}

}  // namespace holoviz::plugins
