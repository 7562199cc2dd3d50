#include "holoviz/plugins/builtin.hpp"

namespace holoviz::plugins {

namespace {

scene::Rgba paint(const bridge::Rgba& c) { return scene::Rgba{c.r, c.g, c.b, c.a}; }

scene::Rgba point_color(const bridge::Marker& m, std::size_t k) {
  return k < m.colors.size() ? paint(m.colors[k]) : paint(m.color);
}

}  // namespace

MarkerArrayDisplay::MarkerArrayDisplay(PluginDescriptor d, Json settings) : Plugin(std::move(d)) {
  fixed_frame_ = txgraph::normalize_frame_id(settings["fixed_frame"].get<std::string>());
  descriptor_.settings = std::move(settings);
}

void MarkerArrayDisplay::open(PluginContext& ctx) {
  if (sub_) return;
  sub_ = bridge::subscribe<bridge::MarkerArray>(ctx.bus, descriptor_.topic,
                                                [this](const bridge::MarkerArray& m) { inbox_.put(m); });
}

void MarkerArrayDisplay::close(PluginContext& ctx) {
  if (sub_) ctx.bus.unsubscribe(*sub_);
  sub_.reset();
  inbox_.clear();
  live_.clear();
}

void MarkerArrayDisplay::update(PluginContext& ctx) {
  for (auto& array : inbox_.take()) {
    for (auto& m : array.markers) {
      switch (m.action) {
        case bridge::MarkerAction::DeleteAll:
          live_.clear();
          break;
        case bridge::MarkerAction::Delete:
          live_.erase(Key{m.ns, m.id});
          break;
        case bridge::MarkerAction::Add: {
          const double expires = m.lifetime.is_zero() ? std::numeric_limits<double>::infinity()
                                                      : ctx.now + m.lifetime.seconds();
          Key key{m.ns, m.id};
          if ((m.type == bridge::MarkerType::MeshResource || m.type == bridge::MarkerType::TriangleList) &&
              warned_.insert(key).second) {
            ctx.report(Status{"warning", id(),
                              "marker " + m.ns + "/" + std::to_string(m.id) + ": " + bridge::to_string(m.type) +
                                  " is not supported"});
          }
          live_[std::move(key)] = Live{std::move(m), expires};
          break;
        }
      }
    }
  }
  std::erase_if(live_, [&](const auto& entry) { return entry.second.expires_at <= ctx.now; });
}

void MarkerArrayDisplay::render(const PluginContext& ctx, scene::NodeMap& out) const {
  for (const auto& [key, live] : live_) {
    const bridge::Marker& m = live.marker;
    const std::string frame = m.header.frame_id.empty() ? fixed_frame_ : txgraph::normalize_frame_id(m.header.frame_id);

    geom::Transformd root;
    if (frame != fixed_frame_) {
      try {
        if (m.header.stamp.is_zero()) {
          root = ctx.frames.lookup(fixed_frame_, frame);
        } else {
          try {
            root = ctx.frames.lookup(fixed_frame_, frame, m.header.stamp);
          } catch (const txgraph::ExtrapolationTooFar&) {
            root = ctx.frames.lookup(fixed_frame_, frame);
          }
        }
      } catch (const txgraph::TransformError&) {
        continue;
      }
    }
    const geom::Transformd pose = root * m.pose;
    const std::string base = id() + "/" + key.first + "/" + std::to_string(key.second);

    auto solid = [&](std::string node_id, scene::Primitive p, const geom::Transformd& at, const scene::Rgba& color) {
      scene::SceneNode n;
      n.node_id = std::move(node_id);
      n.primitive = p;
      n.pose_world = at;
      n.scale = m.scale;
      n.color = color;
      out[n.node_id] = std::move(n);
    };

    switch (m.type) {
      case bridge::MarkerType::Arrow:
        if (m.points.size() >= 2) {
          out[base] = span_node(base, scene::Primitive::ArrowMesh, pose.apply(m.points[0]), pose.apply(m.points[1]),
                                m.scale.x(), paint(m.color));
        } else {
          solid(base, scene::Primitive::ArrowMesh, pose, paint(m.color));
        }
        break;
      case bridge::MarkerType::Cube:
        solid(base, scene::Primitive::Cube, pose, paint(m.color));
        break;
      case bridge::MarkerType::Sphere:
        solid(base, scene::Primitive::Sphere, pose, paint(m.color));
        break;
      case bridge::MarkerType::Cylinder:
        solid(base, scene::Primitive::Cylinder, pose, paint(m.color));
        break;
      case bridge::MarkerType::LineStrip:
        for (std::size_t k = 0; k + 1 < m.points.size(); ++k) {
          const std::string nid = base + "/" + std::to_string(k);
          out[nid] = span_node(nid, scene::Primitive::Segment, pose.apply(m.points[k]), pose.apply(m.points[k + 1]),
                               m.scale.x(), point_color(m, k));
        }
        break;
      case bridge::MarkerType::LineList:
        for (std::size_t k = 0; k + 1 < m.points.size(); k += 2) {
          const std::string nid = base + "/" + std::to_string(k / 2);
          out[nid] = span_node(nid, scene::Primitive::Segment, pose.apply(m.points[k]), pose.apply(m.points[k + 1]),
                               m.scale.x(), point_color(m, k));
        }
        break;
      case bridge::MarkerType::CubeList:
      case bridge::MarkerType::SphereList:
      case bridge::MarkerType::Points: {
        const auto p = m.type == bridge::MarkerType::SphereList ? scene::Primitive::Sphere : scene::Primitive::Cube;
        for (std::size_t k = 0; k < m.points.size(); ++k) {
          solid(base + "/" + std::to_string(k), p,
                geom::Transformd(pose.apply(m.points[k]), pose.rotation), point_color(m, k));
        }
        break;
      }
      case bridge::MarkerType::Text: {
        scene::SceneNode n;
        n.node_id = base;
        n.primitive = scene::Primitive::Label;
        n.pose_world = pose;
        n.scale = Vec3d::Constant(m.scale.z());
        n.color = paint(m.color);
        n.text = m.text;
        out[base] = std::move(n);
        break;
      }
      case bridge::MarkerType::MeshResource:
      case bridge::MarkerType::TriangleList:
        break;
    }
  }
}

}  // namespace holoviz::plugins
