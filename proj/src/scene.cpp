#include "holoviz/scene.hpp"

#include <algorithm>
#include <cmath>

namespace holoviz::scene {

namespace {

Json vec_json(const Vec3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3d vec_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument(std::string(what) + " must be [x, y, z]");
  return Vec3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void append_micro(std::string& out, double v) {
  out += std::to_string(std::llround(v * 1e6));
  out += ',';
}

}  // namespace

const char* to_string(Primitive p) {
  switch (p) {
    case Primitive::Segment: return "Segment";
    case Primitive::Cube: return "Cube";
    case Primitive::Sphere: return "Sphere";
    case Primitive::Cylinder: return "Cylinder";
    case Primitive::ArrowMesh: return "ArrowMesh";
    case Primitive::Label: return "Label";
    case Primitive::MeshRef: return "MeshRef";
  }
  return "Cube";
}

Primitive primitive_from_string(const std::string& name) {
  for (auto p : {Primitive::Segment, Primitive::Cube, Primitive::Sphere, Primitive::Cylinder, Primitive::ArrowMesh,
                 Primitive::Label, Primitive::MeshRef}) {
    if (name == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown primitive '" + name + "'");
}

Rgba Rgba::clamped(double r, double g, double b, double a) {
  auto c = [](double v) { return std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0; };
  return Rgba{c(r), c(g), c(b), c(a)};
}

SceneDiff diff_nodes(const NodeMap& from, const NodeMap& to, std::uint64_t epoch) {
  SceneDiff d;
  d.epoch = epoch;
  auto a = from.begin();
  auto b = to.begin();
  while (a != from.end() || b != to.end()) {
    if (b == to.end() || (a != from.end() && a->first < b->first)) {
      d.deletes.push_back(a->first);
      ++a;
    } else if (a == from.end() || b->first < a->first) {
      d.upserts.push_back(b->second);
      ++b;
    } else {
      if (!(a->second == b->second)) d.upserts.push_back(b->second);
      ++a;
      ++b;
    }
  }
  d.hash = scene_hash(to);
  return d;
}

Snapshot apply_diff(Snapshot snapshot, const SceneDiff& diff) {
  if (diff.reset) {
    snapshot.nodes.clear();
  } else if (diff.epoch != snapshot.epoch + 1) {
    throw EpochGap(snapshot.epoch, diff.epoch);
  }
  for (const auto& id : diff.deletes) snapshot.nodes.erase(id);
  for (const auto& node : diff.upserts) snapshot.nodes.insert_or_assign(node.node_id, node);
  snapshot.epoch = diff.epoch;
  return snapshot;
}

SceneDiff full_diff(const Snapshot& snapshot) {
  SceneDiff d;
  d.epoch = snapshot.epoch;
  d.reset = true;
  d.upserts.reserve(snapshot.nodes.size());
  for (const auto& [id, node] : snapshot.nodes) d.upserts.push_back(node);
  d.hash = scene_hash(snapshot.nodes);
  return d;
}

// Sum over nodes of FNV-1a-64 of
//   id|primitive|tx,ty,tz,qx,qy,qz,qw,sx,sy,sz,r,g,b,a,|text|visible
// with every number written as round(v * 1e6).
std::uint64_t scene_hash(const NodeMap& nodes) {
  std::uint64_t sum = 0;
  std::string buf;
  for (const auto& [id, n] : nodes) {
    buf.clear();
    buf += id;
    buf += '|';
    buf += to_string(n.primitive);
    buf += '|';
    const auto& t = n.pose_world.translation;
    const auto& q = n.pose_world.rotation;
    for (double v : {t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w(), n.scale.x(), n.scale.y(), n.scale.z(),
                     n.color.r, n.color.g, n.color.b, n.color.a}) {
      append_micro(buf, v);
    }
    buf += '|';
    buf += n.text;
    buf += '|';
    buf += n.visible ? '1' : '0';
    sum += fnv1a(buf);
  }
  return sum;
}

Json to_json(const SceneNode& n) {
  Json j;
  j["id"] = n.node_id;
  j["primitive"] = to_string(n.primitive);
  const auto& q = n.pose_world.rotation;
  j["pose"] = {{"translation", vec_json(n.pose_world.translation)},
               {"rotation", Json::array({q.x(), q.y(), q.z(), q.w()})}};
  j["scale"] = vec_json(n.scale);
  j["color"] = Json::array({n.color.r, n.color.g, n.color.b, n.color.a});
  j["text"] = n.text;
  j["visible"] = n.visible;
  return j;
}

SceneNode node_from_json(const Json& j) {
  SceneNode n;
  n.node_id = j.at("id").get<std::string>();
  n.primitive = primitive_from_string(j.at("primitive").get<std::string>());
  const Json& pose = j.at("pose");
  const Json& r = pose.at("rotation");
  if (!r.is_array() || r.size() != 4) throw std::invalid_argument("rotation must be [x, y, z, w]");
  n.pose_world = Transformd(vec_from(pose.at("translation"), "translation"),
                            geom::UnitQuatd(r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                                            r[3].get<double>()));
  n.scale = vec_from(j.at("scale"), "scale");
  const Json& c = j.at("color");
  if (!c.is_array() || c.size() != 4) throw std::invalid_argument("color must be [r, g, b, a]");
  n.color = Rgba{c[0].get<double>(), c[1].get<double>(), c[2].get<double>(), c[3].get<double>()};
  n.text = j.value("text", std::string());
  n.visible = j.value("visible", true);
  return n;
}

Json to_json(const SceneDiff& d) {
  Json j;
  j["epoch"] = d.epoch;
  j["reset"] = d.reset;
  Json ups = Json::array();
  for (const auto& n : d.upserts) ups.push_back(to_json(n));
  j["upserts"] = std::move(ups);
  j["deletes"] = d.deletes;
  j["hash"] = std::to_string(d.hash);  // 64-bit values do not survive JS numbers
  return j;
}

SceneDiff diff_from_json(const Json& j) {
  SceneDiff d;
  d.epoch = j.at("epoch").get<std::uint64_t>();
  d.reset = j.value("reset", false);
  for (const auto& n : j.at("upserts")) d.upserts.push_back(node_from_json(n));
  for (const auto& id : j.at("deletes")) d.deletes.push_back(id.get<std::string>());
  if (j.contains("hash")) d.hash = std::stoull(j.at("hash").get<std::string>());
  return d;
}

SceneDiff Scene::commit(NodeMap world_nodes, const NodeMap& device_nodes) {
  for (const auto& [id, node] : device_nodes) {
    SceneNode placed = node;
    placed.pose_world = device_root_ * node.pose_world;
    world_nodes.insert_or_assign(id, std::move(placed));
  }
  SceneDiff d = diff_nodes(snapshot_.nodes, world_nodes, snapshot_.epoch + 1);
  snapshot_.nodes = std::move(world_nodes);
  snapshot_.epoch = d.epoch;
  return d;
}

}  // namespace holoviz::scene
