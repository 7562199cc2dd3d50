#include "holoviz/bridge/codec.hpp"

#include <cmath>

namespace holoviz::bridge {

namespace {

std::string path(const char* where, const char* key) { return std::string(where) + "." + key; }

const Json& field(const Json& j, const char* key, const char* where) {
  if (!j.is_object()) throw TypeMismatch(std::string(where) + ": expected object");
  auto it = j.find(key);
  if (it == j.end()) throw TypeMismatch("missing field '" + path(where, key) + "'");
  return *it;
}

double number(const Json& j, const char* key, const char* where) {
  const Json& v = field(j, key, where);
  if (!v.is_number()) throw TypeMismatch("field '" + path(where, key) + "' is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw TypeMismatch("field '" + path(where, key) + "' is not finite");
  return d;
}

std::int64_t integer(const Json& j, const char* key, const char* where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer()) throw TypeMismatch("field '" + path(where, key) + "' is not an integer");
  return v.get<std::int64_t>();
}

std::string text(const Json& j, const char* key, const char* where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) throw TypeMismatch("field '" + path(where, key) + "' is not a string");
  return v.get<std::string>();
}

bool flag(const Json& j, const char* key, const char* where, bool fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_boolean()) throw TypeMismatch("field '" + path(where, key) + "' is not a boolean");
  return v.get<bool>();
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw EncodeError(std::string(what) + " is not finite");
}

Json vec_json(const Vec3d& v, const char* what) {
  for (int i = 0; i < 3; ++i) require_finite(v[i], what);
  Json j;
  j["x"] = v.x();
  j["y"] = v.y();
  j["z"] = v.z();
  return j;
}

Json quat_json(const geom::UnitQuatd& q) {
  Json j;
  j["x"] = q.x();
  j["y"] = q.y();
  j["z"] = q.z();
  j["w"] = q.w();
  return j;
}

Json color_json(const Rgba& c) {
  for (double v : {c.r, c.g, c.b, c.a}) {
    require_finite(v, "color");
    if (v < 0 || v > 1) throw EncodeError("color component outside [0, 1]");
  }
  Json j;
  j["r"] = c.r;
  j["g"] = c.g;
  j["b"] = c.b;
  j["a"] = c.a;
  return j;
}

Json header_json(const Header& h) {
  Json j;
  j["seq"] = h.seq;
  j["stamp"] = stamp_json(h.stamp);
  j["frame_id"] = h.frame_id;
  return j;
}

Vec3d vec_from_json(const Json& j, const char* where) {
  return Vec3d(number(j, "x", where), number(j, "y", where), number(j, "z", where));
}

geom::UnitQuatd quat_from_json(const Json& j, const char* where) {
  const double x = number(j, "x", where);
  const double y = number(j, "y", where);
  const double z = number(j, "z", where);
  const double w = number(j, "w", where);
  const double n = std::sqrt(x * x + y * y + z * z + w * w);
  if (n == 0) return geom::UnitQuatd::identity();
  if (std::abs(n - 1) >= 1e-3) {
    throw TypeMismatch("quaternion '" + std::string(where) + "' has norm " + std::to_string(n));
  }
  return geom::UnitQuatd(x, y, z, w);
}

Rgba color_from_json(const Json& j, const char* where) {
  Rgba c{number(j, "r", where), number(j, "g", where), number(j, "b", where), number(j, "a", where)};
  for (double v : {c.r, c.g, c.b, c.a}) {
    if (v < 0 || v > 1) throw TypeMismatch("color '" + std::string(where) + "' outside [0, 1]");
  }
  return c;
}

Header header_from_json(const Json& j, const char* where) {
  Header h;
  if (j.contains("seq")) h.seq = static_cast<std::uint32_t>(integer(j, "seq", where));
  h.stamp = stamp_from_json(field(j, "stamp", where), where);
  h.frame_id = text(j, "frame_id", where);
  return h;
}

// Scale requirements for ADD, per primitive: lines use scale.x as width and
// text uses scale.z as height, other dimensions are ignored there.
void check_marker(const Marker& m, bool encoding) {
  auto fail = [&](const std::string& why) {
    const std::string msg = "marker " + m.ns + "/" + std::to_string(m.id) + ": " + why;
    if (encoding) throw EncodeError(msg);
    throw TypeMismatch(msg);
  };
  if (m.type == MarkerType::LineList && m.points.size() % 2 != 0) fail("LINE_LIST needs an even point count");
  if (m.action != MarkerAction::Add) return;
  switch (m.type) {
    case MarkerType::LineStrip:
    case MarkerType::LineList:
      if (!(m.scale.x() > 0)) fail("line width scale.x must be positive");
      break;
    case MarkerType::Text:
      if (!(m.scale.z() > 0)) fail("text height scale.z must be positive");
      break;
    default:
      if (!(m.scale.array() > 0).all()) fail("scale components must be positive");
  }
}

}  // namespace

const char* to_string(MarkerType t) {
  switch (t) {
    case MarkerType::Arrow: return "ARROW";
    case MarkerType::Cube: return "CUBE";
    case MarkerType::Sphere: return "SPHERE";
    case MarkerType::Cylinder: return "CYLINDER";
    case MarkerType::LineStrip: return "LINE_STRIP";
    case MarkerType::LineList: return "LINE_LIST";
    case MarkerType::CubeList: return "CUBE_LIST";
    case MarkerType::SphereList: return "SPHERE_LIST";
    case MarkerType::Points: return "POINTS";
    case MarkerType::Text: return "TEXT_VIEW_FACING";
    case MarkerType::MeshResource: return "MESH_RESOURCE";
    case MarkerType::TriangleList: return "TRIANGLE_LIST";
  }
  return "UNKNOWN";
}

const char* to_string(OpKind op) {
  switch (op) {
    case OpKind::Subscribe: return "subscribe";
    case OpKind::Unsubscribe: return "unsubscribe";
    case OpKind::Advertise: return "advertise";
    case OpKind::Unadvertise: return "unadvertise";
    case OpKind::Publish: return "publish";
    case OpKind::Status: return "status";
  }
  return "unknown";
}

BridgeOp BridgeOp::subscribe(std::string topic, std::string type, std::optional<std::string> id) {
  BridgeOp op;
  op.op = OpKind::Subscribe;
  op.topic = std::move(topic);
  op.type = std::move(type);
  op.id = std::move(id);
  return op;
}

BridgeOp BridgeOp::unsubscribe(std::string topic, std::optional<std::string> id) {
  BridgeOp op;
  op.op = OpKind::Unsubscribe;
  op.topic = std::move(topic);
  op.id = std::move(id);
  return op;
}

BridgeOp BridgeOp::advertise(std::string topic, std::string type) {
  BridgeOp op;
  op.op = OpKind::Advertise;
  op.topic = std::move(topic);
  op.type = std::move(type);
  return op;
}

BridgeOp BridgeOp::unadvertise(std::string topic) {
  BridgeOp op;
  op.op = OpKind::Unadvertise;
  op.topic = std::move(topic);
  return op;
}

BridgeOp BridgeOp::publish(std::string topic, Json msg) {
  BridgeOp op;
  op.op = OpKind::Publish;
  op.topic = std::move(topic);
  op.msg = std::move(msg);
  return op;
}

BridgeOp BridgeOp::status(std::string level, std::string message, std::optional<std::string> id) {
  BridgeOp op;
  op.op = OpKind::Status;
  op.level = std::move(level);
  op.msg = std::move(message);
  op.id = std::move(id);
  return op;
}

std::string encode(const BridgeOp& op) {
  Json j;
  j["op"] = to_string(op.op);
  if (op.id) j["id"] = *op.id;
  if (op.op == OpKind::Status) {
    if (!op.msg.is_string()) throw EncodeError("status msg must be a string");
    if (op.level) j["level"] = *op.level;
    j["msg"] = op.msg;
    return j.dump();
  }
  if (op.topic.empty()) throw EncodeError(std::string(to_string(op.op)) + " requires a topic");
  j["topic"] = op.topic;
  if (!op.type.empty()) j["type"] = op.type;
  if (op.op == OpKind::Advertise && op.type.empty()) throw EncodeError("advertise requires a type");
  if (op.throttle_rate) j["throttle_rate"] = *op.throttle_rate;
  if (op.op == OpKind::Publish) {
    if (!op.msg.is_object()) throw EncodeError("publish requires an object msg");
    j["msg"] = op.msg;
  }
  return j.dump();
}

BridgeOp decode(std::string_view bytes) {
  Json j;
  try {
    j = Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError("malformed JSON envelope", e.byte);
  }
  if (!j.is_object()) throw DecodeError("envelope is not a JSON object");
  auto op_it = j.find("op");
  if (op_it == j.end() || !op_it->is_string()) throw DecodeError("envelope lacks a string 'op'");
  const std::string name = op_it->get<std::string>();

  BridgeOp op;
  if (j.contains("id")) {
    const Json& id = j.at("id");
    op.id = id.is_string() ? id.get<std::string>() : id.dump();
  }
  if (name == "subscribe") op.op = OpKind::Subscribe;
  else if (name == "unsubscribe") op.op = OpKind::Unsubscribe;
  else if (name == "advertise") op.op = OpKind::Advertise;
  else if (name == "unadvertise") op.op = OpKind::Unadvertise;
  else if (name == "publish") op.op = OpKind::Publish;
  else if (name == "status") op.op = OpKind::Status;
  else throw UnsupportedOp(name, op.id);

  auto optional_string = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_string()) throw DecodeError(std::string("field '") + key + "' is not a string");
    return it->get<std::string>();
  };

  if (op.op == OpKind::Status) {
    op.level = optional_string("level");
    auto msg = j.find("msg");
    if (msg == j.end() || !msg->is_string()) throw DecodeError("status requires a string msg");
    op.msg = *msg;
    return op;
  }

  auto topic = optional_string("topic");
  if (!topic || topic->empty()) throw DecodeError(name + " requires a topic");
  op.topic = *topic;
  op.type = optional_string("type").value_or("");
  if (op.op == OpKind::Advertise && op.type.empty()) throw DecodeError("advertise requires a type");
  if (auto it = j.find("throttle_rate"); it != j.end()) {
    if (!it->is_number_integer()) throw DecodeError("throttle_rate is not an integer");
    op.throttle_rate = it->get<int>();
  }
  if (op.op == OpKind::Publish) {
    auto msg = j.find("msg");
    if (msg == j.end() || !msg->is_object()) throw DecodeError("publish requires an object msg");
    op.msg = *msg;
  }
  return op;
}

Json stamp_json(Stamp s) {
  Json j;
  j["secs"] = s.secs();
  j["nsecs"] = s.nsecs();
  return j;
}

Stamp stamp_from_json(const Json& j, const char* where) {
  // ROS 2 bridges spell these sec/nanosec.
  const bool ros2 = j.is_object() && j.contains("sec");
  const std::int64_t secs = integer(j, ros2 ? "sec" : "secs", where);
  const std::int64_t nsecs = integer(j, ros2 ? "nanosec" : "nsecs", where);
  if (secs < 0 || nsecs < 0 || nsecs >= 1'000'000'000) throw TypeMismatch(std::string(where) + ": invalid time");
  return Stamp::from_parts(secs, nsecs);
}

Json to_json(const Transformd& pose) {
  Json j;
  j["position"] = vec_json(pose.translation, "position");
  j["orientation"] = quat_json(pose.rotation);
  return j;
}

Transformd pose_from_json(const Json& j, const char* where) {
  return Transformd(vec_from_json(field(j, "position", where), where),
                    quat_from_json(field(j, "orientation", where), where));
}

Json to_json(const txgraph::StampedTransform& t, std::uint32_t seq) {
  if (t.parent.empty() || t.child.empty()) throw EncodeError("transform needs parent and child frame ids");
  Json j;
  j["header"] = header_json(Header{seq, t.stamp, t.parent});
  j["child_frame_id"] = t.child;
  Json tf;
  tf["translation"] = vec_json(t.transform.translation, "translation");
  tf["rotation"] = quat_json(t.transform.rotation);
  j["transform"] = std::move(tf);
  return j;
}

Json to_json(const TFMessage& m) {
  Json list = Json::array();
  for (const auto& t : m.transforms) list.push_back(to_json(t));
  Json j;
  j["transforms"] = std::move(list);
  return j;
}

Json to_json(const Marker& m) {
  check_marker(m, true);
  Json j;
  j["header"] = header_json(m.header);
  j["ns"] = m.ns;
  j["id"] = m.id;
  j["type"] = static_cast<int>(m.type);
  j["action"] = static_cast<int>(m.action);
  j["pose"] = to_json(m.pose);
  j["scale"] = vec_json(m.scale, "scale");
  j["color"] = color_json(m.color);
  j["lifetime"] = stamp_json(m.lifetime);
  j["frame_locked"] = m.frame_locked;
  Json points = Json::array();
  for (const auto& p : m.points) points.push_back(vec_json(p, "point"));
  j["points"] = std::move(points);
  Json colors = Json::array();
  for (const auto& c : m.colors) colors.push_back(color_json(c));
  j["colors"] = std::move(colors);
  j["text"] = m.text;
  j["mesh_resource"] = m.mesh_resource;
  j["mesh_use_embedded_materials"] = m.mesh_use_embedded_materials;
  return j;
}

Json to_json(const MarkerArray& m) {
  Json list = Json::array();
  for (const auto& marker : m.markers) list.push_back(to_json(marker));
  Json j;
  j["markers"] = std::move(list);
  return j;
}

Json to_json(const PoseStamped& m) {
  Json j;
  j["header"] = header_json(m.header);
  j["pose"] = to_json(m.pose);
  return j;
}

Json to_json(const CommandString& m) {
  if (m.data.empty()) throw EncodeError("command string is empty");
  Json j;
  j["data"] = m.data;
  return j;
}

template <>
TFMessage from_json<TFMessage>(const Json& j) {
  const Json& list = field(j, "transforms", "TFMessage");
  if (!list.is_array()) throw TypeMismatch("TFMessage.transforms is not an array");
  TFMessage out;
  out.transforms.reserve(list.size());
  for (const Json& item : list) {
    txgraph::StampedTransform t;
    const Header h = header_from_json(field(item, "header", "transform"), "transform.header");
    t.parent = h.frame_id;
    t.stamp = h.stamp;
    t.child = text(item, "child_frame_id", "transform");
    const Json& tf = field(item, "transform", "transform");
    t.transform = Transformd(vec_from_json(field(tf, "translation", "transform"), "translation"),
                             quat_from_json(field(tf, "rotation", "transform"), "rotation"));
    if (t.parent.empty() || t.child.empty()) throw TypeMismatch("transform with empty frame id");
    out.transforms.push_back(std::move(t));
  }
  return out;
}

template <>
Marker from_json<Marker>(const Json& j) {
  Marker m;
  m.header = header_from_json(field(j, "header", "marker"), "marker.header");
  m.ns = text(j, "ns", "marker");
  m.id = static_cast<std::int32_t>(integer(j, "id", "marker"));
  const auto type = integer(j, "type", "marker");
  if (type < 0 || type > static_cast<int>(MarkerType::TriangleList)) {
    throw TypeMismatch("marker type " + std::to_string(type) + " is not defined");
  }
  m.type = static_cast<MarkerType>(type);
  const auto action = integer(j, "action", "marker");
  if (action != 0 && action != 2 && action != 3) {
    throw TypeMismatch("marker action " + std::to_string(action) + " is not defined");
  }
  m.action = static_cast<MarkerAction>(action);
  if (m.action == MarkerAction::DeleteAll || m.action == MarkerAction::Delete) {
    // Deletions only need the key; tolerate sparse messages.
    if (j.contains("pose")) m.pose = pose_from_json(j.at("pose"), "marker.pose");
    if (j.contains("scale")) m.scale = vec_from_json(j.at("scale"), "marker.scale");
  } else {
    m.pose = pose_from_json(field(j, "pose", "marker"), "marker.pose");
    m.scale = vec_from_json(field(j, "scale", "marker"), "marker.scale");
  }
  if (j.contains("color")) m.color = color_from_json(j.at("color"), "marker.color");
  if (j.contains("lifetime")) m.lifetime = stamp_from_json(j.at("lifetime"), "marker.lifetime");
  m.frame_locked = flag(j, "frame_locked", "marker", false);
  if (j.contains("points")) {
    const Json& pts = j.at("points");
    if (!pts.is_array()) throw TypeMismatch("marker.points is not an array");
    for (const Json& p : pts) m.points.push_back(vec_from_json(p, "marker.points"));
  }
  if (j.contains("colors")) {
    const Json& cs = j.at("colors");
    if (!cs.is_array()) throw TypeMismatch("marker.colors is not an array");
    for (const Json& c : cs) m.colors.push_back(color_from_json(c, "marker.colors"));
  }
  if (j.contains("text")) m.text = text(j, "text", "marker");
  if (j.contains("mesh_resource")) m.mesh_resource = text(j, "mesh_resource", "marker");
  m.mesh_use_embedded_materials = flag(j, "mesh_use_embedded_materials", "marker", false);
  check_marker(m, false);
  return m;
}

template <>
MarkerArray from_json<MarkerArray>(const Json& j) {
  const Json& list = field(j, "markers", "MarkerArray");
  if (!list.is_array()) throw TypeMismatch("MarkerArray.markers is not an array");
  MarkerArray out;
  out.markers.reserve(list.size());
  for (const Json& item : list) out.markers.push_back(from_json<Marker>(item));
  return out;
}

template <>
PoseStamped from_json<PoseStamped>(const Json& j) {
  PoseStamped out;
  out.header = header_from_json(field(j, "header", "PoseStamped"), "PoseStamped.header");
  out.pose = pose_from_json(field(j, "pose", "PoseStamped"), "PoseStamped.pose");
  return out;
}

template <>
CommandString from_json<CommandString>(const Json& j) {
  CommandString out{text(j, "data", "String")};
  if (out.data.empty()) throw TypeMismatch("String.data is empty");
  return out;
}

}  // namespace holoviz::bridge
