#pragma once

// The twelve canonical envelopes and the typed values they are built from.
// Fixture files hold the bytes a rosbridge v2.0 peer expects for each.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "holoviz/bridge/codec.hpp"

namespace golden {

using namespace holoviz;
using namespace holoviz::bridge;

struct Case {
  std::string file;
  BridgeOp op;
};

inline std::vector<Case> cases() {
  std::vector<Case> out;
  out.push_back({"subscribe_tf.json", BridgeOp::subscribe("/tf", TFMessage::kType)});
  auto markers = BridgeOp::subscribe("/visualization_marker_array", MarkerArray::kType,
                                     "subscribe:/visualization_marker_array:1");
  markers.throttle_rate = 50;
  out.push_back({"subscribe_marker_array.json", markers});
  out.push_back({"subscribe_pose_stamped.json", BridgeOp::subscribe("/robot_pose", PoseStamped::kType)});
  out.push_back({"subscribe_string.json", BridgeOp::subscribe("/handover/command", CommandString::kType)});
  out.push_back({"advertise_pose_stamped.json", BridgeOp::advertise("/move_base_simple/goal", PoseStamped::kType)});
  out.push_back({"advertise_string.json", BridgeOp::advertise("/handover/command", CommandString::kType)});

  txgraph::StampedTransform tf{"map", "base_link", Stamp::from_parts(1000, 250000000),
                               geom::Transformd(geom::Vec3d(1.5, -0.25, 0), geom::UnitQuatd(0, 0, 0.6, 0.8))};
  out.push_back({"publish_tf.json", BridgeOp::publish("/tf", Json{{"transforms", Json::array({to_json(tf, 7)})}})});

  Marker arrow;
  arrow.header = Header{3, Stamp::from_parts(1000, 500000000), "map"};
  arrow.ns = "intent";
  arrow.id = 0;
  arrow.type = MarkerType::Arrow;
  arrow.scale = geom::Vec3d(0.05, 0.1, 0.15);
  arrow.color = Rgba{1.0, 0.5, 0.0, 0.9};
  arrow.points = {geom::Vec3d(0.5, 0, 0), geom::Vec3d(2, 0, 0)};
  out.push_back({"publish_marker_array.json",
                 BridgeOp::publish("/visualization_marker_array", to_json(MarkerArray{{arrow}}))});

  PoseStamped goal;
  goal.header = Header{1, Stamp::from_parts(12, 0), "map"};
  goal.pose = geom::Transformd::from_translation(geom::Vec3d(2, 0, 0));
  out.push_back({"publish_pose_stamped.json", BridgeOp::publish("/move_base_simple/goal", to_json(goal))});
  out.push_back({"publish_string.json", BridgeOp::publish("/handover/command", to_json(CommandString{"start"}))});

  out.push_back({"status_info.json", BridgeOp::status("info", "mockros nav ready")});
  out.push_back(
      {"status_error.json", BridgeOp::status("error", "op 'call_service' is not supported by mockros", "call:1")});
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// File contents without the trailing newline.
inline std::string fixture(const std::string& name) {
  std::string text = read_file(std::string(HOLOVIZ_SOURCE_DIR) + "/tests/fixtures/golden/" + name);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

inline std::vector<std::string> capture_lines(const std::string& name) {
  std::ifstream in(std::string(HOLOVIZ_SOURCE_DIR) + "/tests/fixtures/rosbridge_captures/" + name);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

/// Decodes one capture line fully: envelope, then payload as `Message`.
template <typename Message>
Message decode_capture(const std::string& line) {
  return from_json<Message>(decode(line).msg);
}

}  // namespace golden
