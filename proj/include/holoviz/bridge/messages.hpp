#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "holoviz/geom.hpp"
#include "holoviz/time.hpp"
#include "holoviz/txgraph.hpp"

namespace holoviz::bridge {

using geom::Transformd;
using geom::Vec3d;

struct Header {
  std::uint32_t seq = 0;
  Stamp stamp;
  std::string frame_id;

  friend bool operator==(const Header&, const Header&) = default;
};

struct Rgba {
  double r = 1, g = 1, b = 1, a = 1;

  friend bool operator==(const Rgba&, const Rgba&) = default;
};

/// tf2_msgs/TFMessage
struct TFMessage {
  static constexpr const char* kType = "tf2_msgs/TFMessage";
  std::vector<txgraph::StampedTransform> transforms;
};

// Numeric values follow visualization_msgs/Marker.
enum class MarkerType : int {
  Arrow = 0,
  Cube = 1,
  Sphere = 2,
  Cylinder = 3,
  LineStrip = 4,
  LineList = 5,
  CubeList = 6,
  SphereList = 7,
  Points = 8,
  Text = 9,
  MeshResource = 10,
  TriangleList = 11,
};

enum class MarkerAction : int { Add = 0, Delete = 2, DeleteAll = 3 };

/// visualization_msgs/Marker
struct Marker {
  static constexpr const char* kType = "visualization_msgs/Marker";

  Header header;
  std::string ns;
  std::int32_t id = 0;
  MarkerType type = MarkerType::Cube;
  MarkerAction action = MarkerAction::Add;
  Transformd pose;
  Vec3d scale = Vec3d::Ones();
  Rgba color;
  Stamp lifetime;  ///< zero means forever
  bool frame_locked = false;
  std::vector<Vec3d> points;
  std::vector<Rgba> colors;
  std::string text;
  std::string mesh_resource;
  bool mesh_use_embedded_materials = false;
};

/// visualization_msgs/MarkerArray
struct MarkerArray {
  static constexpr const char* kType = "visualization_msgs/MarkerArray";
  std::vector<Marker> markers;
};

/// geometry_msgs/PoseStamped
struct PoseStamped {
  static constexpr const char* kType = "geometry_msgs/PoseStamped";
  Header header;
  Transformd pose;
};

/// std_msgs/String
struct CommandString {
  static constexpr const char* kType = "std_msgs/String";
  std::string data;
};

const char* to_string(MarkerType t);

}  // namespace holoviz::bridge
