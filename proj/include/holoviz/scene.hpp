#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "holoviz/geom.hpp"

namespace holoviz::scene {

using geom::Transformd;
using geom::Vec3d;
using Json = nlohmann::ordered_json;

enum class Primitive { Segment, Cube, Sphere, Cylinder, ArrowMesh, Label, MeshRef };

const char* to_string(Primitive p);
Primitive primitive_from_string(const std::string& name);

struct Rgba {
  double r = 1, g = 1, b = 1, a = 1;

  /// Each component clamped into [0, 1].
  static Rgba clamped(double r, double g, double b, double a);

  friend bool operator==(const Rgba&, const Rgba&) = default;
};

/// One renderable element in world coordinates.
///
/// Segment and ArrowMesh run along the node's +x axis from its origin with
/// length scale.x; Label carries its string in `text`; MeshRef carries the
/// asset name in `text`.
struct SceneNode {
  std::string node_id;
  Primitive primitive = Primitive::Cube;
  Transformd pose_world;
  Vec3d scale = Vec3d::Ones();
  Rgba color;
  std::string text;
  bool visible = true;

  friend bool operator==(const SceneNode&, const SceneNode&) = default;
};

using NodeMap = std::map<std::string, SceneNode>;

struct SceneDiff {
  std::uint64_t epoch = 0;
  /// Apply to an empty scene instead of the previous epoch.
  bool reset = false;
  std::vector<SceneNode> upserts;
  std::vector<std::string> deletes;
  /// scene_hash() of the scene after this diff.
  std::uint64_t hash = 0;

  bool empty() const { return upserts.empty() && deletes.empty(); }
};

struct Snapshot {
  std::uint64_t epoch = 0;
  NodeMap nodes;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct EpochGap : std::runtime_error {
  EpochGap(std::uint64_t have, std::uint64_t got)
      : std::runtime_error("diff epoch " + std::to_string(got) + " does not follow " + std::to_string(have)),
        have(have),
        got(got) {}
  std::uint64_t have;
  std::uint64_t got;
};

/// Changes turning `from` into `to`, in node_id order.
SceneDiff diff_nodes(const NodeMap& from, const NodeMap& to, std::uint64_t epoch);

/// Throws EpochGap unless diff.reset or diff.epoch == snapshot.epoch + 1.
Snapshot apply_diff(Snapshot snapshot, const SceneDiff& diff);

/// Reset-diff that rebuilds `snapshot` from nothing.
SceneDiff full_diff(const Snapshot& snapshot);

/// Order-independent content hash; see docs/session-protocol.md.
std::uint64_t scene_hash(const NodeMap& nodes);

Json to_json(const SceneNode& node);
SceneNode node_from_json(const Json& j);
Json to_json(const SceneDiff& diff);
SceneDiff diff_from_json(const Json& j);

/// Engine-side authoritative scene.
///
/// Content arrives in two layers: world nodes are already expressed in the
/// output frame, device nodes are tracked in the headset's own frame and get
/// the device root applied on every commit.
class Scene {
 public:
  /// Replaces the whole scene content and returns the change as the next
  /// epoch. An unchanged scene still advances the epoch with an empty diff.
  SceneDiff commit(NodeMap world_nodes, const NodeMap& device_nodes = {});

  void set_device_root(const Transformd& root) { device_root_ = root; }
  const Transformd& device_root() const { return device_root_; }

  const Snapshot& snapshot() const { return snapshot_; }
  std::uint64_t epoch() const { return snapshot_.epoch; }

 private:
  Snapshot snapshot_;
  Transformd device_root_;
};

}  // namespace holoviz::scene
