#include "holoviz/align.hpp"

namespace holoviz::align {

Transformd solve_alignment(const MarkerDetection& det, const Transformd& marker_in_rwcs) {
  return marker_in_rwcs * geom::invert(marker_in_vwcs(det));
}

void update_alignment(WorldAlignment& world, const MarkerDetection& det) {
  world.vwcs_to_rwcs = solve_alignment(det, world.marker_in_rwcs);
}

void apply_alignment(WorldAlignment& world, scene::Scene& scene) {
  scene.set_device_root(world.vwcs_to_rwcs);
  world.aligned = true;
}

scene::NodeMap detection_nodes(const MarkerDetection& det) {
  scene::NodeMap out;
  scene::SceneNode plate;
  plate.node_id = kMarkerNodeId;
  plate.primitive = scene::Primitive::Cube;
  plate.pose_world = marker_in_vwcs(det);
  plate.scale = geom::Vec3d(0.15, 0.15, 0.002);
  plate.color = scene::Rgba{1, 1, 1, 0.8};
  out.emplace(plate.node_id, plate);

  scene::SceneNode device;
  device.node_id = kDeviceNodeId;
  device.primitive = scene::Primitive::Sphere;
  device.pose_world = det.device_in_vwcs;
  device.scale = geom::Vec3d(0.05, 0.05, 0.05);
  device.color = scene::Rgba{0.2, 0.6, 1.0, 0.6};
  out.emplace(device.node_id, device);
  return out;
}

}  // namespace holoviz::align
