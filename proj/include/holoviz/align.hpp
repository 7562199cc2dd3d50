#pragma once

#include "holoviz/geom.hpp"
#include "holoviz/scene.hpp"
#include "holoviz/time.hpp"

namespace holoviz::align {

using geom::Transformd;

/// A fiducial sighting: the marker seen from the device, and the device as
/// tracked in the virtual world.
struct MarkerDetection {
  Transformd marker_in_device;
  Transformd device_in_vwcs;
  Stamp stamp;
};

struct WorldAlignment {
  Transformd marker_in_rwcs;  ///< where the physical marker is known to be
  Transformd vwcs_to_rwcs;    ///< maps virtual-world coordinates into the real world
  bool aligned = false;
};

/// Correction T_rwcs<-vwcs that carries the sighted marker onto its known
/// real-world placement:
///   marker_in_rwcs * inverse(device_in_vwcs * marker_in_device)
Transformd solve_alignment(const MarkerDetection& det, const Transformd& marker_in_rwcs);

/// Virtual-world pose of the sighted marker.
inline Transformd marker_in_vwcs(const MarkerDetection& det) { return det.device_in_vwcs * det.marker_in_device; }

/// Solves from `det` and stores the result; a later detection replaces it.
void update_alignment(WorldAlignment& world, const MarkerDetection& det);

/// Re-roots the scene's device layer onto the real world. Takes effect at the
/// scene's next commit, for old and new device nodes alike.
void apply_alignment(WorldAlignment& world, scene::Scene& scene);

/// Device-layer nodes for a sighting: the marker plate and the device, in
/// virtual-world coordinates.
scene::NodeMap detection_nodes(const MarkerDetection& det);

inline constexpr const char* kMarkerNodeId = "align/marker";
inline constexpr const char* kDeviceNodeId = "align/device";

}  // namespace holoviz::align
