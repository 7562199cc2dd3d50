#pragma once

#include <atomic>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "holoviz/geom.hpp"
#include "holoviz/time.hpp"

namespace holoviz::txgraph {

using geom::Transformd;

struct TransformError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CycleRejected : TransformError {
  using TransformError::TransformError;
};
struct UnknownFrame : TransformError {
  using TransformError::TransformError;
};
struct Disconnected : TransformError {
  using TransformError::TransformError;
};
struct ExtrapolationTooFar : TransformError {
  using TransformError::TransformError;
};
struct InvalidTransform : TransformError {
  using TransformError::TransformError;
};

/// Strips leading slashes ("/map" -> "map"); throws InvalidTransform when
/// nothing is left.
std::string normalize_frame_id(std::string_view name);

struct StampedTransform {
  std::string parent;
  std::string child;
  Stamp stamp;
  Transformd transform;  ///< child pose expressed in parent
};

struct FrameInfo {
  std::string frame;
  std::optional<std::string> parent;
  Stamp latest;

  friend bool operator==(const FrameInfo&, const FrameInfo&) = default;
};

/// Time-buffered directed tree of rigid transforms between named frames.
///
/// One writer and any number of readers may use a tree concurrently; every
/// public call takes the internal lock, so readers never see a half-updated
/// edge buffer.
class FrameTree {
 public:
  static constexpr double kDefaultWindow = 10.0;
  static constexpr double kExtrapolationTolerance = 0.1;

  explicit FrameTree(double window_seconds = kDefaultWindow) : window_(window_seconds) {}

  /// Adds a sample to the child's edge. A different parent re-parents the
  /// edge and drops its history; a parent change that would close a loop
  /// throws CycleRejected and leaves the tree untouched.
  void insert(const StampedTransform& st);

  /// Pose of `source` expressed in `target`. With no time given, the chain
  /// is evaluated at the newest time every edge on the path can answer.
  Transformd lookup(std::string_view target, std::string_view source, std::optional<Stamp> at = std::nullopt) const;

  /// Child frames with their current parent and newest sample stamp.
  std::vector<FrameInfo> frames() const;

  /// Every frame mentioned as a parent or a child.
  std::vector<std::string> all_frames() const;

  bool known(std::string_view frame) const;

  /// Number of samples currently buffered on the child's edge (0 if absent).
  std::size_t buffered(std::string_view child) const;

  /// Oldest and newest stamps on the child's edge.
  std::optional<std::pair<Stamp, Stamp>> buffered_span(std::string_view child) const;

  std::size_t rejected_count() const { return rejected_.load(); }

  /// True when following parent links from any frame never revisits a frame.
  bool acyclic() const;

  void clear();

 private:
  struct Sample {
    Stamp stamp;
    Transformd transform;
  };
  struct Edge {
    std::string parent;
    std::vector<Sample> samples;  // strictly increasing stamps
  };

  Transformd evaluate(const std::string& child, const Edge& edge, Stamp at) const;
  std::vector<std::string> chain_to_root(const std::string& frame) const;
  bool is_known(const std::string& frame) const;

  double window_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, Edge> edges_;
  std::unordered_map<std::string, std::size_t> parent_refs_;
  std::atomic<std::size_t> rejected_{0};
};

}  // namespace holoviz::txgraph
