#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "holoviz/bridge/messages.hpp"

namespace holoviz::bridge {

/// Payloads keep insertion order so that encoding is byte-stable.
using Json = nlohmann::ordered_json;

struct DecodeError : std::runtime_error {
  DecodeError(std::string reason, std::size_t position = 0)
      : std::runtime_error(position ? reason + " (at byte " + std::to_string(position) + ")" : reason),
        position(position) {}
  std::size_t position;
};

/// Envelope is well formed but names an op this client does not speak.
struct UnsupportedOp : DecodeError {
  UnsupportedOp(std::string op_name, std::optional<std::string> request_id)
      : DecodeError("unsupported op '" + op_name + "'"), op(std::move(op_name)), id(std::move(request_id)) {}
  std::string op;
  std::optional<std::string> id;
};

/// Payload does not decode as the declared message type.
struct TypeMismatch : DecodeError {
  using DecodeError::DecodeError;
};

struct EncodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OpKind { Subscribe, Unsubscribe, Advertise, Unadvertise, Publish, Status };

const char* to_string(OpKind op);

/// One rosbridge v2.0 envelope.
struct BridgeOp {
  OpKind op = OpKind::Status;
  std::string topic;
  std::string type;
  Json msg;  ///< object for publish, string for status
  std::optional<std::string> id;
  std::optional<int> throttle_rate;  ///< ms
  std::optional<std::string> level;  ///< status only

  static BridgeOp subscribe(std::string topic, std::string type, std::optional<std::string> id = std::nullopt);
  static BridgeOp unsubscribe(std::string topic, std::optional<std::string> id = std::nullopt);
  static BridgeOp advertise(std::string topic, std::string type);
  static BridgeOp unadvertise(std::string topic);
  static BridgeOp publish(std::string topic, Json msg);
  static BridgeOp status(std::string level, std::string message, std::optional<std::string> id = std::nullopt);

  friend bool operator==(const BridgeOp&, const BridgeOp&) = default;
};

/// Canonical compact JSON with fixed field order:
/// op, id, topic, type, throttle_rate, msg (status: op, id, level, msg).
std::string encode(const BridgeOp& op);

/// Throws DecodeError (with byte position for syntax errors), UnsupportedOp,
/// or DecodeError for missing op-specific fields.
BridgeOp decode(std::string_view bytes);

// Message payload codecs. Field names and nesting follow the ROS definitions.
// Decoders throw TypeMismatch; encoders throw EncodeError on non-finite
// values or violated invariants.

Json to_json(const txgraph::StampedTransform& t, std::uint32_t seq = 0);
Json to_json(const TFMessage& m);
Json to_json(const Marker& m);
Json to_json(const MarkerArray& m);
Json to_json(const PoseStamped& m);
Json to_json(const CommandString& m);

Json to_json(const Transformd& pose);  ///< geometry_msgs/Pose
Json stamp_json(Stamp s);

template <typename Message>
Message from_json(const Json& j);

template <>
TFMessage from_json<TFMessage>(const Json& j);
template <>
Marker from_json<Marker>(const Json& j);
template <>
MarkerArray from_json<MarkerArray>(const Json& j);
template <>
PoseStamped from_json<PoseStamped>(const Json& j);
template <>
CommandString from_json<CommandString>(const Json& j);

/// Pose decoding shared by messages: quaternions within 1e-3 of unit norm are
/// renormalized, further off throw TypeMismatch. An all-zero quaternion is
/// read as identity, matching how ROS viewers treat uninitialized poses.
Transformd pose_from_json(const Json& j, const char* where = "pose");
Stamp stamp_from_json(const Json& j, const char* where = "stamp");

}  // namespace holoviz::bridge
