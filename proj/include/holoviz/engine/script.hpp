#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "holoviz/plugins/types.hpp"

namespace holoviz::engine {

struct ScriptError : std::runtime_error {
  ScriptError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line(line) {}
  std::size_t line;
};

/// Expected pose of `source` in `target` at the time of the check.
struct FrameAssertion {
  std::string target;
  std::string source;
  geom::Vec3d position = geom::Vec3d::Zero();
  double tolerance = 0.05;
};

/// One line of an input-event script. `t` is engine time in seconds since
/// start, so a faster time scale replays the same script sooner.
struct ScriptEntry {
  enum class Kind { Input, AssertFrame, Quit };

  double t = 0;
  Kind kind = Kind::Input;
  plugins::InputEvent event;
  FrameAssertion check;
};

/// One JSON object per line; blank lines and lines starting with '#' are
/// skipped. Entries come back sorted by time, ties in file order.
///   {"t": 0.5, "event": {"variant": "Tap", "ray": {...}}}
///   {"t": 1.0, "detection": {"marker_in_device": {...}, "device_in_vwcs": {...}}}
///   {"t": 6.0, "assert_frame": {"target": "map", "source": "base_link", "position": [2, 0, 0], "tolerance": 0.05}}
///   {"t": 6.5, "quit": true}
std::vector<ScriptEntry> parse_script(std::istream& in);
std::vector<ScriptEntry> load_script(const std::string& path);

}  // namespace holoviz::engine
