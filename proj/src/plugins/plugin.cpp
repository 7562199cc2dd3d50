#include "holoviz/plugins/plugin.hpp"

#include "holoviz/plugins/builtin.hpp"

namespace holoviz::plugins {

namespace {

Json rgba(double r, double g, double b, double a) { return Json::array({r, g, b, a}); }

bool same_kind(const Json& expected, const Json& given) {
  if (expected.is_number()) return given.is_number();
  return expected.type() == given.type();
}

void check_color(const Json& c, const std::string& path) {
  if (c.size() != 4) throw SettingsError(path + ": color must be [r, g, b, a]");
  for (const auto& v : c) {
    if (!v.is_number() || v.get<double>() < 0 || v.get<double>() > 1) {
      throw SettingsError(path + ": color components must lie in [0, 1]");
    }
  }
}

}  // namespace

void Plugin::set_visibility(const std::string& element, bool) {
  throw InvalidAction(id() + ": no visibility element '" + element + "'");
}

AssetRegistry AssetRegistry::builtin() {
  AssetRegistry r;
  r.add("fetch", "package://fetch_description/meshes/base_link.dae");
  r.add("panda_hand", "package://franka_description/meshes/visual/hand.dae");
  r.add("turtlebot3", "package://turtlebot3_description/meshes/bases/burger_base.stl");
  return r;
}

const Json& default_settings(PluginType type) {
  static const Json tf = {
      {"fixed_frame", "map"},   {"axis_length", 0.15},  {"label_height", 0.05}, {"show_axes", true},
      {"show_names", true},     {"show_arrows", true},  {"show_frames", true},  {"hidden_frames", Json::array()},
  };
  static const Json markers = {{"fixed_frame", "map"}};
  static const Json pose = {
      {"fixed_frame", "map"},  {"mesh", ""},
      {"opacity", 1.0},        {"color", rgba(1.0, 0.1, 0.1, 1.0)},
      {"arrow_length", 0.6},   {"shaft_diameter", 0.05},
  };
  static const Json arrow = {{"frame_id", "map"}, {"color", rgba(0.2, 0.9, 0.2, 1.0)}};
  static const Json command = {{"keywords", Json::object()}};
  switch (type) {
    case PluginType::TfDisplay: return tf;
    case PluginType::MarkerArrayDisplay: return markers;
    case PluginType::StampedPoseDisplay: return pose;
    case PluginType::Arrow2dTool: return arrow;
    case PluginType::CommandTool: return command;
  }
  return command;
}

Json effective_settings(PluginType type, const Json& given, const AssetRegistry& assets, const std::string& where) {
  Json out = default_settings(type);
  if (given.is_null()) return out;
  if (!given.is_object()) throw SettingsError(where + ": expected object");
  for (const auto& [key, value] : given.items()) {
    const std::string path = where + "." + key;
    if (!out.contains(key)) throw SettingsError(path + ": unknown setting for " + std::string(to_string(type)));
    if (!same_kind(out[key], value)) {
      throw SettingsError(path + ": expected " + std::string(out[key].type_name()) + ", got " + value.type_name());
    }
    out[key] = value;
  }

  if (out.contains("color")) check_color(out["color"], where + ".color");
  for (const char* key : {"axis_length", "label_height", "arrow_length", "shaft_diameter"}) {
    if (out.contains(key) && !(out[key].get<double>() > 0)) throw SettingsError(where + "." + key + ": must be positive");
  }
  if (out.contains("opacity")) {
    const double o = out["opacity"].get<double>();
    if (o < 0 || o > 1) throw SettingsError(where + ".opacity: must lie in [0, 1]");
  }
  for (const char* key : {"fixed_frame", "frame_id"}) {
    if (out.contains(key) && out[key].get<std::string>().empty()) throw SettingsError(where + "." + key + ": must be nonempty");
  }
  if (out.contains("hidden_frames")) {
    for (const auto& f : out["hidden_frames"]) {
      if (!f.is_string()) throw SettingsError(where + ".hidden_frames: expected frame names");
    }
  }
  if (out.contains("mesh")) {
    const auto mesh = out["mesh"].get<std::string>();
    if (!mesh.empty() && !assets.contains(mesh)) throw SettingsError(where + ".mesh: unknown asset '" + mesh + "'");
  }
  if (out.contains("keywords")) {
    for (const auto& [word, cmd] : out["keywords"].items()) {
      if (!cmd.is_string() || cmd.get<std::string>().empty()) {
        throw SettingsError(where + ".keywords." + word + ": expected nonempty command string");
      }
    }
  }
  return out;
}

std::unique_ptr<Plugin> make_plugin(const PluginDescriptor& descriptor, const AssetRegistry& assets) {
  Json settings = effective_settings(descriptor.type, descriptor.settings, assets, descriptor.id + ".settings");
  switch (descriptor.type) {
    case PluginType::TfDisplay: return std::make_unique<TfDisplay>(descriptor, std::move(settings));
    case PluginType::MarkerArrayDisplay: return std::make_unique<MarkerArrayDisplay>(descriptor, std::move(settings));
    case PluginType::StampedPoseDisplay: return std::make_unique<StampedPoseDisplay>(descriptor, std::move(settings));
    case PluginType::Arrow2dTool: return std::make_unique<Arrow2dTool>(descriptor, std::move(settings));
    case PluginType::CommandTool: return std::make_unique<CommandTool>(descriptor, std::move(settings));
  }
  throw UnknownType("unsupported plugin type");
}

}  // namespace holoviz::plugins
