#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "holoviz/plugins/plugin.hpp"

namespace holoviz::engine {

using Json = nlohmann::ordered_json;

/// Invalid configuration; `path` names the offending field, e.g.
/// "plugins[1].id".
struct ConfigError : std::runtime_error {
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), path(std::move(field)) {}
  std::string path;
};

struct Config {
  std::string bridge_url = "ws://127.0.0.1:9090";
  int session_port = 9091;
  std::string session_host = "0.0.0.0";
  double tick_hz = 20;
  std::string log_level = "info";
  std::string web_root;
  std::vector<std::string> tf_topics{"/tf", "/tf_static"};
  geom::Transformd marker_in_rwcs;
  std::map<std::string, std::string> assets;  ///< extra meshes: name -> uri
  std::vector<plugins::PluginDescriptor> plugins;

  plugins::AssetRegistry asset_registry() const;

  friend bool operator==(const Config&, const Config&) = default;
};

/// Parses and validates; throws ConfigError.
Config parse_config(const Json& j);
Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);

/// Every field, defaults included.
Json to_json(const Config& c);

/// Re-checks invariants after flag overrides; throws ConfigError.
void validate(const Config& c);

const std::vector<std::string>& log_levels();

}  // namespace holoviz::engine
