#include "holoviz/engine/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "holoviz/net/channel.hpp"

namespace holoviz::engine {

namespace {

template <typename T>
T take(const Json& j, const char* key, const std::string& expected, bool (Json::*is)() const noexcept) {
  const Json& v = j.at(key);
  if (!(v.*is)()) throw ConfigError(key, "expected " + expected);
  return v.get<T>();
}

}  // namespace

const std::vector<std::string>& log_levels() {
  static const std::vector<std::string> levels{"trace", "debug", "info", "warn", "error", "critical", "off"};
  return levels;
}

plugins::AssetRegistry Config::asset_registry() const {
  auto registry = plugins::AssetRegistry::builtin();
  for (const auto& [name, uri] : assets) registry.add(name, uri);
  return registry;
}

void validate(const Config& c) {
  try {
    net::Endpoint::parse(c.bridge_url);
  } catch (const net::NetError& e) {
    throw ConfigError("bridge_url", e.what());
  }
  if (c.session_port < 0 || c.session_port > 65535) throw ConfigError("session_port", "must lie in [0, 65535]");
  if (!(c.tick_hz > 0)) throw ConfigError("tick_hz", "must be positive");
  if (std::find(log_levels().begin(), log_levels().end(), c.log_level) == log_levels().end()) {
    throw ConfigError("log_level", "unknown level '" + c.log_level + "'");
  }
  for (std::size_t i = 0; i < c.tf_topics.size(); ++i) {
    if (c.tf_topics[i].empty()) throw ConfigError("tf_topics[" + std::to_string(i) + "]", "must be nonempty");
  }
  if (!c.marker_in_rwcs.finite()) throw ConfigError("marker_in_rwcs", "must be finite");

  const auto assets = c.asset_registry();
  std::set<std::string> ids;
  for (std::size_t i = 0; i < c.plugins.size(); ++i) {
    const auto& d = c.plugins[i];
    const std::string where = "plugins[" + std::to_string(i) + "]";
    if (!ids.insert(d.id).second) throw ConfigError(where + ".id", "duplicate id '" + d.id + "'");
    try {
      plugins::effective_settings(d.type, d.settings, assets, where + ".settings");
    } catch (const plugins::SettingsError& e) {
      throw ConfigError("", e.what());
    }
  }
}

Config parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
  static const std::set<std::string> known{"bridge_url", "session_port", "session_host", "tick_hz",
                                           "log_level",  "web_root",     "tf_topics",    "marker_in_rwcs",
                                           "assets",     "plugins"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(key, "unknown field");
  }

  Config c;
  if (j.contains("bridge_url")) c.bridge_url = take<std::string>(j, "bridge_url", "string", &Json::is_string);
  if (j.contains("session_port")) c.session_port = take<int>(j, "session_port", "integer", &Json::is_number_integer);
  if (j.contains("session_host")) c.session_host = take<std::string>(j, "session_host", "string", &Json::is_string);
  if (j.contains("tick_hz")) c.tick_hz = take<double>(j, "tick_hz", "number", &Json::is_number);
  if (j.contains("log_level")) c.log_level = take<std::string>(j, "log_level", "string", &Json::is_string);
  if (j.contains("web_root")) c.web_root = take<std::string>(j, "web_root", "string", &Json::is_string);
  if (j.contains("tf_topics")) {
    const Json& t = j.at("tf_topics");
    if (!t.is_array()) throw ConfigError("tf_topics", "expected array of topic names");
    c.tf_topics.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t[i].is_string()) throw ConfigError("tf_topics[" + std::to_string(i) + "]", "expected string");
      c.tf_topics.push_back(t[i].get<std::string>());
    }
  }
  if (j.contains("marker_in_rwcs")) {
    try {
      c.marker_in_rwcs = plugins::transform_from_json(j.at("marker_in_rwcs"));
    } catch (const std::exception& e) {
      throw ConfigError("marker_in_rwcs", e.what());
    }
  }
  if (j.contains("assets")) {
    const Json& a = j.at("assets");
    if (!a.is_object()) throw ConfigError("assets", "expected object of name -> uri");
    for (const auto& [name, uri] : a.items()) {
      if (!uri.is_string()) throw ConfigError("assets." + name, "expected string");
      c.assets[name] = uri.get<std::string>();
    }
  }
  if (j.contains("plugins")) {
    const Json& p = j.at("plugins");
    if (!p.is_array()) throw ConfigError("plugins", "expected array");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string where = "plugins[" + std::to_string(i) + "]";
      try {
        c.plugins.push_back(plugins::descriptor_from_json(p[i], where));
      } catch (const plugins::PluginError& e) {
        throw ConfigError("", e.what());
      }
    }
  }
  validate(c);
  return c;
}

Config parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

Json to_json(const Config& c) {
  Json j;
  j["bridge_url"] = c.bridge_url;
  j["session_port"] = c.session_port;
  j["session_host"] = c.session_host;
  j["tick_hz"] = c.tick_hz;
  j["log_level"] = c.log_level;
  j["web_root"] = c.web_root;
  j["tf_topics"] = c.tf_topics;
  j["marker_in_rwcs"] = plugins::to_json(c.marker_in_rwcs);
  j["assets"] = Json::object();
  for (const auto& [name, uri] : c.assets) j["assets"][name] = uri;
  j["plugins"] = Json::array();
  for (const auto& d : c.plugins) {
    Json pj = plugins::to_json(d);
    pj.erase("kind");
    j["plugins"].push_back(std::move(pj));
  }
  return j;
}

}  // namespace holoviz::engine
