#include "holoviz/engine/script.hpp"

#include <algorithm>
#include <fstream>

namespace holoviz::engine {

using plugins::Json;

namespace {

ScriptEntry parse_line(const Json& j, std::size_t line) {
  if (!j.is_object()) throw ScriptError(line, "expected a JSON object");
  if (!j.contains("t") || !j.at("t").is_number()) throw ScriptError(line, "missing numeric 't'");
  ScriptEntry e;
  e.t = j.at("t").get<double>();
  if (!(e.t >= 0)) throw ScriptError(line, "'t' must be non-negative");

  const int kinds = j.contains("event") + j.contains("detection") + j.contains("assert_frame") + j.contains("quit");
  if (kinds != 1) throw ScriptError(line, "expected exactly one of event, detection, assert_frame, quit");
  try {
    if (j.contains("event")) {
      e.event = plugins::input_from_json(j.at("event"));
    } else if (j.contains("detection")) {
      Json wrapped{{"variant", "Detection"}, {"detection", j.at("detection")}};
      e.event = plugins::input_from_json(wrapped);
    } else if (j.contains("assert_frame")) {
      const Json& a = j.at("assert_frame");
      e.kind = ScriptEntry::Kind::AssertFrame;
      e.check.target = a.at("target").get<std::string>();
      e.check.source = a.at("source").get<std::string>();
      const Json& p = a.at("position");
      if (!p.is_array() || p.size() != 3) throw ScriptError(line, "position must be [x, y, z]");
      e.check.position = geom::Vec3d(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
      e.check.tolerance = a.value("tolerance", 0.05);
      if (!(e.check.tolerance >= 0)) throw ScriptError(line, "tolerance must be non-negative");
    } else {
      e.kind = ScriptEntry::Kind::Quit;
    }
  } catch (const plugins::InvalidInput& err) {
    throw ScriptError(line, err.what());
  } catch (const nlohmann::json::exception& err) {
    throw ScriptError(line, err.what());
  }
  return e;
}

}  // namespace

std::vector<ScriptEntry> parse_script(std::istream& in) {
  std::vector<ScriptEntry> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos || text[first] == '#') continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ScriptError(line, e.what());
    }
    out.push_back(parse_line(j, line));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return out;
}

std::vector<ScriptEntry> load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScriptError(0, "cannot read script '" + path + "'");
  return parse_script(in);
}

}  // namespace holoviz::engine
