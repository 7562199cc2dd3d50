#include <algorithm>
#include <cctype>

#include "holoviz/plugins/builtin.hpp"

namespace holoviz::plugins {

namespace {

std::string fold(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

CommandTool::CommandTool(PluginDescriptor d, Json settings) : Plugin(std::move(d)) {
  for (const auto& [word, cmd] : settings["keywords"].items()) keywords_[fold(word)] = cmd.get<std::string>();
  descriptor_.settings = std::move(settings);
}

void CommandTool::handle_input(PluginContext& ctx, const InputEvent& ev) {
  if (ev.variant != InputEvent::Variant::Command) return;
  const std::string word = fold(ev.command);
  std::string command;
  if (keywords_.empty()) {
    command = word;
  } else if (auto it = keywords_.find(word); it != keywords_.end()) {
    command = it->second;
  }
  if (command.empty()) return;
  bridge::publish(ctx.bus, descriptor_.topic, bridge::CommandString{command});
}

}  // namespace holoviz::plugins
