#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "holoviz/engine/engine.hpp"

namespace {

holoviz::engine::Engine* g_engine = nullptr;

void on_signal(int) {
  if (g_engine) g_engine->request_stop();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace holoviz;

  CLI::App app{"holoviz: ROS visualization engine streaming scene diffs to viewer sessions"};
  std::string config_path;
  std::string url;
  int session_port = -1;
  bool headless = false;
  std::string script_path;
  double time_scale = 1.0;
  std::string log_level;
  app.add_option("--config", config_path, "JSON config file (falls back to $HOLOVIZ_CONFIG)");
  app.add_option("--url", url, "rosbridge endpoint, e.g. ws://127.0.0.1:9090");
  app.add_option("--session-port", session_port, "viewer session port (0 picks a free port)")->check(CLI::Range(0, 65535));
  app.add_flag("--headless", headless, "tick without waiting for a viewer");
  app.add_option("--script", script_path, "input-event script to replay");
  app.add_option("--time-scale", time_scale, "engine seconds per wall second")->check(CLI::PositiveNumber);
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|critical|off");
  CLI11_PARSE(app, argc, argv);

  engine::Config config;
  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("HOLOVIZ_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) config = engine::load_config(config_path);
    if (!url.empty()) config.bridge_url = url;
    if (session_port >= 0) config.session_port = session_port;
    if (!log_level.empty()) config.log_level = log_level;
    engine::validate(config);
  } catch (const engine::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  spdlog::set_level(spdlog::level::from_str(config.log_level));

  engine::EngineOptions options;
  options.headless = headless;
  options.time_scale = time_scale;
  if (!script_path.empty()) {
    try {
      options.script = engine::load_script(script_path);
    } catch (const engine::ScriptError& e) {
      std::cerr << "script error: " << script_path << ": " << e.what() << "\n";
      return 2;
    }
  }

  try {
    engine::Engine engine(config, std::move(options));
    g_engine = &engine;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    engine.start();
    const int code = engine.wait();
    g_engine = nullptr;
    return code;
  } catch (const std::exception& e) {
    g_engine = nullptr;
    spdlog::critical("{}", e.what());
    return 1;
  }
}
