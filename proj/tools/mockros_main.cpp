#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "holoviz/mockros/server.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  using namespace holoviz;

  CLI::App app{"mockros: mock rosbridge server with scripted robot scenarios"};
  std::string scenario = "nav";
  std::string bind = "127.0.0.1:9090";
  std::string port_file;
  std::string log_level = "info";
  mockros::ScenarioScript script;
  mockros::ServerOptions options;
  app.add_option("--scenario", scenario, "nav | occluded_intent | handover");
  app.add_option("--bind", bind, "host:port to listen on (port 0 picks a free port)");
  app.add_option("--speed", script.speed, "robot speed, m/s")->check(CLI::PositiveNumber);
  app.add_option("--tf-rate", script.tf_rate, "/tf broadcast rate, Hz of wall time")->check(CLI::PositiveNumber);
  app.add_option("--handover-rate", script.handover_rate, "grasp update rate, Hz of simulated time")
      ->check(CLI::PositiveNumber);
  app.add_option("--time-scale", options.time_scale, "simulated seconds per wall second")->check(CLI::PositiveNumber);
  app.add_option("--port-file", port_file, "write the bound port here once listening");
  app.add_option("--log-level", log_level, "spdlog level");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    script.name = mockros::scenario_from_string(scenario);
    auto endpoint = net::Endpoint::parse(bind);
    mockros::MockRos server(endpoint, script, options);
    spdlog::info("mockros {} listening on {}:{}", scenario, endpoint.host, server.port());
    if (!port_file.empty()) {
      const std::string tmp = port_file + ".tmp";
      std::ofstream(tmp) << server.port() << "\n";
      std::rename(tmp.c_str(), port_file.c_str());
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "mockros: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
