#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "holoviz/bridge/codec.hpp"
#include "holoviz/mockros/scenario.hpp"
#include "holoviz/net/channel.hpp"

namespace holoviz::mockros {

struct ServerOptions {
  double time_scale = 1.0;  ///< simulated seconds per wall second
  Stamp epoch = Stamp::from_parts(1000, 0);  ///< simulated clock at start
};

/// Mock rosbridge server running one scenario.
///
/// Speaks the same envelopes as rosbridge: subscribe, unsubscribe,
/// advertise, unadvertise and publish are honoured and fanned out; any other
/// op gets a status error and the connection stays up. A plain HTTP GET on
/// /introspection returns the connected clients with their subscriptions
/// and advertisements as JSON.
class MockRos {
 public:
  struct ClientInfo {
    std::uint64_t id = 0;
    std::string peer;
    std::map<std::string, std::string> subscriptions;   ///< topic -> type
    std::map<std::string, std::string> advertisements;  ///< topic -> type
  };

  /// Throws net::BindError, ScenarioError.
  MockRos(const net::Endpoint& bind, ScenarioScript script, ServerOptions options = {});
  ~MockRos();
  MockRos(const MockRos&) = delete;
  MockRos& operator=(const MockRos&) = delete;

  std::uint16_t port() const;
  std::string url() const;
  void stop();

  /// Publishes to every subscribed client, as if a ROS node had.
  void publish(const std::string& topic, const bridge::Json& msg);

  std::vector<ClientInfo> clients() const;
  bridge::Json introspection() const;
  /// Union of all clients' subscribed topics.
  std::set<std::string> subscribed_topics() const;

  // Scenario state, for tests.
  RobotState robot() const;
  std::optional<Goal> goal() const;
  HandoverState handover() const;
  double sim_time() const;
  std::size_t published_count(const std::string& topic) const;

  /// Every publish envelope a client sent, in arrival order.
  std::vector<bridge::BridgeOp> received() const;

 private:
  struct Client {
    std::shared_ptr<net::Channel> channel;
    ClientInfo info;
  };

  void accept(std::shared_ptr<net::Channel> channel);
  void on_message(std::uint64_t id, std::string&& text);
  void on_client_publish(const bridge::BridgeOp& op);
  void send_to(std::uint64_t id, const bridge::BridgeOp& op);
  void fan_out(const std::string& topic, const bridge::Json& msg);
  void loop();
  void step(double dt, Stamp now);

  ScenarioScript script_;
  ServerOptions options_;

  mutable std::mutex clients_mutex_;
  std::map<std::uint64_t, Client> clients_;
  std::uint64_t next_client_ = 1;
  std::vector<bridge::BridgeOp> received_;
  std::map<std::string, std::size_t> published_;
  std::map<std::string, std::uint32_t> seq_;

  mutable std::mutex state_mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
  RobotState robot_;
  std::optional<Goal> goal_;
  std::size_t waypoint_ = 0;
  HandoverState handover_;
  std::vector<std::string> pending_commands_;
  double sim_time_ = 0;
  double next_marker_ = 0;
  double next_handover_ = 0;
  bool intent_shown_ = false;

  std::unique_ptr<net::Server> server_;
  std::thread loop_;
};

}  // namespace holoviz::mockros
