#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "holoviz/bridge/bus.hpp"
#include "holoviz/net/channel.hpp"

namespace holoviz::bridge {

struct ConnectRefused : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SessionOptions {
  /// Connection attempts before giving up, for the first connect and for
  /// each outage.
  int retry_budget = 8;
  double backoff_initial = 0.5;  ///< seconds
  double backoff_cap = 8.0;      ///< seconds
  std::size_t queue_depth = 64;  ///< per subscription, oldest dropped first
  std::chrono::milliseconds connect_timeout{2000};
};

struct SessionStats {
  std::size_t received = 0;       ///< publish envelopes matched to a subscription
  std::size_t decode_drops = 0;   ///< payloads that failed to decode as the declared type
  std::size_t queue_drops = 0;    ///< evicted by a full subscription queue
  std::size_t envelope_errors = 0;
  std::size_t reconnects = 0;
  std::size_t publish_drops = 0;  ///< publishes attempted while disconnected
};

/// rosbridge v2.0 client.
///
/// Socket reads happen on an I/O thread; handlers run on a separate dispatch
/// thread, one message at a time, in arrival order per subscription. On a
/// dropped connection the session reconnects with exponential backoff and
/// re-issues every active advertise and subscribe.
class Session : public MessageBus {
 public:
  using StatusHandler = std::function<void(const std::string& level, const std::string& message)>;

  explicit Session(std::string url, SessionOptions options = {});
  ~Session() override;
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Blocks until connected; throws ConnectRefused once the retry budget is
  /// spent.
  void connect();
  void close();

  SubscriptionId subscribe(const std::string& topic, const std::string& type, RawHandler handler) override;
  void unsubscribe(SubscriptionId id) override;
  /// Advertises the topic on first use. Throws EncodeError on a bad payload.
  void publish(const std::string& topic, const std::string& type, const Json& msg) override;

  /// Server status envelopes and local connection state changes.
  void set_status_handler(StatusHandler handler);

  bool connected() const { return connected_.load(); }
  SessionStats stats() const;
  std::vector<std::string> subscribed_topics() const;
  const std::string& url() const { return url_; }

 private:
  struct Sub {
    std::string topic;
    std::string type;
    RawHandler handler;
    std::deque<Json> queue;
  };
  struct StatusEvent {
    std::string level;
    std::string message;
  };

  std::shared_ptr<net::Channel> try_connect();
  void attach(std::shared_ptr<net::Channel> channel);
  void on_message(std::string&& text);
  void on_closed(const net::Channel* which);
  void send(const BridgeOp& op);
  void resend_state();
  void supervise();
  void dispatch_loop();
  void report(std::string level, std::string message);
  double backoff(int attempt) const;

  std::string url_;
  net::Endpoint endpoint_;
  SessionOptions options_;
  net::IoThread io_;

  mutable std::mutex mutex_;
  std::condition_variable wake_;          // supervisor
  std::condition_variable dispatch_cv_;   // dispatcher
  std::condition_variable idle_cv_;       // unsubscribe waits on in-flight handlers
  std::shared_ptr<net::Channel> channel_;
  std::map<SubscriptionId, Sub> subs_;
  std::map<std::string, std::string> topic_types_;  // wire subscriptions
  std::map<std::string, std::string> advertised_;
  std::deque<StatusEvent> statuses_;
  StatusHandler status_handler_;
  SubscriptionId next_id_ = 1;
  SubscriptionId in_flight_ = 0;
  SessionStats stats_;
  bool stopping_ = false;
  bool lost_ = false;
  bool gave_up_ = false;
  std::atomic<bool> connected_{false};
  std::thread::id dispatcher_id_;
  std::thread supervisor_;
  std::thread dispatcher_;
};

}  // namespace holoviz::bridge
