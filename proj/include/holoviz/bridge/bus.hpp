#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "holoviz/bridge/codec.hpp"

namespace holoviz::bridge {

using SubscriptionId = std::uint64_t;

/// Topic-based publish/subscribe surface the plugins program against.
///
/// A handler that throws DecodeError counts as a dropped message; the bus
/// never forwards the exception.
class MessageBus {
 public:
  using RawHandler = std::function<void(const Json&)>;

  virtual ~MessageBus() = default;

  virtual SubscriptionId subscribe(const std::string& topic, const std::string& type, RawHandler handler) = 0;
  /// After this returns the handler is not running and will not run again.
  virtual void unsubscribe(SubscriptionId id) = 0;
  virtual void publish(const std::string& topic, const std::string& type, const Json& msg) = 0;
};

template <typename Message>
SubscriptionId subscribe(MessageBus& bus, const std::string& topic, std::function<void(const Message&)> handler) {
  return bus.subscribe(topic, Message::kType, [h = std::move(handler)](const Json& j) { h(from_json<Message>(j)); });
}

template <typename Message>
void publish(MessageBus& bus, const std::string& topic, const Message& msg) {
  bus.publish(topic, Message::kType, to_json(msg));
}

/// Synchronous in-process bus: publish delivers to local subscribers on the
/// calling thread and is recorded for inspection.
class LocalBus : public MessageBus {
 public:
  struct Published {
    std::string topic;
    std::string type;
    Json msg;
  };

  SubscriptionId subscribe(const std::string& topic, const std::string& type, RawHandler handler) override;
  void unsubscribe(SubscriptionId id) override;
  void publish(const std::string& topic, const std::string& type, const Json& msg) override;

  /// Delivers an incoming message as if it arrived from the network.
  void inject(const std::string& topic, const Json& msg);

  template <typename Message>
  void inject(const std::string& topic, const Message& msg) {
    inject(topic, to_json(msg));
  }

  std::vector<Published> published() const;
  std::vector<Published> take_published();
  std::vector<std::string> subscribed_topics() const;
  std::size_t drops() const { return drops_.load(); }

 private:
  struct Sub {
    std::string topic;
    std::string type;
    RawHandler handler;
  };
  mutable std::recursive_mutex mutex_;
  std::map<SubscriptionId, Sub> subs_;
  SubscriptionId next_id_ = 1;
  std::vector<Published> published_;
  std::atomic<std::size_t> drops_{0};
};

}  // namespace holoviz::bridge
