#include "holoviz/bridge/bus.hpp"

#include <set>

namespace holoviz::bridge {

SubscriptionId LocalBus::subscribe(const std::string& topic, const std::string& type, RawHandler handler) {
  std::lock_guard lock(mutex_);
  const SubscriptionId id = next_id_++;
  subs_.emplace(id, Sub{topic, type, std::move(handler)});
  return id;
}

void LocalBus::unsubscribe(SubscriptionId id) {
  std::lock_guard lock(mutex_);
  subs_.erase(id);
}

void LocalBus::publish(const std::string& topic, const std::string& type, const Json& msg) {
  {
    std::lock_guard lock(mutex_);
    published_.push_back(Published{topic, type, msg});
  }
  inject(topic, msg);
}

void LocalBus::inject(const std::string& topic, const Json& msg) {
  std::vector<RawHandler> targets;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, sub] : subs_) {
      if (sub.topic == topic) targets.push_back(sub.handler);
    }
  }
  for (const auto& handler : targets) {
    try {
      handler(msg);
    } catch (const DecodeError&) {
      ++drops_;
    }
  }
}

std::vector<LocalBus::Published> LocalBus::published() const {
  std::lock_guard lock(mutex_);
  return published_;
}

std::vector<LocalBus::Published> LocalBus::take_published() {
  std::lock_guard lock(mutex_);
  return std::exchange(published_, {});
}

std::vector<std::string> LocalBus::subscribed_topics() const {
  std::lock_guard lock(mutex_);
  std::set<std::string> topics;
  for (const auto& [id, sub] : subs_) topics.insert(sub.topic);
  return {topics.begin(), topics.end()};
}

}  // namespace holoviz::bridge
