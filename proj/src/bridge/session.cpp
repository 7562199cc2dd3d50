#include "holoviz/bridge/session.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

namespace holoviz::bridge {

Session::Session(std::string url, SessionOptions options)
    : url_(std::move(url)), endpoint_(net::Endpoint::parse(url_)), options_(options) {
  dispatcher_ = std::thread([this] { dispatch_loop(); });
}

Session::~Session() { close(); }

double Session::backoff(int attempt) const {
  return std::min(options_.backoff_cap, options_.backoff_initial * std::pow(2.0, attempt));
}

std::shared_ptr<net::Channel> Session::try_connect() {
  try {
    return net::dial(io_, endpoint_, options_.connect_timeout);
  } catch (const net::ConnectError& e) {
    spdlog::debug("bridge: {}", e.what());
    return nullptr;
  }
}

void Session::connect() {
  for (int attempt = 0; attempt < options_.retry_budget; ++attempt) {
    if (attempt > 0) {
      std::unique_lock lock(mutex_);
      const auto delay = std::chrono::duration<double>(backoff(attempt - 1));
      if (wake_.wait_for(lock, delay, [this] { return stopping_; })) break;
    }
    if (auto channel = try_connect()) {
      attach(std::move(channel));
      spdlog::info("bridge: connected to {}", url_);
      report("info", "connected to " + url_);
      if (!supervisor_.joinable()) supervisor_ = std::thread([this] { supervise(); });
      return;
    }
  }
  report("error", "ConnectRefused: " + url_);
  throw ConnectRefused("could not connect to " + url_ + " after " + std::to_string(options_.retry_budget) +
                       " attempts");
}

void Session::attach(std::shared_ptr<net::Channel> channel) {
  auto* raw = channel.get();
  {
    std::lock_guard lock(mutex_);
    channel_ = channel;
    lost_ = false;
    connected_ = true;
    resend_state();
  }
  channel->start([this](std::string&& text) { on_message(std::move(text)); }, [this, raw] { on_closed(raw); });
}

void Session::resend_state() {
  for (const auto& [topic, type] : advertised_) send(BridgeOp::advertise(topic, type));
  for (const auto& [topic, type] : topic_types_) send(BridgeOp::subscribe(topic, type, "subscribe:" + topic));
}

void Session::send(const BridgeOp& op) {
  if (channel_) channel_->send(encode(op));
}

void Session::on_closed(const net::Channel* which) {
  {
    std::lock_guard lock(mutex_);
    if (channel_.get() != which) return;
    channel_.reset();
    connected_ = false;
    if (stopping_) return;
    lost_ = true;
  }
  spdlog::warn("bridge: connection to {} lost", url_);
  report("warning", "connection lost: " + url_);
  wake_.notify_all();
}

void Session::supervise() {
  for (;;) {
    std::unique_lock lock(mutex_);
    wake_.wait(lock, [this] { return stopping_ || lost_; });
    if (stopping_) return;
    lock.unlock();

    bool restored = false;
    for (int attempt = 0; attempt < options_.retry_budget && !restored; ++attempt) {
      lock.lock();
      const auto delay = std::chrono::duration<double>(backoff(attempt));
      const bool stop = wake_.wait_for(lock, delay, [this] { return stopping_; });
      lock.unlock();
      if (stop) return;
      if (auto channel = try_connect()) {
        {
          std::lock_guard guard(mutex_);
          ++stats_.reconnects;
        }
        attach(std::move(channel));
        spdlog::info("bridge: reconnected to {}", url_);
        report("info", "reconnected to " + url_);
        restored = true;
      }
    }
    if (!restored) {
      {
        std::lock_guard guard(mutex_);
        lost_ = false;
        gave_up_ = true;
      }
      spdlog::error("bridge: giving up on {}", url_);
      report("error", "ConnectRefused: " + url_);
      return;
    }
  }
}

void Session::on_message(std::string&& text) {
  BridgeOp op;
  try {
    op = decode(text);
  } catch (const DecodeError& e) {
    std::lock_guard lock(mutex_);
    ++stats_.envelope_errors;
    return;
  }
  if (op.op == OpKind::Status) {
    report(op.level.value_or("info"), op.msg.get<std::string>());
    return;
  }
  if (op.op != OpKind::Publish) return;
  {
    std::lock_guard lock(mutex_);
    bool matched = false;
    for (auto& [id, sub] : subs_) {
      if (sub.topic != op.topic) continue;
      matched = true;
      sub.queue.push_back(op.msg);
      if (sub.queue.size() > options_.queue_depth) {
        sub.queue.pop_front();
        ++stats_.queue_drops;
      }
    }
    if (matched) ++stats_.received;
  }
  dispatch_cv_.notify_one();
}

void Session::report(std::string level, std::string message) {
  {
    std::lock_guard lock(mutex_);
    statuses_.push_back(StatusEvent{std::move(level), std::move(message)});
  }
  dispatch_cv_.notify_one();
}

void Session::dispatch_loop() {
  dispatcher_id_ = std::this_thread::get_id();
  std::unique_lock lock(mutex_);
  for (;;) {
    dispatch_cv_.wait(lock, [this] {
      if (stopping_ || !statuses_.empty()) return true;
      return std::any_of(subs_.begin(), subs_.end(), [](const auto& kv) { return !kv.second.queue.empty(); });
    });
    if (stopping_) return;

    while (!statuses_.empty()) {
      StatusEvent ev = std::move(statuses_.front());
      statuses_.pop_front();
      auto handler = status_handler_;
      lock.unlock();
      if (handler) handler(ev.level, ev.message);
      lock.lock();
    }

    // One message per subscription per pass keeps topics interleaved fairly.
    SubscriptionId cursor = 0;
    for (auto it = subs_.upper_bound(cursor); it != subs_.end(); it = subs_.upper_bound(cursor)) {
      cursor = it->first;
      if (it->second.queue.empty()) continue;
      Json msg = std::move(it->second.queue.front());
      it->second.queue.pop_front();
      RawHandler handler = it->second.handler;
      const std::string topic = it->second.topic;
      in_flight_ = cursor;
      lock.unlock();
      bool dropped = false;
      try {
        handler(msg);
      } catch (const DecodeError& e) {
        dropped = true;
        spdlog::debug("bridge: dropped message on {}: {}", topic, e.what());
      } catch (const std::exception& e) {
        spdlog::warn("bridge: handler for {} threw: {}", topic, e.what());
      }
      lock.lock();
      if (dropped) ++stats_.decode_drops;
      in_flight_ = 0;
      idle_cv_.notify_all();
      if (stopping_) return;
    }
  }
}

SubscriptionId Session::subscribe(const std::string& topic, const std::string& type, RawHandler handler) {
  std::lock_guard lock(mutex_);
  const SubscriptionId id = next_id_++;
  subs_.emplace(id, Sub{topic, type, std::move(handler), {}});
  if (!topic_types_.count(topic)) {
    topic_types_[topic] = type;
    send(BridgeOp::subscribe(topic, type, "subscribe:" + topic));
  }
  return id;
}

void Session::unsubscribe(SubscriptionId id) {
  std::unique_lock lock(mutex_);
  auto it = subs_.find(id);
  if (it == subs_.end()) return;
  const std::string topic = it->second.topic;
  subs_.erase(it);
  const bool still_used =
      std::any_of(subs_.begin(), subs_.end(), [&](const auto& kv) { return kv.second.topic == topic; });
  if (!still_used) {
    topic_types_.erase(topic);
    send(BridgeOp::unsubscribe(topic, "subscribe:" + topic));
  }
  if (std::this_thread::get_id() != dispatcher_id_) {
    idle_cv_.wait(lock, [&] { return in_flight_ != id; });
  }
}

void Session::publish(const std::string& topic, const std::string& type, const Json& msg) {
  BridgeOp op = BridgeOp::publish(topic, msg);
  std::string wire = encode(op);
  std::lock_guard lock(mutex_);
  if (!channel_) {
    ++stats_.publish_drops;
    return;
  }
  if (!advertised_.count(topic)) {
    advertised_[topic] = type;
    send(BridgeOp::advertise(topic, type));
  }
  channel_->send(std::move(wire));
}

void Session::set_status_handler(StatusHandler handler) {
  std::lock_guard lock(mutex_);
  status_handler_ = std::move(handler);
}

SessionStats Session::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

std::vector<std::string> Session::subscribed_topics() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [topic, type] : topic_types_) out.push_back(topic);
  return out;
}

void Session::close() {
  std::shared_ptr<net::Channel> channel;
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    stopping_ = true;
    channel = std::move(channel_);
    connected_ = false;
  }
  wake_.notify_all();
  dispatch_cv_.notify_all();
  idle_cv_.notify_all();
  if (channel) channel->close();
  if (supervisor_.joinable()) supervisor_.join();
  if (dispatcher_.joinable()) dispatcher_.join();
  io_.stop();
}

}  // namespace holoviz::bridge
