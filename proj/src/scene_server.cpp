#include "holoviz/scene_server.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

namespace holoviz {

namespace {

std::string content_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

}  // namespace

SceneServer::SceneServer(const net::Endpoint& bind, InputSink on_input, SceneServerOptions options)
    : on_input_(std::move(on_input)), options_(std::move(options)) {
  server_ = std::make_unique<net::Server>(
      bind, [this](std::shared_ptr<net::Channel> ch) { accept(std::move(ch)); },
      [this](const std::string& method, const std::string& target) { return serve_file(method, target); });
}

SceneServer::~SceneServer() { stop(); }

void SceneServer::stop() {
  if (server_) server_->stop();
  std::lock_guard lock(mutex_);
  clients_.clear();
}

std::string SceneServer::envelope(const char* kind, const plugins::Json& payload) {
  plugins::Json j;
  j["kind"] = kind;
  j["payload"] = payload;
  return j.dump();
}

void SceneServer::accept(std::shared_ptr<net::Channel> channel) {
  std::uint64_t id;
  {
    std::lock_guard lock(mutex_);
    id = next_id_++;
    clients_[id] = Client{channel, Clock::now(), true};
    if (plugins_message_) channel->send(plugins_message_);
  }
  spdlog::info("viewer session {} opened from {}", id, channel->peer());
  channel->start([this, id](std::string&& text) { receive(id, std::move(text)); },
                 [this, id] {
                   std::lock_guard lock(mutex_);
                   if (clients_.erase(id)) spdlog::info("viewer session {} closed", id);
                 });
  joined_.notify_all();
}

void SceneServer::receive(std::uint64_t id, std::string&& text) {
  std::shared_ptr<net::Channel> channel;
  {
    std::lock_guard lock(mutex_);
    auto it = clients_.find(id);
    if (it == clients_.end()) return;
    it->second.last_seen = Clock::now();
    channel = it->second.channel;
  }

  auto complain = [&](const std::string& why) {
    channel->send(envelope("status", {{"level", "error"}, {"source", "session"}, {"message", why}}));
  };

  plugins::Json j;
  try {
    j = plugins::Json::parse(text);
  } catch (const plugins::Json::parse_error& e) {
    complain(std::string("malformed message: ") + e.what());
    return;
  }
  const std::string kind = j.is_object() ? j.value("kind", "") : "";
  if (kind == "input") {
    try {
      on_input_(plugins::input_from_json(j.value("payload", plugins::Json())));
    } catch (const std::exception& e) {
      complain(std::string("rejected input: ") + e.what());
    }
  } else if (kind == "resync") {
    std::lock_guard lock(mutex_);
    if (auto it = clients_.find(id); it != clients_.end()) it->second.needs_reset = true;
  } else if (kind == "status") {
    // keepalive only
  } else {
    complain("unknown message kind '" + kind + "'");
  }
}

void SceneServer::drop(std::uint64_t id, const std::string& why) {
  auto it = clients_.find(id);
  if (it == clients_.end()) return;
  spdlog::warn("dropping viewer session {}: {}", id, why);
  it->second.channel->send(envelope("status", {{"level", "error"}, {"source", "session"}, {"message", why}}));
  it->second.channel->close();
  clients_.erase(it);
}

void SceneServer::broadcast(const scene::SceneDiff& diff, const scene::Snapshot& snapshot) {
  std::shared_ptr<const std::string> incremental;
  std::shared_ptr<const std::string> full;
  const auto now = Clock::now();
  const auto keepalive = std::chrono::duration<double>(options_.keepalive);

  std::lock_guard lock(mutex_);
  std::vector<std::uint64_t> doomed;
  for (auto& [id, c] : clients_) {
    if (now - c.last_seen > keepalive) {
      doomed.push_back(id);
      continue;
    }
    if (c.channel->pending() > options_.max_pending) {
      doomed.push_back(id);
      continue;
    }
    if (c.needs_reset) {
      if (!full) full = std::make_shared<const std::string>(envelope("diff", scene::to_json(scene::full_diff(snapshot))));
      c.channel->send(full);
      c.needs_reset = false;
    } else {
      if (!incremental) incremental = std::make_shared<const std::string>(envelope("diff", scene::to_json(diff)));
      c.channel->send(incremental);
    }
  }
  for (auto id : doomed) {
    const auto& c = clients_.at(id);
    drop(id, now - c.last_seen > keepalive ? "keepalive expired" : "client too slow, more than " +
                                                                       std::to_string(options_.max_pending) +
                                                                       " messages pending");
  }
}

void SceneServer::broadcast_status(const plugins::Status& status) {
  auto msg = std::make_shared<const std::string>(
      envelope("status", {{"level", status.level}, {"source", status.source}, {"message", status.message}}));
  std::lock_guard lock(mutex_);
  for (auto& [id, c] : clients_) c.channel->send(msg);
}

void SceneServer::set_plugins(const std::vector<plugins::PluginDescriptor>& descriptors) {
  plugins::Json list = plugins::Json::array();
  for (const auto& d : descriptors) list.push_back(plugins::to_json(d));
  auto msg = std::make_shared<const std::string>(
      envelope("status", {{"level", "info"}, {"source", "engine"}, {"message", "plugins"}, {"plugins", list}}));
  std::lock_guard lock(mutex_);
  if (plugins_message_ && *plugins_message_ == *msg) return;
  plugins_message_ = msg;
  for (auto& [id, c] : clients_) c.channel->send(msg);
}

std::size_t SceneServer::sessions() const {
  std::lock_guard lock(mutex_);
  return clients_.size();
}

bool SceneServer::wait_for_session(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return joined_.wait_for(lock, timeout, [this] { return !clients_.empty(); });
}

net::HttpResponse SceneServer::serve_file(const std::string& method, const std::string& target) const {
  net::HttpResponse out;
  if (options_.web_root.empty() || method != "GET") return out;
  std::string rel = target.substr(0, target.find('?'));
  if (rel.empty() || rel == "/") rel = "/index.html";
  if (rel.find("..") != std::string::npos) {
    out.status = 403;
    out.body = "forbidden";
    return out;
  }
  const std::filesystem::path path = std::filesystem::path(options_.web_root) / rel.substr(1);
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::ostringstream body;
  body << in.rdbuf();
  out.status = 200;
  out.content_type = content_type(path);
  out.body = body.str();
  return out;
}

}  // namespace holoviz
