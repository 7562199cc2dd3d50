#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "holoviz/plugins/builtin.hpp"
#include "holoviz/plugins/registry.hpp"
#include "oracle.hpp"

using namespace holoviz;
using namespace holoviz::plugins;
using bridge::Marker;
using bridge::MarkerAction;
using bridge::MarkerArray;
using bridge::MarkerType;
using geom::Transformd;
using geom::UnitQuatd;
using geom::Vec3d;

namespace {

PluginDescriptor desc(std::string id, PluginType type, std::string topic = "", Json settings = Json::object()) {
  PluginDescriptor d;
  d.id = std::move(id);
  d.type = type;
  d.topic = std::move(topic);
  d.settings = std::move(settings);
  return d;
}

std::size_t count_prefix(const scene::NodeMap& nodes, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& [id, node] : nodes) n += id.starts_with(prefix);
  return n;
}

std::size_t count_suffix(const scene::NodeMap& nodes, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& [id, node] : nodes) n += id.ends_with(suffix);
  return n;
}

Marker marker(std::string ns, int id, MarkerType type = MarkerType::Cube, MarkerAction action = MarkerAction::Add) {
  Marker m;
  m.header.frame_id = "map";
  m.ns = std::move(ns);
  m.id = id;
  m.type = type;
  m.action = action;
  return m;
}

MarkerArray array_of(std::vector<Marker> ms) { return MarkerArray{std::move(ms)}; }

struct Rig {
  bridge::LocalBus bus;
  txgraph::FrameTree frames;
  Registry registry{bus, frames};

  void chain() {
    frames.insert({"map", "base_link", Stamp::from_seconds(1), Transformd::from_translation(Vec3d(1, 0, 0))});
    frames.insert({"base_link", "camera", Stamp::from_seconds(1), Transformd::from_translation(Vec3d(0, 0, 1))});
  }
};

}  // namespace

TEST_CASE("descriptor json") {
  const auto d = descriptor_from_json(Json::parse(R"({"id":"m","type":"MarkerArrayDisplay","topic":"/viz"})"));
  CHECK(d.kind() == PluginKind::Display);
  CHECK(d.enabled);
  CHECK(descriptor_from_json(to_json(d)) == d);
  CHECK_THROWS_AS(descriptor_from_json(Json::parse(R"({"id":"m","type":"Teapot","topic":"/x"})")), UnknownType);
  CHECK_THROWS_AS(descriptor_from_json(Json::parse(R"({"id":"m","type":"CommandTool"})")), SettingsError);
  CHECK_THROWS_AS(descriptor_from_json(Json::parse(R"({"id":"m","type":"TfDisplay","colour":1})")), SettingsError);
  CHECK(descriptor_from_json(Json::parse(R"({"id":"tf","type":"TfDisplay"})")).topic.empty());
}

TEST_CASE("settings are validated against the type schema") {
  const auto assets = AssetRegistry::builtin();
  CHECK(effective_settings(PluginType::TfDisplay, Json::object(), assets) == default_settings(PluginType::TfDisplay));
  CHECK(effective_settings(PluginType::TfDisplay, Json{{"axis_length", 1}}, assets)["axis_length"] == 1);
  CHECK_THROWS_AS(effective_settings(PluginType::TfDisplay, Json{{"axis_len", 1}}, assets), SettingsError);
  CHECK_THROWS_AS(effective_settings(PluginType::TfDisplay, Json{{"axis_length", "long"}}, assets), SettingsError);
  CHECK_THROWS_AS(effective_settings(PluginType::TfDisplay, Json{{"axis_length", -1}}, assets), SettingsError);
  CHECK_THROWS_AS(effective_settings(PluginType::StampedPoseDisplay, Json{{"opacity", 1.5}}, assets), SettingsError);
  CHECK_THROWS_AS(effective_settings(PluginType::StampedPoseDisplay, Json{{"mesh", "teapot"}}, assets), SettingsError);
  CHECK_NOTHROW(effective_settings(PluginType::StampedPoseDisplay, Json{{"mesh", "fetch"}}, assets));
  CHECK_THROWS_AS(effective_settings(PluginType::Arrow2dTool, Json{{"color", {1, 0, 0}}}, assets), SettingsError);
  CHECK_THROWS_AS(effective_settings(PluginType::CommandTool, Json{{"keywords", {{"go", 3}}}}, assets), SettingsError);
}

TEST_CASE("input event json") {
  const auto tap = InputEvent::tap(Vec3d(0, 0, 2), Vec3d(1, 0, -1));
  const auto back = input_from_json(to_json(tap));
  CHECK(back.variant == InputEvent::Variant::Tap);
  CHECK(back.ray.direction == Vec3d(1, 0, -1));
  CHECK(input_from_json(to_json(InputEvent::spoken("start"))).command == "start");
  auto menu = InputEvent::menu_action("tf", "set_enabled", false);
  menu.target = "tf";
  const auto m = input_from_json(to_json(menu));
  CHECK(m.menu.action == "set_enabled");
  CHECK(m.menu.value == false);
  CHECK(m.target == std::optional<std::string>("tf"));
  CHECK_THROWS_AS(input_from_json(Json::parse(R"({"variant":"Tap","ray":{"origin":[0,0,1],"direction":[0,0,0]}})")),
                  InvalidInput);
  CHECK_THROWS_AS(input_from_json(Json::parse(R"({"variant":"Wave"})")), InvalidInput);
  CHECK_THROWS_AS(input_from_json(Json::parse(R"({"variant":"Command"})")), InvalidInput);
}

TEST_CASE("tf display: three-frame chain renders 14 nodes") {
  Rig rig;
  rig.chain();
  rig.registry.register_plugin(desc("tf", PluginType::TfDisplay));
  const auto d = rig.registry.tick(0);
  // 3 triads of 3 segments, 3 labels, 2 parent arrows.
  CHECK(d.upserts.size() == 3 * 3 + 3 + 2);
  const auto& nodes = rig.registry.snapshot().nodes;
  CHECK(count_suffix(nodes, "/label") == 3);
  CHECK(count_suffix(nodes, "/parent_arrow") == 2);

  const auto& cam_x = nodes.at("tf/camera/axis_x");
  CHECK(cam_x.color == scene::Rgba{1, 0, 0, 1});
  CHECK((cam_x.pose_world.translation - Vec3d(1, 0, 1)).norm() < 1e-12);
  // axis_y points along world +y for an unrotated frame.
  const auto& cam_y = nodes.at("tf/camera/axis_y");
  CHECK((plugins::span_end(cam_y) - Vec3d(1, 0.15, 1)).norm() < 1e-12);
  const auto& cam_z = nodes.at("tf/camera/axis_z");
  CHECK((plugins::span_end(cam_z) - Vec3d(1, 0, 1.15)).norm() < 1e-12);
  const auto& arrow = nodes.at("tf/camera/parent_arrow");
  CHECK((plugins::span_end(arrow) - Vec3d(1, 0, 0)).norm() < 1e-12);
  CHECK(nodes.at("tf/camera/label").text == "camera");

  CHECK(rig.registry.tick(0.05).empty());
}

TEST_CASE("tf display visibility toggles") {
  Rig rig;
  rig.chain();
  rig.registry.register_plugin(desc("tf", PluginType::TfDisplay));
  rig.registry.tick(0);

  rig.registry.set_visibility("tf", "names", false);
  rig.registry.tick(0.05);
  auto nodes = rig.registry.snapshot().nodes;
  CHECK(count_suffix(nodes, "/label") == 0);
  CHECK(count_prefix(nodes, "tf/") == 11);

  rig.registry.set_visibility("tf", "arrows", false);
  rig.registry.set_visibility("tf", "frame:/camera", false);
  rig.registry.tick(0.1);
  nodes = rig.registry.snapshot().nodes;
  CHECK(nodes.size() == 6);
  CHECK(count_prefix(nodes, "tf/camera/") == 0);
  const auto* tf = rig.registry.find("tf");
  CHECK(tf->descriptor().settings["hidden_frames"] == Json::array({"camera"}));
  CHECK(tf->descriptor().settings["show_names"] == false);

  rig.registry.set_visibility("tf", "frames", false);
  rig.registry.tick(0.15);
  CHECK(rig.registry.snapshot().nodes.empty());

  for (const char* e : {"frames", "names", "arrows", "frame:camera"}) rig.registry.set_visibility("tf", e, true);
  rig.registry.tick(0.2);
  CHECK(rig.registry.snapshot().nodes.size() == 14);

  CHECK_THROWS_AS(rig.registry.set_visibility("tf", "sparkles", true), InvalidAction);
  CHECK_THROWS_AS(rig.registry.set_visibility("nope", "axes", true), UnknownId);
}

TEST_CASE("disable emits deletes, re-enable restores") {
  Rig rig;
  rig.chain();
  rig.registry.register_plugin(desc("tf", PluginType::TfDisplay));
  rig.registry.tick(0);
  rig.registry.set_enabled("tf", false);
  const auto off = rig.registry.tick(0.05);
  CHECK(off.deletes.size() == 14);
  CHECK(rig.registry.snapshot().nodes.empty());
  rig.registry.set_enabled("tf", true);
  CHECK(rig.registry.tick(0.1).upserts.size() == 14);
}

TEST_CASE("registry rejects duplicates and unknown ids") {
  Rig rig;
  rig.registry.register_plugin(desc("a", PluginType::MarkerArrayDisplay, "/viz"));
  CHECK_THROWS_AS(rig.registry.register_plugin(desc("a", PluginType::TfDisplay)), DuplicateId);
  CHECK_THROWS_AS(rig.registry.register_plugin(desc("b", PluginType::MarkerArrayDisplay)), SettingsError);
  CHECK_THROWS_AS(rig.registry.register_plugin(desc("c", PluginType::StampedPoseDisplay, "/p", {{"mesh", "teapot"}})),
                  SettingsError);
  CHECK(rig.registry.descriptors().size() == 1);
  CHECK_THROWS_AS(rig.registry.set_enabled("zzz", true), UnknownId);
  CHECK(rig.bus.subscribed_topics() == std::vector<std::string>{"/viz"});
  rig.registry.remove_plugin("a");
  CHECK(rig.bus.subscribed_topics().empty());

  auto off = desc("d", PluginType::MarkerArrayDisplay, "/viz");
  off.enabled = false;
  rig.registry.register_plugin(off);
  CHECK(rig.bus.subscribed_topics().empty());
}

TEST_CASE("two marker displays on different topics render independently") {
  Rig rig;
  rig.registry.register_plugin(desc("a", PluginType::MarkerArrayDisplay, "/vizA"));
  rig.registry.register_plugin(desc("b", PluginType::MarkerArrayDisplay, "/vizB"));
  rig.bus.inject("/vizA", array_of({marker("x", 1)}));
  rig.bus.inject("/vizB", array_of({marker("x", 1), marker("x", 2)}));
  rig.registry.tick(0);
  const auto& nodes = rig.registry.snapshot().nodes;
  CHECK(nodes.count("a/x/1") == 1);
  CHECK(count_prefix(nodes, "b/") == 2);
}

TEST_CASE("set_topic moves the subscription") {
  Rig rig;
  rig.registry.register_plugin(desc("m", PluginType::MarkerArrayDisplay, "/vizA"));
  rig.bus.inject("/vizA", array_of({marker("a", 1)}));
  rig.registry.tick(0);
  CHECK(rig.registry.snapshot().nodes.count("m/a/1") == 1);

  rig.registry.set_topic("m", "/vizB");
  CHECK(rig.bus.subscribed_topics() == std::vector<std::string>{"/vizB"});
  rig.bus.inject("/vizA", array_of({marker("a", 2)}));
  rig.bus.inject("/vizB", array_of({marker("b", 1)}));
  rig.registry.tick(0.05);
  auto nodes = rig.registry.snapshot().nodes;
  CHECK(nodes.size() == 1);
  CHECK(nodes.count("m/b/1") == 1);

  rig.registry.set_topic("m", "/vizB");
  rig.registry.tick(0.1);
  CHECK(rig.registry.snapshot().nodes.count("m/b/1") == 1);

  CHECK_THROWS_AS(rig.registry.set_topic("m", ""), InvalidAction);
  CHECK(rig.registry.find("m")->descriptor().topic == "/vizB");
  rig.registry.register_plugin(desc("tf", PluginType::TfDisplay));
  CHECK_THROWS_AS(rig.registry.set_topic("tf", "/tf"), InvalidAction);
}

TEST_CASE("marker lifetime expiry") {
  Rig rig;
  rig.registry.register_plugin(desc("m", PluginType::MarkerArrayDisplay, "/viz"));
  auto m = marker("t", 0);
  m.lifetime = Stamp::from_seconds(0.2);
  rig.bus.inject("/viz", array_of({m}));
  double now = 1.0;
  rig.registry.tick(now);
  CHECK(rig.registry.snapshot().nodes.size() == 1);
  while (rig.registry.snapshot().nodes.size() == 1 && now < 2) rig.registry.tick(now += 0.05);
  CHECK(now >= 1.2 - 1e-9);
  CHECK(now <= 1.25 + 1e-9);
}

TEST_CASE("marker primitives") {
  Rig rig;
  rig.chain();
  rig.registry.register_plugin(desc("m", PluginType::MarkerArrayDisplay, "/viz"));

  auto strip = marker("s", 0, MarkerType::LineStrip);
  strip.scale = Vec3d(0.02, 0, 0);
  strip.points = {Vec3d(0, 0, 0), Vec3d(1, 0, 0), Vec3d(1, 1, 0)};
  auto list = marker("l", 0, MarkerType::LineList);
  list.scale = Vec3d(0.02, 0, 0);
  list.points = {Vec3d(0, 0, 0), Vec3d(1, 0, 0), Vec3d(0, 1, 0), Vec3d(1, 1, 0)};
  auto spheres = marker("p", 0, MarkerType::SphereList);
  spheres.points = {Vec3d(0, 0, 0), Vec3d(1, 0, 0), Vec3d(2, 0, 0)};
  auto text = marker("t", 0, MarkerType::Text);
  text.scale = Vec3d(0, 0, 0.3);
  text.text = "hello";
  auto arrow = marker("a", 0, MarkerType::Arrow);
  arrow.header.frame_id = "base_link";
  arrow.scale = Vec3d(0.05, 0.1, 0.1);
  arrow.points = {Vec3d(0, 0, 0), Vec3d(0, 2, 0)};
  auto mesh = marker("mesh", 0, MarkerType::MeshResource);
  rig.bus.inject("/viz", array_of({strip, list, spheres, text, arrow, mesh, mesh}));
  rig.registry.tick(0);

  const auto& nodes = rig.registry.snapshot().nodes;
  CHECK(count_prefix(nodes, "m/s/0/") == 2);
  CHECK(count_prefix(nodes, "m/l/0/") == 2);
  CHECK(count_prefix(nodes, "m/p/0/") == 3);
  CHECK(nodes.at("m/p/0/2").primitive == scene::Primitive::Sphere);
  CHECK(nodes.at("m/t/0").text == "hello");
  CHECK(nodes.at("m/t/0").scale == Vec3d::Constant(0.3));
  const auto& a = nodes.at("m/a/0");
  CHECK(a.primitive == scene::Primitive::ArrowMesh);
  CHECK((a.pose_world.translation - Vec3d(1, 0, 0)).norm() < 1e-12);
  CHECK((span_end(a) - Vec3d(1, 2, 0)).norm() < 1e-12);
  CHECK(count_prefix(nodes, "m/mesh/") == 0);

  const auto statuses = rig.registry.take_statuses();
  REQUIRE(statuses.size() == 1);
  CHECK(statuses[0].level == "warning");
}

TEST_CASE("markers in unknown frames are skipped until the frame appears") {
  Rig rig;
  rig.registry.register_plugin(desc("m", PluginType::MarkerArrayDisplay, "/viz"));
  auto m = marker("x", 0);
  m.header.frame_id = "/base_link";
  rig.bus.inject("/viz", array_of({m}));
  rig.registry.tick(0);
  CHECK(rig.registry.snapshot().nodes.empty());
  rig.chain();
  rig.registry.tick(0.05);
  CHECK((rig.registry.snapshot().nodes.at("m/x/0").pose_world.translation - Vec3d(1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("property: marker display matches a replay of the action log") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    Rig rig;
    rig.registry.register_plugin(desc("m", PluginType::MarkerArrayDisplay, "/viz"));
    // Brute-force oracle: replay the whole log each tick. Times are exact in
    // binary so expiry comparisons agree.
    struct Entry {
      int action;
      std::string ns;
      int id;
      double at;
      double lifetime;
    };
    std::vector<Entry> log;
    std::uniform_int_distribution<int> action(0, 9), ns(0, 1), id(0, 3), life(0, 3);
    double now = 0;
    for (int tick = 0; tick < 40; ++tick) {
      now += 0.125;
      std::vector<Marker> batch;
      const int n = static_cast<int>(rng() % 4);
      for (int k = 0; k < n; ++k) {
        const int a = action(rng);
        auto m = marker("n" + std::to_string(ns(rng)), id(rng));
        m.action = a == 0 ? MarkerAction::DeleteAll : a < 3 ? MarkerAction::Delete : MarkerAction::Add;
        const double lt = life(rng) * 0.25;
        m.lifetime = Stamp::from_seconds(lt);
        batch.push_back(m);
        log.push_back({static_cast<int>(m.action), m.ns, m.id, now, lt});
      }
      if (!batch.empty()) rig.bus.inject("/viz", array_of(batch));
      rig.registry.tick(now);

      std::map<std::pair<std::string, int>, double> expected;
      for (const auto& e : log) {
        if (e.action == static_cast<int>(MarkerAction::DeleteAll)) {
          expected.clear();
        } else if (e.action == static_cast<int>(MarkerAction::Delete)) {
          expected.erase({e.ns, e.id});
        } else {
          expected[{e.ns, e.id}] = e.lifetime == 0 ? 1e9 : e.at + e.lifetime;
        }
      }
      std::set<std::string> want;
      for (const auto& [key, until] : expected) {
        if (until > now) want.insert("m/" + key.first + "/" + std::to_string(key.second));
      }
      std::set<std::string> have;
      for (const auto& [nid, node] : rig.registry.snapshot().nodes) have.insert(nid);
      REQUIRE(have == want);
    }
  }
}

TEST_CASE("stamped pose display") {
  Rig rig;
  rig.chain();
  rig.registry.register_plugin(desc("robot", PluginType::StampedPoseDisplay, "/robot_pose", {{"opacity", 0.5}}));
  rig.registry.register_plugin(
      desc("grasp", PluginType::StampedPoseDisplay, "/grasp", {{"mesh", "panda_hand"}, {"color", {0, 0, 1, 1}}}));
  rig.registry.tick(0);
  CHECK(rig.registry.snapshot().nodes.empty());

  bridge::PoseStamped p;
  p.header.frame_id = "base_link";
  p.pose = Transformd::from_translation(Vec3d(0, 1, 0));
  rig.bus.inject("/robot_pose", p);
  p.header.frame_id = "map";
  rig.bus.inject("/grasp", p);
  rig.registry.tick(0.05);
  const auto& nodes = rig.registry.snapshot().nodes;
  const auto& robot = nodes.at("robot/pose");
  CHECK(robot.primitive == scene::Primitive::ArrowMesh);
  CHECK(robot.scale == Vec3d(0.6, 0.05, 0.05));
  CHECK(robot.color.a == doctest::Approx(0.5));
  CHECK((robot.pose_world.translation - Vec3d(1, 1, 0)).norm() < 1e-12);
  const auto& grasp = nodes.at("grasp/pose");
  CHECK(grasp.primitive == scene::Primitive::MeshRef);
  CHECK(grasp.text == "panda_hand");
  CHECK((grasp.pose_world.translation - Vec3d(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("arrow tool publishes a ground goal") {
  Rig rig;
  rig.registry.register_plugin(desc("goal", PluginType::Arrow2dTool, "/move_base_simple/goal"));
  const Vec3d eye(0, 0, 1.6);
  rig.registry.post_input(InputEvent::tap(eye, Vec3d(1, 2, 0) - eye));
  rig.registry.tick(0);
  CHECK(static_cast<const Arrow2dTool*>(rig.registry.find("goal"))->phase() == Arrow2dTool::Phase::Orienting);
  CHECK(rig.registry.snapshot().nodes.count("goal/preview") == 1);

  rig.registry.post_input(InputEvent::ray_move(eye, Vec3d(2, 2, 0) - eye));
  rig.registry.tick(0.05);
  CHECK((span_end(rig.registry.snapshot().nodes.at("goal/preview")) - Vec3d(2, 2, 0)).norm() < 1e-9);

  rig.registry.post_input(InputEvent::tap(eye, Vec3d(2, 2, 0) - eye));
  rig.registry.tick(0.1);
  CHECK(rig.registry.snapshot().nodes.empty());
  const auto sent = rig.bus.take_published();
  REQUIRE(sent.size() == 1);
  CHECK(sent[0].topic == "/move_base_simple/goal");
  const auto goal = bridge::from_json<bridge::PoseStamped>(sent[0].msg);
  CHECK(goal.header.frame_id == "map");
  CHECK(goal.header.seq == 1);
  CHECK((goal.pose.translation - Vec3d(1, 2, 0)).norm() < 1e-9);
  CHECK(std::abs(goal.pose.rotation.yaw()) < 1e-9);
}

TEST_CASE("arrow tool edge cases") {
  Rig rig;
  rig.registry.register_plugin(desc("goal", PluginType::Arrow2dTool, "/goal"));
  const auto* tool = static_cast<const Arrow2dTool*>(rig.registry.find("goal"));
  const Vec3d eye(0, 0, 1.6);
  rig.registry.post_input(InputEvent::tap(eye, Vec3d(0, 0, 1)));
  rig.registry.tick(0);
  CHECK(tool->phase() == Arrow2dTool::Phase::Idle);

  rig.registry.post_input(InputEvent::tap(eye, Vec3d(1, 0, 0) - eye));
  rig.registry.post_input(InputEvent::tap(eye, Vec3d(1, 0, 0) - eye));
  rig.registry.tick(0.05);
  CHECK(tool->phase() == Arrow2dTool::Phase::Orienting);
  CHECK(rig.bus.published().empty());

  rig.registry.post_input(InputEvent::menu_action("goal", "reset"));
  rig.registry.tick(0.1);
  CHECK(tool->phase() == Arrow2dTool::Phase::Idle);
}

TEST_CASE("property: arrow tool goals lie flat on the ground") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> coord(-10, 10), height(0.5, 3);
  Rig rig;
  rig.registry.register_plugin(desc("goal", PluginType::Arrow2dTool, "/goal"));
  int published = 0;
  for (int i = 0; i < 300; ++i) {
    const Vec3d eye(coord(rng), coord(rng), height(rng));
    const Vec3d tail(coord(rng), coord(rng), 0), tip(coord(rng), coord(rng), 0);
    rig.registry.post_input(InputEvent::tap(eye, tail - eye));
    rig.registry.post_input(InputEvent::tap(eye, tip - eye));
    rig.registry.tick(i);
    for (const auto& sent : rig.bus.take_published()) {
      ++published;
      const auto g = bridge::from_json<bridge::PoseStamped>(sent.msg);
      REQUIRE(g.pose.translation.z() == 0);
      const auto& q = g.pose.rotation;
      REQUIRE(std::abs(q.x()) < 1e-12);
      REQUIRE(std::abs(q.y()) < 1e-12);
      REQUIRE((g.pose.translation.head<2>() - tail.head<2>()).norm() < 1e-9);
      const double expected = std::atan2(tip.y() - tail.y(), tip.x() - tail.x());
      REQUIRE(std::abs(std::remainder(q.yaw() - expected, 2 * std::numbers::pi)) < 1e-9);
    }
  }
  CHECK(published == 300);
}

TEST_CASE("command tool") {
  Rig rig;
  rig.registry.register_plugin(desc("voice", PluginType::CommandTool, "/handover/command",
                                    {{"keywords", {{"start", "start"}, {"Begin Handover", "start"}, {"stop", "stop"}}}}));
  for (const char* said : {"start", "  BEGIN handover ", "unknown", "stop"}) {
    rig.registry.post_input(InputEvent::spoken(said));
  }
  rig.registry.tick(0);
  const auto sent = rig.bus.take_published();
  REQUIRE(sent.size() == 3);
  CHECK(sent[0].type == "std_msgs/String");
  CHECK(sent[0].msg == Json{{"data", "start"}});
  CHECK(sent[1].msg == Json{{"data", "start"}});
  CHECK(sent[2].msg == Json{{"data", "stop"}});

  rig.registry.register_plugin(desc("free", PluginType::CommandTool, "/free"));
  auto ev = InputEvent::spoken("Hello");
  ev.target = "free";
  rig.registry.post_input(ev);
  rig.registry.tick(0.05);
  const auto free = rig.bus.take_published();
  REQUIRE(free.size() == 1);
  CHECK(free[0].topic == "/free");
  CHECK(free[0].msg == Json{{"data", "hello"}});
}

TEST_CASE("menu actions drive the registry") {
  Rig rig;
  rig.chain();
  rig.registry.register_plugin(desc("tf", PluginType::TfDisplay));
  rig.registry.post_input(InputEvent::menu_action("tf", "set_visibility", {{"element", "names"}, {"visible", false}}));
  rig.registry.tick(0);
  CHECK(rig.registry.snapshot().nodes.size() == 11);
  rig.registry.post_input(InputEvent::menu_action("tf", "set_enabled", false));
  rig.registry.post_input(InputEvent::menu_action("tf", "explode", true));
  rig.registry.post_input(InputEvent::menu_action("ghost", "set_enabled", true));
  rig.registry.tick(0.05);
  CHECK(rig.registry.snapshot().nodes.empty());
  CHECK(rig.registry.take_statuses().size() == 2);
}

TEST_CASE("detections go to the handler, not the tools") {
  Rig rig;
  int seen = 0;
  rig.registry.on_detection([&](const align::MarkerDetection&) { ++seen; });
  rig.registry.post_input(InputEvent::sighting(align::MarkerDetection{}));
  rig.registry.tick(0);
  CHECK(seen == 1);
}

TEST_CASE("a throwing plugin is disabled and the tick carries on") {
  Rig rig;
  rig.chain();
  rig.registry.register_plugin(desc("tf", PluginType::TfDisplay));
  rig.registry.register_plugin(desc("m", PluginType::MarkerArrayDisplay, "/viz"));
  // Finite on the wire, but the span overflows to infinity when rendered.
  auto huge = marker("h", 0, MarkerType::Arrow);
  huge.points = {Vec3d(-1e308, 0, 0), Vec3d(1e308, 0, 0)};
  rig.bus.inject("/viz", array_of({huge}));
  scene::SceneDiff d;
  CHECK_NOTHROW(d = rig.registry.tick(0));
  CHECK(d.upserts.size() == 14);
  CHECK_FALSE(rig.registry.find("m")->descriptor().enabled);
  const auto statuses = rig.registry.take_statuses();
  REQUIRE(statuses.size() == 1);
  CHECK(statuses[0].level == "error");
  CHECK(statuses[0].source == "m");
  CHECK(rig.registry.tick(0.05).epoch == 2);
}

TEST_CASE("property: diffs fold into the registry snapshot under random activity") {
  std::mt19937_64 rng(33);
  Rig rig;
  rig.chain();
  rig.registry.register_plugin(desc("tf", PluginType::TfDisplay));
  rig.registry.register_plugin(desc("m", PluginType::MarkerArrayDisplay, "/viz"));
  rig.registry.register_plugin(desc("goal", PluginType::Arrow2dTool, "/goal"));
  scene::Snapshot folded;
  std::uint64_t last_epoch = 0;
  for (int tick = 0; tick < 300; ++tick) {
    switch (rng() % 6) {
      case 0: rig.registry.set_enabled("tf", rng() % 2); break;
      case 1: rig.registry.set_visibility("tf", rng() % 2 ? "names" : "frame:camera", rng() % 2); break;
      case 2: {
        auto m = marker("r", static_cast<int>(rng() % 5));
        m.pose = oracle::random_transform(rng);
        m.action = rng() % 4 == 0 ? MarkerAction::Delete : MarkerAction::Add;
        rig.bus.inject("/viz", array_of({m}));
        break;
      }
      case 3: rig.registry.post_input(InputEvent::tap(Vec3d(0, 0, 2), Vec3d(static_cast<double>(rng() % 5), 1, -2))); break;
      case 4:
        rig.frames.insert({"map", "base_link", Stamp::from_seconds(1 + tick * 0.05),
                           Transformd::from_translation(Vec3d(tick * 0.01, 0, 0))});
        break;
      default: break;
    }
    const auto d = rig.registry.tick(tick * 0.05);
    REQUIRE(d.epoch > last_epoch);
    last_epoch = d.epoch;
    folded = scene::apply_diff(folded, d);
    REQUIRE(folded == rig.registry.snapshot());
    REQUIRE(folded.nodes == rig.registry.render_all(tick * 0.05));
  }
}
