#include <doctest.h>

#include <random>

#include "holoviz/align.hpp"
#include "oracle.hpp"

using namespace holoviz;
using align::MarkerDetection;
using geom::Transformd;
using geom::Vec3d;

namespace {

MarkerDetection random_detection(std::mt19937_64& rng) {
  return MarkerDetection{oracle::random_transform(rng, 2.0), oracle::random_transform(rng, 10.0), Stamp::from_seconds(1)};
}

scene::SceneNode node_at(const std::string& id, const Transformd& pose) {
  scene::SceneNode n;
  n.node_id = id;
  n.pose_world = pose;
  return n;
}

}  // namespace

TEST_CASE("identity detection and placement give identity") {
  const auto c = align::solve_alignment(MarkerDetection{}, Transformd());
  CHECK(oracle::max_error(oracle::matrix_of(c), oracle::Mat4::Identity()) == 0);
}

TEST_CASE("marker one metre ahead of the device") {
  MarkerDetection det;
  det.marker_in_device = Transformd::from_translation(Vec3d(1, 0, 0));
  const auto c = align::solve_alignment(det, Transformd());
  const oracle::Mat4 expected = oracle::homogeneous(Eigen::Matrix3d::Identity(), Eigen::Vector3d(-1, 0, 0));
  CHECK(oracle::max_error(oracle::matrix_of(c), expected) < 1e-12);
}

TEST_CASE("correction matches the matrix oracle") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto det = random_detection(rng);
    const auto placed = oracle::random_transform(rng, 10.0);
    const oracle::Mat4 expected = oracle::matrix_of(placed) *
                                  oracle::inverse(oracle::matrix_of(det.device_in_vwcs) * oracle::matrix_of(det.marker_in_device));
    CHECK(oracle::max_error(oracle::matrix_of(align::solve_alignment(det, placed)), expected) < 1e-9);
  }
}

TEST_CASE("property: corrected marker lands on its configured placement") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const auto det = random_detection(rng);
    const auto placed = oracle::random_transform(rng, 10.0);
    const auto c = align::solve_alignment(det, placed);
    const oracle::Mat4 landed = oracle::matrix_of(c) * oracle::matrix_of(det.device_in_vwcs) * oracle::matrix_of(det.marker_in_device);
    REQUIRE(oracle::max_error(landed, oracle::matrix_of(placed)) < 1e-9);
    CHECK(std::abs(c.rotation.quaternion().norm() - 1) < 1e-12);
  }
}

TEST_CASE("applying re-roots existing device nodes at the next commit") {
  std::mt19937_64 rng(13);
  const auto det = random_detection(rng);
  align::WorldAlignment world;
  world.marker_in_rwcs = oracle::random_transform(rng, 10.0);

  scene::Scene sc;
  const auto device = align::detection_nodes(det);
  sc.commit({}, device);
  const auto before = sc.snapshot().nodes.at(align::kMarkerNodeId).pose_world;
  CHECK(oracle::max_error(oracle::matrix_of(before), oracle::matrix_of(world.marker_in_rwcs)) > 1e-3);

  align::update_alignment(world, det);
  CHECK_FALSE(world.aligned);
  align::apply_alignment(world, sc);
  CHECK(world.aligned);
  const auto diff = sc.commit({}, device);
  CHECK(diff.upserts.size() == 2);
  const auto after = sc.snapshot().nodes.at(align::kMarkerNodeId).pose_world;
  CHECK(oracle::max_error(oracle::matrix_of(after), oracle::matrix_of(world.marker_in_rwcs)) < 1e-9);
}

TEST_CASE("identity correction leaves the scene unchanged") {
  scene::Scene sc;
  std::mt19937_64 rng(14);
  const scene::NodeMap device = {{"d", node_at("d", oracle::random_transform(rng))}};
  const scene::NodeMap world_nodes = {{"w", node_at("w", oracle::random_transform(rng))}};
  sc.commit(world_nodes, device);
  const auto before = sc.snapshot().nodes;

  align::WorldAlignment world;
  MarkerDetection det;
  update_alignment(world, det);
  align::apply_alignment(world, sc);
  const auto diff = sc.commit(world_nodes, device);
  CHECK(diff.empty());
  CHECK(sc.snapshot().nodes == before);
}

TEST_CASE("latest detection wins") {
  std::mt19937_64 rng(15);
  align::WorldAlignment world;
  world.marker_in_rwcs = oracle::random_transform(rng);
  const auto first = random_detection(rng);
  const auto second = random_detection(rng);
  align::update_alignment(world, first);
  const auto once = world.vwcs_to_rwcs;
  align::update_alignment(world, first);
  CHECK(oracle::max_error(oracle::matrix_of(world.vwcs_to_rwcs), oracle::matrix_of(once)) == 0);
  align::update_alignment(world, second);
  CHECK(oracle::max_error(oracle::matrix_of(world.vwcs_to_rwcs),
                          oracle::matrix_of(align::solve_alignment(second, world.marker_in_rwcs))) == 0);
}

TEST_CASE("property: alignment preserves pairwise distances") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    scene::NodeMap device;
    for (int k = 0; k < 8; ++k) {
      const std::string id = "n" + std::to_string(k);
      device[id] = node_at(id, oracle::random_transform(rng, 20.0));
    }
    scene::Scene sc;
    sc.commit({}, device);
    const auto before = sc.snapshot().nodes;
    align::WorldAlignment world;
    world.marker_in_rwcs = oracle::random_transform(rng, 10.0);
    align::update_alignment(world, random_detection(rng));
    align::apply_alignment(world, sc);
    sc.commit({}, device);
    const auto& after = sc.snapshot().nodes;
    for (const auto& [a, na] : before) {
      for (const auto& [b, nb] : before) {
        const double d0 = (na.pose_world.translation - nb.pose_world.translation).norm();
        const double d1 = (after.at(a).pose_world.translation - after.at(b).pose_world.translation).norm();
        REQUIRE(std::abs(d0 - d1) < 1e-9);
      }
    }
  }
}
