#include <doctest.h>

#include <cmath>

#include "posekit/nms.hpp"
#include "posekit/rng.hpp"
#include "scene_util.hpp"

using namespace posekit;
using namespace posekit::testutil;

namespace {

PoseProposal two_joint_proposal(double x0, double y0, double c0, double c1,
                                const BBox& box, double score = 1.0) {
  PoseProposal p;
  p.image_id = "img";
  p.box = box;
  p.pose.joints = {{x0, y0, c0, true}, {x0 + 5, y0 + 5, c1, true}};
  p.pose.score = score;
  return p;
}

}  // namespace

TEST_CASE("k_sim") {
  const BBox box{0, 0, 100, 100};  // windows are 10x10, half extent 5
  SUBCASE("no joints inside any window gives zero") {
    const PoseProposal ref = two_joint_proposal(10, 10, 0.9, 0.9, box);
    const PoseProposal far = two_joint_proposal(60, 60, 0.9, 0.9, box);
    CHECK(k_sim(ref, far, 1.0) == 0.0);
  }
  SUBCASE("coincident two-joint poses match the scalar formula") {
    PoseProposal ref = two_joint_proposal(20, 20, 0.5, 0.8, box);
    const PoseProposal cand = ref;
    const double expected = std::tanh(0.5) * std::tanh(0.5) +
                            std::tanh(0.8) * std::tanh(0.8);
    CHECK(k_sim(ref, cand, 1.0) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(k_sim(ref, cand, 1.0) == doctest::Approx(0.6545).epsilon(1e-4));
  }
  SUBCASE("saturates at the joint count for huge confidences") {
    PoseProposal ref = two_joint_proposal(20, 20, 1e6, 1e6, box);
    CHECK(k_sim(ref, ref, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("window tests are closed on the boundary") {
    const PoseProposal ref = two_joint_proposal(20, 20, 1.0, 1.0, box);
    PoseProposal cand = ref;
    cand.pose.joints[0].x = 25.0;  // exactly half_w away
    CHECK(k_sim(ref, cand, 1.0) > std::tanh(1.0) * std::tanh(1.0) - 1e-12);
  }
  SUBCASE("asymmetric when the boxes differ") {
    const PoseProposal a = two_joint_proposal(20, 20, 0.9, 0.9, box);
    PoseProposal b = two_joint_proposal(24, 20, 0.9, 0.9,
                                        BBox{0, 0, 20, 20});
    // a's window (half 5) contains b's joints, b's window (half 1) does not.
    CHECK(k_sim(a, b, 1.0) > 0.0);
    CHECK(k_sim(b, a, 1.0) == 0.0);
  }
}

TEST_CASE("h_sim") {
  Pose a;
  a.joints = {{0, 0, 1, true}, {10, 10, 1, true}};
  SUBCASE("identical locations give the joint count") {
    CHECK(h_sim(a, a, 5.0) == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("squared distance equal to sigma2 gives exp(-1)") {
    Pose b;
    b.joints = {{3, 0, 1, true}, {10, 10, 0, false}};
    const double value = h_sim(a, b, 9.0);
    CHECK(value == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  }
  SUBCASE("distant joints vanish") {
    Pose far;
    far.joints = {{1e6, 1e6, 1, true}, {1e6, 1e6, 1, true}};
    CHECK(h_sim(a, far, 5.0) <= 1e-300);
  }
  SUBCASE("invisible joints are excluded from the sum") {
    Pose masked = a;
    masked.joints[1].visible = false;
    masked.joints[1].confidence = 0.0;
    CHECK(h_sim(a, masked, 5.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(h_sim(masked, a, 5.0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("scaling coordinates by s and sigma2 by s^2 is exact") {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
      Pose p, q;
      const int m = 16;
      p.joints.resize(m);
      q.joints.resize(m);
      for (int j = 0; j < m; ++j) {
        p.joints[j] = {rng.uniform(0, 100), rng.uniform(0, 100), 1, true};
        q.joints[j] = {rng.uniform(0, 100), rng.uniform(0, 100), 1, true};
      }
      const double sigma2 = rng.uniform(0.5, 20);
      const double s = 4.0;  // power of two keeps the scaling exact
      Pose ps = p, qs = q;
      for (int j = 0; j < m; ++j) {
        ps.joints[j].x *= s;
        ps.joints[j].y *= s;
        qs.joints[j].x *= s;
        qs.joints[j].y *= s;
      }
      CHECK(h_sim(p, q, sigma2) == h_sim(ps, qs, sigma2 * s * s));
    }
  }
}

TEST_CASE("pose_distance combines both terms") {
  const BBox box{0, 0, 100, 100};
  SUBCASE("maxima add up under lambda") {
    PoseProposal ref = two_joint_proposal(20, 20, 1e9, 1e9, box);
    NmsParams params{1.0, 10.0, 0.5, 2.0};
    // Coincident saturated poses: k and h both reach the joint count.
    CHECK(pose_distance(ref, ref, params) ==
          doctest::Approx(1.5 * 2.0).epsilon(1e-12));
  }
  SUBCASE("far apart poses score nearly zero") {
    const PoseProposal a = two_joint_proposal(10, 10, 1, 1, box);
    PoseProposal b = two_joint_proposal(10, 10, 1, 1, box);
    for (Joint& j : b.pose.joints) {
      j.x += 5000;
      j.y += 5000;
    }
    CHECK(pose_distance(a, b, NmsParams{}) <= 1e-6);
  }
  SUBCASE("two-joint worked example") {
    PoseProposal ref = two_joint_proposal(20, 20, 0.5, 0.8, box);
    NmsParams params{1.0, 10.0, 1.0, 2.0};
    const double expected = std::tanh(0.5) * std::tanh(0.5) +
                            std::tanh(0.8) * std::tanh(0.8) + 2.0;
    CHECK(pose_distance(ref, ref, params) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(pose_distance(ref, ref, params) ==
          doctest::Approx(2.6545).epsilon(1e-4));
  }
}

TEST_CASE("run_nms") {
  const BBox box{0, 0, 100, 100};
  SUBCASE("single proposal passes through") {
    const PoseProposal p = two_joint_proposal(20, 20, 0.9, 0.9, box);
    const auto out = run_nms({p}, NmsParams{});
    REQUIRE(out.size() == 1);
    CHECK(out[0].pose.score == p.pose.score);
  }
  SUBCASE("exact duplicate is eliminated, best score wins") {
    PoseProposal a = two_joint_proposal(20, 20, 0.9, 0.9, box, 0.9);
    PoseProposal b = a;
    b.pose.score = 0.8;
    NmsParams params{0.1, 10.0, 1.0, 2.0};
    const double mutual = pose_distance(a, b, params);
    REQUIRE(mutual >= params.eta);
    const auto out = run_nms({b, a}, params);
    REQUIRE(out.size() == 1);
    CHECK(out[0].pose.score == 0.9);
  }
  SUBCASE("opposite corners both survive") {
    const PoseProposal a = two_joint_proposal(10, 10, 0.9, 0.9, box, 0.9);
    PoseProposal b = two_joint_proposal(5000, 5000, 0.9, 0.9,
                                        BBox{4900, 4900, 5100, 5100}, 0.8);
    const auto out = run_nms({a, b}, NmsParams{});
    CHECK(out.size() == 2);
    CHECK(out[0].pose.score == 0.9);  // descending score order
    CHECK(out[1].pose.score == 0.8);
  }
  SUBCASE("mixed image ids are rejected") {
    PoseProposal a = two_joint_proposal(10, 10, 0.9, 0.9, box);
    PoseProposal b = a;
    b.image_id = "other";
    CHECK_THROWS_AS(run_nms({a, b}, NmsParams{}), ValidationError);
  }
  SUBCASE("score ties break toward the earlier input index") {
    PoseProposal a = two_joint_proposal(20, 20, 0.9, 0.9, box, 0.5);
    PoseProposal b = two_joint_proposal(21, 20, 0.9, 0.9, box, 0.5);
    NmsParams params{0.1, 10.0, 1.0, 2.0};
    const auto out = run_nms({a, b}, params);
    REQUIRE(out.size() == 1);
    CHECK(out[0].pose.joints[0].x == 20.0);
  }
}

TEST_CASE("optimized run_nms equals the naive reference on random scenes") {
  Rng rng(2024);
  for (int scene_idx = 0; scene_idx < 200; ++scene_idx) {
    const auto scene = random_scene(rng, 8, "img");
    const NmsParams params = random_params(rng);
    const auto fast = run_nms(scene, params);
    const auto naive = run_nms_reference(scene, params);
    REQUIRE(same_proposals(fast, naive));
  }
}

TEST_CASE("k_sim and h_sim stay inside their ranges") {
  Rng rng(321);
  for (int scene_idx = 0; scene_idx < 50; ++scene_idx) {
    const auto scene = random_scene(rng, 6, "img");
    const double sigma1 = rng.uniform(0.05, 1.0);
    const double sigma2 = rng.uniform(0.05, 20.0);
    const double m = static_cast<double>(scene[0].pose.joints.size());
    for (const PoseProposal& a : scene) {
      for (const PoseProposal& b : scene) {
        const double k = k_sim(a, b, sigma1);
        CHECK(k >= 0.0);
        CHECK(k <= m);
        const double h = h_sim(a.pose, b.pose, sigma2);
        CHECK(h >= 0.0);
        CHECK(h <= m);
      }
    }
  }
}

TEST_CASE("run_nms structural properties") {
  Rng rng(99);
  for (int scene_idx = 0; scene_idx < 50; ++scene_idx) {
    const auto scene = random_scene(rng, 8, "img");
    const NmsParams params = random_params(rng);
    const auto out = run_nms(scene, params);

    // Survivors are a subset of the input.
    for (const PoseProposal& s : out) {
      bool found = false;
      for (const PoseProposal& p : scene) {
        if (same_proposals({s}, {p})) {
          found = true;
          break;
        }
      }
      CHECK(found);
    }

    // The top-scoring proposal always survives.
    double top = -1;
    for (const PoseProposal& p : scene) top = std::max(top, p.pose.score);
    REQUIRE(!out.empty());
    CHECK(out[0].pose.score == top);

    // Output is sorted by descending score.
    for (std::size_t i = 1; i < out.size(); ++i) {
      CHECK(out[i - 1].pose.score >= out[i].pose.score);
    }

    // Idempotence.
    const auto again = run_nms(out, params);
    CHECK(same_proposals(out, again));
  }
}

TEST_CASE("raising eta never shrinks the surviving set on separated "
          "duplicate clusters") {
  // Greedy suppression is not globally monotone in eta when similarity
  // chains occur; with well-separated clusters the chains are confined and
  // monotonicity holds. Checked over an eta ladder on such scenes.
  Rng rng(123);
  for (int scene_idx = 0; scene_idx < 30; ++scene_idx) {
    std::vector<PoseProposal> scene;
    const int clusters = 1 + static_cast<int>(rng.uniform_int(3));
    for (int c = 0; c < clusters; ++c) {
      const double cx = 300 + 2000.0 * c;
      const double cy = 200;
      const int copies = 1 + static_cast<int>(rng.uniform_int(3));
      for (int k = 0; k < copies; ++k) {
        Pose pose = grid_pose(cx, cy, 40, rng.uniform(0.3, 1.0));
        for (Joint& j : pose.joints) {
          j.x += rng.normal(0, 2.0);
          j.y += rng.normal(0, 2.0);
        }
        scene.push_back({"img", pose_box(pose, 5), pose});
      }
    }
    NmsParams params = random_params(rng);
    std::vector<std::size_t> sizes;
    for (double eta = 0.5; eta <= 33.0; eta += 2.0) {
      params.eta = eta;
      sizes.push_back(run_nms(scene, params).size());
    }
    for (std::size_t i = 1; i < sizes.size(); ++i) {
      CHECK(sizes[i - 1] <= sizes[i]);
    }
  }
}

TEST_CASE("run_nms_batch groups by image and matches per-image runs") {
  Rng rng(55);
  std::vector<PoseProposal> all;
  std::vector<std::vector<PoseProposal>> scenes;
  for (int i = 0; i < 6; ++i) {
    scenes.push_back(random_scene(rng, 6, "img_" + std::to_string(i)));
    all.insert(all.end(), scenes.back().begin(), scenes.back().end());
  }
  const NmsParams params = random_params(rng);
  const auto batched = run_nms_batch(all, params, 3);
  std::vector<PoseProposal> expected;
  for (const auto& scene : scenes) {
    const auto out = run_nms(scene, params);
    expected.insert(expected.end(), out.begin(), out.end());
  }
  CHECK(same_proposals(batched, expected));

  // Thread count must not change anything.
  const auto single = run_nms_batch(all, params, 1);
  CHECK(same_proposals(batched, single));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate_params({0.0, 1.0, 1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(validate_params({1.0, -1.0, 1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(validate_params({1.0, 1.0, -0.1, 1.0}), ValidationError);
  CHECK_NOTHROW(validate_params(NmsParams{}));
}
