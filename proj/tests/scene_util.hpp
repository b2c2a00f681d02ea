#pragma once

// Small builders shared by the NMS tests and the acceptance suite.

#include <algorithm>
#include <string>
#include <vector>

#include "posekit/geometry.hpp"
#include "posekit/nms.hpp"
#include "posekit/rng.hpp"

namespace posekit::testutil {

inline Pose grid_pose(double cx, double cy, double spread, double conf,
                      int m = 16) {
  Pose pose;
  pose.joints.resize(m);
  for (int j = 0; j < m; ++j) {
    const double x = cx + spread * (j % 4 - 1.5) / 1.5;
    const double y = cy + spread * (j / 4 - 1.5) / 1.5;
    pose.joints[j] = {x, y, conf, true};
  }
  pose.score = conf;
  return pose;
}

inline BBox pose_box(const Pose& pose, double pad) {
  double x0 = 1e18, y0 = 1e18, x1 = -1e18, y1 = -1e18;
  for (const Joint& j : pose.joints) {
    x0 = std::min(x0, j.x);
    y0 = std::min(y0, j.y);
    x1 = std::max(x1, j.x);
    y1 = std::max(y1, j.y);
  }
  return {x0 - pad, y0 - pad, x1 + pad, y1 + pad};
}

// Random single-image scene: a few persons, each with redundant noisy
// copies, occasionally invisible joints.
inline std::vector<PoseProposal> random_scene(Rng& rng, int max_proposals,
                                              const std::string& image_id) {
  std::vector<PoseProposal> scene;
  const int persons = 1 + static_cast<int>(rng.uniform_int(3));
  while (static_cast<int>(scene.size()) < max_proposals) {
    const double cx = rng.uniform(60, 580);
    const double cy = rng.uniform(60, 420);
    const double spread = rng.uniform(20, 60);
    const int copies = 1 + static_cast<int>(rng.uniform_int(3));
    for (int c = 0; c < copies && static_cast<int>(scene.size()) < max_proposals;
         ++c) {
      Pose pose = grid_pose(cx, cy, spread, 1.0);
      double conf_sum = 0.0;
      for (Joint& j : pose.joints) {
        j.x += rng.normal(0, 3.0);
        j.y += rng.normal(0, 3.0);
        j.confidence = rng.uniform(0.05, 1.0);
        if (rng.uniform() < 0.05) {
          j.visible = false;
          j.confidence = 0.0;
        }
        conf_sum += j.confidence;
      }
      pose.score = conf_sum / static_cast<double>(pose.joints.size());
      scene.push_back({image_id, pose_box(pose, rng.uniform(2, 10)), pose});
    }
    if (static_cast<int>(scene.size()) >= persons && rng.uniform() < 0.5) {
      break;
    }
  }
  return scene;
}

inline NmsParams random_params(Rng& rng) {
  NmsParams params;
  params.sigma1 = rng.uniform(0.05, 1.0);
  params.sigma2 = rng.uniform(0.05, 20.0);
  params.lambda = rng.uniform(0.0, 3.0);
  params.eta = rng.uniform(0.5, 20.0);
  return params;
}

inline bool same_proposals(const std::vector<PoseProposal>& a,
                           const std::vector<PoseProposal>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].image_id != b[i].image_id) return false;
    if (a[i].pose.score != b[i].pose.score) return false;
    if (a[i].box.x_min != b[i].box.x_min || a[i].box.y_max != b[i].box.y_max)
      return false;
    for (std::size_t j = 0; j < a[i].pose.joints.size(); ++j) {
      if (a[i].pose.joints[j].x != b[i].pose.joints[j].x ||
          a[i].pose.joints[j].y != b[i].pose.joints[j].y ||
          a[i].pose.joints[j].confidence != b[i].pose.joints[j].confidence) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace posekit::testutil
