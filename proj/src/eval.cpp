#include "posekit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

namespace posekit {

namespace {

int compare_pose_content(const Pose& a, const Pose& b) {
  if (a.joints.size() != b.joints.size())
    return a.joints.size() < b.joints.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.joints.size(); ++i) {
    const Joint& ja = a.joints[i];
    const Joint& jb = b.joints[i];
    const auto ta = std::tie(ja.x, ja.y, ja.confidence, ja.visible);
    const auto tb = std::tie(jb.x, jb.y, jb.confidence, jb.visible);
    if (ta < tb) return -1;
    if (tb < ta) return 1;
  }
  return 0;
}

int compare_content(const PoseProposal& a, const PoseProposal& b) {
  const int pc = compare_pose_content(a.pose, b.pose);
  if (pc != 0) return pc;
  const auto ba = std::tie(a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max);
  const auto bb = std::tie(b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max);
  if (ba < bb) return -1;
  if (bb < ba) return 1;
  if (a.image_id != b.image_id) return a.image_id < b.image_id ? -1 : 1;
  return 0;
}

bool within_pckh(const Joint& pred, const Joint& gt, double radius) {
  const double dx = pred.x - gt.x;
  const double dy = pred.y - gt.y;
  return dx * dx + dy * dy <= radius * radius;
}

// All-points interpolated average precision from (correct, count) groups in
// descending confidence order.
double average_precision(std::vector<std::pair<double, bool>>& detections,
                         long long n_gt) {
  if (n_gt <= 0) return 0.0;
  if (detections.empty()) return 0.0;
  std::sort(detections.begin(), detections.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  // Pool detections at identical confidences into one PR point so the curve
  // does not depend on input order.
  std::vector<std::pair<long long, long long>> steps;  // cumulative (tp, fp)
  long long tp = 0;
  long long fp = 0;
  std::size_t i = 0;
  while (i < detections.size()) {
    const double conf = detections[i].first;
    while (i < detections.size() && detections[i].first == conf) {
      if (detections[i].second) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    steps.emplace_back(tp, fp);
  }

  std::vector<double> precision(steps.size());
  std::vector<double> recall(steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    precision[k] = static_cast<double>(steps[k].first) /
                   static_cast<double>(steps[k].first + steps[k].second);
    recall[k] = static_cast<double>(steps[k].first) /
                static_cast<double>(n_gt);
  }
  // Precision envelope from the right.
  for (std::size_t k = steps.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = recall[0] * precision[0];
  for (std::size_t k = 1; k < steps.size(); ++k) {
    ap += (recall[k] - recall[k - 1]) * precision[k];
  }
  return ap;
}

}  // namespace

bool canonical_pred_less(const PoseProposal& a, const PoseProposal& b) {
  if (a.pose.score != b.pose.score) return a.pose.score > b.pose.score;
  return compare_content(a, b) < 0;
}

std::vector<int> match_poses(const std::vector<PoseProposal>& preds,
                             const ImageAnnotation& gt, const EvalConfig& cfg) {
  std::vector<int> order(preds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return canonical_pred_less(preds[a], preds[b]);
  });

  std::vector<int> assignment(preds.size(), -1);
  std::vector<bool> gt_taken(gt.gt_poses.size(), false);
  for (int pi : order) {
    const Pose& pose = preds[pi].pose;
    int best_gt = -1;
    int best_overlap = 0;
    for (std::size_t g = 0; g < gt.gt_poses.size(); ++g) {
      if (gt_taken[g]) continue;
      const GtInstance& inst = gt.gt_poses[g];
      const double radius = cfg.pckh_alpha * inst.head_size;
      int overlap = 0;
      const std::size_t m =
          std::min(pose.joints.size(), inst.pose.joints.size());
      for (std::size_t j = 0; j < m; ++j) {
        if (pose.joints[j].visible && inst.pose.joints[j].visible &&
            within_pckh(pose.joints[j], inst.pose.joints[j], radius)) {
          ++overlap;
        }
      }
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      assignment[pi] = best_gt;
      gt_taken[best_gt] = true;
    }
  }
  return assignment;
}

EvalReport evaluate(const std::vector<PoseProposal>& preds,
                    const std::vector<ImageAnnotation>& gts,
                    const EvalConfig& cfg) {
  const int m = cfg.schema.size();
  std::unordered_map<std::string, std::size_t> gt_index;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    gt_index.emplace(gts[i].image_id, i);
  }

  std::vector<std::vector<const PoseProposal*>> per_image(gts.size());
  for (const PoseProposal& p : preds) {
    const auto it = gt_index.find(p.image_id);
    if (it == gt_index.end()) {
      throw ValidationError("prediction references unknown image_id '" +
                            p.image_id + "'");
    }
    if (static_cast<int>(p.pose.joints.size()) != m) {
      throw ValidationError("prediction joint count does not match schema '" +
                            cfg.schema.name + "'");
    }
    per_image[it->second].push_back(&p);
  }
  for (const ImageAnnotation& ann : gts) {
    for (const GtInstance& inst : ann.gt_poses) {
      if (static_cast<int>(inst.pose.joints.size()) != m) {
        throw ValidationError(
            "annotation joint count does not match schema '" +
            cfg.schema.name + "'");
      }
    }
  }

  EvalReport report;
  report.images = static_cast<long long>(gts.size());
  report.predictions = static_cast<long long>(preds.size());
  report.visible_gt_joints.assign(m, 0);
  for (const ImageAnnotation& ann : gts) {
    report.gt_poses += static_cast<long long>(ann.gt_poses.size());
    for (const GtInstance& inst : ann.gt_poses) {
      for (int j = 0; j < m; ++j) {
        if (inst.pose.joints[j].visible) ++report.visible_gt_joints[j];
      }
    }
  }

  std::vector<std::vector<std::pair<double, bool>>> detections(m);
  for (std::size_t img = 0; img < gts.size(); ++img) {
    std::vector<PoseProposal> image_preds;
    image_preds.reserve(per_image[img].size());
    for (const PoseProposal* p : per_image[img]) image_preds.push_back(*p);
    const std::vector<int> assignment =
        match_poses(image_preds, gts[img], cfg);
    for (std::size_t pi = 0; pi < image_preds.size(); ++pi) {
      const Pose& pose = image_preds[pi].pose;
      if (assignment[pi] >= 0) {
        ++report.assigned;
        const GtInstance& inst = gts[img].gt_poses[assignment[pi]];
        const double radius = cfg.pckh_alpha * inst.head_size;
        for (int j = 0; j < m; ++j) {
          const bool correct =
              inst.pose.joints[j].visible &&
              within_pckh(pose.joints[j], inst.pose.joints[j], radius);
          detections[j].emplace_back(pose.joints[j].confidence, correct);
        }
      } else {
        for (int j = 0; j < m; ++j) {
          if (pose.joints[j].visible) {
            detections[j].emplace_back(pose.joints[j].confidence, false);
          }
        }
      }
    }
  }

  report.ap_per_joint.resize(m);
  double sum = 0.0;
  for (int j = 0; j < m; ++j) {
    report.ap_per_joint[j] =
        average_precision(detections[j], report.visible_gt_joints[j]);
    sum += report.ap_per_joint[j];
  }
  report.map = m > 0 ? sum / static_cast<double>(m) : 0.0;
  return report;
}

}  // namespace posekit
