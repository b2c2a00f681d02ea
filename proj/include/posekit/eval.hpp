#pragma once

#include <string>
#include <vector>

#include "posekit/geometry.hpp"

namespace posekit {

struct EvalConfig {
  double pckh_alpha = 0.5;
  JointSchema schema = JointSchema::mpii16();
};

struct EvalReport {
  std::vector<double> ap_per_joint;  // one AP per schema joint
  double map = 0.0;                  // arithmetic mean of ap_per_joint
  long long images = 0;
  long long gt_poses = 0;
  long long predictions = 0;
  long long assigned = 0;
  std::vector<long long> visible_gt_joints;  // recall denominators
};

// Greedy score-ordered assignment of predictions to ground-truth poses within
// one image. Overlap is the number of joints (visible on both sides) within
// alpha * head_size of the matching ground-truth joint; predictions with zero
// overlap stay unassigned (-1). Tie-breaks: predictions ordered by score then
// full content, ground truths by index.
std::vector<int> match_poses(const std::vector<PoseProposal>& preds,
                             const ImageAnnotation& gt,
                             const EvalConfig& cfg);

// PCKh-based mean average precision. Per joint, assigned predictions
// contribute score-ranked detections (correct when within the PCKh radius of
// a visible ground-truth joint); unassigned predictions contribute false
// positives for their visible joints. AP is the area under the
// precision-recall curve with all-points interpolation, pooling detections at
// equal confidences so the result is independent of input order. Joints with
// no visible ground truth score 0.
EvalReport evaluate(const std::vector<PoseProposal>& preds,
                    const std::vector<ImageAnnotation>& gts,
                    const EvalConfig& cfg = {});

// Content-based strict weak ordering used everywhere predictions must be
// ranked deterministically: score descending, then lexicographic content.
bool canonical_pred_less(const PoseProposal& a, const PoseProposal& b);

}  // namespace posekit
