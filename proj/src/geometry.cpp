#include "posekit/geometry.hpp"

#include <algorithm>

namespace posekit {

const JointSchema& JointSchema::mpii16() {
  static const JointSchema schema{
      "mpii16",
      {"r_ankle", "r_knee", "r_hip", "l_hip", "l_knee", "l_ankle", "pelvis",
       "thorax", "upper_neck", "head_top", "r_wrist", "r_elbow", "r_shoulder",
       "l_shoulder", "l_elbow", "l_wrist"},
      7,
      6};
  return schema;
}

void validate_box(const BBox& box) {
  if (!box.valid()) {
    throw ValidationError("invalid box: require finite x_min < x_max and "
                          "y_min < y_max");
  }
}

void validate_pose(const Pose& pose, const JointSchema& schema) {
  if (static_cast<int>(pose.joints.size()) != schema.size()) {
    throw ValidationError("pose has " + std::to_string(pose.joints.size()) +
                          " joints, schema '" + schema.name + "' expects " +
                          std::to_string(schema.size()));
  }
  if (!(pose.score >= 0.0) || !std::isfinite(pose.score)) {
    throw ValidationError("pose score must be finite and >= 0");
  }
  for (const Joint& j : pose.joints) {
    if (!std::isfinite(j.x) || !std::isfinite(j.y) ||
        !std::isfinite(j.confidence)) {
      throw ValidationError("joint fields must be finite");
    }
    if (j.confidence < 0.0) {
      throw ValidationError("joint confidence must be >= 0");
    }
    if (!j.visible && j.confidence != 0.0) {
      throw ValidationError("invisible joints must have zero confidence");
    }
  }
}

BBox extend_box(const BBox& box, double factor) {
  validate_box(box);
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw ValidationError("extend factor must be finite and >= 0");
  }
  const double half_w = box.width() * (1.0 + factor) / 2.0;
  const double half_h = box.height() * (1.0 + factor) / 2.0;
  const double cx = box.center_x();
  const double cy = box.center_y();
  return {cx - half_w, cy - half_h, cx + half_w, cy + half_h};
}

BoxOffset box_offset(const BBox& det, const BBox& gt) {
  validate_box(det);
  validate_box(gt);
  const double w = gt.width();
  const double h = gt.height();
  return {{(det.x_min - gt.x_min) / w, (det.y_min - gt.y_min) / h,
           (det.x_max - gt.x_max) / w, (det.y_max - gt.y_max) / h}};
}

BBox apply_offset(const BBox& gt, const BoxOffset& off) {
  validate_box(gt);
  for (double v : off.d) {
    if (!std::isfinite(v)) {
      throw ValidationError("box offset components must be finite");
    }
  }
  const double w = gt.width();
  const double h = gt.height();
  const BBox out{gt.x_min + off.d[0] * w, gt.y_min + off.d[1] * h,
                 gt.x_max + off.d[2] * w, gt.y_max + off.d[3] * h};
  if (!out.valid()) {
    throw ValidationError("offset produces a degenerate box");
  }
  return out;
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

double composite_score(double detection_confidence, const Pose& pose) {
  if (pose.joints.empty()) return 0.0;
  double sum = 0.0;
  for (const Joint& j : pose.joints) sum += j.confidence;
  return detection_confidence * (sum / static_cast<double>(pose.joints.size()));
}

}  // namespace posekit
