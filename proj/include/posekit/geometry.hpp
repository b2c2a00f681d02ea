#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "posekit/error.hpp"

namespace posekit {

// One keypoint. Invisible joints carry zero confidence and their coordinates
// are meaningless.
struct Joint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
  bool visible = true;
};

// Names and size of the joint layout shared by all poses in a dataset, plus
// the torso endpoints used for pose alignment. Bundled in every file header.
struct JointSchema {
  std::string name;
  std::vector<std::string> joint_names;
  int thorax = 7;
  int pelvis = 6;

  int size() const { return static_cast<int>(joint_names.size()); }

  bool operator==(const JointSchema& other) const {
    return name == other.name && joint_names == other.joint_names &&
           thorax == other.thorax && pelvis == other.pelvis;
  }

  // The default 16-joint layout: ankles/knees/hips right then left, pelvis,
  // thorax, upper neck, head top, then wrists/elbows/shoulders right to left.
  static const JointSchema& mpii16();
};

struct Pose {
  std::vector<Joint> joints;
  double score = 0.0;
};

// Corner-form axis-aligned box. Corner form keeps box_offset/apply_offset
// exact inverses.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double center_x() const { return (x_min + x_max) / 2.0; }
  double center_y() const { return (y_min + y_max) / 2.0; }
  double area() const { return width() * height(); }
  double diagonal() const {
    return std::sqrt(width() * width() + height() * height());
  }

  bool valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) &&
           std::isfinite(x_max) && std::isfinite(y_max) && x_min < x_max &&
           y_min < y_max;
  }
};

// Corner offsets of a detected box relative to a ground-truth box, each
// normalized by the ground-truth side length in its direction.
struct BoxOffset {
  std::array<double, 4> d{0.0, 0.0, 0.0, 0.0};

  double norm() const {
    return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3]);
  }
};

// One detector box with the pose estimated inside it. Joints may fall outside
// the box (the estimator sees a padded crop) but must stay inside the image.
struct PoseProposal {
  std::string image_id;
  BBox box;
  Pose pose;
};

struct GtInstance {
  Pose pose;
  BBox box;
  double head_size = 0.0;  // PCKh reference length, pixels
};

struct ImageAnnotation {
  std::string image_id;
  double width = 0.0;
  double height = 0.0;
  std::vector<GtInstance> gt_poses;
};

void validate_box(const BBox& box);
void validate_pose(const Pose& pose, const JointSchema& schema);

// Same center, each side scaled by (1 + factor). Callers clip to image
// bounds afterwards if needed.
BBox extend_box(const BBox& box, double factor);

BoxOffset box_offset(const BBox& det, const BBox& gt);

// Exact inverse of box_offset. Throws ValidationError when the result would
// be degenerate.
BBox apply_offset(const BBox& gt, const BoxOffset& off);

double iou(const BBox& a, const BBox& b);

// Detection-box confidence times the mean joint confidence; the pose-level
// score used to rank proposals.
double composite_score(double detection_confidence, const Pose& pose);

}  // namespace posekit
