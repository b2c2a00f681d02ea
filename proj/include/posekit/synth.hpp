#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "posekit/geometry.hpp"
#include "posekit/pgpg.hpp"

namespace posekit {

// Scene generator simulating a detector + single-person estimator pipeline:
// ground-truth poses come from a fixed template library, each person yields
// 1 + Poisson(duplicate_rate) detections whose boxes are offset by draws from
// the configured mixture, joint noise grows with the box offset, and
// confidences decay with the noise.
struct SynthConfig {
  int image_count = 100;
  double image_width = 640.0;
  double image_height = 480.0;
  int persons_min = 1;
  int persons_max = 3;
  double duplicate_rate = 1.5;       // mean extra detections per person
  double joint_noise = 3.0;          // base per-coordinate noise, pixels
  double false_positive_rate = 0.0;  // mean spurious detections per image
  double miss_rate = 0.0;            // chance a person yields no detection
  double offset_scale = 1.0;         // 0 makes detector boxes exact
  int template_count = 5;            // templates drawn from the library
  double person_height_min = 120.0;  // pixels
  double person_height_max = 260.0;
  double gt_jitter = 2.0;            // per-joint jitter when instantiating, px
  // One entry shared by every template, or one entry per template.
  std::vector<OffsetGMM> offset_models;
  std::uint64_t seed = 1;

  static OffsetGMM default_offset_model();
};

void validate_config(const SynthConfig& cfg);

struct SynthOutput {
  std::vector<ImageAnnotation> gts;
  std::vector<PoseProposal> proposals;
};

// Deterministic under the seed; image i draws from an independent stream
// derived as derive_seed(seed, i), so per-image content does not depend on
// generation order.
SynthOutput generate(const SynthConfig& cfg);

// The fixed template library: 16-joint poses in a unit-height frame,
// y pointing down, pelvis at the origin.
const std::vector<std::array<double, 32>>& pose_templates();

}  // namespace posekit
