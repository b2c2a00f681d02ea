#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "posekit/geometry.hpp"
#include "posekit/rng.hpp"

namespace posekit {

// Pose in the torso-aligned frame: translated so the thorax-pelvis midpoint
// is the origin and scaled so the torso has unit length. Rotation is left
// alone. Invisible joints are zeroed and masked out.
struct AlignedPose {
  std::vector<double> coords;      // 2m, interleaved x,y
  std::vector<std::uint8_t> mask;  // m
};

AlignedPose align_pose(const Pose& pose, const JointSchema& schema);

// Mean squared joint distance over joints visible in both vectors; +inf when
// they share none.
double masked_distance(const AlignedPose& a, const AlignedPose& b);

struct KmeansResult {
  std::vector<AlignedPose> centers;
  std::vector<int> assignment;
  int iterations = 0;
};

// k-means on aligned poses under the masked distance, k-means++ seeded,
// stopping at an assignment fixpoint or 300 iterations.
KmeansResult fit_atomic(const std::vector<Pose>& poses, int k,
                        std::uint64_t seed, const JointSchema& schema);

// Diagonal-covariance Gaussian mixture over 4-vectors.
struct OffsetGMM {
  std::vector<double> weights;
  std::vector<std::array<double, 4>> means;
  std::vector<std::array<double, 4>> variances;
  std::vector<double> ll_trace;  // per-iteration mean log-likelihood from fitting

  int components() const { return static_cast<int>(weights.size()); }
};

inline constexpr double kVarianceFloor = 1e-6;

// EM with k-means++ initialization; converges when the mean log-likelihood
// gain drops below 1e-6 or after 500 iterations. Variances are floored each
// M-step. Throws InsufficientDataError when offsets.size() <
// max(min_samples, components).
OffsetGMM fit_offset_gmm(const std::vector<BoxOffset>& offsets, int components,
                         std::uint64_t seed, int min_samples = 20);

double gmm_log_likelihood(const OffsetGMM& gmm,
                          const std::vector<BoxOffset>& offsets);

BoxOffset gmm_sample(const OffsetGMM& gmm, Rng& rng);

// n raw draws; the pre-rejection stream behind sample_proposals.
std::vector<BoxOffset> sample_offsets(const OffsetGMM& gmm, int n,
                                      std::uint64_t seed);

struct AtomicPoseModel {
  JointSchema schema;
  int k = 0;
  int components = 0;
  int min_samples = 0;
  std::vector<AlignedPose> centers;
  std::vector<OffsetGMM> gmms;              // one per atomic pose
  std::vector<std::uint8_t> used_fallback;  // cluster fitted on the pooled offsets
  std::uint64_t seed = 0;
  std::uint64_t dataset_hash = 0;
};

// Nearest atomic pose under the masked distance; ties go to the lowest index.
int assign_atomic(const Pose& pose, const AtomicPoseModel& model);

struct PgpgConfig {
  int k = 15;
  int components = 3;
  int min_samples = 20;
  double pair_min_iou = 0.25;  // detection-to-gt pairing threshold
  std::uint64_t seed = 0;
};

// Full model fit: align and cluster the ground-truth poses, pair each
// detection with the max-IoU ground truth in its image, and fit one offset
// mixture per cluster. Clusters with too few offsets fall back to a mixture
// fitted on the pooled offsets.
AtomicPoseModel fit_model(const std::vector<ImageAnnotation>& gts,
                          const std::vector<PoseProposal>& detections,
                          const PgpgConfig& cfg, const JointSchema& schema);

inline constexpr double kSampleIouFloor = 0.3;

// Thrown when the rejection budget runs out; carries whatever was accepted.
class SamplingError : public Error {
 public:
  SamplingError(const std::string& message, std::vector<BBox> partial)
      : Error("sampling_budget", message), partial_(std::move(partial)) {}
  const std::vector<BBox>& partial() const noexcept { return partial_; }

 private:
  std::vector<BBox> partial_;
};

// Draws box proposals around a ground-truth box from the offset mixture of
// the pose's atomic cluster. Draws that are degenerate or overlap the ground
// truth below the IoU floor are rejected and redrawn, up to 10n attempts.
std::vector<BBox> sample_proposals(const Pose& gt_pose, const BBox& gt_box,
                                   const AtomicPoseModel& model, int n,
                                   std::uint64_t seed);

}  // namespace posekit
