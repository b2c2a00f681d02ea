#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "posekit/geometry.hpp"

namespace posekit {

// Similarity parameters {sigma1, sigma2, lambda} and elimination threshold
// eta. The distance grows with similarity; a candidate whose distance to the
// reference reaches eta is eliminated.
struct NmsParams {
  double sigma1 = 0.1;
  double sigma2 = 10.0;
  double lambda = 1.0;
  double eta = 2.0;
};

void validate_params(const NmsParams& params);

// Joint-match window: centered on a reference joint, each full dimension is
// one tenth of the reference box. Closed inclusion test.
struct MatchWindow {
  double center_x = 0.0;
  double center_y = 0.0;
  double half_w = 0.0;
  double half_h = 0.0;

  bool contains(double x, double y) const {
    return std::abs(x - center_x) <= half_w &&
           std::abs(y - center_y) <= half_h;
  }
};

MatchWindow match_window(const Joint& ref_joint, const BBox& ref_box);

// Shared scalar kernels. Both the direct per-pair functions and the cached
// batch path go through these, so their sums agree bit for bit.
inline double k_sim_term(double tanh_ref, double tanh_cand) {
  return tanh_ref * tanh_cand;
}
inline double h_sim_term_normalized(double sq_dist, double diag_sq,
                                    double sigma2) {
  return std::exp(-((sq_dist / diag_sq) / sigma2));
}

// Soft count of matching joints: sum of tanh(c_ref/sigma1)*tanh(c_cand/sigma1)
// over joints where the candidate joint falls inside the reference window.
// Asymmetric on purpose: the window comes from the reference box.
double k_sim(const PoseProposal& ref, const PoseProposal& cand, double sigma1);

// Spatial similarity on raw coordinates: sum of exp(-||dk||^2 / sigma2) over
// joints visible in both poses.
double h_sim(const Pose& ref, const Pose& cand, double sigma2);

// k_sim + lambda * spatial term, with squared joint distances divided by the
// squared reference-box diagonal so one parameter set works across image
// scales.
double pose_distance(const PoseProposal& ref, const PoseProposal& cand,
                     const NmsParams& params);

// Greedy suppression for one image: repeatedly emit the highest-scoring
// remaining proposal and drop every remaining proposal whose distance to it
// reaches eta. Ties on score go to the earlier input index. Output is in
// descending score order.
std::vector<PoseProposal> run_nms(const std::vector<PoseProposal>& proposals,
                                  const NmsParams& params);

// Direct unoptimized transcription of the same scheme, built on the public
// per-pair functions. Kept as the reference for equivalence testing.
std::vector<PoseProposal> run_nms_reference(
    const std::vector<PoseProposal>& proposals, const NmsParams& params);

// Per-image structure reused across parameter candidates: confidences,
// window-inclusion masks, and squared joint distances are computed once; only
// the cheap scalar kernels depend on the parameters.
class NmsScene {
 public:
  explicit NmsScene(std::vector<PoseProposal> proposals);

  struct Kernels {
    std::vector<double> k;  // n*n, row = reference index
    std::vector<double> h;
    int n = 0;
  };

  Kernels kernels(double sigma1, double sigma2) const;

  // Greedy survivors (indices into the input order) given precomputed
  // kernels.
  std::vector<int> survivors(const Kernels& kern, double lambda,
                             double eta) const;

  std::vector<int> survivors(const NmsParams& params) const {
    return survivors(kernels(params.sigma1, params.sigma2), params.lambda,
                     params.eta);
  }

  std::vector<PoseProposal> survivors_as_proposals(
      const NmsParams& params) const;

  int size() const { return n_; }
  const std::vector<PoseProposal>& proposals() const { return proposals_; }

 private:
  std::vector<PoseProposal> proposals_;
  int n_ = 0;
  int m_ = 0;
  std::vector<double> conf_;        // n*m
  std::vector<double> diag_sq_;     // n
  std::vector<double> sq_dist_;     // n*n*m, symmetric in the first two axes
  std::vector<std::uint8_t> in_window_;  // n*n*m, [ref][cand][joint]
  std::vector<std::uint8_t> both_visible_;  // n*n*m
  std::vector<int> order_;          // indices sorted by score desc, index asc
};

// Groups a flat proposal list by image id (first-appearance order), runs NMS
// per image, and concatenates the survivors. threads <= 0 uses all cores;
// results do not depend on the thread count.
std::vector<PoseProposal> run_nms_batch(
    const std::vector<PoseProposal>& proposals, const NmsParams& params,
    int threads = 0);

}  // namespace posekit
