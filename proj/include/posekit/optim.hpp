#pragma once

#include <cstdint>
#include <vector>

#include "posekit/eval.hpp"
#include "posekit/nms.hpp"

namespace posekit {

struct ParamRange {
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;
};

struct OptimConfig {
  int grid_sigma1 = 10;
  int grid_sigma2 = 10;
  int grid_lambda = 10;
  int grid_eta = 10;
  ParamRange sigma1{0.01, 2.0, true};
  ParamRange sigma2{0.1, 100.0, true};
  ParamRange lambda{0.0, 5.0, false};
  ParamRange eta{0.1, 32.0, false};  // upper default is 2m for the 16-joint layout
  int max_rounds = 10;
  double tol = 1e-4;            // minimum absolute mAP gain per round
  std::uint64_t seed = 0;       // reserved; the grid schedule is deterministic
  int threads = 0;              // <= 0 uses all cores
};

void validate_config(const OptimConfig& cfg);

struct OptimResult {
  NmsParams params;
  double map = 0.0;
  std::vector<double> trace;  // incumbent objective, one entry per round plus the start
  int rounds = 0;
};

// Alternating two-parameter grid search: a full joint grid over
// (sigma1, sigma2) with (lambda, eta) fixed, then over (lambda, eta) with the
// sigmas fixed, repeated until a round gains less than tol. The incumbent is
// re-evaluated inside every grid, so the trace never decreases. Objective
// ties prefer the lexicographically smallest (sigma1, sigma2, lambda, eta).
OptimResult optimize_params(const std::vector<PoseProposal>& proposals,
                            const std::vector<ImageAnnotation>& gts,
                            const OptimConfig& cfg,
                            const EvalConfig& eval_cfg = {});

// mAP with suppression disabled; the ablation baseline.
double disable_nms_baseline(const std::vector<PoseProposal>& proposals,
                            const std::vector<ImageAnnotation>& gts,
                            const EvalConfig& eval_cfg = {});

}  // namespace posekit
