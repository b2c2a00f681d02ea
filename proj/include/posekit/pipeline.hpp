#pragma once

#include <string>

#include "posekit/io.hpp"

namespace posekit {

// One-shot run of the whole chain: generate a synthetic benchmark, fit the
// proposal-offset model, optimize the suppression parameters against mAP,
// and report mAP with suppression disabled, with the stock parameters, and
// with the optimized parameters.
struct PipelineConfig {
  SynthConfig synth;
  PgpgConfig pgpg;
  OptimConfig optim;
  EvalConfig eval;
  int sample_per_gt = 3;  // boxes drawn per ground-truth pose for props_sampled
};

PipelineConfig pipeline_config_from_json(const json& j, LoadMode mode);
json pipeline_config_to_json(const PipelineConfig& cfg);

struct PipelineReport {
  double map_no_nms = 0.0;
  double map_default = 0.0;
  double map_optimized = 0.0;
  NmsParams params;
  std::vector<double> trace;
  int rounds = 0;
  long long images = 0;
  long long proposals = 0;
  long long fallback_clusters = 0;
};

// Writes gt.json, proposals.json, model.json, params.json, trace.json,
// survivors.json, props_sampled.json, and summary.json into out_dir. All
// outputs are deterministic functions of the config (no timestamps, no
// absolute paths), so identical configs produce identical bytes.
PipelineReport run_pipeline(const PipelineConfig& cfg,
                            const std::string& out_dir);

json pipeline_summary_json(const PipelineReport& report,
                           const PipelineConfig& cfg);

}  // namespace posekit
