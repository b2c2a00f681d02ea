#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "posekit/eval.hpp"
#include "posekit/geometry.hpp"
#include "posekit/nms.hpp"
#include "posekit/optim.hpp"
#include "posekit/pgpg.hpp"
#include "posekit/synth.hpp"

namespace posekit {

using json = nlohmann::json;

// Unknown fields abort the load in Strict mode and warn on stderr otherwise.
enum class LoadMode { Strict, Lenient };

inline constexpr int kFormatVersion = 1;

// Every file is a UTF-8 JSON envelope: format_version, kind, an optional
// joint schema, and the kind-specific payload. Loaders validate invariants
// (finite numbers, positive sigmas, joints matching the schema size) and
// never coerce mismatched versions or kinds.

// -- json converters (payload level, no envelope) --
json schema_to_json(const JointSchema& schema);
JointSchema schema_from_json(const json& j, LoadMode mode);

json pose_to_json(const Pose& pose);
Pose pose_from_json(const json& j, const JointSchema& schema, LoadMode mode);

json box_to_json(const BBox& box);
BBox box_from_json(const json& j);

json params_to_json(const NmsParams& params);
NmsParams params_from_json(const json& j, LoadMode mode);

json gmm_to_json(const OffsetGMM& gmm);
OffsetGMM gmm_from_json(const json& j, LoadMode mode);

json report_to_json(const EvalReport& report, const JointSchema& schema);

json optim_config_to_json(const OptimConfig& cfg);
OptimConfig optim_config_from_json(const json& j, LoadMode mode);

json synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const json& j, LoadMode mode);

// -- file round trips --
void save_proposals(const std::string& path,
                    const std::vector<PoseProposal>& proposals,
                    const JointSchema& schema);
std::vector<PoseProposal> load_proposals(const std::string& path,
                                         JointSchema* schema_out,
                                         LoadMode mode = LoadMode::Lenient);

void save_annotations(const std::string& path,
                      const std::vector<ImageAnnotation>& gts,
                      const JointSchema& schema);
std::vector<ImageAnnotation> load_annotations(const std::string& path,
                                              JointSchema* schema_out,
                                              LoadMode mode = LoadMode::Lenient);

void save_params(const std::string& path, const NmsParams& params);
NmsParams load_params(const std::string& path,
                      LoadMode mode = LoadMode::Lenient);

void save_model(const std::string& path, const AtomicPoseModel& model);
AtomicPoseModel load_model(const std::string& path,
                           LoadMode mode = LoadMode::Lenient);

void save_report(const std::string& path, const EvalReport& report,
                 const JointSchema& schema);

void save_optim_config(const std::string& path, const OptimConfig& cfg);
OptimConfig load_optim_config(const std::string& path,
                              LoadMode mode = LoadMode::Lenient);

void save_synth_config(const std::string& path, const SynthConfig& cfg);
SynthConfig load_synth_config(const std::string& path,
                              LoadMode mode = LoadMode::Lenient);

// Envelope plumbing shared by the loaders; exposed for the pipeline config.
json load_envelope(const std::string& path, const std::string& kind,
                   LoadMode mode);
void save_envelope(const std::string& path, const std::string& kind,
                   json payload_fields);
std::string dump_canonical(const json& j);

// Rejects NaN/Inf anywhere under the given value.
void require_finite(const json& j, const std::string& context);

}  // namespace posekit
