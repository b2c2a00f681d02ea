#include "posekit/io.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace posekit {

namespace {

void check_unknown_fields(const json& obj, const std::set<std::string>& allowed,
                          const std::string& context, LoadMode mode) {
  if (!obj.is_object()) return;
  for (const auto& item : obj.items()) {
    if (allowed.count(item.key())) continue;
    if (mode == LoadMode::Strict) {
      throw SchemaError("unknown field '" + item.key() + "' in " + context);
    }
    std::cerr << "warning: ignoring unknown field '" << item.key() << "' in "
              << context << "\n";
  }
}

double get_finite(const json& j, const std::string& context) {
  if (!j.is_number()) {
    throw SchemaError(context + " must be a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw SchemaError(context + " must be finite");
  }
  return v;
}

std::uint64_t get_seed(const json& j, const std::string& context) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw SchemaError(context + " must be >= 0");
    return static_cast<std::uint64_t>(v);
  }
  throw SchemaError(context + " must be a non-negative integer");
}

json offset4_to_json(const std::array<double, 4>& a) {
  return json::array({a[0], a[1], a[2], a[3]});
}

std::array<double, 4> offset4_from_json(const json& j,
                                        const std::string& context) {
  if (!j.is_array() || j.size() != 4) {
    throw SchemaError(context + " must be a 4-element array");
  }
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = get_finite(j[i], context);
  return out;
}

}  // namespace

void require_finite(const json& j, const std::string& context) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw SchemaError("non-finite number in " + context);
  }
  if (j.is_object() || j.is_array()) {
    for (const auto& item : j.items()) require_finite(item.value(), context);
  }
}

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

json schema_to_json(const JointSchema& schema) {
  return json{{"name", schema.name},
              {"joint_names", schema.joint_names},
              {"torso", json::array({schema.thorax, schema.pelvis})}};
}

JointSchema schema_from_json(const json& j, LoadMode mode) {
  check_unknown_fields(j, {"name", "joint_names", "torso"}, "schema", mode);
  JointSchema schema;
  schema.name = j.at("name").get<std::string>();
  schema.joint_names = j.at("joint_names").get<std::vector<std::string>>();
  if (schema.joint_names.empty()) {
    throw SchemaError("schema must name at least one joint");
  }
  const json& torso = j.at("torso");
  if (!torso.is_array() || torso.size() != 2) {
    throw SchemaError("schema torso must be [thorax, pelvis]");
  }
  schema.thorax = torso[0].get<int>();
  schema.pelvis = torso[1].get<int>();
  const int m = schema.size();
  if (schema.thorax < 0 || schema.thorax >= m || schema.pelvis < 0 ||
      schema.pelvis >= m || schema.thorax == schema.pelvis) {
    throw SchemaError("schema torso indices out of range");
  }
  return schema;
}

json pose_to_json(const Pose& pose) {
  json joints = json::array();
  for (const Joint& j : pose.joints) {
    joints.push_back(json::array({j.x, j.y, j.confidence, j.visible ? 1 : 0}));
  }
  return json{{"score", pose.score}, {"joints", std::move(joints)}};
}

Pose pose_from_json(const json& j, const JointSchema& schema, LoadMode mode) {
  check_unknown_fields(j, {"score", "joints"}, "pose", mode);
  Pose pose;
  pose.score = get_finite(j.at("score"), "pose score");
  const json& joints = j.at("joints");
  if (!joints.is_array() ||
      static_cast<int>(joints.size()) != schema.size()) {
    throw SchemaError("pose joints length does not match schema '" +
                      schema.name + "' (" + std::to_string(schema.size()) +
                      ")");
  }
  pose.joints.reserve(joints.size());
  for (const json& entry : joints) {
    if (!entry.is_array() || entry.size() != 4) {
      throw SchemaError("each joint must be [x, y, confidence, visible]");
    }
    Joint joint;
    joint.x = get_finite(entry[0], "joint x");
    joint.y = get_finite(entry[1], "joint y");
    joint.confidence = get_finite(entry[2], "joint confidence");
    joint.visible = entry[3].get<int>() != 0;
    pose.joints.push_back(joint);
  }
  validate_pose(pose, schema);
  return pose;
}

json box_to_json(const BBox& box) {
  return json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

BBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw SchemaError("box must be [x_min, y_min, x_max, y_max]");
  }
  BBox box{get_finite(j[0], "box"), get_finite(j[1], "box"),
           get_finite(j[2], "box"), get_finite(j[3], "box")};
  validate_box(box);
  return box;
}

json params_to_json(const NmsParams& params) {
  return json{{"sigma1", params.sigma1},
              {"sigma2", params.sigma2},
              {"lambda", params.lambda},
              {"eta", params.eta}};
}

NmsParams params_from_json(const json& j, LoadMode mode) {
  check_unknown_fields(j, {"sigma1", "sigma2", "lambda", "eta"}, "params",
                       mode);
  NmsParams params;
  params.sigma1 = get_finite(j.at("sigma1"), "sigma1");
  params.sigma2 = get_finite(j.at("sigma2"), "sigma2");
  params.lambda = get_finite(j.at("lambda"), "lambda");
  params.eta = get_finite(j.at("eta"), "eta");
  validate_params(params);
  return params;
}

json gmm_to_json(const OffsetGMM& gmm) {
  json means = json::array();
  json variances = json::array();
  for (const auto& m : gmm.means) means.push_back(offset4_to_json(m));
  for (const auto& v : gmm.variances) variances.push_back(offset4_to_json(v));
  return json{{"weights", gmm.weights},
              {"means", std::move(means)},
              {"variances", std::move(variances)}};
}

OffsetGMM gmm_from_json(const json& j, LoadMode mode) {
  check_unknown_fields(j, {"weights", "means", "variances"}, "gmm", mode);
  OffsetGMM gmm;
  gmm.weights = j.at("weights").get<std::vector<double>>();
  if (gmm.weights.empty()) throw SchemaError("gmm needs at least one component");
  double sum = 0.0;
  for (double w : gmm.weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw SchemaError("gmm weights must be finite and >= 0");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw SchemaError("gmm weights must sum to 1");
  }
  const json& means = j.at("means");
  const json& variances = j.at("variances");
  if (means.size() != gmm.weights.size() ||
      variances.size() != gmm.weights.size()) {
    throw SchemaError("gmm means/variances must match the weight count");
  }
  for (const json& m : means) {
    gmm.means.push_back(offset4_from_json(m, "gmm mean"));
  }
  for (const json& v : variances) {
    const auto var = offset4_from_json(v, "gmm variance");
    for (double x : var) {
      if (!(x > 0.0)) throw SchemaError("gmm variances must be > 0");
    }
    gmm.variances.push_back(var);
  }
  return gmm;
}

json report_to_json(const EvalReport& report, const JointSchema& schema) {
  json per_joint = json::array();
  for (std::size_t j = 0; j < report.ap_per_joint.size(); ++j) {
    per_joint.push_back(json{{"joint", j},
                             {"name", schema.joint_names[j]},
                             {"ap", report.ap_per_joint[j]}});
  }
  return json{{"map", report.map},
              {"ap_per_joint", std::move(per_joint)},
              {"counts",
               {{"images", report.images},
                {"gt_poses", report.gt_poses},
                {"predictions", report.predictions},
                {"assigned", report.assigned},
                {"visible_gt_joints", report.visible_gt_joints}}}};
}

json optim_config_to_json(const OptimConfig& cfg) {
  const auto range = [](const ParamRange& r) {
    return json{{"lo", r.lo}, {"hi", r.hi}, {"log", r.log_scale}};
  };
  return json{{"grid_sigma1", cfg.grid_sigma1},
              {"grid_sigma2", cfg.grid_sigma2},
              {"grid_lambda", cfg.grid_lambda},
              {"grid_eta", cfg.grid_eta},
              {"sigma1", range(cfg.sigma1)},
              {"sigma2", range(cfg.sigma2)},
              {"lambda", range(cfg.lambda)},
              {"eta", range(cfg.eta)},
              {"max_rounds", cfg.max_rounds},
              {"tol", cfg.tol},
              {"seed", cfg.seed}};
}

OptimConfig optim_config_from_json(const json& j, LoadMode mode) {
  check_unknown_fields(j,
                       {"grid_sigma1", "grid_sigma2", "grid_lambda",
                        "grid_eta", "sigma1", "sigma2", "lambda", "eta",
                        "max_rounds", "tol", "seed", "threads"},
                       "optimizer config", mode);
  OptimConfig cfg;
  const auto range = [&](const char* key, ParamRange fallback) {
    if (!j.contains(key)) return fallback;
    const json& r = j.at(key);
    check_unknown_fields(r, {"lo", "hi", "log"},
                         std::string("range ") + key, mode);
    ParamRange out;
    out.lo = get_finite(r.at("lo"), key);
    out.hi = get_finite(r.at("hi"), key);
    out.log_scale = r.value("log", fallback.log_scale);
    return out;
  };
  if (j.contains("grid_sigma1")) cfg.grid_sigma1 = j.at("grid_sigma1").get<int>();
  if (j.contains("grid_sigma2")) cfg.grid_sigma2 = j.at("grid_sigma2").get<int>();
  if (j.contains("grid_lambda")) cfg.grid_lambda = j.at("grid_lambda").get<int>();
  if (j.contains("grid_eta")) cfg.grid_eta = j.at("grid_eta").get<int>();
  cfg.sigma1 = range("sigma1", cfg.sigma1);
  cfg.sigma2 = range("sigma2", cfg.sigma2);
  cfg.lambda = range("lambda", cfg.lambda);
  cfg.eta = range("eta", cfg.eta);
  if (j.contains("max_rounds")) cfg.max_rounds = j.at("max_rounds").get<int>();
  if (j.contains("tol")) cfg.tol = get_finite(j.at("tol"), "tol");
  if (j.contains("seed")) cfg.seed = get_seed(j.at("seed"), "seed");
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  validate_config(cfg);
  return cfg;
}

json synth_config_to_json(const SynthConfig& cfg) {
  json models = json::array();
  for (const OffsetGMM& gmm : cfg.offset_models) {
    models.push_back(gmm_to_json(gmm));
  }
  return json{{"image_count", cfg.image_count},
              {"image_width", cfg.image_width},
              {"image_height", cfg.image_height},
              {"persons_min", cfg.persons_min},
              {"persons_max", cfg.persons_max},
              {"duplicate_rate", cfg.duplicate_rate},
              {"joint_noise", cfg.joint_noise},
              {"false_positive_rate", cfg.false_positive_rate},
              {"miss_rate", cfg.miss_rate},
              {"offset_scale", cfg.offset_scale},
              {"template_count", cfg.template_count},
              {"person_height_min", cfg.person_height_min},
              {"person_height_max", cfg.person_height_max},
              {"gt_jitter", cfg.gt_jitter},
              {"offset_models", std::move(models)},
              {"seed", cfg.seed}};
}

SynthConfig synth_config_from_json(const json& j, LoadMode mode) {
  check_unknown_fields(
      j,
      {"image_count", "image_width", "image_height", "persons_min",
       "persons_max", "duplicate_rate", "joint_noise", "false_positive_rate",
       "miss_rate", "offset_scale", "template_count", "person_height_min",
       "person_height_max", "gt_jitter", "offset_models", "seed"},
      "synth config", mode);
  SynthConfig cfg;
  if (!j.contains("seed")) {
    throw SchemaError("synth config requires an explicit seed");
  }
  cfg.seed = get_seed(j.at("seed"), "seed");
  if (j.contains("image_count")) cfg.image_count = j.at("image_count").get<int>();
  if (j.contains("image_width"))
    cfg.image_width = get_finite(j.at("image_width"), "image_width");
  if (j.contains("image_height"))
    cfg.image_height = get_finite(j.at("image_height"), "image_height");
  if (j.contains("persons_min")) cfg.persons_min = j.at("persons_min").get<int>();
  if (j.contains("persons_max")) cfg.persons_max = j.at("persons_max").get<int>();
  if (j.contains("duplicate_rate"))
    cfg.duplicate_rate = get_finite(j.at("duplicate_rate"), "duplicate_rate");
  if (j.contains("joint_noise"))
    cfg.joint_noise = get_finite(j.at("joint_noise"), "joint_noise");
  if (j.contains("false_positive_rate"))
    cfg.false_positive_rate =
        get_finite(j.at("false_positive_rate"), "false_positive_rate");
  if (j.contains("miss_rate"))
    cfg.miss_rate = get_finite(j.at("miss_rate"), "miss_rate");
  if (j.contains("offset_scale"))
    cfg.offset_scale = get_finite(j.at("offset_scale"), "offset_scale");
  if (j.contains("template_count"))
    cfg.template_count = j.at("template_count").get<int>();
  if (j.contains("person_height_min"))
    cfg.person_height_min =
        get_finite(j.at("person_height_min"), "person_height_min");
  if (j.contains("person_height_max"))
    cfg.person_height_max =
        get_finite(j.at("person_height_max"), "person_height_max");
  if (j.contains("gt_jitter"))
    cfg.gt_jitter = get_finite(j.at("gt_jitter"), "gt_jitter");
  if (j.contains("offset_models")) {
    for (const json& g : j.at("offset_models")) {
      cfg.offset_models.push_back(gmm_from_json(g, mode));
    }
  }
  validate_config(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// Envelope plumbing.

json load_envelope(const std::string& path, const std::string& kind,
                   LoadMode mode) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoError("cannot parse '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw SchemaError("'" + path + "' is not an object");
  if (!doc.contains("format_version") || !doc.contains("kind")) {
    throw SchemaError("'" + path + "' lacks the format envelope");
  }
  const int version = doc.at("format_version").get<int>();
  if (version != kFormatVersion) {
    throw SchemaError("'" + path + "' has format_version " +
                      std::to_string(version) + ", expected " +
                      std::to_string(kFormatVersion));
  }
  const std::string got = doc.at("kind").get<std::string>();
  if (got != kind) {
    throw SchemaError("'" + path + "' holds '" + got + "', expected '" + kind +
                      "'");
  }
  require_finite(doc, path);
  (void)mode;
  return doc;
}

void save_envelope(const std::string& path, const std::string& kind,
                   json payload_fields) {
  json doc = std::move(payload_fields);
  doc["format_version"] = kFormatVersion;
  doc["kind"] = kind;
  require_finite(doc, path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << dump_canonical(doc);
  if (!out) throw IoError("failed writing '" + path + "'");
}

void save_proposals(const std::string& path,
                    const std::vector<PoseProposal>& proposals,
                    const JointSchema& schema) {
  json list = json::array();
  for (const PoseProposal& p : proposals) {
    list.push_back(json{{"image_id", p.image_id},
                        {"box", box_to_json(p.box)},
                        {"pose", pose_to_json(p.pose)}});
  }
  save_envelope(path, "posekit/proposals",
                json{{"schema", schema_to_json(schema)},
                     {"proposals", std::move(list)}});
}

std::vector<PoseProposal> load_proposals(const std::string& path,
                                         JointSchema* schema_out,
                                         LoadMode mode) {
  const json doc = load_envelope(path, "posekit/proposals", mode);
  check_unknown_fields(doc, {"format_version", "kind", "schema", "proposals"},
                       path, mode);
  const JointSchema schema = schema_from_json(doc.at("schema"), mode);
  std::vector<PoseProposal> out;
  for (const json& entry : doc.at("proposals")) {
    check_unknown_fields(entry, {"image_id", "box", "pose"}, "proposal", mode);
    PoseProposal p;
    p.image_id = entry.at("image_id").get<std::string>();
    p.box = box_from_json(entry.at("box"));
    p.pose = pose_from_json(entry.at("pose"), schema, mode);
    out.push_back(std::move(p));
  }
  if (schema_out) *schema_out = schema;
  return out;
}

void save_annotations(const std::string& path,
                      const std::vector<ImageAnnotation>& gts,
                      const JointSchema& schema) {
  json list = json::array();
  for (const ImageAnnotation& ann : gts) {
    json poses = json::array();
    for (const GtInstance& inst : ann.gt_poses) {
      poses.push_back(json{{"pose", pose_to_json(inst.pose)},
                           {"box", box_to_json(inst.box)},
                           {"head_size", inst.head_size}});
    }
    list.push_back(json{{"image_id", ann.image_id},
                        {"width", ann.width},
                        {"height", ann.height},
                        {"gt_poses", std::move(poses)}});
  }
  save_envelope(path, "posekit/annotations",
                json{{"schema", schema_to_json(schema)},
                     {"images", std::move(list)}});
}

std::vector<ImageAnnotation> load_annotations(const std::string& path,
                                              JointSchema* schema_out,
                                              LoadMode mode) {
  const json doc = load_envelope(path, "posekit/annotations", mode);
  check_unknown_fields(doc, {"format_version", "kind", "schema", "images"},
                       path, mode);
  const JointSchema schema = schema_from_json(doc.at("schema"), mode);
  std::vector<ImageAnnotation> out;
  for (const json& entry : doc.at("images")) {
    check_unknown_fields(entry, {"image_id", "width", "height", "gt_poses"},
                         "image annotation", mode);
    ImageAnnotation ann;
    ann.image_id = entry.at("image_id").get<std::string>();
    ann.width = get_finite(entry.at("width"), "image width");
    ann.height = get_finite(entry.at("height"), "image height");
    if (!(ann.width > 0.0) || !(ann.height > 0.0)) {
      throw SchemaError("image dimensions must be positive");
    }
    for (const json& inst : entry.at("gt_poses")) {
      check_unknown_fields(inst, {"pose", "box", "head_size"}, "gt pose",
                           mode);
      GtInstance g;
      g.pose = pose_from_json(inst.at("pose"), schema, mode);
      g.box = box_from_json(inst.at("box"));
      g.head_size = get_finite(inst.at("head_size"), "head_size");
      if (!(g.head_size > 0.0)) {
        throw SchemaError("head_size must be > 0");
      }
      ann.gt_poses.push_back(std::move(g));
    }
    out.push_back(std::move(ann));
  }
  if (schema_out) *schema_out = schema;
  return out;
}

void save_params(const std::string& path, const NmsParams& params) {
  save_envelope(path, "posekit/nms_params",
                json{{"params", params_to_json(params)}});
}

NmsParams load_params(const std::string& path, LoadMode mode) {
  const json doc = load_envelope(path, "posekit/nms_params", mode);
  check_unknown_fields(doc, {"format_version", "kind", "params"}, path, mode);
  return params_from_json(doc.at("params"), mode);
}

namespace {

char hex_digit(int v) { return v < 10 ? char('0' + v) : char('a' + v - 10); }

std::string hash_to_hex(std::uint64_t h) {
  std::string out = "0x";
  for (int shift = 60; shift >= 0; shift -= 4) {
    out.push_back(hex_digit(static_cast<int>((h >> shift) & 0xf)));
  }
  return out;
}

std::uint64_t hash_from_hex(const std::string& s) {
  if (s.size() != 18 || s[0] != '0' || s[1] != 'x') {
    throw SchemaError("dataset_hash must be 0x followed by 16 hex digits");
  }
  std::uint64_t out = 0;
  for (std::size_t i = 2; i < s.size(); ++i) {
    const char c = s[i];
    int digit;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else throw SchemaError("bad hex digit in dataset_hash");
    out = (out << 4) | static_cast<std::uint64_t>(digit);
  }
  return out;
}

}  // namespace

void save_model(const std::string& path, const AtomicPoseModel& model) {
  json centers = json::array();
  for (const AlignedPose& c : model.centers) {
    centers.push_back(json{{"coords", c.coords},
                           {"mask", std::vector<int>(c.mask.begin(),
                                                     c.mask.end())}});
  }
  json gmms = json::array();
  for (const OffsetGMM& g : model.gmms) gmms.push_back(gmm_to_json(g));
  save_envelope(
      path, "posekit/atomic_model",
      json{{"schema", schema_to_json(model.schema)},
           {"model",
            {{"k", model.k},
             {"components", model.components},
             {"min_samples", model.min_samples},
             {"seed", model.seed},
             {"dataset_hash", hash_to_hex(model.dataset_hash)},
             {"centers", std::move(centers)},
             {"gmms", std::move(gmms)},
             {"fallback", std::vector<int>(model.used_fallback.begin(),
                                           model.used_fallback.end())}}}});
}

AtomicPoseModel load_model(const std::string& path, LoadMode mode) {
  const json doc = load_envelope(path, "posekit/atomic_model", mode);
  check_unknown_fields(doc, {"format_version", "kind", "schema", "model"},
                       path, mode);
  AtomicPoseModel model;
  model.schema = schema_from_json(doc.at("schema"), mode);
  const json& m = doc.at("model");
  check_unknown_fields(m,
                       {"k", "components", "min_samples", "seed",
                        "dataset_hash", "centers", "gmms", "fallback"},
                       "model", mode);
  model.k = m.at("k").get<int>();
  model.components = m.at("components").get<int>();
  model.min_samples = m.at("min_samples").get<int>();
  model.seed = get_seed(m.at("seed"), "model seed");
  model.dataset_hash = hash_from_hex(m.at("dataset_hash").get<std::string>());
  const int joints = model.schema.size();
  for (const json& c : m.at("centers")) {
    check_unknown_fields(c, {"coords", "mask"}, "center", mode);
    AlignedPose center;
    center.coords = c.at("coords").get<std::vector<double>>();
    const auto mask = c.at("mask").get<std::vector<int>>();
    center.mask.assign(mask.begin(), mask.end());
    if (static_cast<int>(center.mask.size()) != joints ||
        center.coords.size() != 2 * center.mask.size()) {
      throw SchemaError("center dimensions do not match the schema");
    }
    for (double v : center.coords) {
      if (!std::isfinite(v)) throw SchemaError("center coords must be finite");
    }
    model.centers.push_back(std::move(center));
  }
  for (const json& g : m.at("gmms")) {
    model.gmms.push_back(gmm_from_json(g, mode));
  }
  const auto fallback = m.at("fallback").get<std::vector<int>>();
  model.used_fallback.assign(fallback.begin(), fallback.end());
  if (static_cast<int>(model.centers.size()) != model.k ||
      static_cast<int>(model.gmms.size()) != model.k ||
      static_cast<int>(model.used_fallback.size()) != model.k) {
    throw SchemaError("model arrays must all have k entries");
  }
  return model;
}

void save_report(const std::string& path, const EvalReport& report,
                 const JointSchema& schema) {
  save_envelope(path, "posekit/eval_report",
                json{{"schema", schema_to_json(schema)},
                     {"report", report_to_json(report, schema)}});
}

void save_optim_config(const std::string& path, const OptimConfig& cfg) {
  save_envelope(path, "posekit/optim_config",
                json{{"config", optim_config_to_json(cfg)}});
}

OptimConfig load_optim_config(const std::string& path, LoadMode mode) {
  const json doc = load_envelope(path, "posekit/optim_config", mode);
  check_unknown_fields(doc, {"format_version", "kind", "config"}, path, mode);
  return optim_config_from_json(doc.at("config"), mode);
}

void save_synth_config(const std::string& path, const SynthConfig& cfg) {
  save_envelope(path, "posekit/synth_config",
                json{{"config", synth_config_to_json(cfg)}});
}

SynthConfig load_synth_config(const std::string& path, LoadMode mode) {
  const json doc = load_envelope(path, "posekit/synth_config", mode);
  check_unknown_fields(doc, {"format_version", "kind", "config"}, path, mode);
  return synth_config_from_json(doc.at("config"), mode);
}

}  // namespace posekit
