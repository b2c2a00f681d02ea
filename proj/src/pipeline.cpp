#include "posekit/pipeline.hpp"

#include <filesystem>
#include <initializer_list>

namespace posekit {

namespace {

void check_unknown(const json& obj, std::initializer_list<const char*> allowed,
                   const std::string& context, LoadMode mode) {
  if (!obj.is_object()) return;
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (known) continue;
    if (mode == LoadMode::Strict) {
      throw SchemaError("unknown field '" + item.key() + "' in " + context);
    }
  }
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j, LoadMode mode) {
  check_unknown(j, {"synth", "pgpg", "optim", "eval", "sample_per_gt"},
                "pipeline config", mode);
  PipelineConfig cfg;
  cfg.synth = synth_config_from_json(j.at("synth"), mode);
  if (j.contains("pgpg")) {
    const json& p = j.at("pgpg");
    check_unknown(p, {"k", "components", "min_samples", "pair_min_iou", "seed"},
                  "pgpg config", mode);
    if (p.contains("k")) cfg.pgpg.k = p.at("k").get<int>();
    if (p.contains("components"))
      cfg.pgpg.components = p.at("components").get<int>();
    if (p.contains("min_samples"))
      cfg.pgpg.min_samples = p.at("min_samples").get<int>();
    if (p.contains("pair_min_iou"))
      cfg.pgpg.pair_min_iou = p.at("pair_min_iou").get<double>();
    if (p.contains("seed"))
      cfg.pgpg.seed = p.at("seed").get<std::uint64_t>();
  }
  if (j.contains("optim")) {
    cfg.optim = optim_config_from_json(j.at("optim"), mode);
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    check_unknown(e, {"pckh_alpha"}, "eval config", mode);
    if (e.contains("pckh_alpha"))
      cfg.eval.pckh_alpha = e.at("pckh_alpha").get<double>();
    if (!(cfg.eval.pckh_alpha > 0.0) || cfg.eval.pckh_alpha > 1.0) {
      throw SchemaError("pckh_alpha must be in (0, 1]");
    }
  }
  if (j.contains("sample_per_gt")) {
    cfg.sample_per_gt = j.at("sample_per_gt").get<int>();
  }
  return cfg;
}

json pipeline_config_to_json(const PipelineConfig& cfg) {
  return json{{"synth", synth_config_to_json(cfg.synth)},
              {"pgpg",
               {{"k", cfg.pgpg.k},
                {"components", cfg.pgpg.components},
                {"min_samples", cfg.pgpg.min_samples},
                {"pair_min_iou", cfg.pgpg.pair_min_iou},
                {"seed", cfg.pgpg.seed}}},
              {"optim", optim_config_to_json(cfg.optim)},
              {"eval", {{"pckh_alpha", cfg.eval.pckh_alpha}}},
              {"sample_per_gt", cfg.sample_per_gt}};
}

json pipeline_summary_json(const PipelineReport& report,
                           const PipelineConfig& cfg) {
  return json{
      {"seed", cfg.synth.seed},
      {"images", report.images},
      {"proposals", report.proposals},
      {"map_no_nms", report.map_no_nms},
      {"map_nms_default", report.map_default},
      {"map_nms_optimized", report.map_optimized},
      {"optimized_params", params_to_json(report.params)},
      {"rounds", report.rounds},
      {"trace", report.trace},
      {"pgpg",
       {{"k", cfg.pgpg.k}, {"fallback_clusters", report.fallback_clusters}}}};
}

PipelineReport run_pipeline(const PipelineConfig& cfg,
                            const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto path = [&](const char* name) {
    return (fs::path(out_dir) / name).string();
  };
  const JointSchema& schema = JointSchema::mpii16();

  const SynthOutput data = generate(cfg.synth);
  save_annotations(path("gt.json"), data.gts, schema);
  save_proposals(path("proposals.json"), data.proposals, schema);

  const AtomicPoseModel model =
      fit_model(data.gts, data.proposals, cfg.pgpg, schema);
  save_model(path("model.json"), model);

  // A slice of generated boxes per ground truth, written for downstream
  // training consumers.
  if (cfg.sample_per_gt > 0) {
    std::vector<PoseProposal> sampled;
    std::uint64_t counter = 0;
    for (const ImageAnnotation& ann : data.gts) {
      for (const GtInstance& inst : ann.gt_poses) {
        ++counter;
        std::vector<BBox> boxes;
        try {
          boxes = sample_proposals(inst.pose, inst.box, model,
                                   cfg.sample_per_gt,
                                   derive_seed(cfg.pgpg.seed, counter));
        } catch (const DegeneratePoseError&) {
          continue;
        }
        for (const BBox& box : boxes) {
          sampled.push_back({ann.image_id, box, inst.pose});
        }
      }
    }
    save_proposals(path("props_sampled.json"), sampled, schema);
  }

  EvalConfig eval_cfg = cfg.eval;
  eval_cfg.schema = schema;

  PipelineReport report;
  report.images = static_cast<long long>(data.gts.size());
  report.proposals = static_cast<long long>(data.proposals.size());
  for (std::uint8_t f : model.used_fallback) report.fallback_clusters += f;

  report.map_no_nms =
      disable_nms_baseline(data.proposals, data.gts, eval_cfg);
  report.map_default =
      evaluate(run_nms_batch(data.proposals, NmsParams{}, cfg.optim.threads),
               data.gts, eval_cfg)
          .map;

  const OptimResult optim =
      optimize_params(data.proposals, data.gts, cfg.optim, eval_cfg);
  report.params = optim.params;
  report.trace = optim.trace;
  report.rounds = optim.rounds;
  report.map_optimized = optim.map;
  save_params(path("params.json"), optim.params);
  save_envelope(path("trace.json"), "posekit/optim_trace",
                json{{"trace", optim.trace},
                     {"map", optim.map},
                     {"map_no_nms", report.map_no_nms},
                     {"params", params_to_json(optim.params)}});

  const std::vector<PoseProposal> survivors =
      run_nms_batch(data.proposals, optim.params, cfg.optim.threads);
  save_proposals(path("survivors.json"), survivors, schema);

  const EvalReport final_eval = evaluate(survivors, data.gts, eval_cfg);
  save_report(path("eval_optimized.json"), final_eval, schema);

  save_envelope(path("summary.json"), "posekit/pipeline_summary",
                json{{"summary", pipeline_summary_json(report, cfg)}});
  return report;
}

}  // namespace posekit
