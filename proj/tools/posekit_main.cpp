#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "posekit/affine.hpp"
#include "posekit/io.hpp"
#include "posekit/pipeline.hpp"

namespace {

using namespace posekit;

int exit_code_for(const Error& e) {
  const std::string& code = e.code();
  if (code == "io") return 3;
  if (code == "schema") return 4;
  if (code == "validation") return 5;
  return 6;  // singular_map, degenerate_pose, insufficient_data, sampling_budget
}

void print_error(const Error& e) {
  const json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
  std::cerr << err.dump() << "\n";
}

void print_report_table(const EvalReport& report, const JointSchema& schema) {
  std::printf("%-12s %8s\n", "joint", "AP");
  for (std::size_t j = 0; j < report.ap_per_joint.size(); ++j) {
    std::printf("%-12s %8.4f\n", schema.joint_names[j].c_str(),
                report.ap_per_joint[j]);
  }

  // Conventional grouped row when the usual joint names are present.
  const auto group_ap = [&](std::initializer_list<const char*> names) {
    double sum = 0.0;
    int found = 0;
    for (const char* name : names) {
      for (std::size_t j = 0; j < schema.joint_names.size(); ++j) {
        if (schema.joint_names[j] == name) {
          sum += report.ap_per_joint[j];
          ++found;
        }
      }
    }
    return found > 0 ? sum / found : -1.0;
  };
  const double head = group_ap({"head_top", "upper_neck"});
  if (head >= 0.0) {
    std::printf("\n%-8s %-8s %-8s %-8s %-8s %-8s %-8s %-8s\n", "Head",
                "Shoulder", "Elbow", "Wrist", "Hip", "Knee", "Ankle", "Total");
    std::printf("%-8.1f %-8.1f %-8.1f %-8.1f %-8.1f %-8.1f %-8.1f %-8.1f\n",
                100.0 * head,
                100.0 * group_ap({"r_shoulder", "l_shoulder"}),
                100.0 * group_ap({"r_elbow", "l_elbow"}),
                100.0 * group_ap({"r_wrist", "l_wrist"}),
                100.0 * group_ap({"r_hip", "l_hip"}),
                100.0 * group_ap({"r_knee", "l_knee"}),
                100.0 * group_ap({"r_ankle", "l_ankle"}), 100.0 * report.map);
  }

  std::printf("%-12s %8.4f  (%.2f%%)\n", "mAP", report.map,
              100.0 * report.map);
  std::printf("images=%lld gt_poses=%lld predictions=%lld assigned=%lld\n",
              report.images, report.gt_poses, report.predictions,
              report.assigned);
}

struct CommonFlags {
  bool strict = false;
  bool json_out = false;

  LoadMode mode() const {
    return strict ? LoadMode::Strict : LoadMode::Lenient;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pose post-processing toolkit: invertible crop transforms, "
               "parametric pose NMS with data-driven tuning, PCKh mAP "
               "evaluation, and pose-conditioned proposal sampling"};
  app.require_subcommand(1);
  CommonFlags common;
  app.add_flag("--strict", common.strict,
               "reject unknown fields in input files");
  app.add_flag("--json", common.json_out, "emit results as JSON on stdout");

  // --- sdtn gradcheck ---
  auto* sdtn = app.add_subcommand("sdtn", "crop transform utilities");
  sdtn->require_subcommand(1);
  auto* gradcheck = sdtn->add_subcommand(
      "gradcheck", "compare analytic inverse-transform gradients against "
                   "finite differences");
  int gc_trials = 100;
  double gc_tol = 1e-5;
  std::uint64_t gc_seed = 1;
  gradcheck->add_option("--trials", gc_trials, "number of random maps")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--tol", gc_tol, "max relative error allowed");
  gradcheck->add_option("--seed", gc_seed, "rng seed");

  // --- synth gen ---
  auto* synth = app.add_subcommand("synth", "synthetic benchmark scenes");
  synth->require_subcommand(1);
  auto* gen = synth->add_subcommand("gen", "generate annotations and "
                                           "detector-style proposals");
  std::string gen_config, gen_out_gt, gen_out_props;
  gen->add_option("--config", gen_config, "synth config JSON")->required();
  gen->add_option("--out-gt", gen_out_gt, "annotations output path")
      ->required();
  gen->add_option("--out-props", gen_out_props, "proposals output path")
      ->required();

  // --- pgpg fit / sample ---
  auto* pgpg = app.add_subcommand("pgpg", "pose-conditioned proposal model");
  pgpg->require_subcommand(1);
  auto* fit = pgpg->add_subcommand("fit", "cluster poses and fit per-cluster "
                                          "offset mixtures");
  std::string fit_gt, fit_det, fit_out;
  PgpgConfig fit_cfg;
  fit->add_option("--gt", fit_gt, "annotations JSON")->required();
  fit->add_option("--detections", fit_det, "detections JSON")->required();
  fit->add_option("--k", fit_cfg.k, "atomic pose count");
  fit->add_option("--components", fit_cfg.components, "mixture components");
  fit->add_option("--min-samples", fit_cfg.min_samples,
                  "offsets required per cluster before falling back");
  fit->add_option("--pair-min-iou", fit_cfg.pair_min_iou,
                  "min IoU to pair a detection with a ground truth");
  fit->add_option("--seed", fit_cfg.seed, "rng seed");
  fit->add_option("--out", fit_out, "model output path")->required();

  auto* sample = pgpg->add_subcommand("sample", "draw proposal boxes around "
                                                "ground-truth poses");
  std::string sample_model, sample_gt, sample_out;
  int sample_n = 10;
  std::uint64_t sample_seed = 1;
  sample->add_option("--model", sample_model, "model JSON")->required();
  sample->add_option("--gt", sample_gt, "annotations JSON")->required();
  sample->add_option("--n", sample_n, "boxes per ground-truth pose")
      ->check(CLI::PositiveNumber);
  sample->add_option("--seed", sample_seed, "rng seed");
  sample->add_option("--out", sample_out, "proposals output path")->required();

  // --- nms run / optimize ---
  auto* nms = app.add_subcommand("nms", "parametric pose suppression");
  nms->require_subcommand(1);
  auto* run = nms->add_subcommand("run", "suppress redundant proposals");
  std::string run_in, run_params, run_out;
  int run_threads = 0;
  run->add_option("--proposals", run_in, "proposals JSON")->required();
  run->add_option("--params", run_params, "parameter JSON")->required();
  run->add_option("--out", run_out, "surviving proposals output")->required();
  run->add_option("--threads", run_threads, "worker threads (0 = all cores)");

  auto* optimize = nms->add_subcommand(
      "optimize", "grid-search the suppression parameters against mAP");
  std::string opt_props, opt_gt, opt_out, opt_config;
  int opt_threads = 0;
  optimize->add_option("--proposals", opt_props, "validation proposals JSON")
      ->required();
  optimize->add_option("--gt", opt_gt, "validation annotations JSON")
      ->required();
  optimize->add_option("--out", opt_out, "parameter output path")->required();
  optimize->add_option("--config", opt_config, "optimizer config JSON");
  optimize->add_option("--threads", opt_threads,
                       "worker threads (0 = all cores)");

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "PCKh mean average precision");
  std::string eval_pred, eval_gt;
  double eval_alpha = 0.5;
  std::string eval_out;
  eval_cmd->add_option("--pred", eval_pred, "predictions JSON")->required();
  eval_cmd->add_option("--gt", eval_gt, "annotations JSON")->required();
  eval_cmd->add_option("--alpha", eval_alpha, "PCKh radius fraction");
  eval_cmd->add_option("--out", eval_out, "optional report output path");

  // --- pipeline ---
  auto* pipeline_cmd = app.add_subcommand(
      "pipeline", "synth gen -> pgpg fit -> nms optimize -> nms run -> eval");
  std::string pipe_config, pipe_out_dir = "pipeline_out";
  pipeline_cmd->add_option("--config", pipe_config, "pipeline config JSON");
  pipeline_cmd->add_option("--out-dir", pipe_out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gradcheck->parsed()) {
      const GradCheckResult result = sdtn_gradcheck(gc_trials, gc_tol, gc_seed);
      if (common.json_out) {
        std::cout << json{{"trials", result.trials},
                          {"max_rel_err", result.max_rel_err},
                          {"tol", result.tol},
                          {"pass", result.pass}}
                         .dump()
                  << "\n";
      } else {
        std::printf("trials=%d max_rel_err=%.3e tol=%.1e %s\n", result.trials,
                    result.max_rel_err, result.tol,
                    result.pass ? "PASS" : "FAIL");
      }
      return result.pass ? 0 : 1;
    }

    if (gen->parsed()) {
      const SynthConfig cfg = load_synth_config(gen_config, common.mode());
      const SynthOutput out = generate(cfg);
      const JointSchema& schema = JointSchema::mpii16();
      save_annotations(gen_out_gt, out.gts, schema);
      save_proposals(gen_out_props, out.proposals, schema);
      if (common.json_out) {
        std::cout << json{{"images", out.gts.size()},
                          {"proposals", out.proposals.size()}}
                         .dump()
                  << "\n";
      } else {
        std::printf("wrote %zu images, %zu proposals\n", out.gts.size(),
                    out.proposals.size());
      }
      return 0;
    }

    if (fit->parsed()) {
      JointSchema schema;
      const auto gts = load_annotations(fit_gt, &schema, common.mode());
      JointSchema det_schema;
      const auto dets = load_proposals(fit_det, &det_schema, common.mode());
      if (!(schema == det_schema)) {
        throw SchemaError("annotations and detections use different joint "
                          "schemas");
      }
      const AtomicPoseModel model = fit_model(gts, dets, fit_cfg, schema);
      save_model(fit_out, model);
      long long fallbacks = 0;
      for (auto f : model.used_fallback) fallbacks += f;
      if (common.json_out) {
        std::cout << json{{"k", model.k},
                          {"fallback_clusters", fallbacks}}
                         .dump()
                  << "\n";
      } else {
        std::printf("fitted %d atomic poses (%lld on pooled fallback)\n",
                    model.k, fallbacks);
      }
      return 0;
    }

    if (sample->parsed()) {
      const AtomicPoseModel model = load_model(sample_model, common.mode());
      JointSchema schema;
      const auto gts = load_annotations(sample_gt, &schema, common.mode());
      if (!(schema == model.schema)) {
        throw SchemaError("annotations and model use different joint schemas");
      }
      std::vector<PoseProposal> out;
      std::uint64_t counter = 0;
      for (const ImageAnnotation& ann : gts) {
        for (const GtInstance& inst : ann.gt_poses) {
          ++counter;
          const auto boxes =
              sample_proposals(inst.pose, inst.box, model, sample_n,
                               derive_seed(sample_seed, counter));
          for (const BBox& box : boxes) {
            out.push_back({ann.image_id, box, inst.pose});
          }
        }
      }
      save_proposals(sample_out, out, schema);
      if (common.json_out) {
        std::cout << json{{"proposals", out.size()}}.dump() << "\n";
      } else {
        std::printf("sampled %zu proposals\n", out.size());
      }
      return 0;
    }

    if (run->parsed()) {
      JointSchema schema;
      const auto proposals = load_proposals(run_in, &schema, common.mode());
      const NmsParams params = load_params(run_params, common.mode());
      const auto survivors = run_nms_batch(proposals, params, run_threads);
      save_proposals(run_out, survivors, schema);
      if (common.json_out) {
        std::cout << json{{"in", proposals.size()},
                          {"out", survivors.size()}}
                         .dump()
                  << "\n";
      } else {
        std::printf("kept %zu of %zu proposals\n", survivors.size(),
                    proposals.size());
      }
      return 0;
    }

    if (optimize->parsed()) {
      JointSchema schema;
      const auto proposals = load_proposals(opt_props, &schema, common.mode());
      JointSchema gt_schema;
      const auto gts = load_annotations(opt_gt, &gt_schema, common.mode());
      if (!(schema == gt_schema)) {
        throw SchemaError("proposals and annotations use different joint "
                          "schemas");
      }
      OptimConfig cfg;
      if (!opt_config.empty()) {
        cfg = load_optim_config(opt_config, common.mode());
      }
      cfg.threads = opt_threads;
      EvalConfig eval_cfg;
      eval_cfg.schema = schema;
      const OptimResult result = optimize_params(proposals, gts, cfg, eval_cfg);
      save_params(opt_out, result.params);
      save_envelope(opt_out + ".trace.json", "posekit/optim_trace",
                    json{{"trace", result.trace},
                         {"map", result.map},
                         {"params", params_to_json(result.params)}});
      if (common.json_out) {
        std::cout << json{{"map", result.map},
                          {"rounds", result.rounds},
                          {"params", params_to_json(result.params)}}
                         .dump()
                  << "\n";
      } else {
        std::printf(
            "best mAP %.4f after %d rounds: sigma1=%.6g sigma2=%.6g "
            "lambda=%.6g eta=%.6g\n",
            result.map, result.rounds, result.params.sigma1,
            result.params.sigma2, result.params.lambda, result.params.eta);
      }
      return 0;
    }

    if (eval_cmd->parsed()) {
      JointSchema schema;
      const auto preds = load_proposals(eval_pred, &schema, common.mode());
      JointSchema gt_schema;
      const auto gts = load_annotations(eval_gt, &gt_schema, common.mode());
      if (!(schema == gt_schema)) {
        throw SchemaError("predictions and annotations use different joint "
                          "schemas");
      }
      EvalConfig cfg;
      cfg.pckh_alpha = eval_alpha;
      cfg.schema = schema;
      if (!(cfg.pckh_alpha > 0.0) || cfg.pckh_alpha > 1.0) {
        throw ValidationError("alpha must be in (0, 1]");
      }
      const EvalReport report = evaluate(preds, gts, cfg);
      if (!eval_out.empty()) save_report(eval_out, report, schema);
      if (common.json_out) {
        std::cout << report_to_json(report, schema).dump() << "\n";
      } else {
        print_report_table(report, schema);
      }
      return 0;
    }

    if (pipeline_cmd->parsed()) {
      if (const char* env = std::getenv("POSEKIT_CONFIG")) {
        if (pipe_config != env && !pipe_config.empty()) {
          std::cerr << "note: POSEKIT_CONFIG overrides --config\n";
        }
        pipe_config = env;
      }
      if (pipe_config.empty()) {
        throw ValidationError(
            "pipeline needs --config or the POSEKIT_CONFIG env var");
      }
      const json doc =
          load_envelope(pipe_config, "posekit/pipeline_config", common.mode());
      const PipelineConfig cfg =
          pipeline_config_from_json(doc.at("config"), common.mode());
      const PipelineReport report = run_pipeline(cfg, pipe_out_dir);
      const json summary = pipeline_summary_json(report, cfg);
      if (common.json_out) {
        std::cout << summary.dump() << "\n";
      } else {
        std::printf("images=%lld proposals=%lld\n", report.images,
                    report.proposals);
        std::printf("mAP no suppression : %.4f\n", report.map_no_nms);
        std::printf("mAP stock params   : %.4f\n", report.map_default);
        std::printf("mAP optimized      : %.4f\n", report.map_optimized);
        std::printf("params: sigma1=%.6g sigma2=%.6g lambda=%.6g eta=%.6g\n",
                    report.params.sigma1, report.params.sigma2,
                    report.params.lambda, report.params.eta);
      }
      return 0;
    }
  } catch (const SamplingError& e) {
    print_error(e);
    std::cerr << "accepted " << e.partial().size()
              << " boxes before exhausting the budget\n";
    return exit_code_for(e);
  } catch (const Error& e) {
    print_error(e);
    return exit_code_for(e);
  } catch (const json::exception& e) {
    const json err{{"error", {{"code", "io"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    const json err{{"error", {{"code", "internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 70;
  }
  return 0;
}
