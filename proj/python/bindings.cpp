#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "posekit/affine.hpp"
#include "posekit/eval.hpp"
#include "posekit/io.hpp"
#include "posekit/nms.hpp"
#include "posekit/optim.hpp"
#include "posekit/pgpg.hpp"
#include "posekit/pipeline.hpp"
#include "posekit/synth.hpp"

namespace py = pybind11;
using namespace posekit;

namespace {

std::pair<double, double> py_stn_apply(const AffineMap& map, double x,
                                       double y) {
  const Vec2 out = stn_apply(map, {x, y});
  return {out.x, out.y};
}

std::pair<double, double> py_sdtn_apply(const DetransformMap& map, double x,
                                        double y) {
  const Vec2 out = sdtn_apply(map, {x, y});
  return {out.x, out.y};
}

}  // namespace

PYBIND11_MODULE(posekit, m) {
  m.doc() = "Pose post-processing toolkit: invertible crop transforms, "
            "parametric pose NMS, PCKh mAP evaluation, and pose-conditioned "
            "proposal sampling.";

  py::register_exception<Error>(m, "PosekitError");

  py::class_<Joint>(m, "Joint")
      .def(py::init<>())
      .def(py::init([](double x, double y, double confidence, bool visible) {
             return Joint{x, y, confidence, visible};
           }),
           py::arg("x"), py::arg("y"), py::arg("confidence") = 0.0,
           py::arg("visible") = true)
      .def_readwrite("x", &Joint::x)
      .def_readwrite("y", &Joint::y)
      .def_readwrite("confidence", &Joint::confidence)
      .def_readwrite("visible", &Joint::visible);

  py::class_<JointSchema>(m, "JointSchema")
      .def_readonly("name", &JointSchema::name)
      .def_readonly("joint_names", &JointSchema::joint_names)
      .def_readonly("thorax", &JointSchema::thorax)
      .def_readonly("pelvis", &JointSchema::pelvis)
      .def("size", &JointSchema::size)
      .def_static("mpii16", &JointSchema::mpii16,
                  py::return_value_policy::reference);

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init([](std::vector<Joint> joints, double score) {
             return Pose{std::move(joints), score};
           }),
           py::arg("joints"), py::arg("score") = 0.0)
      .def_readwrite("joints", &Pose::joints)
      .def_readwrite("score", &Pose::score);

  py::class_<BBox>(m, "BBox")
      .def(py::init<>())
      .def(py::init([](double x_min, double y_min, double x_max,
                       double y_max) {
             return BBox{x_min, y_min, x_max, y_max};
           }),
           py::arg("x_min"), py::arg("y_min"), py::arg("x_max"),
           py::arg("y_max"))
      .def_readwrite("x_min", &BBox::x_min)
      .def_readwrite("y_min", &BBox::y_min)
      .def_readwrite("x_max", &BBox::x_max)
      .def_readwrite("y_max", &BBox::y_max)
      .def("width", &BBox::width)
      .def("height", &BBox::height)
      .def("area", &BBox::area)
      .def("diagonal", &BBox::diagonal);

  py::class_<BoxOffset>(m, "BoxOffset")
      .def(py::init<>())
      .def(py::init([](std::array<double, 4> d) { return BoxOffset{d}; }),
           py::arg("d"))
      .def_readwrite("d", &BoxOffset::d)
      .def("norm", &BoxOffset::norm);

  py::class_<PoseProposal>(m, "PoseProposal")
      .def(py::init<>())
      .def(py::init([](std::string image_id, BBox box, Pose pose) {
             return PoseProposal{std::move(image_id), box, std::move(pose)};
           }),
           py::arg("image_id"), py::arg("box"), py::arg("pose"))
      .def_readwrite("image_id", &PoseProposal::image_id)
      .def_readwrite("box", &PoseProposal::box)
      .def_readwrite("pose", &PoseProposal::pose);

  py::class_<GtInstance>(m, "GtInstance")
      .def(py::init<>())
      .def(py::init([](Pose pose, BBox box, double head_size) {
             return GtInstance{std::move(pose), box, head_size};
           }),
           py::arg("pose"), py::arg("box"), py::arg("head_size"))
      .def_readwrite("pose", &GtInstance::pose)
      .def_readwrite("box", &GtInstance::box)
      .def_readwrite("head_size", &GtInstance::head_size);

  py::class_<ImageAnnotation>(m, "ImageAnnotation")
      .def(py::init<>())
      .def(py::init([](std::string image_id, double width, double height,
                       std::vector<GtInstance> gt_poses) {
             return ImageAnnotation{std::move(image_id), width, height,
                                    std::move(gt_poses)};
           }),
           py::arg("image_id"), py::arg("width"), py::arg("height"),
           py::arg("gt_poses"))
      .def_readwrite("image_id", &ImageAnnotation::image_id)
      .def_readwrite("width", &ImageAnnotation::width)
      .def_readwrite("height", &ImageAnnotation::height)
      .def_readwrite("gt_poses", &ImageAnnotation::gt_poses);

  m.def("extend_box", &extend_box, py::arg("box"), py::arg("factor"));
  m.def("box_offset", &box_offset, py::arg("det"), py::arg("gt"));
  m.def("apply_offset", &apply_offset, py::arg("gt"), py::arg("off"));
  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def("composite_score", &composite_score, py::arg("detection_confidence"),
        py::arg("pose"));

  py::class_<Mat2>(m, "Mat2")
      .def(py::init<>())
      .def(py::init([](double a, double b, double c, double d) {
             return Mat2{a, b, c, d};
           }),
           py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"))
      .def_readwrite("a", &Mat2::a)
      .def_readwrite("b", &Mat2::b)
      .def_readwrite("c", &Mat2::c)
      .def_readwrite("d", &Mat2::d)
      .def("det", &Mat2::det);

  py::class_<AffineMap>(m, "AffineMap")
      .def(py::init<>())
      .def(py::init([](Mat2 a, double tx, double ty) {
             return AffineMap{a, {tx, ty}};
           }),
           py::arg("A"), py::arg("tx") = 0.0, py::arg("ty") = 0.0)
      .def_readwrite("A", &AffineMap::A)
      .def_property(
          "t",
          [](const AffineMap& m) {
            return std::pair<double, double>{m.t.x, m.t.y};
          },
          [](AffineMap& m, std::pair<double, double> t) {
            m.t = {t.first, t.second};
          });

  py::class_<DetransformMap>(m, "DetransformMap")
      .def_readwrite("G", &DetransformMap::G)
      .def_property_readonly("g", [](const DetransformMap& m) {
        return std::pair<double, double>{m.g.x, m.g.y};
      });

  m.def("stn_apply", &py_stn_apply, py::arg("map"), py::arg("x"),
        py::arg("y"));
  m.def("sdtn_invert", &sdtn_invert, py::arg("map"));
  m.def("sdtn_apply", &py_sdtn_apply, py::arg("map"), py::arg("x"),
        py::arg("y"));
  m.def(
      "sdtn_backprop",
      [](const AffineMap& map, const Mat2& dJ_dG, double dgx, double dgy) {
        const AffineGrad grad = sdtn_backprop(map, {dJ_dG, {dgx, dgy}});
        return py::make_tuple(grad.dJ_dA,
                              std::pair<double, double>{grad.dJ_dt.x,
                                                        grad.dJ_dt.y});
      },
      py::arg("map"), py::arg("dJ_dG"), py::arg("dJ_dgx"), py::arg("dJ_dgy"));
  m.def(
      "sdtn_gradcheck",
      [](int trials, double tol, std::uint64_t seed) {
        const GradCheckResult r = sdtn_gradcheck(trials, tol, seed);
        return py::make_tuple(r.max_rel_err, r.pass);
      },
      py::arg("trials") = 100, py::arg("tol") = 1e-5, py::arg("seed") = 1);

  py::class_<NmsParams>(m, "NmsParams")
      .def(py::init<>())
      .def(py::init([](double s1, double s2, double la, double eta) {
             return NmsParams{s1, s2, la, eta};
           }),
           py::arg("sigma1") = 0.1, py::arg("sigma2") = 10.0,
           py::arg("lambda_") = 1.0, py::arg("eta") = 2.0)
      .def_readwrite("sigma1", &NmsParams::sigma1)
      .def_readwrite("sigma2", &NmsParams::sigma2)
      .def_readwrite("lambda_", &NmsParams::lambda)
      .def_readwrite("eta", &NmsParams::eta);

  m.def("k_sim", &k_sim, py::arg("ref"), py::arg("cand"), py::arg("sigma1"));
  m.def("h_sim", &h_sim, py::arg("ref"), py::arg("cand"), py::arg("sigma2"));
  m.def("pose_distance", &pose_distance, py::arg("ref"), py::arg("cand"),
        py::arg("params"));
  m.def("run_nms", &run_nms, py::arg("proposals"), py::arg("params"));
  m.def("run_nms_batch", &run_nms_batch, py::arg("proposals"),
        py::arg("params"), py::arg("threads") = 0);

  py::class_<EvalConfig>(m, "EvalConfig")
      .def(py::init<>())
      .def_readwrite("pckh_alpha", &EvalConfig::pckh_alpha)
      .def_readwrite("schema", &EvalConfig::schema);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("ap_per_joint", &EvalReport::ap_per_joint)
      .def_readonly("map", &EvalReport::map)
      .def_readonly("images", &EvalReport::images)
      .def_readonly("gt_poses", &EvalReport::gt_poses)
      .def_readonly("predictions", &EvalReport::predictions)
      .def_readonly("assigned", &EvalReport::assigned);

  m.def("evaluate", &evaluate, py::arg("preds"), py::arg("gts"),
        py::arg("cfg") = EvalConfig{});
  m.def("match_poses", &match_poses, py::arg("preds"), py::arg("gt"),
        py::arg("cfg"));

  py::class_<OptimConfig>(m, "OptimConfig")
      .def(py::init<>())
      .def_readwrite("grid_sigma1", &OptimConfig::grid_sigma1)
      .def_readwrite("grid_sigma2", &OptimConfig::grid_sigma2)
      .def_readwrite("grid_lambda", &OptimConfig::grid_lambda)
      .def_readwrite("grid_eta", &OptimConfig::grid_eta)
      .def_readwrite("max_rounds", &OptimConfig::max_rounds)
      .def_readwrite("tol", &OptimConfig::tol)
      .def_readwrite("threads", &OptimConfig::threads);

  py::class_<OptimResult>(m, "OptimResult")
      .def_readonly("params", &OptimResult::params)
      .def_readonly("map", &OptimResult::map)
      .def_readonly("trace", &OptimResult::trace)
      .def_readonly("rounds", &OptimResult::rounds);

  m.def("optimize_params", &optimize_params, py::arg("proposals"),
        py::arg("gts"), py::arg("cfg") = OptimConfig{},
        py::arg("eval_cfg") = EvalConfig{});
  m.def("disable_nms_baseline", &disable_nms_baseline, py::arg("proposals"),
        py::arg("gts"), py::arg("eval_cfg") = EvalConfig{});

  py::class_<AlignedPose>(m, "AlignedPose")
      .def_readonly("coords", &AlignedPose::coords)
      .def_readonly("mask", &AlignedPose::mask);

  py::class_<OffsetGMM>(m, "OffsetGMM")
      .def(py::init<>())
      .def_readwrite("weights", &OffsetGMM::weights)
      .def_readwrite("means", &OffsetGMM::means)
      .def_readwrite("variances", &OffsetGMM::variances)
      .def_readonly("ll_trace", &OffsetGMM::ll_trace)
      .def("components", &OffsetGMM::components);

  py::class_<AtomicPoseModel>(m, "AtomicPoseModel")
      .def_readonly("k", &AtomicPoseModel::k)
      .def_readonly("components", &AtomicPoseModel::components)
      .def_readonly("centers", &AtomicPoseModel::centers)
      .def_readonly("gmms", &AtomicPoseModel::gmms)
      .def_readonly("used_fallback", &AtomicPoseModel::used_fallback)
      .def_readonly("dataset_hash", &AtomicPoseModel::dataset_hash);

  py::class_<PgpgConfig>(m, "PgpgConfig")
      .def(py::init<>())
      .def_readwrite("k", &PgpgConfig::k)
      .def_readwrite("components", &PgpgConfig::components)
      .def_readwrite("min_samples", &PgpgConfig::min_samples)
      .def_readwrite("pair_min_iou", &PgpgConfig::pair_min_iou)
      .def_readwrite("seed", &PgpgConfig::seed);

  m.def("align_pose", &align_pose, py::arg("pose"), py::arg("schema"));
  m.def("masked_distance", &masked_distance, py::arg("a"), py::arg("b"));
  m.def(
      "fit_atomic",
      [](const std::vector<Pose>& poses, int k, std::uint64_t seed,
         const JointSchema& schema) {
        const KmeansResult r = fit_atomic(poses, k, seed, schema);
        return py::make_tuple(r.centers, r.assignment);
      },
      py::arg("poses"), py::arg("k"), py::arg("seed"), py::arg("schema"));
  m.def("assign_atomic", &assign_atomic, py::arg("pose"), py::arg("model"));
  m.def("fit_offset_gmm", &fit_offset_gmm, py::arg("offsets"),
        py::arg("components"), py::arg("seed"), py::arg("min_samples") = 20);
  m.def("gmm_log_likelihood", &gmm_log_likelihood, py::arg("gmm"),
        py::arg("offsets"));
  m.def("sample_offsets", &sample_offsets, py::arg("gmm"), py::arg("n"),
        py::arg("seed"));
  m.def("fit_model", &fit_model, py::arg("gts"), py::arg("detections"),
        py::arg("cfg"), py::arg("schema"));
  m.def("sample_proposals", &sample_proposals, py::arg("gt_pose"),
        py::arg("gt_box"), py::arg("model"), py::arg("n"), py::arg("seed"));

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("image_count", &SynthConfig::image_count)
      .def_readwrite("image_width", &SynthConfig::image_width)
      .def_readwrite("image_height", &SynthConfig::image_height)
      .def_readwrite("persons_min", &SynthConfig::persons_min)
      .def_readwrite("persons_max", &SynthConfig::persons_max)
      .def_readwrite("duplicate_rate", &SynthConfig::duplicate_rate)
      .def_readwrite("joint_noise", &SynthConfig::joint_noise)
      .def_readwrite("false_positive_rate", &SynthConfig::false_positive_rate)
      .def_readwrite("miss_rate", &SynthConfig::miss_rate)
      .def_readwrite("offset_scale", &SynthConfig::offset_scale)
      .def_readwrite("template_count", &SynthConfig::template_count)
      .def_readwrite("seed", &SynthConfig::seed)
      .def_static("default_offset_model", &SynthConfig::default_offset_model);

  py::class_<SynthOutput>(m, "SynthOutput")
      .def_readonly("gts", &SynthOutput::gts)
      .def_readonly("proposals", &SynthOutput::proposals);

  m.def("generate", &generate, py::arg("cfg"));

  m.def("save_proposals", &save_proposals, py::arg("path"),
        py::arg("proposals"), py::arg("schema"));
  m.def(
      "load_proposals",
      [](const std::string& path) {
        JointSchema schema;
        auto out = load_proposals(path, &schema);
        return py::make_tuple(out, schema);
      },
      py::arg("path"));
  m.def("save_annotations", &save_annotations, py::arg("path"), py::arg("gts"),
        py::arg("schema"));
  m.def(
      "load_annotations",
      [](const std::string& path) {
        JointSchema schema;
        auto out = load_annotations(path, &schema);
        return py::make_tuple(out, schema);
      },
      py::arg("path"));
}
