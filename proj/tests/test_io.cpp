#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unistd.h>

#include "posekit/io.hpp"
#include "scene_util.hpp"

using namespace posekit;
using namespace posekit::testutil;

namespace {

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() /
          ("posekit_io_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string operator()(const char* name) const {
    return (dir / name).string();
  }
};

}  // namespace

TEST_CASE("proposals round trip losslessly") {
  TempDir tmp;
  Rng rng(3);
  std::vector<PoseProposal> proposals;
  for (int i = 0; i < 4; ++i) {
    const auto scene = random_scene(rng, 4, "img_" + std::to_string(i));
    proposals.insert(proposals.end(), scene.begin(), scene.end());
  }
  const JointSchema& schema = JointSchema::mpii16();
  save_proposals(tmp("p.json"), proposals, schema);
  JointSchema loaded_schema;
  const auto loaded = load_proposals(tmp("p.json"), &loaded_schema);
  CHECK(loaded_schema == schema);
  REQUIRE(loaded.size() == proposals.size());
  CHECK(same_proposals(loaded, proposals));
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    for (std::size_t j = 0; j < loaded[i].pose.joints.size(); ++j) {
      CHECK(loaded[i].pose.joints[j].x == proposals[i].pose.joints[j].x);
      CHECK(loaded[i].pose.joints[j].confidence ==
            proposals[i].pose.joints[j].confidence);
      CHECK(loaded[i].pose.joints[j].visible ==
            proposals[i].pose.joints[j].visible);
    }
  }
}

TEST_CASE("annotations round trip") {
  TempDir tmp;
  ImageAnnotation ann;
  ann.image_id = "img_0";
  ann.width = 640;
  ann.height = 480;
  const Pose pose = grid_pose(200, 200, 40, 1.0);
  ann.gt_poses.push_back({pose, pose_box(pose, 5), 31.25});
  save_annotations(tmp("gt.json"), {ann}, JointSchema::mpii16());
  const auto loaded = load_annotations(tmp("gt.json"), nullptr);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].image_id == "img_0");
  CHECK(loaded[0].gt_poses[0].head_size == 31.25);
  CHECK(loaded[0].gt_poses[0].pose.joints[3].x == pose.joints[3].x);
}

TEST_CASE("params round trip and invariant enforcement") {
  TempDir tmp;
  const NmsParams params{0.25, 3.5, 1.25, 7.75};
  save_params(tmp("params.json"), params);
  const NmsParams loaded = load_params(tmp("params.json"));
  CHECK(loaded.sigma1 == params.sigma1);
  CHECK(loaded.sigma2 == params.sigma2);
  CHECK(loaded.lambda == params.lambda);
  CHECK(loaded.eta == params.eta);

  std::ofstream bad(tmp("bad.json"));
  bad << R"({"format_version":1,"kind":"posekit/nms_params",
             "params":{"sigma1":0.0,"sigma2":1.0,"lambda":1.0,"eta":1.0}})";
  bad.close();
  CHECK_THROWS_AS(load_params(tmp("bad.json")), ValidationError);
}

TEST_CASE("model round trip") {
  TempDir tmp;
  SynthConfig synth_cfg;
  synth_cfg.image_count = 60;
  synth_cfg.duplicate_rate = 1.0;
  synth_cfg.seed = 404;
  const SynthOutput data = generate(synth_cfg);
  PgpgConfig cfg;
  cfg.k = 3;
  cfg.components = 2;
  cfg.seed = 11;
  const AtomicPoseModel model =
      fit_model(data.gts, data.proposals, cfg, JointSchema::mpii16());
  save_model(tmp("model.json"), model);
  const AtomicPoseModel loaded = load_model(tmp("model.json"));
  CHECK(loaded.k == model.k);
  CHECK(loaded.dataset_hash == model.dataset_hash);
  CHECK(loaded.seed == model.seed);
  for (int c = 0; c < model.k; ++c) {
    CHECK(loaded.centers[c].coords == model.centers[c].coords);
    CHECK(loaded.centers[c].mask == model.centers[c].mask);
    CHECK(loaded.gmms[c].weights == model.gmms[c].weights);
    CHECK(loaded.gmms[c].means == model.gmms[c].means);
    CHECK(loaded.gmms[c].variances == model.gmms[c].variances);
  }
  CHECK(loaded.used_fallback == model.used_fallback);
}

TEST_CASE("schema mismatches are rejected, never coerced") {
  TempDir tmp;
  SUBCASE("wrong joint count") {
    std::ofstream f(tmp("short.json"));
    f << R"({"format_version":1,"kind":"posekit/proposals",
        "schema":{"name":"mpii16","joint_names":["a","b","c"],"torso":[1,2]},
        "proposals":[{"image_id":"x","box":[0,0,10,10],
        "pose":{"score":1.0,"joints":[[0,0,1,1],[1,1,1,1]]}}]})";
    f.close();
    CHECK_THROWS_AS(load_proposals(tmp("short.json"), nullptr), SchemaError);
  }
  SUBCASE("wrong kind") {
    const NmsParams params;
    save_params(tmp("params.json"), params);
    CHECK_THROWS_AS(load_proposals(tmp("params.json"), nullptr), SchemaError);
  }
  SUBCASE("wrong version") {
    std::ofstream f(tmp("v9.json"));
    f << R"({"format_version":9,"kind":"posekit/nms_params",
             "params":{"sigma1":1,"sigma2":1,"lambda":1,"eta":1}})";
    f.close();
    CHECK_THROWS_AS(load_params(tmp("v9.json")), SchemaError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_params(tmp("nope.json")), IoError);
  }
}

TEST_CASE("non-finite numbers are rejected") {
  TempDir tmp;
  std::ofstream f(tmp("inf.json"));
  // The parser already refuses overflowing literals; the save path guards
  // in-memory NaN/Inf via require_finite.
  f << R"({"format_version":1,"kind":"posekit/nms_params",
           "params":{"sigma1":1e999,"sigma2":1,"lambda":1,"eta":1}})";
  f.close();
  CHECK_THROWS_AS(load_params(tmp("inf.json")), Error);

  json doc = params_to_json(NmsParams{});
  doc["sigma1"] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(require_finite(doc, "params"), SchemaError);
}

TEST_CASE("strict mode rejects unknown fields, lenient mode warns") {
  TempDir tmp;
  std::ofstream f(tmp("extra.json"));
  f << R"({"format_version":1,"kind":"posekit/nms_params",
           "params":{"sigma1":1,"sigma2":1,"lambda":1,"eta":1,"bogus":5}})";
  f.close();
  CHECK_THROWS_AS(load_params(tmp("extra.json"), LoadMode::Strict),
                  SchemaError);
  CHECK_NOTHROW(load_params(tmp("extra.json"), LoadMode::Lenient));
}

TEST_CASE("synth and optimizer configs round trip") {
  TempDir tmp;
  SynthConfig synth_cfg;
  synth_cfg.image_count = 12;
  synth_cfg.duplicate_rate = 0.75;
  synth_cfg.offset_models = {SynthConfig::default_offset_model()};
  synth_cfg.seed = 99;
  save_synth_config(tmp("s.json"), synth_cfg);
  const SynthConfig s2 = load_synth_config(tmp("s.json"));
  CHECK(s2.image_count == 12);
  CHECK(s2.duplicate_rate == 0.75);
  CHECK(s2.seed == 99);
  CHECK(s2.offset_models.size() == 1);
  CHECK(s2.offset_models[0].weights == synth_cfg.offset_models[0].weights);

  OptimConfig optim_cfg;
  optim_cfg.grid_sigma1 = 7;
  optim_cfg.eta.hi = 20.0;
  optim_cfg.tol = 5e-4;
  save_optim_config(tmp("o.json"), optim_cfg);
  const OptimConfig o2 = load_optim_config(tmp("o.json"));
  CHECK(o2.grid_sigma1 == 7);
  CHECK(o2.eta.hi == 20.0);
  CHECK(o2.tol == 5e-4);
  CHECK(o2.sigma1.log_scale);
  CHECK_FALSE(o2.eta.log_scale);
}

TEST_CASE("synth config requires a seed") {
  const json no_seed = {{"image_count", 5}};
  CHECK_THROWS_AS(synth_config_from_json(no_seed, LoadMode::Lenient),
                  SchemaError);
}
