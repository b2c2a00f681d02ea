#include <doctest.h>

#include "posekit/optim.hpp"
#include "posekit/synth.hpp"

using namespace posekit;

namespace {

SynthOutput clean_set(int images, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.image_count = images;
  cfg.persons_min = 1;
  cfg.persons_max = 1;
  cfg.duplicate_rate = 0.0;
  cfg.joint_noise = 0.0;
  cfg.false_positive_rate = 0.0;
  cfg.miss_rate = 0.0;
  cfg.offset_scale = 0.0;
  cfg.seed = seed;
  return generate(cfg);
}

SynthOutput duplicate_set(int images, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.image_count = images;
  cfg.persons_min = 1;
  cfg.persons_max = 2;
  cfg.duplicate_rate = 1.5;
  cfg.joint_noise = 2.5;
  cfg.false_positive_rate = 0.2;
  cfg.miss_rate = 0.0;
  cfg.seed = seed;
  return generate(cfg);
}

OptimConfig small_grid() {
  OptimConfig cfg;
  cfg.grid_sigma1 = 5;
  cfg.grid_sigma2 = 5;
  cfg.grid_lambda = 5;
  cfg.grid_eta = 5;
  cfg.max_rounds = 3;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("optimizer on a clean set reports mAP 1 and a flat trace") {
  const SynthOutput data = clean_set(25, 31);
  const OptimResult result =
      optimize_params(data.proposals, data.gts, small_grid());
  CHECK(result.map == doctest::Approx(1.0));
  for (double v : result.trace) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("optimizer beats the disabled baseline when duplicates exist") {
  const SynthOutput data = duplicate_set(60, 97);
  const double baseline = disable_nms_baseline(data.proposals, data.gts);
  const OptimResult result =
      optimize_params(data.proposals, data.gts, small_grid());
  CHECK(result.map > baseline);
}

TEST_CASE("objective trace never decreases") {
  const SynthOutput data = duplicate_set(40, 7);
  const OptimResult result =
      optimize_params(data.proposals, data.gts, small_grid());
  REQUIRE(result.trace.size() >= 2);
  for (std::size_t i = 1; i < result.trace.size(); ++i) {
    CHECK(result.trace[i] >= result.trace[i - 1]);
  }
}

TEST_CASE("returned parameters reproduce the reported objective exactly") {
  const SynthOutput data = duplicate_set(40, 13);
  const OptimResult result =
      optimize_params(data.proposals, data.gts, small_grid());
  const double replay =
      evaluate(run_nms_batch(data.proposals, result.params, 1), data.gts)
          .map;
  CHECK(replay == result.map);  // bit-for-bit
}

TEST_CASE("optimizer output does not depend on image order") {
  const SynthOutput data = duplicate_set(30, 21);
  const OptimResult a =
      optimize_params(data.proposals, data.gts, small_grid());

  std::vector<ImageAnnotation> gts_rev(data.gts.rbegin(), data.gts.rend());
  std::vector<PoseProposal> props_rev(data.proposals.rbegin(),
                                      data.proposals.rend());
  const OptimResult b = optimize_params(props_rev, gts_rev, small_grid());
  CHECK(a.map == b.map);
  CHECK(a.params.sigma1 == b.params.sigma1);
  CHECK(a.params.sigma2 == b.params.sigma2);
  CHECK(a.params.lambda == b.params.lambda);
  CHECK(a.params.eta == b.params.eta);
}

TEST_CASE("optimizer rejects an empty validation set") {
  CHECK_THROWS_AS(optimize_params({}, {}, small_grid()), ValidationError);
}

TEST_CASE("config validation") {
  OptimConfig cfg;
  cfg.grid_sigma1 = 1;
  CHECK_THROWS_AS(validate_config(cfg), ValidationError);
  cfg = OptimConfig{};
  cfg.sigma1.lo = -1;
  CHECK_THROWS_AS(validate_config(cfg), ValidationError);
  cfg = OptimConfig{};
  cfg.max_rounds = 0;
  CHECK_THROWS_AS(validate_config(cfg), ValidationError);
  CHECK_NOTHROW(validate_config(OptimConfig{}));
}
