#include "posekit/synth.hpp"

#include <algorithm>
#include <cmath>

namespace posekit {

namespace {

// Coordinates are (x, y) pairs in a unit-height frame, y down, pelvis at the
// origin, joints in the default 16-joint order.
constexpr std::array<double, 32> kStanding = {
    -0.08, 0.50,  -0.07, 0.25,  -0.09, 0.02,  0.09,  0.02,
    0.07,  0.25,  0.08,  0.50,  0.00,  0.00,  0.00,  -0.28,
    0.00,  -0.36, 0.00,  -0.50, -0.22, 0.05,  -0.18, -0.12,
    -0.13, -0.27, 0.13,  -0.27, 0.18,  -0.12, 0.22,  0.05};

constexpr std::array<double, 32> kArmsUp = {
    -0.08, 0.50,  -0.07, 0.25,  -0.09, 0.02,  0.09,  0.02,
    0.07,  0.25,  0.08,  0.50,  0.00,  0.00,  0.00,  -0.28,
    0.00,  -0.36, 0.00,  -0.50, -0.20, -0.62, -0.17, -0.45,
    -0.13, -0.27, 0.13,  -0.27, 0.17,  -0.45, 0.20,  -0.62};

constexpr std::array<double, 32> kSitting = {
    -0.17, 0.32,  -0.16, 0.10,  -0.08, 0.00,  0.08,  0.00,
    0.16,  0.10,  0.17,  0.32,  0.00,  0.00,  -0.02, -0.26,
    -0.03, -0.34, -0.04, -0.47, -0.16, 0.02,  -0.15, -0.12,
    -0.12, -0.25, 0.10,  -0.25, 0.13,  -0.12, 0.16,  0.02};

constexpr std::array<double, 32> kWalking = {
    -0.22, 0.46,  -0.16, 0.22,  -0.08, 0.01,  0.08,  0.02,
    0.10,  0.26,  0.04,  0.52,  0.00,  0.00,  0.01,  -0.28,
    0.01,  -0.36, 0.02,  -0.50, 0.12,  0.04,  0.16,  -0.13,
    -0.12, -0.27, 0.13,  -0.26, -0.17, -0.11, -0.20, 0.06};

constexpr std::array<double, 32> kCrouching = {
    -0.10, 0.28,  -0.16, 0.10,  -0.08, 0.00,  0.08,  0.00,
    0.16,  0.10,  0.10,  0.28,  0.00,  0.00,  -0.03, -0.20,
    -0.05, -0.27, -0.08, -0.38, -0.20, 0.08,  -0.19, -0.06,
    -0.11, -0.19, 0.11,  -0.18, 0.16,  -0.04, 0.20,  0.10};

double clamp(double v, double lo, double hi) {
  return std::max(lo, std::min(hi, v));
}

struct PlacedPose {
  Pose pose;
  BBox box;
  double head_size;
  int template_index;
};

PlacedPose instantiate(const std::array<double, 32>& tmpl, double height,
                       double cx, double cy, double jitter, Rng& rng,
                       double img_w, double img_h) {
  PlacedPose placed;
  placed.pose.joints.resize(16);
  double x_min = 1e18, y_min = 1e18, x_max = -1e18, y_max = -1e18;
  for (int j = 0; j < 16; ++j) {
    double x = cx + tmpl[2 * j] * height + (jitter > 0 ? rng.normal(0, jitter) : 0.0);
    double y = cy + tmpl[2 * j + 1] * height +
               (jitter > 0 ? rng.normal(0, jitter) : 0.0);
    x = clamp(x, 0.0, img_w - 1.0);
    y = clamp(y, 0.0, img_h - 1.0);
    placed.pose.joints[j] = {x, y, 1.0, true};
    x_min = std::min(x_min, x);
    y_min = std::min(y_min, y);
    x_max = std::max(x_max, x);
    y_max = std::max(y_max, y);
  }
  placed.pose.score = 1.0;
  // Tight joint box padded by 10% on each side.
  const double pad_x = std::max((x_max - x_min) * 0.1, 1.0);
  const double pad_y = std::max((y_max - y_min) * 0.1, 1.0);
  placed.box = {x_min - pad_x, y_min - pad_y, x_max + pad_x, y_max + pad_y};
  const Joint& neck = placed.pose.joints[8];
  const Joint& head = placed.pose.joints[9];
  const double seg = std::sqrt((head.x - neck.x) * (head.x - neck.x) +
                               (head.y - neck.y) * (head.y - neck.y));
  placed.head_size = std::max(2.0 * seg, 1.0);
  return placed;
}

}  // namespace

const std::vector<std::array<double, 32>>& pose_templates() {
  static const std::vector<std::array<double, 32>> library = {
      kStanding, kArmsUp, kSitting, kWalking, kCrouching};
  return library;
}

OffsetGMM SynthConfig::default_offset_model() {
  OffsetGMM gmm;
  gmm.weights = {0.6, 0.4};
  gmm.means = {{0.04, 0.03, -0.03, 0.02}, {-0.05, -0.02, 0.05, 0.06}};
  gmm.variances = {{0.0025, 0.0025, 0.0025, 0.0025},
                   {0.0036, 0.0036, 0.0036, 0.0036}};
  return gmm;
}

void validate_config(const SynthConfig& cfg) {
  if (cfg.image_count < 1) throw ValidationError("image_count must be >= 1");
  if (!(cfg.image_width > 1.0) || !(cfg.image_height > 1.0)) {
    throw ValidationError("image dimensions must exceed one pixel");
  }
  if (cfg.persons_min < 0 || cfg.persons_max < cfg.persons_min) {
    throw ValidationError("bad persons-per-image range");
  }
  if (cfg.duplicate_rate < 0.0 || cfg.joint_noise < 0.0 ||
      cfg.false_positive_rate < 0.0 || cfg.miss_rate < 0.0 ||
      cfg.miss_rate > 1.0 || cfg.offset_scale < 0.0) {
    throw ValidationError("rates must be non-negative (miss_rate <= 1)");
  }
  if (cfg.template_count < 1 ||
      cfg.template_count > static_cast<int>(pose_templates().size())) {
    throw ValidationError("template_count out of range");
  }
  if (!(cfg.person_height_min > 0.0) ||
      cfg.person_height_max < cfg.person_height_min) {
    throw ValidationError("bad person height range");
  }
  const std::size_t models = cfg.offset_models.size();
  if (models != 0 && models != 1 &&
      models != static_cast<std::size_t>(cfg.template_count)) {
    throw ValidationError(
        "offset_models must be empty, a single shared model, or one per "
        "template");
  }
  for (const OffsetGMM& gmm : cfg.offset_models) {
    if (gmm.weights.empty() || gmm.means.size() != gmm.weights.size() ||
        gmm.variances.size() != gmm.weights.size()) {
      throw ValidationError("malformed offset model");
    }
  }
}

SynthOutput generate(const SynthConfig& cfg) {
  validate_config(cfg);
  const auto& templates = pose_templates();
  std::vector<OffsetGMM> models = cfg.offset_models;
  if (models.empty()) models.push_back(SynthConfig::default_offset_model());

  const auto model_for = [&](int tmpl) -> const OffsetGMM& {
    return models.size() == 1 ? models[0] : models[tmpl];
  };

  SynthOutput out;
  out.gts.reserve(cfg.image_count);
  for (int img = 0; img < cfg.image_count; ++img) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(img)));
    char name[32];
    std::snprintf(name, sizeof(name), "img_%06d", img);

    ImageAnnotation ann;
    ann.image_id = name;
    ann.width = cfg.image_width;
    ann.height = cfg.image_height;

    const int persons =
        cfg.persons_min +
        static_cast<int>(rng.uniform_int(
            static_cast<std::uint64_t>(cfg.persons_max - cfg.persons_min + 1)));

    for (int person = 0; person < persons; ++person) {
      const int tmpl = static_cast<int>(
          rng.uniform_int(static_cast<std::uint64_t>(cfg.template_count)));
      const double height =
          rng.uniform(cfg.person_height_min,
                      std::min(cfg.person_height_max, cfg.image_height * 0.9));
      // Keep the template extent inside the image (up to clamping of jitter).
      const double margin_x = 0.35 * height;
      const double top = 0.65 * height;
      const double bottom = 0.55 * height;
      const double cx =
          rng.uniform(margin_x, std::max(margin_x + 1.0,
                                         cfg.image_width - margin_x));
      const double cy = rng.uniform(
          top, std::max(top + 1.0, cfg.image_height - bottom));

      const PlacedPose gt = instantiate(templates[tmpl], height, cx, cy,
                                        cfg.gt_jitter, rng, cfg.image_width,
                                        cfg.image_height);
      ann.gt_poses.push_back({gt.pose, gt.box, gt.head_size});

      if (cfg.miss_rate > 0.0 && rng.bernoulli(cfg.miss_rate)) continue;

      const int detections = 1 + rng.poisson(cfg.duplicate_rate);
      for (int det = 0; det < detections; ++det) {
        BoxOffset off = gmm_sample(model_for(tmpl), rng);
        for (double& v : off.d) v *= cfg.offset_scale;
        BBox det_box;
        bool ok = false;
        for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
          try {
            det_box = apply_offset(gt.box, off);
            ok = true;
          } catch (const ValidationError&) {
            off = gmm_sample(model_for(tmpl), rng);
            for (double& v : off.d) v *= cfg.offset_scale;
          }
        }
        if (!ok) det_box = gt.box;

        // Joint noise grows with the box offset; confidences decay with the
        // actual displacement.
        const double noise_sigma =
            cfg.joint_noise * (1.0 + 2.0 * off.norm());
        Pose pose;
        pose.joints.resize(16);
        double conf_sum = 0.0;
        for (int j = 0; j < 16; ++j) {
          const Joint& g = gt.pose.joints[j];
          double nx = 0.0, ny = 0.0;
          if (noise_sigma > 0.0) {
            nx = rng.normal(0.0, noise_sigma);
            ny = rng.normal(0.0, noise_sigma);
          }
          const double x = clamp(g.x + nx, 0.0, cfg.image_width - 1.0);
          const double y = clamp(g.y + ny, 0.0, cfg.image_height - 1.0);
          double conf = 1.0;
          if (cfg.joint_noise > 0.0) {
            const double disp = nx * nx + ny * ny;
            const double scale = 2.5 * cfg.joint_noise;
            conf = clamp(std::exp(-disp / (2.0 * scale * scale)), 0.05, 1.0);
          }
          pose.joints[j] = {x, y, conf, true};
          conf_sum += conf;
        }
        const double det_conf =
            cfg.offset_scale > 0.0
                ? clamp(0.4 + 0.6 * std::exp(-2.0 * off.norm()), 0.0, 1.0)
                : 1.0;
        pose.score = composite_score(det_conf, pose);
        out.proposals.push_back({ann.image_id, det_box, pose});
      }
    }

    // Spurious detections: template poses at random spots, low confidence.
    const int fp_count = cfg.false_positive_rate > 0.0
                             ? rng.poisson(cfg.false_positive_rate)
                             : 0;
    for (int f = 0; f < fp_count; ++f) {
      const int tmpl = static_cast<int>(
          rng.uniform_int(static_cast<std::uint64_t>(cfg.template_count)));
      const double height =
          rng.uniform(cfg.person_height_min,
                      std::min(cfg.person_height_max, cfg.image_height * 0.9));
      const double cx = rng.uniform(0.35 * height,
                                    std::max(0.36 * height,
                                             cfg.image_width - 0.35 * height));
      const double cy = rng.uniform(
          0.65 * height,
          std::max(0.66 * height, cfg.image_height - 0.55 * height));
      PlacedPose fp = instantiate(templates[tmpl], height, cx, cy,
                                  cfg.gt_jitter, rng, cfg.image_width,
                                  cfg.image_height);
      const double base_conf = rng.uniform(0.05, 0.3);
      for (Joint& j : fp.pose.joints) j.confidence = base_conf;
      fp.pose.score = composite_score(base_conf, fp.pose);
      out.proposals.push_back({ann.image_id, fp.box, fp.pose});
    }

    out.gts.push_back(std::move(ann));
  }
  return out;
}

}  // namespace posekit
