#include "posekit/pgpg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace posekit {

AlignedPose align_pose(const Pose& pose, const JointSchema& schema) {
  const int m = schema.size();
  if (static_cast<int>(pose.joints.size()) != m) {
    throw ValidationError("pose joint count does not match schema '" +
                          schema.name + "'");
  }
  const Joint& thorax = pose.joints[schema.thorax];
  const Joint& pelvis = pose.joints[schema.pelvis];
  if (!thorax.visible || !pelvis.visible) {
    throw DegeneratePoseError("torso joints must be visible for alignment");
  }
  const double dx = thorax.x - pelvis.x;
  const double dy = thorax.y - pelvis.y;
  const double torso = std::sqrt(dx * dx + dy * dy);
  if (!(torso > 1e-12)) {
    throw DegeneratePoseError("torso endpoints coincide");
  }
  const double mid_x = (thorax.x + pelvis.x) / 2.0;
  const double mid_y = (thorax.y + pelvis.y) / 2.0;

  AlignedPose out;
  out.coords.assign(2 * m, 0.0);
  out.mask.assign(m, 0);
  for (int j = 0; j < m; ++j) {
    const Joint& joint = pose.joints[j];
    if (!joint.visible) continue;
    out.coords[2 * j] = (joint.x - mid_x) / torso;
    out.coords[2 * j + 1] = (joint.y - mid_y) / torso;
    out.mask[j] = 1;
  }
  return out;
}

double masked_distance(const AlignedPose& a, const AlignedPose& b) {
  const std::size_t m = a.mask.size();
  double sum = 0.0;
  int count = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!a.mask[j] || !b.mask[j]) continue;
    const double dx = a.coords[2 * j] - b.coords[2 * j];
    const double dy = a.coords[2 * j + 1] - b.coords[2 * j + 1];
    sum += dx * dx + dy * dy;
    ++count;
  }
  if (count == 0) return std::numeric_limits<double>::infinity();
  return sum / static_cast<double>(count);
}

namespace {

int nearest_center(const AlignedPose& pose,
                   const std::vector<AlignedPose>& centers) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = masked_distance(pose, centers[c]);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

std::vector<AlignedPose> kmeanspp_init(const std::vector<AlignedPose>& points,
                                       int k, Rng& rng) {
  std::vector<AlignedPose> centers;
  centers.reserve(k);
  centers.push_back(points[rng.uniform_int(points.size())]);
  std::vector<double> min_dist(points.size(),
                               std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < k) {
    std::vector<double> weights(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = masked_distance(points[i], centers.back());
      min_dist[i] = std::min(min_dist[i], d);
      weights[i] = std::isfinite(min_dist[i]) ? min_dist[i] : 0.0;
    }
    centers.push_back(points[rng.categorical(weights)]);
  }
  return centers;
}

AlignedPose masked_mean(const std::vector<AlignedPose>& points,
                        const std::vector<int>& assignment, int cluster,
                        const AlignedPose& fallback) {
  const std::size_t m = fallback.mask.size();
  AlignedPose mean;
  mean.coords.assign(2 * m, 0.0);
  mean.mask.assign(m, 0);
  std::vector<int> counts(m, 0);
  bool any = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (assignment[i] != cluster) continue;
    any = true;
    for (std::size_t j = 0; j < m; ++j) {
      if (!points[i].mask[j]) continue;
      mean.coords[2 * j] += points[i].coords[2 * j];
      mean.coords[2 * j + 1] += points[i].coords[2 * j + 1];
      ++counts[j];
    }
  }
  if (!any) return fallback;  // empty cluster keeps its previous center
  for (std::size_t j = 0; j < m; ++j) {
    if (counts[j] == 0) continue;
    mean.coords[2 * j] /= counts[j];
    mean.coords[2 * j + 1] /= counts[j];
    mean.mask[j] = 1;
  }
  return mean;
}

}  // namespace

KmeansResult fit_atomic(const std::vector<Pose>& poses, int k,
                        std::uint64_t seed, const JointSchema& schema) {
  if (k < 1) throw ValidationError("k must be >= 1");
  std::vector<AlignedPose> aligned;
  aligned.reserve(poses.size());
  for (const Pose& pose : poses) {
    aligned.push_back(align_pose(pose, schema));
  }
  if (static_cast<int>(aligned.size()) < k) {
    throw InsufficientDataError("need at least k alignable poses (" +
                                std::to_string(aligned.size()) + " < " +
                                std::to_string(k) + ")");
  }

  Rng rng(seed);
  KmeansResult result;
  result.centers = kmeanspp_init(aligned, k, rng);
  result.assignment.assign(aligned.size(), -1);

  constexpr int kMaxIterations = 300;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < aligned.size(); ++i) {
      const int c = nearest_center(aligned[i], result.centers);
      if (c != result.assignment[i]) {
        result.assignment[i] = c;
        changed = true;
      }
    }
    result.iterations = iter + 1;
    if (!changed) break;
    for (int c = 0; c < k; ++c) {
      result.centers[c] =
          masked_mean(aligned, result.assignment, c, result.centers[c]);
    }
  }
  return result;
}

int assign_atomic(const Pose& pose, const AtomicPoseModel& model) {
  const AlignedPose aligned = align_pose(pose, model.schema);
  return nearest_center(aligned, model.centers);
}

// ---------------------------------------------------------------------------
// Gaussian mixture over 4-D offsets, diagonal covariance.

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

double log_component_density(const std::array<double, 4>& x,
                             const std::array<double, 4>& mean,
                             const std::array<double, 4>& var) {
  double ll = 0.0;
  for (int d = 0; d < 4; ++d) {
    const double diff = x[d] - mean[d];
    ll += -0.5 * (kLogTwoPi + std::log(var[d]) + diff * diff / var[d]);
  }
  return ll;
}

double log_sum_exp(const std::vector<double>& v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

}  // namespace

double gmm_log_likelihood(const OffsetGMM& gmm,
                          const std::vector<BoxOffset>& offsets) {
  const int c = gmm.components();
  std::vector<double> terms(c);
  double total = 0.0;
  for (const BoxOffset& off : offsets) {
    for (int i = 0; i < c; ++i) {
      terms[i] = std::log(gmm.weights[i]) +
                 log_component_density(off.d, gmm.means[i], gmm.variances[i]);
    }
    total += log_sum_exp(terms);
  }
  return total;
}

OffsetGMM fit_offset_gmm(const std::vector<BoxOffset>& offsets, int components,
                         std::uint64_t seed, int min_samples) {
  if (components < 1) throw ValidationError("components must be >= 1");
  const int required = std::max(min_samples, components);
  const int n = static_cast<int>(offsets.size());
  if (n < required) {
    throw InsufficientDataError("need at least " + std::to_string(required) +
                                " offsets, got " + std::to_string(n));
  }

  Rng rng(seed);
  OffsetGMM gmm;
  gmm.weights.assign(components, 1.0 / components);
  gmm.means.resize(components);
  gmm.variances.resize(components);

  // Shared initial variance: per-dimension sample variance, floored.
  std::array<double, 4> data_mean{};
  for (const BoxOffset& off : offsets) {
    for (int d = 0; d < 4; ++d) data_mean[d] += off.d[d];
  }
  for (int d = 0; d < 4; ++d) data_mean[d] /= n;
  std::array<double, 4> data_var{};
  for (const BoxOffset& off : offsets) {
    for (int d = 0; d < 4; ++d) {
      const double diff = off.d[d] - data_mean[d];
      data_var[d] += diff * diff;
    }
  }
  for (int d = 0; d < 4; ++d) {
    data_var[d] = std::max(data_var[d] / n, kVarianceFloor);
  }

  // k-means++ seeding of the means on the raw offsets.
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  gmm.means[0] = offsets[rng.uniform_int(n)].d;
  for (int c = 1; c < components; ++c) {
    std::vector<double> weights(n);
    for (int i = 0; i < n; ++i) {
      double sq = 0.0;
      for (int d = 0; d < 4; ++d) {
        const double diff = offsets[i].d[d] - gmm.means[c - 1][d];
        sq += diff * diff;
      }
      min_dist[i] = std::min(min_dist[i], sq);
      weights[i] = min_dist[i];
    }
    gmm.means[c] = offsets[rng.categorical(weights)].d;
  }
  for (int c = 0; c < components; ++c) gmm.variances[c] = data_var;

  constexpr int kMaxIterations = 500;
  constexpr double kTolPerPoint = 1e-6;
  std::vector<double> resp(static_cast<std::size_t>(n) * components);
  double prev_mean_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // E step.
    double total_ll = 0.0;
    std::vector<double> terms(components);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < components; ++c) {
        terms[c] =
            std::log(gmm.weights[c]) +
            log_component_density(offsets[i].d, gmm.means[c], gmm.variances[c]);
      }
      const double lse = log_sum_exp(terms);
      total_ll += lse;
      for (int c = 0; c < components; ++c) {
        resp[static_cast<std::size_t>(i) * components + c] =
            std::exp(terms[c] - lse);
      }
    }
    const double mean_ll = total_ll / n;
    gmm.ll_trace.push_back(mean_ll);
    if (mean_ll - prev_mean_ll < kTolPerPoint && iter > 0) break;
    prev_mean_ll = mean_ll;

    // M step.
    for (int c = 0; c < components; ++c) {
      double mass = 0.0;
      std::array<double, 4> mean{};
      for (int i = 0; i < n; ++i) {
        const double r = resp[static_cast<std::size_t>(i) * components + c];
        mass += r;
        for (int d = 0; d < 4; ++d) mean[d] += r * offsets[i].d[d];
      }
      if (mass > 1e-12) {
        for (int d = 0; d < 4; ++d) mean[d] /= mass;
        std::array<double, 4> var{};
        for (int i = 0; i < n; ++i) {
          const double r = resp[static_cast<std::size_t>(i) * components + c];
          for (int d = 0; d < 4; ++d) {
            const double diff = offsets[i].d[d] - mean[d];
            var[d] += r * diff * diff;
          }
        }
        for (int d = 0; d < 4; ++d) {
          var[d] = std::max(var[d] / mass, kVarianceFloor);
        }
        gmm.means[c] = mean;
        gmm.variances[c] = var;
      }
      gmm.weights[c] = std::max(mass / n, 1e-12);
    }
    double wsum = 0.0;
    for (double w : gmm.weights) wsum += w;
    for (double& w : gmm.weights) w /= wsum;
  }
  return gmm;
}

BoxOffset gmm_sample(const OffsetGMM& gmm, Rng& rng) {
  const std::size_t c = rng.categorical(gmm.weights);
  BoxOffset out;
  for (int d = 0; d < 4; ++d) {
    out.d[d] = gmm.means[c][d] + std::sqrt(gmm.variances[c][d]) * rng.normal();
  }
  return out;
}

std::vector<BoxOffset> sample_offsets(const OffsetGMM& gmm, int n,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BoxOffset> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(gmm_sample(gmm, rng));
  return out;
}

// ---------------------------------------------------------------------------
// Full model fit and proposal sampling.

AtomicPoseModel fit_model(const std::vector<ImageAnnotation>& gts,
                          const std::vector<PoseProposal>& detections,
                          const PgpgConfig& cfg, const JointSchema& schema) {
  if (cfg.k < 1 || cfg.components < 1) {
    throw ValidationError("k and components must be >= 1");
  }

  // Flatten ground-truth instances, keeping only alignable poses.
  struct Instance {
    const GtInstance* inst;
    std::size_t image;
    int index_in_image;
  };
  std::vector<Instance> instances;
  std::unordered_map<std::string, std::size_t> image_slot;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    image_slot.emplace(gts[i].image_id, i);
    for (std::size_t g = 0; g < gts[i].gt_poses.size(); ++g) {
      const GtInstance& inst = gts[i].gt_poses[g];
      const Joint& thorax = inst.pose.joints.at(schema.thorax);
      const Joint& pelvis = inst.pose.joints.at(schema.pelvis);
      if (!thorax.visible || !pelvis.visible) continue;
      const double dx = thorax.x - pelvis.x;
      const double dy = thorax.y - pelvis.y;
      if (!(dx * dx + dy * dy > 0.0)) continue;
      instances.push_back({&inst, i, static_cast<int>(g)});
    }
  }
  if (static_cast<int>(instances.size()) < cfg.k) {
    throw InsufficientDataError("need at least k alignable ground-truth "
                                "poses");
  }

  std::vector<Pose> poses;
  poses.reserve(instances.size());
  for (const Instance& inst : instances) poses.push_back(inst.inst->pose);
  const KmeansResult clusters =
      fit_atomic(poses, cfg.k, derive_seed(cfg.seed, 0), schema);

  // Instance lookup by (image, gt index) for detection pairing.
  std::unordered_map<std::size_t, int> instance_of;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    instance_of[instances[i].image * 100000 +
                static_cast<std::size_t>(instances[i].index_in_image)] =
        static_cast<int>(i);
  }

  // Pair each detection with the max-IoU ground truth of its image.
  std::vector<std::vector<BoxOffset>> per_cluster(cfg.k);
  std::vector<BoxOffset> pooled;
  for (const PoseProposal& det : detections) {
    const auto it = image_slot.find(det.image_id);
    if (it == image_slot.end()) continue;
    const ImageAnnotation& ann = gts[it->second];
    int best_gt = -1;
    double best_iou = cfg.pair_min_iou;
    for (std::size_t g = 0; g < ann.gt_poses.size(); ++g) {
      const double ov = iou(det.box, ann.gt_poses[g].box);
      if (ov > best_iou) {
        best_iou = ov;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt < 0) continue;
    const auto inst_it = instance_of.find(it->second * 100000 +
                                          static_cast<std::size_t>(best_gt));
    if (inst_it == instance_of.end()) continue;
    const BoxOffset off =
        box_offset(det.box, ann.gt_poses[best_gt].box);
    per_cluster[clusters.assignment[inst_it->second]].push_back(off);
    pooled.push_back(off);
  }

  const int required = std::max(cfg.min_samples, cfg.components);
  if (static_cast<int>(pooled.size()) < required) {
    throw InsufficientDataError(
        "too few detection-to-ground-truth offset pairs (" +
        std::to_string(pooled.size()) + " < " + std::to_string(required) +
        "); check the detections file and pair_min_iou");
  }
  const OffsetGMM global = fit_offset_gmm(pooled, cfg.components,
                                          derive_seed(cfg.seed, 1),
                                          cfg.min_samples);

  AtomicPoseModel model;
  model.schema = schema;
  model.k = cfg.k;
  model.components = cfg.components;
  model.min_samples = cfg.min_samples;
  model.centers = clusters.centers;
  model.seed = cfg.seed;
  model.gmms.resize(cfg.k);
  model.used_fallback.assign(cfg.k, 0);
  for (int c = 0; c < cfg.k; ++c) {
    if (static_cast<int>(per_cluster[c].size()) >= required) {
      model.gmms[c] =
          fit_offset_gmm(per_cluster[c], cfg.components,
                         derive_seed(cfg.seed, 2 + static_cast<std::uint64_t>(c)),
                         cfg.min_samples);
    } else {
      model.gmms[c] = global;
      model.used_fallback[c] = 1;
    }
  }

  Fnv1a hash;
  for (const ImageAnnotation& ann : gts) {
    hash.add(ann.image_id);
    hash.add(ann.width);
    hash.add(ann.height);
    for (const GtInstance& inst : ann.gt_poses) {
      hash.add(inst.head_size);
      hash.add(inst.box.x_min);
      hash.add(inst.box.y_min);
      hash.add(inst.box.x_max);
      hash.add(inst.box.y_max);
      for (const Joint& j : inst.pose.joints) {
        hash.add(j.x);
        hash.add(j.y);
        hash.add(j.confidence);
        hash.add(static_cast<std::uint64_t>(j.visible));
      }
    }
  }
  for (const PoseProposal& det : detections) {
    hash.add(det.image_id);
    hash.add(det.box.x_min);
    hash.add(det.box.y_min);
    hash.add(det.box.x_max);
    hash.add(det.box.y_max);
  }
  model.dataset_hash = hash.digest();
  return model;
}

std::vector<BBox> sample_proposals(const Pose& gt_pose, const BBox& gt_box,
                                   const AtomicPoseModel& model, int n,
                                   std::uint64_t seed) {
  if (n < 1) throw ValidationError("n must be >= 1");
  validate_box(gt_box);
  const int cluster = assign_atomic(gt_pose, model);
  const OffsetGMM& gmm = model.gmms[cluster];

  Rng rng(seed);
  std::vector<BBox> out;
  out.reserve(n);
  const int budget = 10 * n;
  int attempts = 0;
  while (static_cast<int>(out.size()) < n && attempts < budget) {
    ++attempts;
    const BoxOffset off = gmm_sample(gmm, rng);
    BBox box;
    try {
      box = apply_offset(gt_box, off);
    } catch (const ValidationError&) {
      continue;
    }
    if (iou(box, gt_box) < kSampleIouFloor) continue;
    out.push_back(box);
  }
  if (static_cast<int>(out.size()) < n) {
    throw SamplingError("rejection budget exhausted after " +
                            std::to_string(attempts) + " attempts (" +
                            std::to_string(out.size()) + "/" +
                            std::to_string(n) + " accepted)",
                        std::move(out));
  }
  return out;
}

}  // namespace posekit
