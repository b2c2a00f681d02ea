#include "posekit/optim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <iostream>
#include <thread>
#include <tuple>
#include <unordered_map>

namespace posekit {

namespace {

std::vector<double> grid_values(const ParamRange& range, int count) {
  std::vector<double> values(count);
  if (count == 1) {
    values[0] = range.lo;
    return values;
  }
  if (range.log_scale) {
    const double llo = std::log(range.lo);
    const double lhi = std::log(range.hi);
    for (int i = 0; i < count; ++i) {
      values[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
    }
  } else {
    for (int i = 0; i < count; ++i) {
      values[i] = range.lo + (range.hi - range.lo) * i / (count - 1);
    }
  }
  return values;
}

bool param_tuple_less(const NmsParams& a, const NmsParams& b) {
  return std::tie(a.sigma1, a.sigma2, a.lambda, a.eta) <
         std::tie(b.sigma1, b.sigma2, b.lambda, b.eta);
}

struct SceneSet {
  std::vector<NmsScene> scenes;

  std::vector<PoseProposal> survivors(const NmsParams& params) const {
    std::vector<PoseProposal> out;
    for (const NmsScene& scene : scenes) {
      for (int idx : scene.survivors(params)) {
        out.push_back(scene.proposals()[idx]);
      }
    }
    return out;
  }
};

SceneSet build_scenes(const std::vector<PoseProposal>& proposals,
                      const std::vector<ImageAnnotation>& gts) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<PoseProposal>> groups;
  for (const ImageAnnotation& ann : gts) {
    if (!slot.emplace(ann.image_id, groups.size()).second) {
      throw ValidationError("duplicate image_id '" + ann.image_id +
                            "' in annotations");
    }
    groups.emplace_back();
  }
  for (const PoseProposal& p : proposals) {
    const auto it = slot.find(p.image_id);
    if (it == slot.end()) {
      throw ValidationError("proposal references unknown image_id '" +
                            p.image_id + "'");
    }
    groups[it->second].push_back(p);
  }
  SceneSet set;
  set.scenes.reserve(groups.size());
  for (auto& g : groups) set.scenes.emplace_back(std::move(g));
  return set;
}

void for_each_candidate(std::size_t count, int threads,
                        const std::function<void(std::size_t)>& work) {
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min<int>(workers, static_cast<int>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count;
           i = next.fetch_add(1)) {
        work(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

void validate_config(const OptimConfig& cfg) {
  const auto check_range = [](const ParamRange& r, const char* name,
                              bool positive) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw ValidationError(std::string("bad range for ") + name);
    }
    if (positive && !(r.lo > 0.0)) {
      throw ValidationError(std::string(name) +
                            " range must be strictly positive");
    }
  };
  check_range(cfg.sigma1, "sigma1", true);
  check_range(cfg.sigma2, "sigma2", true);
  check_range(cfg.lambda, "lambda", false);
  check_range(cfg.eta, "eta", false);
  if (cfg.sigma1.log_scale && !(cfg.sigma1.lo > 0.0)) {
    throw ValidationError("log-scale ranges need positive bounds");
  }
  if (cfg.grid_sigma1 < 2 || cfg.grid_sigma2 < 2 || cfg.grid_lambda < 2 ||
      cfg.grid_eta < 2) {
    throw ValidationError("grid sizes must be >= 2");
  }
  if (cfg.max_rounds < 1) {
    throw ValidationError("max_rounds must be >= 1");
  }
  if (!(cfg.tol >= 0.0)) {
    throw ValidationError("tol must be >= 0");
  }
}

double disable_nms_baseline(const std::vector<PoseProposal>& proposals,
                            const std::vector<ImageAnnotation>& gts,
                            const EvalConfig& eval_cfg) {
  return evaluate(proposals, gts, eval_cfg).map;
}

OptimResult optimize_params(const std::vector<PoseProposal>& proposals,
                            const std::vector<ImageAnnotation>& gts,
                            const OptimConfig& cfg,
                            const EvalConfig& eval_cfg) {
  validate_config(cfg);
  if (gts.empty()) {
    throw ValidationError("validation set is empty");
  }
  long long gt_count = 0;
  for (const ImageAnnotation& ann : gts) {
    gt_count += static_cast<long long>(ann.gt_poses.size());
  }
  if (gt_count > 0 &&
      static_cast<double>(proposals.size()) / static_cast<double>(gt_count) <
          1.1) {
    std::cerr << "warning: validation proposals carry little redundancy "
                 "(mean proposals per ground truth < 1.1); the optimum may "
                 "be flat\n";
  }

  const SceneSet scenes = build_scenes(proposals, gts);
  const auto objective = [&](const NmsParams& params) {
    return evaluate(scenes.survivors(params), gts, eval_cfg).map;
  };

  NmsParams incumbent;  // stock defaults are the starting point
  double best = objective(incumbent);
  OptimResult result;
  result.trace.push_back(best);

  const std::vector<double> sigma1_grid =
      grid_values(cfg.sigma1, cfg.grid_sigma1);
  const std::vector<double> sigma2_grid =
      grid_values(cfg.sigma2, cfg.grid_sigma2);
  const std::vector<double> lambda_grid =
      grid_values(cfg.lambda, cfg.grid_lambda);
  const std::vector<double> eta_grid = grid_values(cfg.eta, cfg.grid_eta);

  for (int round = 0; round < cfg.max_rounds; ++round) {
    const double round_start = best;

    // Joint grid over (sigma1, sigma2); the incumbent point rides along so
    // the objective can only improve.
    {
      std::vector<NmsParams> candidates;
      candidates.push_back(incumbent);
      for (double s1 : sigma1_grid) {
        for (double s2 : sigma2_grid) {
          NmsParams p = incumbent;
          p.sigma1 = s1;
          p.sigma2 = s2;
          candidates.push_back(p);
        }
      }
      std::vector<double> values(candidates.size());
      for_each_candidate(candidates.size(), cfg.threads, [&](std::size_t i) {
        values[i] = objective(candidates[i]);
      });
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (values[i] > best ||
            (values[i] == best && param_tuple_less(candidates[i], incumbent))) {
          best = values[i];
          incumbent = candidates[i];
        }
      }
    }

    // Joint grid over (lambda, eta) with the similarity scales fixed. The
    // kernels do not depend on these two, so precompute them per scene.
    {
      std::vector<NmsScene::Kernels> kernels;
      kernels.reserve(scenes.scenes.size());
      for (const NmsScene& scene : scenes.scenes) {
        kernels.push_back(scene.kernels(incumbent.sigma1, incumbent.sigma2));
      }
      std::vector<NmsParams> candidates;
      candidates.push_back(incumbent);
      for (double la : lambda_grid) {
        for (double et : eta_grid) {
          NmsParams p = incumbent;
          p.lambda = la;
          p.eta = et;
          candidates.push_back(p);
        }
      }
      std::vector<double> values(candidates.size());
      for_each_candidate(candidates.size(), cfg.threads, [&](std::size_t i) {
        std::vector<PoseProposal> survivors;
        for (std::size_t s = 0; s < scenes.scenes.size(); ++s) {
          for (int idx : scenes.scenes[s].survivors(
                   kernels[s], candidates[i].lambda, candidates[i].eta)) {
            survivors.push_back(scenes.scenes[s].proposals()[idx]);
          }
        }
        values[i] = evaluate(survivors, gts, eval_cfg).map;
      });
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (values[i] > best ||
            (values[i] == best && param_tuple_less(candidates[i], incumbent))) {
          best = values[i];
          incumbent = candidates[i];
        }
      }
    }

    result.trace.push_back(best);
    ++result.rounds;
    if (best - round_start < cfg.tol) break;
  }

  result.params = incumbent;
  result.map = best;
  return result;
}

}  // namespace posekit
