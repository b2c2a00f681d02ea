#include "posekit/nms.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>
#include <unordered_map>

namespace posekit {

void validate_params(const NmsParams& params) {
  if (!(params.sigma1 > 0.0) || !std::isfinite(params.sigma1) ||
      !(params.sigma2 > 0.0) || !std::isfinite(params.sigma2)) {
    throw ValidationError("sigma1 and sigma2 must be finite and > 0");
  }
  if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda) ||
      !(params.eta >= 0.0) || !std::isfinite(params.eta)) {
    throw ValidationError("lambda and eta must be finite and >= 0");
  }
}

MatchWindow match_window(const Joint& ref_joint, const BBox& ref_box) {
  return {ref_joint.x, ref_joint.y, ref_box.width() / 20.0,
          ref_box.height() / 20.0};
}

double k_sim(const PoseProposal& ref, const PoseProposal& cand,
             double sigma1) {
  const std::size_t m = ref.pose.joints.size();
  double sum = 0.0;
  for (std::size_t n = 0; n < m; ++n) {
    const Joint& r = ref.pose.joints[n];
    const Joint& c = cand.pose.joints[n];
    if (match_window(r, ref.box).contains(c.x, c.y)) {
      sum += k_sim_term(std::tanh(r.confidence / sigma1),
                        std::tanh(c.confidence / sigma1));
    }
  }
  return sum;
}

double h_sim(const Pose& ref, const Pose& cand, double sigma2) {
  const std::size_t m = ref.joints.size();
  double sum = 0.0;
  for (std::size_t n = 0; n < m; ++n) {
    const Joint& r = ref.joints[n];
    const Joint& c = cand.joints[n];
    if (!r.visible || !c.visible) continue;
    const double dx = r.x - c.x;
    const double dy = r.y - c.y;
    sum += std::exp(-(dx * dx + dy * dy) / sigma2);
  }
  return sum;
}

double pose_distance(const PoseProposal& ref, const PoseProposal& cand,
                     const NmsParams& params) {
  const std::size_t m = ref.pose.joints.size();
  const double diag_sq = ref.box.diagonal() * ref.box.diagonal();
  double k_total = 0.0;
  double h_total = 0.0;
  for (std::size_t n = 0; n < m; ++n) {
    const Joint& r = ref.pose.joints[n];
    const Joint& c = cand.pose.joints[n];
    if (match_window(r, ref.box).contains(c.x, c.y)) {
      k_total += k_sim_term(std::tanh(r.confidence / params.sigma1),
                            std::tanh(c.confidence / params.sigma1));
    }
    if (r.visible && c.visible) {
      const double dx = r.x - c.x;
      const double dy = r.y - c.y;
      h_total += h_sim_term_normalized(dx * dx + dy * dy, diag_sq,
                                       params.sigma2);
    }
  }
  return k_total + params.lambda * h_total;
}

namespace {

// Score-descending order, input index breaking ties.
std::vector<int> score_order(const std::vector<PoseProposal>& proposals) {
  std::vector<int> order(proposals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return proposals[a].pose.score > proposals[b].pose.score;
  });
  return order;
}

void check_single_image(const std::vector<PoseProposal>& proposals) {
  for (const PoseProposal& p : proposals) {
    if (p.image_id != proposals.front().image_id) {
      throw ValidationError("run_nms requires proposals from a single image");
    }
    if (p.pose.joints.size() != proposals.front().pose.joints.size()) {
      throw ValidationError("proposals disagree on the joint count");
    }
  }
}

}  // namespace

std::vector<PoseProposal> run_nms(const std::vector<PoseProposal>& proposals,
                                  const NmsParams& params) {
  validate_params(params);
  if (proposals.empty()) return {};
  check_single_image(proposals);
  const NmsScene scene(proposals);
  return scene.survivors_as_proposals(params);
}

std::vector<PoseProposal> run_nms_reference(
    const std::vector<PoseProposal>& proposals, const NmsParams& params) {
  validate_params(params);
  if (proposals.empty()) return {};
  check_single_image(proposals);

  std::vector<int> remaining = score_order(proposals);
  std::vector<PoseProposal> out;
  while (!remaining.empty()) {
    const int ref = remaining.front();
    out.push_back(proposals[ref]);
    std::vector<int> next;
    for (std::size_t i = 1; i < remaining.size(); ++i) {
      const int cand = remaining[i];
      if (pose_distance(proposals[ref], proposals[cand], params) <
          params.eta) {
        next.push_back(cand);
      }
    }
    remaining = std::move(next);
  }
  return out;
}

NmsScene::NmsScene(std::vector<PoseProposal> proposals)
    : proposals_(std::move(proposals)) {
  n_ = static_cast<int>(proposals_.size());
  if (n_ == 0) return;
  check_single_image(proposals_);
  m_ = static_cast<int>(proposals_.front().pose.joints.size());

  conf_.resize(static_cast<std::size_t>(n_) * m_);
  diag_sq_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    diag_sq_[i] = proposals_[i].box.diagonal() * proposals_[i].box.diagonal();
    for (int n = 0; n < m_; ++n) {
      conf_[static_cast<std::size_t>(i) * m_ + n] =
          proposals_[i].pose.joints[n].confidence;
    }
  }

  const std::size_t pair_stride = static_cast<std::size_t>(n_) * m_;
  sq_dist_.resize(static_cast<std::size_t>(n_) * pair_stride);
  in_window_.resize(sq_dist_.size());
  both_visible_.resize(sq_dist_.size());
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      const std::size_t base = i * pair_stride + static_cast<std::size_t>(j) * m_;
      for (int n = 0; n < m_; ++n) {
        const Joint& r = proposals_[i].pose.joints[n];
        const Joint& c = proposals_[j].pose.joints[n];
        const double dx = r.x - c.x;
        const double dy = r.y - c.y;
        sq_dist_[base + n] = dx * dx + dy * dy;
        in_window_[base + n] =
            match_window(r, proposals_[i].box).contains(c.x, c.y) ? 1 : 0;
        both_visible_[base + n] = (r.visible && c.visible) ? 1 : 0;
      }
    }
  }
  order_ = score_order(proposals_);
}

NmsScene::Kernels NmsScene::kernels(double sigma1, double sigma2) const {
  Kernels kern;
  kern.n = n_;
  if (n_ == 0) return kern;
  kern.k.assign(static_cast<std::size_t>(n_) * n_, 0.0);
  kern.h.assign(static_cast<std::size_t>(n_) * n_, 0.0);

  std::vector<double> tanh_conf(conf_.size());
  for (std::size_t i = 0; i < conf_.size(); ++i) {
    tanh_conf[i] = std::tanh(conf_[i] / sigma1);
  }

  const std::size_t pair_stride = static_cast<std::size_t>(n_) * m_;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i == j) continue;
      const std::size_t base = i * pair_stride + static_cast<std::size_t>(j) * m_;
      double k_total = 0.0;
      double h_total = 0.0;
      for (int n = 0; n < m_; ++n) {
        if (in_window_[base + n]) {
          k_total += k_sim_term(tanh_conf[static_cast<std::size_t>(i) * m_ + n],
                                tanh_conf[static_cast<std::size_t>(j) * m_ + n]);
        }
        if (both_visible_[base + n]) {
          h_total +=
              h_sim_term_normalized(sq_dist_[base + n], diag_sq_[i], sigma2);
        }
      }
      kern.k[static_cast<std::size_t>(i) * n_ + j] = k_total;
      kern.h[static_cast<std::size_t>(i) * n_ + j] = h_total;
    }
  }
  return kern;
}

std::vector<int> NmsScene::survivors(const Kernels& kern, double lambda,
                                     double eta) const {
  std::vector<int> out;
  if (n_ == 0) return out;
  std::vector<std::uint8_t> alive(n_, 1);
  for (std::size_t pos = 0; pos < order_.size(); ++pos) {
    const int ref = order_[pos];
    if (!alive[ref]) continue;
    out.push_back(ref);
    alive[ref] = 0;
    for (std::size_t q = pos + 1; q < order_.size(); ++q) {
      const int cand = order_[q];
      if (!alive[cand]) continue;
      const double d = kern.k[static_cast<std::size_t>(ref) * n_ + cand] +
                       lambda * kern.h[static_cast<std::size_t>(ref) * n_ + cand];
      if (d >= eta) alive[cand] = 0;
    }
  }
  return out;
}

std::vector<PoseProposal> NmsScene::survivors_as_proposals(
    const NmsParams& params) const {
  std::vector<PoseProposal> out;
  for (int idx : survivors(params)) out.push_back(proposals_[idx]);
  return out;
}

std::vector<PoseProposal> run_nms_batch(
    const std::vector<PoseProposal>& proposals, const NmsParams& params,
    int threads) {
  validate_params(params);
  // Group by image id, keeping first-appearance order.
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<PoseProposal>> groups;
  for (const PoseProposal& p : proposals) {
    auto it = slot.find(p.image_id);
    if (it == slot.end()) {
      it = slot.emplace(p.image_id, groups.size()).first;
      groups.emplace_back();
    }
    groups[it->second].push_back(p);
  }

  std::vector<std::vector<PoseProposal>> results(groups.size());
  int worker_count = threads > 0
                         ? threads
                         : static_cast<int>(std::thread::hardware_concurrency());
  if (worker_count < 1) worker_count = 1;
  worker_count = std::min<int>(worker_count, static_cast<int>(groups.size()));

  if (worker_count <= 1) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      results[g] = run_nms(groups[g], params);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (int w = 0; w < worker_count; ++w) {
      pool.emplace_back([&] {
        for (std::size_t g = next.fetch_add(1); g < groups.size();
             g = next.fetch_add(1)) {
          results[g] = run_nms(groups[g], params);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  std::vector<PoseProposal> out;
  for (const auto& r : results) {
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace posekit
