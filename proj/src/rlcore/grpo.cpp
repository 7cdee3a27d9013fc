#include "coda/rlcore/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "coda/common/error.hpp"

namespace coda::rlcore {

void GrpoConfig::validate() const {
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw Error("invalid_config", "clip epsilon must be in (0, 1)");
  if (!(kl_beta >= 0.0)) throw Error("invalid_config", "KL coefficient must be nonnegative");
  if (group_size < 2) throw Error("invalid_config", "group size must be at least 2");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw Error("invalid_config", "bad learning rate");
  if (!(std_epsilon > 0.0)) throw Error("invalid_config", "std epsilon must be positive");
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double dist_reward(const Action& candidate, const Action& positive, env::Resolution native) {
  if (candidate.kind != positive.kind) throw Error("contract_violation", "dist_reward needs matching action kinds");
  switch (candidate.kind) {
    case ActionKind::kClick:
    case ActionKind::kDoubleClick: {
      const double l1 = std::abs(candidate.x - positive.x) + std::abs(candidate.y - positive.y);
      return 1.0 - std::min(1.0, l1 / (native.width + native.height));
    }
    case ActionKind::kDrag:
      return 0.5 * (env::iou(candidate.source, positive.source) + env::iou(candidate.destination, positive.destination));
    case ActionKind::kType:
    case ActionKind::kHotkey: {
      const std::size_t n = std::max(candidate.text.size(), positive.text.size());
      if (n == 0) return 1.0;
      return 1.0 - static_cast<double>(edit_distance(candidate.text, positive.text)) / n;
    }
    case ActionKind::kFinish:
      return 1.0;
  }
  return 0.0;
}

double action_reward(const Action& candidate, const Action& positive, env::Resolution native) {
  if (candidate.kind != positive.kind) return 0.0;
  return 1.0 + dist_reward(candidate, positive, native);
}

std::vector<double> group_advantages(const std::vector<double>& rewards, double std_epsilon) {
  const std::size_t g = rewards.size();
  if (g < 2) throw Error("invalid_argument", "group size must be at least 2");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= g;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / g);
  std::vector<double> out(g, 0.0);
  if (sd < std_epsilon) return out;
  for (std::size_t i = 0; i < g; ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

double kl_value(double prob_theta, double prob_ref) {
  if (!(prob_theta > 0.0) || !(prob_ref > 0.0)) throw Error("domain_error", "probabilities must be positive");
  const double u = prob_ref / prob_theta;
  return u - 1.0 - std::log(u);
}

namespace {

LossResult loss_impl(const std::vector<GroupMember>& group, const GrpoConfig& config, bool clip) {
  if (group.empty()) throw Error("invalid_argument", "empty group");
  LossResult r;
  r.gradient.assign(agent::kFeatureDim, 0.0);
  const double lo = 1.0 - config.clip_epsilon;
  const double hi = 1.0 + config.clip_epsilon;
  const double g = static_cast<double>(group.size());
  int clipped = 0;
  double kl_total = 0.0;
  for (const auto& m : group) {
    const std::size_t n = m.probs.size();
    if (n == 0 || m.ref_probs.size() != n || m.token_grads.size() != n) {
      throw Error("token_mismatch", "theta and reference token counts differ");
    }
    const double w = 1.0 / (g * static_cast<double>(n));
    for (std::size_t t = 0; t < n; ++t) {
      const double ratio = m.probs[t] / m.ref_probs[t];
      const double kl = kl_value(m.probs[t], m.ref_probs[t]);
      const double u = m.ref_probs[t] / m.probs[t];
      const double plain = ratio * m.advantage;
      double objective = plain;
      bool active = true;
      if (clip) {
        const double clipped_term = std::clamp(ratio, lo, hi) * m.advantage;
        if (clipped_term < plain) {
          objective = clipped_term;
          active = false;
          ++clipped;
        }
      }
      r.loss -= w * (objective - config.kl_beta * kl);
      // d ratio = ratio * dlog p; d kl = (1 - u) * dlog p.
      const double coef = (active ? m.advantage * ratio : 0.0) - config.kl_beta * (1.0 - u);
      const auto& gt = m.token_grads[t];
      if (gt.size() != r.gradient.size()) throw Error("token_mismatch", "token gradient has wrong dimension");
      for (std::size_t i = 0; i < gt.size(); ++i) r.gradient[i] -= w * coef * gt[i];
      kl_total += kl;
      ++r.tokens;
    }
  }
  r.mean_kl = kl_total / r.tokens;
  r.clip_fraction = static_cast<double>(clipped) / r.tokens;
  return r;
}

}  // namespace

LossResult grpo_loss(const std::vector<GroupMember>& group, const GrpoConfig& config) {
  return loss_impl(group, config, true);
}

LossResult unclipped_loss(const std::vector<GroupMember>& group, const GrpoConfig& config) {
  return loss_impl(group, config, false);
}

std::vector<GroupMember> make_group(const agent::PlannerParams& theta, const agent::PlannerParams& ref,
                                    const agent::DecisionContext& context, const std::vector<Plan>& plans,
                                    const std::vector<double>& advantages, double temperature) {
  if (plans.size() != advantages.size()) throw Error("invalid_argument", "one advantage per plan required");
  const agent::PlanDistribution dt(theta, context, temperature);
  const agent::PlanDistribution dr(ref, context, temperature);
  std::vector<GroupMember> out;
  out.reserve(plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    GroupMember m;
    m.probs = dt.token_probabilities(plans[i]);
    m.ref_probs = dr.token_probabilities(plans[i]);
    for (int t = 0; t < plans[i].token_count(); ++t) m.token_grads.push_back(dt.token_grad(plans[i], t));
    m.advantage = advantages[i];
    out.push_back(std::move(m));
  }
  return out;
}

agent::PlannerParams sgd_step(const agent::PlannerParams& params, const std::vector<double>& gradient,
                              double learning_rate) {
  if (gradient.size() != params.theta.size()) throw Error("invalid_argument", "gradient dimension mismatch");
  if (!std::all_of(gradient.begin(), gradient.end(), [](double v) { return std::isfinite(v); })) {
    throw Error("non_finite_gradient", "gradient contains NaN or infinity");
  }
  agent::PlannerParams out = params;
  for (std::size_t i = 0; i < gradient.size(); ++i) out.theta[i] -= learning_rate * gradient[i];
  return out;
}

MetricsLog::MetricsLog(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app | std::ios::binary);
  if (!out_) throw Error("io_error", "cannot open metrics log " + path.string());
}

void MetricsLog::append(const StepMetrics& m) {
  nlohmann::json j = {{"step", m.step},
                      {"loss", m.loss},
                      {"mean_reward", m.mean_reward},
                      {"kl", m.kl},
                      {"clip_fraction", m.clip_fraction},
                      {"advantage_std", m.advantage_std}};
  out_ << j.dump() << '\n';
  out_.flush();
}

}  // namespace coda::rlcore
