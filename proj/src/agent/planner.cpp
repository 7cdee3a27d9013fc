#include "coda/agent/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coda/common/rng.hpp"

namespace coda::agent {

bool PlannerParams::finite() const {
  return std::all_of(theta.begin(), theta.end(), [](double v) { return std::isfinite(v); });
}

PlannerParams base_params(double strength) {
  PlannerParams p;
  p.version = "base";
  for (int slot = 0; slot < kFeatureDim / kBlockDim; ++slot) {
    const int b = slot * kBlockDim;
    for (int g = 0; g < 4; ++g) {
      p.theta[b + kTargetOffset + g * kTargetGroupDim + 0] = strength;
      p.theta[b + kTargetOffset + g * kTargetGroupDim + 1] = strength;
    }
    p.theta[b + kPayloadOffset + 0] = strength;
    p.theta[b + type_feature(ActionKind::kType, kCueCount - 1, 2)] = 2.0;
    p.theta[b + kDragDestOffset + 1] = strength;
  }
  return p;
}

int TokenDistribution::index_of(const std::string& token) const {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const std::string& key = c.position == Position::kType     ? std::string(to_string(c.type))
                             : c.position == Position::kTarget ? c.target
                                                               : c.value;
    if (key == token) return static_cast<int>(i);
  }
  return -1;
}

PlanDistribution::PlanDistribution(const PlannerParams& params, const DecisionContext& context, double temperature)
    : params_(&params), context_(&context), temperature_(temperature) {
  if (params.theta.size() != static_cast<std::size_t>(kFeatureDim)) {
    throw Error("invalid_params", "planner weights have wrong dimension");
  }
  if (!(temperature > 0.0)) throw Error("invalid_argument", "temperature must be positive");
}

TokenDistribution PlanDistribution::softmax(std::vector<Candidate> candidates) const {
  if (candidates.empty()) throw DegenerateObservation("no legal token at this decision position");
  TokenDistribution d;
  d.candidates = std::move(candidates);
  d.features.reserve(d.candidates.size());
  std::vector<double> logits;
  logits.reserve(d.candidates.size());
  for (const auto& c : d.candidates) {
    d.features.push_back(context_->features(c));
    double z = 0.0;
    for (const auto& [i, v] : d.features.back()) z += params_->theta[i] * v;
    logits.push_back(z / temperature_);
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& l : logits) {
    l = std::exp(l - mx);
    sum += l;
  }
  // Floored so log-probabilities and ratios stay finite for extreme weights.
  for (double& l : logits) l = std::max(l / sum, std::numeric_limits<double>::min());
  d.probs = std::move(logits);
  return d;
}

TokenDistribution PlanDistribution::types() const {
  std::vector<Candidate> cs;
  for (ActionKind k : context_->legal_types()) cs.push_back({Position::kType, k, {}, {}});
  return softmax(std::move(cs));
}

TokenDistribution PlanDistribution::targets(ActionKind type) const {
  std::vector<Candidate> cs;
  for (auto& id : context_->legal_targets(type)) cs.push_back({Position::kTarget, type, id, {}});
  return softmax(std::move(cs));
}

TokenDistribution PlanDistribution::arguments(ActionKind type, const std::string& target) const {
  std::vector<Candidate> cs;
  for (auto& v : context_->legal_arguments(type, target)) cs.push_back({Position::kArgument, type, target, v});
  return softmax(std::move(cs));
}

TokenDistribution PlanDistribution::token_distribution(const Plan& plan, int t, std::string& chosen) const {
  if (t == 0) {
    chosen = to_string(plan.type);
    return types();
  }
  const bool has_target = plan.type != ActionKind::kHotkey && plan.type != ActionKind::kFinish;
  if (t == 1 && has_target) {
    chosen = plan.target;
    return targets(plan.type);
  }
  chosen = plan.argument;
  return arguments(plan.type, has_target ? plan.target : std::string(kNoTarget));
}

std::vector<double> PlanDistribution::token_probabilities(const Plan& plan) const {
  std::vector<double> out;
  const int n = plan.token_count();
  for (int t = 0; t < n; ++t) {
    std::string chosen;
    const auto d = token_distribution(plan, t, chosen);
    const int i = d.index_of(chosen);
    out.push_back(i < 0 ? 0.0 : d.probs[i]);
  }
  return out;
}

double PlanDistribution::log_prob(const Plan& plan) const {
  double lp = 0.0;
  for (double p : token_probabilities(plan)) lp += std::log(p);
  return lp;
}

std::vector<double> PlanDistribution::token_grad(const Plan& plan, int t) const {
  std::string chosen;
  const auto d = token_distribution(plan, t, chosen);
  const int c = d.index_of(chosen);
  if (c < 0) throw Error("invalid_token", "token " + chosen + " is not legal here");
  std::vector<double> g(kFeatureDim, 0.0);
  for (const auto& [i, v] : d.features[c]) g[i] += v / temperature_;
  for (std::size_t k = 0; k < d.candidates.size(); ++k) {
    for (const auto& [i, v] : d.features[k]) g[i] -= d.probs[k] * v / temperature_;
  }
  return g;
}

std::vector<double> PlanDistribution::grad_log_prob(const Plan& plan) const {
  std::vector<double> g(kFeatureDim, 0.0);
  for (int t = 0; t < plan.token_count(); ++t) {
    const auto gt = token_grad(plan, t);
    for (int i = 0; i < kFeatureDim; ++i) g[i] += gt[i];
  }
  return g;
}

std::vector<std::pair<Plan, double>> PlanDistribution::enumerate() const {
  std::vector<std::pair<Plan, double>> out;
  const auto ty = types();
  for (std::size_t a = 0; a < ty.candidates.size(); ++a) {
    const ActionKind k = ty.candidates[a].type;
    const double pa = ty.probs[a];
    if (k == ActionKind::kFinish) {
      out.push_back({Plan{k, kNoTarget, "", ""}, pa});
    } else if (k == ActionKind::kHotkey) {
      const auto ar = arguments(k, kNoTarget);
      for (std::size_t c = 0; c < ar.candidates.size(); ++c) {
        out.push_back({Plan{k, kNoTarget, ar.candidates[c].value, ""}, pa * ar.probs[c]});
      }
    } else {
      const auto tg = targets(k);
      for (std::size_t b = 0; b < tg.candidates.size(); ++b) {
        const double pb = pa * tg.probs[b];
        const std::string& target = tg.candidates[b].target;
        if (k == ActionKind::kClick || k == ActionKind::kDoubleClick) {
          out.push_back({Plan{k, target, "", ""}, pb});
          continue;
        }
        const auto ar = arguments(k, target);
        for (std::size_t c = 0; c < ar.candidates.size(); ++c) {
          out.push_back({Plan{k, target, ar.candidates[c].value, ""}, pb * ar.probs[c]});
        }
      }
    }
  }
  return out;
}

namespace {

std::size_t draw(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left u above the final partial sum; take the last token with
  // nonzero mass.
  std::size_t i = probs.size() - 1;
  while (i > 0 && probs[i] == 0.0) --i;
  return i;
}

SampledPlan sample_with(const PlanDistribution& dist, Rng& rng) {
  SampledPlan s;
  const auto ty = dist.types();
  const std::size_t a = draw(ty.probs, rng);
  s.plan.type = ty.candidates[a].type;
  s.log_prob = std::log(ty.probs[a]);
  const ActionKind k = s.plan.type;
  if (k == ActionKind::kFinish) return s;
  if (k != ActionKind::kHotkey) {
    const auto tg = dist.targets(k);
    const std::size_t b = draw(tg.probs, rng);
    s.plan.target = tg.candidates[b].target;
    s.log_prob += std::log(tg.probs[b]);
    if (k == ActionKind::kClick || k == ActionKind::kDoubleClick) return s;
  }
  const auto ar = dist.arguments(k, s.plan.target);
  const std::size_t c = draw(ar.probs, rng);
  s.plan.argument = ar.candidates[c].value;
  s.log_prob += std::log(ar.probs[c]);
  return s;
}

}  // namespace

SampledPlan sample_plan(const PlanDistribution& dist, std::uint64_t seed) {
  Rng rng(seed);
  return sample_with(dist, rng);
}

std::vector<SampledPlan> sample_group(const PlannerParams& params, const DecisionContext& context, int group_size,
                                      std::uint64_t seed, double temperature) {
  if (group_size < 2) throw Error("invalid_argument", "group size must be at least 2");
  const PlanDistribution dist(params, context, temperature);
  Rng rng(seed);
  std::vector<SampledPlan> out;
  out.reserve(group_size);
  for (int i = 0; i < group_size; ++i) out.push_back(sample_with(dist, rng));
  return out;
}

std::vector<double> features(const env::Task& task, const History& history, const env::Observation& previous,
                             const env::Observation& current, int software_slot, const Candidate& candidate) {
  return DecisionContext(task, history, previous, current, software_slot).dense_features(candidate);
}

std::vector<double> grad_logprob(const PlannerParams& params, const DecisionContext& context, const Plan& plan,
                                 double temperature) {
  return PlanDistribution(params, context, temperature).grad_log_prob(plan);
}

}  // namespace coda::agent
