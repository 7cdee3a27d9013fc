#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coda/agent/features.hpp"
#include "coda/common/error.hpp"

namespace coda::agent {

// Planner weights theta, one per feature dimension.
struct PlannerParams {
  std::vector<double> theta = std::vector<double>(kFeatureDim, 0.0);
  std::string version = "init";

  bool finite() const;
  friend bool operator==(const PlannerParams&, const PlannerParams&) = default;
};

// Untrained planner every stage starts from: a weak preference for widgets
// and payloads the instruction mentions, and no preference over action
// types. Stands in for the grounding a pretrained base model brings.
PlannerParams base_params(double strength = 0.6);

class DegenerateObservation : public Error {
 public:
  explicit DegenerateObservation(const std::string& m) : Error("degenerate_observation", m) {}
};

// Softmax over the legal tokens of one decision position.
struct TokenDistribution {
  std::vector<Candidate> candidates;
  std::vector<SparseVector> features;
  std::vector<double> probs;

  int index_of(const std::string& token) const;  // matches type name, target, or value
};

// Autoregressive plan distribution: type, then target given type, then
// argument given both.
class PlanDistribution {
 public:
  PlanDistribution(const PlannerParams& params, const DecisionContext& context, double temperature = 1.0);

  const DecisionContext& context() const { return *context_; }

  TokenDistribution types() const;
  TokenDistribution targets(ActionKind type) const;
  TokenDistribution arguments(ActionKind type, const std::string& target) const;

  // Conditional probability of each decision token of `plan`, in order.
  std::vector<double> token_probabilities(const Plan& plan) const;
  double log_prob(const Plan& plan) const;

  // d/dtheta log of the t-th token's conditional probability.
  std::vector<double> token_grad(const Plan& plan, int t) const;
  // d/dtheta log pi(plan) = sum over tokens of token_grad.
  std::vector<double> grad_log_prob(const Plan& plan) const;

  // Every legal plan with its probability (small at desk scale).
  std::vector<std::pair<Plan, double>> enumerate() const;

 private:
  TokenDistribution softmax(std::vector<Candidate> candidates) const;
  TokenDistribution token_distribution(const Plan& plan, int t, std::string& chosen) const;

  const PlannerParams* params_;
  const DecisionContext* context_;
  double temperature_;
};

struct SampledPlan {
  Plan plan;
  double log_prob = 0.0;
};

// G i.i.d. plans; deterministic in seed. Throws for G < 2.
std::vector<SampledPlan> sample_group(const PlannerParams& params, const DecisionContext& context, int group_size,
                                      std::uint64_t seed, double temperature = 1.0);

SampledPlan sample_plan(const PlanDistribution& dist, std::uint64_t seed);

// Dense feature vector of a candidate token, dimension kFeatureDim.
std::vector<double> features(const env::Task& task, const History& history, const env::Observation& previous,
                             const env::Observation& current, int software_slot, const Candidate& candidate);

std::vector<double> grad_logprob(const PlannerParams& params, const DecisionContext& context, const Plan& plan,
                                 double temperature = 1.0);

}  // namespace coda::agent
