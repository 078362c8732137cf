#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "vidmod/curriculum.hpp"
#include "vidmod/datagen.hpp"
#include "vidmod/reward.hpp"

namespace vidmod {

// Group-relative advantages plus a toy per-sample categorical policy over
// each sample's K candidate outputs. Keeps the training loops runnable
// without any neural network: the policy just learns which candidate index
// to emit for each prompt.

struct Rollout {
    std::string sample_id;
    int action = 0;  // candidate index
    std::string raw;
    RewardBreakdown breakdown;
    double reward = 0.0;  // aggregate under the weights active at scoring time
};

struct RolloutGroup {
    std::string sample_id;
    std::vector<Rollout> rollouts;
    std::vector<double> advantages;  // same length, mean 0
};

// a_i = (r_i - mean) / (std_pop + epsilon); all-equal rewards give all zeros.
std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double epsilon = 1e-6);

class ToyPolicy {
  public:
    explicit ToyPolicy(double learning_rate = 1.0, double temperature = 1.0);

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

    // Logits for a sample, zero-initialized (uniform) on first touch.
    std::vector<double>& logits(const std::string& sample_id, int k);
    std::vector<double> probs(const std::string& sample_id, int k) const;

    int sample_action(const std::string& sample_id, int k,
                      std::mt19937_64& rng) const;

    // Advantage-weighted logit update; positive advantage raises the
    // action's probability. Per-action advantages are averaged over the
    // rollouts that took the action.
    void rl_step(const RolloutGroup& group, int k, double sample_weight);

    // Cross-entropy step toward gt_action.
    void sft_step(const std::string& sample_id, int k, int gt_action);

    std::string to_json() const;  // keys sorted, reproducible
    static ToyPolicy from_json(const std::string& text);

    // Seeded standard-normal logits for every sample, for runs that must
    // start away from the uniform (and its index-0 argmax tie).
    void randomize(const std::vector<SyntheticSample>& corpus, int k,
                   std::uint64_t seed, double scale = 1.0);

  private:
    std::unordered_map<std::string, std::vector<double>> logits_;
    double lr_;
    double temperature_;
};

// Candidate breakdowns are weight-independent, so they are scored once per
// sample and groups only re-aggregate under the active weights.
struct ScoredSample {
    SyntheticSample sample;
    std::vector<RewardBreakdown> candidate_breakdowns;  // vs the scoring GT
};

// `against_noisy` picks Y (passive stage) or Z (active stage) as the GT.
ScoredSample score_candidates(const SyntheticSample& s, bool against_noisy,
                              const RewardParams& params,
                              const EmbeddingProvider& provider);

std::vector<ScoredSample> score_corpus(const std::vector<SyntheticSample>& corpus,
                                       bool against_noisy,
                                       const RewardParams& params,
                                       const EmbeddingProvider& provider);

RolloutGroup rollout_group(const ToyPolicy& policy, const ScoredSample& s,
                           const WeightVector& weights, int group_size,
                           std::mt19937_64& rng, double advantage_epsilon = 1e-6);

struct StepMetrics {
    int step = 0;
    int phase = 1;
    double mean_reward = 0.0;  // over the step's rollout group
    RewardBreakdown component_means;
};

struct GrpoConfig {
    int group_size = 8;
    double learning_rate = 1.0;
    double temperature = 1.0;
    double advantage_epsilon = 1e-6;
    std::uint64_t seed = 0;
    int steps = 2000;
    int eval_every = 50;
};

struct EvalPoint {
    int step = 0;
    double mean_expected_reward = 0.0;  // sum_k p_k * r_k, averaged over samples
    double mean_ground_component = 0.0; // expected grounding component
};

// Expected aggregate reward of the current policy over `samples` under `w`.
EvalPoint evaluate_policy(const ToyPolicy& policy,
                          const std::vector<ScoredSample>& samples,
                          const WeightVector& w, int step);

// Per-sample maximum achievable aggregate under `w`, averaged over samples.
double mean_max_reward(const std::vector<ScoredSample>& samples,
                       const WeightVector& w);

struct PassiveRunResult {
    std::vector<StepMetrics> metrics;   // one per step
    std::vector<EvalPoint> evals;       // every eval_every steps (phase-3 weights)
    std::vector<std::pair<int, int>> phase_transitions;  // (step, new phase)
};

// Stage-2 loop: curriculum-weighted GRPO over the noisy annotations.
PassiveRunResult run_passive(ToyPolicy& policy,
                             const std::vector<ScoredSample>& samples,
                             const PhaseSchedule& schedule,
                             const GrpoConfig& cfg);

}  // namespace vidmod
