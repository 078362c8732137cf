#include "vidmod/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace vidmod {

using nlohmann::json;

std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double epsilon) {
    if (rewards.size() < 2) {
        throw std::invalid_argument("group_advantages needs >= 2 rewards");
    }
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= static_cast<double>(rewards.size());  // population variance
    double denom = std::sqrt(var) + epsilon;
    std::vector<double> adv(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        adv[i] = var == 0.0 ? 0.0 : (rewards[i] - mean) / denom;
    }
    return adv;
}

ToyPolicy::ToyPolicy(double learning_rate, double temperature)
    : lr_(learning_rate), temperature_(temperature) {
    if (temperature_ <= 0) throw std::invalid_argument("temperature must be > 0");
}

std::vector<double>& ToyPolicy::logits(const std::string& sample_id, int k) {
    auto& v = logits_[sample_id];
    if (v.empty()) v.assign(static_cast<std::size_t>(k), 0.0);
    if (static_cast<int>(v.size()) != k) {
        throw std::invalid_argument("candidate count changed for " + sample_id);
    }
    return v;
}

std::vector<double> ToyPolicy::probs(const std::string& sample_id, int k) const {
    std::vector<double> l(static_cast<std::size_t>(k), 0.0);
    if (auto it = logits_.find(sample_id); it != logits_.end()) l = it->second;
    double mx = *std::max_element(l.begin(), l.end());
    double sum = 0.0;
    for (double& x : l) {
        x = std::exp((x - mx) / temperature_);
        sum += x;
    }
    for (double& x : l) x /= sum;
    return l;
}

int ToyPolicy::sample_action(const std::string& sample_id, int k,
                             std::mt19937_64& rng) const {
    auto p = probs(sample_id, k);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(rng), acc = 0.0;
    for (int i = 0; i < k; ++i) {
        acc += p[static_cast<std::size_t>(i)];
        if (r < acc) return i;
    }
    return k - 1;
}

void ToyPolicy::rl_step(const RolloutGroup& group, int k, double sample_weight) {
    if (group.advantages.size() != group.rollouts.size()) {
        throw std::invalid_argument("rl_step: advantages not computed");
    }
    if (sample_weight == 0.0 || group.rollouts.empty()) return;
    auto& l = logits(group.sample_id, k);
    std::map<int, std::pair<double, int>> per_action;  // action -> (sum, count)
    for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
        auto& [sum, count] = per_action[group.rollouts[i].action];
        sum += group.advantages[i];
        ++count;
    }
    for (const auto& [action, agg] : per_action) {
        double mean_adv = agg.first / agg.second;
        l[static_cast<std::size_t>(action)] += lr_ * sample_weight * mean_adv;
    }
}

void ToyPolicy::sft_step(const std::string& sample_id, int k, int gt_action) {
    if (gt_action < 0 || gt_action >= k) {
        throw std::out_of_range("sft_step: gt_action out of range");
    }
    auto p = probs(sample_id, k);
    auto& l = logits(sample_id, k);
    for (int i = 0; i < k; ++i) {
        double grad = (i == gt_action ? 1.0 : 0.0) - p[static_cast<std::size_t>(i)];
        l[static_cast<std::size_t>(i)] += lr_ * grad;
    }
}

std::string ToyPolicy::to_json() const {
    std::map<std::string, std::vector<double>> sorted(logits_.begin(),
                                                      logits_.end());
    json j = {{"learning_rate", lr_},
              {"temperature", temperature_},
              {"logits", sorted}};
    return j.dump(2);
}

ToyPolicy ToyPolicy::from_json(const std::string& text) {
    json j = json::parse(text);
    ToyPolicy p(j.at("learning_rate").get<double>(),
                j.at("temperature").get<double>());
    for (const auto& [id, l] : j.at("logits").items()) {
        p.logits_[id] = l.get<std::vector<double>>();
    }
    return p;
}

void ToyPolicy::randomize(const std::vector<SyntheticSample>& corpus, int k,
                          std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    for (const auto& s : corpus) {
        auto& l = logits(s.id, k);
        for (double& x : l) x = g(rng);
    }
}

ScoredSample score_candidates(const SyntheticSample& s, bool against_noisy,
                              const RewardParams& params,
                              const EmbeddingProvider& provider) {
    ScoredSample out{s, {}};
    const GroundTruth& gt = against_noisy ? s.noisy : s.truth;
    out.candidate_breakdowns.reserve(s.candidates.size());
    for (const auto& raw : s.candidates) {
        out.candidate_breakdowns.push_back(
            compute_breakdown(raw, gt, params, provider));
    }
    return out;
}

std::vector<ScoredSample> score_corpus(const std::vector<SyntheticSample>& corpus,
                                       bool against_noisy,
                                       const RewardParams& params,
                                       const EmbeddingProvider& provider) {
    std::vector<ScoredSample> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus) {
        out.push_back(score_candidates(s, against_noisy, params, provider));
    }
    return out;
}

RolloutGroup rollout_group(const ToyPolicy& policy, const ScoredSample& s,
                           const WeightVector& weights, int group_size,
                           std::mt19937_64& rng, double advantage_epsilon) {
    int k = static_cast<int>(s.sample.candidates.size());
    if (k == 0) throw std::invalid_argument("sample has no candidates");
    if (group_size < 2) throw std::invalid_argument("group size must be >= 2");

    RolloutGroup group;
    group.sample_id = s.sample.id;
    std::vector<double> rewards;
    for (int g = 0; g < group_size; ++g) {
        int action = policy.sample_action(s.sample.id, k, rng);
        Rollout r;
        r.sample_id = s.sample.id;
        r.action = action;
        r.raw = s.sample.candidates[static_cast<std::size_t>(action)];
        r.breakdown = s.candidate_breakdowns[static_cast<std::size_t>(action)];
        r.reward = aggregate(r.breakdown, weights);
        rewards.push_back(r.reward);
        group.rollouts.push_back(std::move(r));
    }
    group.advantages = group_advantages(rewards, advantage_epsilon);
    return group;
}

EvalPoint evaluate_policy(const ToyPolicy& policy,
                          const std::vector<ScoredSample>& samples,
                          const WeightVector& w, int step) {
    EvalPoint pt;
    pt.step = step;
    for (const auto& s : samples) {
        int k = static_cast<int>(s.sample.candidates.size());
        auto p = policy.probs(s.sample.id, k);
        double exp_reward = 0.0, exp_ground = 0.0;
        for (int i = 0; i < k; ++i) {
            exp_reward += p[static_cast<std::size_t>(i)] *
                          aggregate(s.candidate_breakdowns[static_cast<std::size_t>(i)], w);
            exp_ground += p[static_cast<std::size_t>(i)] *
                          s.candidate_breakdowns[static_cast<std::size_t>(i)].ground;
        }
        pt.mean_expected_reward += exp_reward;
        pt.mean_ground_component += exp_ground;
    }
    pt.mean_expected_reward /= static_cast<double>(samples.size());
    pt.mean_ground_component /= static_cast<double>(samples.size());
    return pt;
}

double mean_max_reward(const std::vector<ScoredSample>& samples,
                       const WeightVector& w) {
    double total = 0.0;
    for (const auto& s : samples) {
        double best = 0.0;
        for (const auto& b : s.candidate_breakdowns) {
            best = std::max(best, aggregate(b, w));
        }
        total += best;
    }
    return total / static_cast<double>(samples.size());
}

PassiveRunResult run_passive(ToyPolicy& policy,
                             const std::vector<ScoredSample>& samples,
                             const PhaseSchedule& schedule,
                             const GrpoConfig& cfg) {
    if (samples.empty()) throw std::invalid_argument("empty training set");
    policy.set_learning_rate(cfg.learning_rate);
    std::mt19937_64 rng(cfg.seed);
    PassiveRunResult result;
    // Baseline point so the learning curve starts at the untrained policy.
    result.evals.push_back(evaluate_policy(policy, samples, kPhase3Weights, 0));
    std::vector<RewardBreakdown> history;
    int prev_phase = 1;
    for (int step = 0; step < cfg.steps; ++step) {
        int phase = phase_of(schedule, step, cfg.steps, history);
        if (phase != prev_phase) {
            result.phase_transitions.emplace_back(step, phase);
            prev_phase = phase;
        }
        const WeightVector& w = schedule.weights_for_phase(phase);

        const ScoredSample& s =
            samples[static_cast<std::size_t>(step) % samples.size()];
        int k = static_cast<int>(s.sample.candidates.size());
        RolloutGroup group = rollout_group(policy, s, w, cfg.group_size, rng,
                                           cfg.advantage_epsilon);
        policy.rl_step(group, k, 1.0);

        StepMetrics m;
        m.step = step;
        m.phase = phase;
        RewardBreakdown& cm = m.component_means;
        for (const auto& r : group.rollouts) {
            m.mean_reward += r.reward;
            cm.format += r.breakdown.format;
            cm.violation += r.breakdown.violation;
            cm.major += r.breakdown.major;
            cm.sub += r.breakdown.sub;
            cm.ground += r.breakdown.ground;
            cm.reason += r.breakdown.reason;
        }
        double g = static_cast<double>(group.rollouts.size());
        m.mean_reward /= g;
        cm.format /= g;
        cm.violation /= g;
        cm.major /= g;
        cm.sub /= g;
        cm.ground /= g;
        cm.reason /= g;
        history.push_back(cm);
        result.metrics.push_back(m);

        if (cfg.eval_every > 0 &&
            ((step + 1) % cfg.eval_every == 0 || step + 1 == cfg.steps)) {
            result.evals.push_back(
                evaluate_policy(policy, samples, kPhase3Weights, step + 1));
        }
    }
    return result;
}

}  // namespace vidmod
