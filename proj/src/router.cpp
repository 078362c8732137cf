#include "vidmod/router.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "json_io.hpp"

namespace vidmod {

using nlohmann::json;

std::string_view to_string(Destination d) {
    switch (d) {
        case Destination::SFT: return "sft";
        case Destination::RL_HARD: return "rl_hard";
        case Destination::STANDARD: return "standard";
    }
    return "unknown";
}

std::string_view to_string(RouteTrigger t) {
    switch (t) {
        case RouteTrigger::ViolationMiss: return "violation-miss";
        case RouteTrigger::MajorMiss: return "major-miss";
        case RouteTrigger::SubMiss: return "sub-miss";
        case RouteTrigger::LowIoU: return "low-iou";
        case RouteTrigger::ReasonDrift: return "reason-drift";
        case RouteTrigger::None: return "none";
    }
    return "unknown";
}

void RoutingThresholds::validate() const {
    if (iou_low < 0 || iou_low > 1 || reason_low < 0 || reason_low > 1) {
        throw std::invalid_argument("routing thresholds must be in [0,1]");
    }
    if (!(standard_weight >= 0 && standard_weight < hard_weight)) {
        throw std::invalid_argument(
            "routing requires 0 <= standard_weight < hard_weight");
    }
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
}

RoutedSample route(const ParseResult& pred, const GroundTruth& gt,
                   const RewardBreakdown& breakdown,
                   const RoutingThresholds& th) {
    th.validate();
    RoutedSample out;

    // Fundamental knowledge gaps: SFT.
    if (!parse_ok(pred)) {
        out.destination = Destination::SFT;
        out.trigger = RouteTrigger::ViolationMiss;
        out.weight = 1.0;
        return out;
    }
    const auto& p = std::get<ModerationOutput>(pred);
    if (p.violation != gt.violation) {
        out.destination = Destination::SFT;
        out.trigger = RouteTrigger::ViolationMiss;
        out.weight = 1.0;
        return out;
    }
    if (major_set(p.results) != major_set(gt.results)) {
        out.destination = Destination::SFT;
        out.trigger = RouteTrigger::MajorMiss;
        out.weight = 1.0;
        return out;
    }

    // Refinement of existing capabilities: weighted RL.
    auto hard = [&](RouteTrigger t) {
        out.destination = Destination::RL_HARD;
        out.trigger = t;
        out.weight = th.hard_weight;
        return out;
    };
    if (sub_set(p.results) != sub_set(gt.results)) {
        return hard(RouteTrigger::SubMiss);
    }
    if (!gt.results.empty()) {
        auto iou = mean_matched_iou(p.results, gt.results);
        if (!iou || *iou < th.iou_low) return hard(RouteTrigger::LowIoU);
    }
    if (breakdown.reason < th.reason_low) {
        return hard(RouteTrigger::ReasonDrift);
    }

    out.destination = Destination::STANDARD;
    out.trigger = RouteTrigger::None;
    out.weight = th.standard_weight;
    return out;
}

TrainingBuffer::TrainingBuffer(Kind kind, int batch_size)
    : kind_(kind), batch_size_(batch_size) {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
}

std::optional<std::vector<RoutedSample>> TrainingBuffer::push_and_maybe_drain(
    const RoutedSample& s) {
    bool matches = (kind_ == Kind::SFT && s.destination == Destination::SFT) ||
                   (kind_ == Kind::RL && s.destination == Destination::RL_HARD);
    if (!matches) {
        throw std::invalid_argument("routed destination does not match buffer kind");
    }
    entries_.push_back(s);
    ++pushed_;
    if (static_cast<int>(entries_.size()) < batch_size_) return std::nullopt;
    std::vector<RoutedSample> batch(entries_.begin(), entries_.end());
    entries_.clear();
    drained_ += batch.size();
    return batch;
}

Stage3Result stage3_loop(ToyPolicy& policy,
                         const std::vector<ScoredSample>& dataset,
                         const Stage3Config& cfg) {
    if (dataset.empty()) throw std::invalid_argument("empty stage-3 dataset");
    cfg.thresholds.validate();
    policy.set_learning_rate(cfg.learning_rate);
    std::mt19937_64 rng(cfg.seed);

    Stage3Result result;
    result.evals.push_back(evaluate_policy(policy, dataset, cfg.weights, 0));
    TrainingBuffer sft_buffer(TrainingBuffer::Kind::SFT, cfg.thresholds.batch_size);
    TrainingBuffer rl_buffer(TrainingBuffer::Kind::RL, cfg.thresholds.batch_size);
    // Latest rollout group per sample, replayed when an RL batch drains.
    std::unordered_map<std::string, RolloutGroup> pending_groups;
    std::unordered_map<std::string, const ScoredSample*> by_id;
    for (const auto& s : dataset) by_id[s.sample.id] = &s;

    for (int step = 0; step < cfg.steps; ++step) {
        const ScoredSample& s =
            dataset[static_cast<std::size_t>(step) % dataset.size()];
        int k = static_cast<int>(s.sample.candidates.size());
        RolloutGroup group = rollout_group(policy, s, cfg.weights, cfg.group_size,
                                           rng, cfg.advantage_epsilon);

        if (!cfg.enable_routing) {
            // Baseline: uniform weight, no SFT, no buffers.
            policy.rl_step(group, k, 1.0);
        } else {
            // Route by the failure mode of a sampled decode: the sample keeps
            // receiving corrective updates until failures actually stop.
            int decode = group.rollouts.front().action;
            const std::string& raw =
                s.sample.candidates[static_cast<std::size_t>(decode)];
            RoutedSample routed =
                route(parse_output(raw), s.sample.truth,
                      s.candidate_breakdowns[static_cast<std::size_t>(decode)],
                      cfg.thresholds);
            routed.sample_id = s.sample.id;
            result.log.push_back({step, routed});

            switch (routed.destination) {
                case Destination::STANDARD:
                    policy.rl_step(group, k, cfg.thresholds.standard_weight);
                    break;
                case Destination::SFT:
                    if (auto batch = sft_buffer.push_and_maybe_drain(routed)) {
                        ++result.sft_batches;
                        // Supervised steps are not scaled down with the RL rate.
                        policy.set_learning_rate(cfg.sft_learning_rate);
                        for (const auto& entry : *batch) {
                            const ScoredSample* es = by_id.at(entry.sample_id);
                            policy.sft_step(
                                entry.sample_id,
                                static_cast<int>(es->sample.candidates.size()),
                                0);  // candidate 0 is the correct output
                        }
                        policy.set_learning_rate(cfg.learning_rate);
                    }
                    break;
                case Destination::RL_HARD:
                    pending_groups[s.sample.id] = group;
                    if (auto batch = rl_buffer.push_and_maybe_drain(routed)) {
                        ++result.rl_batches;
                        for (const auto& entry : *batch) {
                            auto it = pending_groups.find(entry.sample_id);
                            if (it == pending_groups.end()) continue;
                            const ScoredSample* es = by_id.at(entry.sample_id);
                            policy.rl_step(
                                it->second,
                                static_cast<int>(es->sample.candidates.size()),
                                cfg.thresholds.hard_weight);
                        }
                    }
                    break;
            }
        }

        if (cfg.eval_every > 0 &&
            ((step + 1) % cfg.eval_every == 0 || step + 1 == cfg.steps)) {
            result.evals.push_back(
                evaluate_policy(policy, dataset, cfg.weights, step + 1));
        }
    }
    return result;
}

FeedbackOutcome ingest_reviewer_feedback(
    std::vector<SyntheticSample>& dataset,
    const std::vector<std::string>& feedback_lines) {
    FeedbackOutcome outcome;
    std::vector<SyntheticSample> fresh;
    for (const auto& line : feedback_lines) {
        std::string id = "?";
        try {
            json j = json::parse(line);
            id = j.at("id").get<std::string>();
            SyntheticSample s;
            s.id = id;
            s.duration = j.at("duration").get<double>();
            s.prompt = j.value("prompt", "Review advertisement video " + id + ".");
            s.truth = detail::gt_from_jobj(j, s.duration);
            s.noisy = s.truth;  // reviewer labels are precise
            if (j.contains("candidates")) {
                s.candidates = j["candidates"].get<std::vector<std::string>>();
            }
            if (s.candidates.empty()) {
                ModerationOutput correct;
                correct.reason = s.truth.reference_chain;
                correct.violation = s.truth.violation;
                correct.results = s.truth.results;
                std::string raw = serialize_output(correct);
                s.candidates = {raw, raw.substr(std::string("<think>").size())};
            }
            fresh.push_back(std::move(s));
        } catch (const std::exception& e) {
            outcome.rejected.push_back(id + ": " + e.what());
        }
    }

    for (auto& s : fresh) {
        auto existing = std::find_if(
            dataset.begin(), dataset.end(),
            [&](const SyntheticSample& d) { return d.id == s.id; });
        if (existing != dataset.end()) {
            *existing = s;
            ++outcome.replaced;
            std::rotate(dataset.begin(), existing, existing + 1);
        } else {
            dataset.insert(dataset.begin(), s);
            ++outcome.added;
        }
    }
    return outcome;
}

}  // namespace vidmod
