#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "vidmod/grpo.hpp"
#include "vidmod/reward.hpp"

namespace vidmod {

// Stage-3 active RL: each rollout is routed by its failure mode. Fundamental
// gaps (violation or major-category misses) go to the SFT buffer; refinement
// cases (sub miss, low IoU, reasoning drift) go to the weighted-RL buffer;
// everything else runs as standard RL with a small weight. Buffers drain as
// FIFO batches once they hold a full batch.

enum class Destination { SFT, RL_HARD, STANDARD };
enum class RouteTrigger {
    ViolationMiss,
    MajorMiss,
    SubMiss,
    LowIoU,
    ReasonDrift,
    None,
};

std::string_view to_string(Destination d);
std::string_view to_string(RouteTrigger t);

struct RoutingThresholds {
    double iou_low = 0.5;
    double reason_low = 0.7;
    double hard_weight = 1.0;
    double standard_weight = 0.1;
    int batch_size = 16;

    void validate() const;  // 0 <= standard_weight < hard_weight, batch >= 1
};

struct RoutedSample {
    std::string sample_id;
    Destination destination = Destination::STANDARD;
    double weight = 0.0;
    RouteTrigger trigger = RouteTrigger::None;
};

// Precedence: SFT triggers first (parse failure counts as a violation miss),
// then RL_HARD triggers, else STANDARD.
RoutedSample route(const ParseResult& pred, const GroundTruth& gt,
                   const RewardBreakdown& breakdown,
                   const RoutingThresholds& th);

class TrainingBuffer {
  public:
    enum class Kind { SFT, RL };

    explicit TrainingBuffer(Kind kind, int batch_size);

    Kind kind() const { return kind_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t total_pushed() const { return pushed_; }
    std::size_t total_drained() const { return drained_; }

    // Appends; returns the whole FIFO batch when it reaches batch_size.
    // Throws on destination/kind mismatch (STANDARD never enters a buffer).
    std::optional<std::vector<RoutedSample>> push_and_maybe_drain(
        const RoutedSample& s);

  private:
    Kind kind_;
    int batch_size_;
    std::deque<RoutedSample> entries_;
    std::size_t pushed_ = 0;
    std::size_t drained_ = 0;
};

struct RoutingRecord {
    int step = 0;
    RoutedSample routed;
};

struct Stage3Config {
    RoutingThresholds thresholds;
    int steps = 2000;
    int group_size = 8;
    double learning_rate = 0.1;      // RL rate: stage-2 lr scaled down by 10x
    double sft_learning_rate = 1.0;  // supervised steps keep the stage-2 rate
    double advantage_epsilon = 1e-6;
    std::uint64_t seed = 0;
    int eval_every = 25;
    WeightVector weights = kPhase3Weights;
    bool enable_routing = true;  // false: uniform weight 1.0, no SFT (baseline)
};

struct Stage3Result {
    std::vector<RoutingRecord> log;
    std::vector<EvalPoint> evals;
    int sft_batches = 0;
    int rl_batches = 0;
};

// Iterates the precise samples cyclically: rollout a group, route by a
// sampled decode's failure mode, push to the matching buffer or run a
// standard-weight RL step immediately. Drained SFT batches apply one
// sft_step toward the correct candidate per entry; drained RL batches apply
// the stored groups with hard_weight.
Stage3Result stage3_loop(ToyPolicy& policy,
                         const std::vector<ScoredSample>& dataset,
                         const Stage3Config& cfg);

struct FeedbackOutcome {
    int added = 0;
    int replaced = 0;
    std::vector<std::string> rejected;  // "id: reason" per bad record
};

// Reviewer feedback: JSONL records {"id", "duration", "violation",
// "results", "reasoning", "candidates"?, "source":"reviewer"}. Valid records
// are appended (or replace an existing id) and flagged high-priority by
// moving to the front of the dataset; invalid records are rejected with a
// reason and the remainder accepted.
FeedbackOutcome ingest_reviewer_feedback(std::vector<SyntheticSample>& dataset,
                                         const std::vector<std::string>& feedback_lines);

}  // namespace vidmod
