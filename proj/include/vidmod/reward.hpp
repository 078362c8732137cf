#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vidmod/output_format.hpp"
#include "vidmod/similarity.hpp"

namespace vidmod {

// Six-component reward over a parsed moderation output against a ground
// truth record: format, violation flag, major/sub label sets (Tversky),
// temporal grounding (IoU + boundary alignment), reasoning similarity.

struct GroundTruth {
    bool violation = false;
    std::vector<ResultEntry> results;
    ReasoningChain reference_chain;
    double duration = 0.0;  // seconds, > 0; every result interval within it
};

struct TverskyParams {
    double alpha = 0.5;
    double beta = 0.5;  // alpha = beta = 0.5 is the Dice coefficient

    TverskyParams() = default;
    TverskyParams(double a, double b);
};

struct RewardBreakdown {
    double format = 0.0;     // {0,1}
    double violation = 0.0;  // {0,1}
    double reason = 0.0;     // [0,1]
    double major = 0.0;      // [0,1]
    double sub = 0.0;        // [0,1]
    double ground = 0.0;     // [0,2]
};

// Component order follows the lambda indices: format, violation, major, sub,
// ground, reason.
struct WeightVector {
    double format = 0.0;
    double violation = 0.0;
    double major = 0.0;
    double sub = 0.0;
    double ground = 0.0;
    double reason = 0.0;

    bool operator==(const WeightVector&) const = default;
};

struct RewardParams {
    TverskyParams tversky;
    bool per_section_reason = false;  // compare chains section-by-section
};

// |P∩G| / (|P∩G| + alpha|P\G| + beta|G\P|); both empty -> 1, one empty -> 0.
double tversky_reward(const std::set<std::string>& pred,
                      const std::set<std::string>& gt, const TverskyParams& p);

double violation_reward(const ModerationOutput& pred, const GroundTruth& gt);

double interval_iou(const TimeInterval& a, const TimeInterval& b);

// max(0, 1 - (|start error| + |end error|) / duration)
double boundary_alignment(const TimeInterval& pred, const TimeInterval& gt,
                          double duration);

// One-to-one assignment between prediction and ground-truth entries.
// Candidate pairs are restricted to equal major; among them the matching
// maximizes total interval IoU (exhaustive for the small entry counts this
// pipeline produces), preferring more pairs and then lower (pred, gt)
// indices on ties. Unmatched entries are excluded.
std::vector<std::pair<int, int>> match_entries(
    const std::vector<ResultEntry>& pred, const std::vector<ResultEntry>& gt);

struct GroundingScore {
    double value = 0.0;      // mean IoU + boundary over matched pairs, [0,2]
    bool applicable = true;  // false when the ground truth has no entries
};

GroundingScore grounding_reward(const ModerationOutput& pred,
                                const GroundTruth& gt);

// Mean interval IoU over matched pairs; nullopt when nothing to match.
std::optional<double> mean_matched_iou(const std::vector<ResultEntry>& pred,
                                       const std::vector<ResultEntry>& gt);

// Clamped cosine of embedded chains, [0,1].
double reason_reward(const ReasoningChain& pred, const ReasoningChain& gt_chain,
                     const EmbeddingProvider& provider,
                     bool per_section = false);

// Deduplicated label sets across a video's result entries.
std::set<std::string> major_set(const std::vector<ResultEntry>& entries);
std::set<std::string> sub_set(const std::vector<ResultEntry>& entries);

struct ScoredOutput {
    ParseResult parsed;
    RewardBreakdown breakdown;
};

// Full pipeline for one raw output. A format failure zeroes every component
// (format errors propagate; nothing downstream is scored).
ScoredOutput score_output(std::string_view raw, const GroundTruth& gt,
                          const RewardParams& params,
                          const EmbeddingProvider& provider);

RewardBreakdown compute_breakdown(std::string_view raw, const GroundTruth& gt,
                                  const RewardParams& params,
                                  const EmbeddingProvider& provider);

// R = l1*format + l2*violation + l3*major + l4*sub + l5*ground + l6*reason
double aggregate(const RewardBreakdown& b, const WeightVector& w);

}  // namespace vidmod
