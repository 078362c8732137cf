#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vidmod/reward.hpp"

namespace vidmod {

// Offline evaluation: per-category precision/recall at the sample level
// (label present/absent per video, unweighted macro average), grounding mIoU
// over matched interval pairs, and Welch's t-test for run comparisons.

struct PrCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

struct PrMetrics {
    std::optional<double> precision;  // absent when never predicted
    std::optional<double> recall;     // absent when never in ground truth
    PrCounts counts;
};

struct EvalReport {
    std::map<std::string, PrMetrics> per_major;
    std::optional<double> avg_precision;  // unweighted over majors present in GT
    std::optional<double> avg_recall;
    double miou = 0.0;
    std::map<std::string, double> miou_per_major;
    int sample_count = 0;
};

// Per-label confusion over paired label sets: TP when the label is in both,
// FP when predicted only, FN when ground truth only.
std::map<std::string, PrMetrics> category_pr(
    const std::vector<std::set<std::string>>& preds,
    const std::vector<std::set<std::string>>& gts);

// Mean interval IoU with unmatched ground-truth entries contributing 0.
// Videos with no ground-truth entries are excluded.
double grounding_miou(const std::vector<ModerationOutput>& preds,
                      const std::vector<GroundTruth>& gts);

std::map<std::string, double> grounding_miou_per_major(
    const std::vector<ModerationOutput>& preds,
    const std::vector<GroundTruth>& gts);

EvalReport evaluate(const std::vector<ModerationOutput>& preds,
                    const std::vector<GroundTruth>& gts);

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;  // two-sided
};

// Welch's unequal-variance t statistic with Welch-Satterthwaite degrees of
// freedom; throws on samples smaller than 2 or with zero variance in both.
TTestResult welch_ttest(const std::vector<double>& a,
                        const std::vector<double>& b);

std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

}  // namespace vidmod
