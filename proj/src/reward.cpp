#include "vidmod/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vidmod {

TverskyParams::TverskyParams(double a, double b) : alpha(a), beta(b) {
    if (a < 0 || b < 0 || a + b <= 0) {
        throw std::invalid_argument(
            "tversky params require alpha, beta >= 0 and alpha + beta > 0");
    }
}

double tversky_reward(const std::set<std::string>& pred,
                      const std::set<std::string>& gt, const TverskyParams& p) {
    if (pred.empty() && gt.empty()) return 1.0;
    if (pred.empty() || gt.empty()) return 0.0;
    std::size_t both = 0;
    for (const auto& x : pred) both += gt.count(x);
    double only_pred = static_cast<double>(pred.size() - both);
    double only_gt = static_cast<double>(gt.size() - both);
    double num = static_cast<double>(both);
    return num / (num + p.alpha * only_pred + p.beta * only_gt);
}

double violation_reward(const ModerationOutput& pred, const GroundTruth& gt) {
    return pred.violation == gt.violation ? 1.0 : 0.0;
}

double interval_iou(const TimeInterval& a, const TimeInterval& b) {
    double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
    double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
    if (uni <= 0.0) {
        // Two zero-length intervals: identical points count as a full match.
        return a.start == b.start ? 1.0 : 0.0;
    }
    return inter / uni;
}

double boundary_alignment(const TimeInterval& pred, const TimeInterval& gt,
                          double duration) {
    double err = std::abs(pred.start - gt.start) + std::abs(pred.end - gt.end);
    return std::max(0.0, 1.0 - err / duration);
}

namespace {

struct Matching {
    double total = 0.0;
    std::vector<std::pair<int, int>> pairs;
};

bool better(const Matching& a, const Matching& b) {
    constexpr double kEps = 1e-12;
    if (a.total > b.total + kEps) return true;
    if (a.total < b.total - kEps) return false;
    if (a.pairs.size() != b.pairs.size()) return a.pairs.size() > b.pairs.size();
    return a.pairs < b.pairs;
}

// Exhaustive search over one-to-one same-major assignments.
void search(const std::vector<ResultEntry>& pred,
            const std::vector<ResultEntry>& gt, std::size_t i,
            std::vector<bool>& used, Matching& cur, Matching& best) {
    if (i == pred.size()) {
        if (best.total < 0.0 || better(cur, best)) best = cur;
        return;
    }
    // leave pred[i] unmatched
    search(pred, gt, i + 1, used, cur, best);
    for (std::size_t j = 0; j < gt.size(); ++j) {
        if (used[j] || pred[i].major != gt[j].major) continue;
        used[j] = true;
        cur.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
        cur.total += interval_iou(pred[i].ground, gt[j].ground);
        search(pred, gt, i + 1, used, cur, best);
        cur.total -= interval_iou(pred[i].ground, gt[j].ground);
        cur.pairs.pop_back();
        used[j] = false;
    }
}

}  // namespace

std::vector<std::pair<int, int>> match_entries(
    const std::vector<ResultEntry>& pred, const std::vector<ResultEntry>& gt) {
    if (pred.empty() || gt.empty()) return {};
    std::vector<bool> used(gt.size(), false);
    Matching cur, best;
    best.total = -1.0;  // any candidate (including empty) beats the sentinel
    search(pred, gt, 0, used, cur, best);
    std::sort(best.pairs.begin(), best.pairs.end());
    return best.pairs;
}

GroundingScore grounding_reward(const ModerationOutput& pred,
                                const GroundTruth& gt) {
    if (gt.duration <= 0.0) {
        throw std::invalid_argument("grounding_reward: duration must be > 0");
    }
    if (gt.results.empty()) return {0.0, false};
    auto pairs = match_entries(pred.results, gt.results);
    if (pairs.empty()) return {0.0, true};
    double sum = 0.0;
    for (auto [pi, gi] : pairs) {
        const auto& p = pred.results[pi].ground;
        const auto& g = gt.results[gi].ground;
        sum += interval_iou(p, g) + boundary_alignment(p, g, gt.duration);
    }
    return {sum / static_cast<double>(pairs.size()), true};
}

std::optional<double> mean_matched_iou(const std::vector<ResultEntry>& pred,
                                       const std::vector<ResultEntry>& gt) {
    auto pairs = match_entries(pred, gt);
    if (pairs.empty()) return std::nullopt;
    double sum = 0.0;
    for (auto [pi, gi] : pairs) {
        sum += interval_iou(pred[pi].ground, gt[gi].ground);
    }
    return sum / static_cast<double>(pairs.size());
}

namespace {

std::string chain_text(const ReasoningChain& c) {
    return c.summarization + " " + c.risk_analysis + " " + c.conclusion;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

double reason_reward(const ReasoningChain& pred, const ReasoningChain& gt_chain,
                     const EmbeddingProvider& provider, bool per_section) {
    if (per_section) {
        double sum = 0.0;
        const std::pair<const std::string&, const std::string&> sections[] = {
            {pred.summarization, gt_chain.summarization},
            {pred.risk_analysis, gt_chain.risk_analysis},
            {pred.conclusion, gt_chain.conclusion},
        };
        for (const auto& [p, g] : sections) {
            sum += clamp01(cosine(provider.embed(p), provider.embed(g)));
        }
        return sum / 3.0;
    }
    return clamp01(
        cosine(provider.embed(chain_text(pred)), provider.embed(chain_text(gt_chain))));
}

std::set<std::string> major_set(const std::vector<ResultEntry>& entries) {
    std::set<std::string> out;
    for (const auto& e : entries) out.insert(e.major);
    return out;
}

std::set<std::string> sub_set(const std::vector<ResultEntry>& entries) {
    std::set<std::string> out;
    for (const auto& e : entries) out.insert(e.major + "/" + e.sub);
    return out;
}

ScoredOutput score_output(std::string_view raw, const GroundTruth& gt,
                          const RewardParams& params,
                          const EmbeddingProvider& provider) {
    ScoredOutput scored{parse_output(raw), {}};
    if (!parse_ok(scored.parsed)) {
        return scored;  // format failure zeroes everything downstream
    }
    const auto& pred = std::get<ModerationOutput>(scored.parsed);
    RewardBreakdown& b = scored.breakdown;
    b.format = 1.0;
    b.violation = violation_reward(pred, gt);
    b.major = tversky_reward(major_set(pred.results), major_set(gt.results),
                             params.tversky);
    b.sub = tversky_reward(sub_set(pred.results), sub_set(gt.results),
                           params.tversky);
    b.ground = grounding_reward(pred, gt).value;
    b.reason = reason_reward(pred.reason, gt.reference_chain, provider,
                             params.per_section_reason);
    return scored;
}

RewardBreakdown compute_breakdown(std::string_view raw, const GroundTruth& gt,
                                  const RewardParams& params,
                                  const EmbeddingProvider& provider) {
    return score_output(raw, gt, params, provider).breakdown;
}

double aggregate(const RewardBreakdown& b, const WeightVector& w) {
    return w.format * b.format + w.violation * b.violation + w.major * b.major +
           w.sub * b.sub + w.ground * b.ground + w.reason * b.reason;
}

}  // namespace vidmod
