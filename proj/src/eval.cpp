#include "vidmod/eval.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

namespace vidmod {

using nlohmann::json;

std::map<std::string, PrMetrics> category_pr(
    const std::vector<std::set<std::string>>& preds,
    const std::vector<std::set<std::string>>& gts) {
    if (preds.size() != gts.size()) {
        throw std::invalid_argument("category_pr: length mismatch");
    }
    std::map<std::string, PrCounts> counts;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (const auto& label : preds[i]) {
            if (gts[i].count(label)) {
                ++counts[label].tp;
            } else {
                ++counts[label].fp;
            }
        }
        for (const auto& label : gts[i]) {
            if (!preds[i].count(label)) ++counts[label].fn;
        }
    }
    std::map<std::string, PrMetrics> out;
    for (const auto& [label, c] : counts) {
        PrMetrics m;
        m.counts = c;
        if (c.tp + c.fp > 0) {
            m.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
        }
        if (c.tp + c.fn > 0) {
            m.recall = static_cast<double>(c.tp) / (c.tp + c.fn);
        }
        out[label] = m;
    }
    return out;
}

namespace {

struct MiouAcc {
    double iou_sum = 0.0;
    int gt_entries = 0;
};

void accumulate_miou(const ModerationOutput& pred, const GroundTruth& gt,
                     MiouAcc& overall, std::map<std::string, MiouAcc>* per_major) {
    if (gt.results.empty()) return;  // videos with no GT entries are excluded
    overall.gt_entries += static_cast<int>(gt.results.size());
    if (per_major) {
        for (const auto& e : gt.results) {
            ++(*per_major)[e.major].gt_entries;
        }
    }
    for (auto [pi, gi] : match_entries(pred.results, gt.results)) {
        double iou = interval_iou(pred.results[pi].ground, gt.results[gi].ground);
        overall.iou_sum += iou;
        if (per_major) (*per_major)[gt.results[gi].major].iou_sum += iou;
    }
}

}  // namespace

double grounding_miou(const std::vector<ModerationOutput>& preds,
                      const std::vector<GroundTruth>& gts) {
    if (preds.size() != gts.size()) {
        throw std::invalid_argument("grounding_miou: length mismatch");
    }
    MiouAcc acc;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        accumulate_miou(preds[i], gts[i], acc, nullptr);
    }
    return acc.gt_entries == 0 ? 0.0 : acc.iou_sum / acc.gt_entries;
}

std::map<std::string, double> grounding_miou_per_major(
    const std::vector<ModerationOutput>& preds,
    const std::vector<GroundTruth>& gts) {
    if (preds.size() != gts.size()) {
        throw std::invalid_argument("grounding_miou_per_major: length mismatch");
    }
    MiouAcc overall;
    std::map<std::string, MiouAcc> per_major;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        accumulate_miou(preds[i], gts[i], overall, &per_major);
    }
    std::map<std::string, double> out;
    for (const auto& [major, acc] : per_major) {
        out[major] = acc.gt_entries == 0 ? 0.0 : acc.iou_sum / acc.gt_entries;
    }
    return out;
}

EvalReport evaluate(const std::vector<ModerationOutput>& preds,
                    const std::vector<GroundTruth>& gts) {
    EvalReport report;
    report.sample_count = static_cast<int>(preds.size());

    std::vector<std::set<std::string>> pred_sets, gt_sets;
    pred_sets.reserve(preds.size());
    gt_sets.reserve(gts.size());
    for (const auto& p : preds) pred_sets.push_back(major_set(p.results));
    for (const auto& g : gts) gt_sets.push_back(major_set(g.results));
    report.per_major = category_pr(pred_sets, gt_sets);

    double psum = 0.0, rsum = 0.0;
    int pn = 0, rn = 0;
    for (const auto& [label, m] : report.per_major) {
        if (m.counts.tp + m.counts.fn == 0) continue;  // not present in GT
        if (m.precision) {
            psum += *m.precision;
            ++pn;
        }
        if (m.recall) {
            rsum += *m.recall;
            ++rn;
        }
    }
    if (pn > 0) report.avg_precision = psum / pn;
    if (rn > 0) report.avg_recall = rsum / rn;

    report.miou = grounding_miou(preds, gts);
    report.miou_per_major = grounding_miou_per_major(preds, gts);
    return report;
}

TTestResult welch_ttest(const std::vector<double>& a,
                        const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("welch_ttest: both samples need >= 2 values");
    }
    auto mean_var = [](const std::vector<double>& x) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        double var = 0.0;
        for (double v : x) var += (v - mean) * (v - mean);
        var /= static_cast<double>(x.size() - 1);  // sample variance
        return std::pair{mean, var};
    };
    auto [ma, va] = mean_var(a);
    auto [mb, vb] = mean_var(b);
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double sa = va / na;
    double sb = vb / nb;
    if (sa + sb == 0.0) {
        throw std::invalid_argument("welch_ttest: zero variance in both samples");
    }
    TTestResult r;
    r.t = (ma - mb) / std::sqrt(sa + sb);
    r.df = (sa + sb) * (sa + sb) /
           (sa * sa / (na - 1) + sb * sb / (nb - 1));
    boost::math::students_t dist(r.df);
    r.p = 2.0 * boost::math::cdf(dist, -std::abs(r.t));
    return r;
}

std::string report_to_json(const EvalReport& report) {
    json per = json::object();
    for (const auto& [label, m] : report.per_major) {
        json jm = {{"tp", m.counts.tp}, {"fp", m.counts.fp}, {"fn", m.counts.fn}};
        jm["precision"] = m.precision ? json(*m.precision) : json(nullptr);
        jm["recall"] = m.recall ? json(*m.recall) : json(nullptr);
        per[label] = jm;
    }
    json j = {{"per_major", per},
              {"avg_precision",
               report.avg_precision ? json(*report.avg_precision) : json(nullptr)},
              {"avg_recall",
               report.avg_recall ? json(*report.avg_recall) : json(nullptr)},
              {"miou", report.miou},
              {"miou_per_major", report.miou_per_major},
              {"sample_count", report.sample_count}};
    return j.dump(2);
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "  n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", *v);
    return buf;
}

}  // namespace

std::string report_to_table(const EvalReport& report) {
    std::ostringstream out;
    out << "category                          P      R      mIoU\n";
    for (const auto& [label, m] : report.per_major) {
        double miou = 0.0;
        if (auto it = report.miou_per_major.find(label);
            it != report.miou_per_major.end()) {
            miou = it->second;
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-30s %s  %s  %.3f\n", label.c_str(),
                      fmt_opt(m.precision).c_str(), fmt_opt(m.recall).c_str(),
                      miou);
        out << buf;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-30s %s  %s  %.3f\n", "average",
                  fmt_opt(report.avg_precision).c_str(),
                  fmt_opt(report.avg_recall).c_str(), report.miou);
    out << buf;
    return out.str();
}

}  // namespace vidmod
