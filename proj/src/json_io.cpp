#include "json_io.hpp"

#include <stdexcept>

namespace vidmod::detail {

using nlohmann::json;

json chain_to_jobj(const ReasoningChain& c) {
    return {{"summarization", c.summarization},
            {"risk_analysis", c.risk_analysis},
            {"conclusion", c.conclusion}};
}

ReasoningChain chain_from_jobj(const json& j) {
    ReasoningChain c;
    c.summarization = j.value("summarization", "");
    c.risk_analysis = j.value("risk_analysis", "");
    c.conclusion = j.value("conclusion", "");
    return c;
}

json entries_to_jobj(const std::vector<ResultEntry>& entries) {
    json arr = json::array();
    for (const auto& e : entries) {
        arr.push_back({{"major", e.major},
                       {"sub", e.sub},
                       {"ground", {e.ground.start, e.ground.end}}});
    }
    return arr;
}

std::vector<ResultEntry> entries_from_jobj(const json& j) {
    std::vector<ResultEntry> out;
    for (const auto& je : j) {
        ResultEntry e;
        e.major = je.at("major").get<std::string>();
        e.sub = je.at("sub").get<std::string>();
        const auto& g = je.at("ground");
        if (!g.is_array() || g.size() != 2) {
            throw std::invalid_argument("ground must be [start, end]");
        }
        e.ground.start = g[0].get<double>();
        e.ground.end = g[1].get<double>();
        out.push_back(std::move(e));
    }
    return out;
}

json gt_to_jobj(const GroundTruth& gt, bool with_duration) {
    json j = {{"violation", gt.violation},
              {"results", entries_to_jobj(gt.results)},
              {"reasoning", chain_to_jobj(gt.reference_chain)}};
    if (with_duration) j["duration"] = gt.duration;
    return j;
}

GroundTruth gt_from_jobj(const json& j, std::optional<double> duration) {
    GroundTruth gt;
    gt.violation = j.at("violation").get<bool>();
    gt.results = entries_from_jobj(j.value("results", json::array()));
    if (j.contains("reasoning")) {
        gt.reference_chain = chain_from_jobj(j["reasoning"]);
    }
    gt.duration = duration ? *duration : j.at("duration").get<double>();

    if (gt.duration <= 0.0) throw std::invalid_argument("duration must be > 0");
    if (gt.violation && gt.results.empty()) {
        throw std::invalid_argument("violation true requires results");
    }
    if (!gt.violation && !gt.results.empty()) {
        throw std::invalid_argument("violation false requires empty results");
    }
    for (const auto& e : gt.results) {
        if (e.ground.start < 0 || e.ground.end < e.ground.start) {
            throw std::invalid_argument("interval-order: start must be in [0, end]");
        }
        if (e.ground.end > gt.duration) {
            throw std::invalid_argument("interval exceeds duration");
        }
        if (e.major.empty() || e.sub.empty()) {
            throw std::invalid_argument("result entry with empty label");
        }
    }
    return gt;
}

json breakdown_to_jobj(const RewardBreakdown& b) {
    return {{"format", b.format},   {"violation", b.violation},
            {"major", b.major},     {"sub", b.sub},
            {"ground", b.ground},   {"reason", b.reason}};
}

json output_to_jobj(const ModerationOutput& out) {
    return {{"think", out.think},
            {"reason", chain_to_jobj(out.reason)},
            {"violation", out.violation},
            {"results", entries_to_jobj(out.results)}};
}

}  // namespace vidmod::detail
