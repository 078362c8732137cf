#include "vidmod/datagen.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "json_io.hpp"

namespace vidmod {

using nlohmann::json;

void NoiseModel::validate() const {
    if (sigma < 0) throw std::invalid_argument("noise sigma must be >= 0");
    if (p_sub < 0 || p_sub > 1 || p_violation < 0 || p_violation > 1) {
        throw std::invalid_argument("noise probabilities must be in [0,1]");
    }
}

std::vector<QAPair> gen_rule_qa(const LabelTree& tree) {
    std::vector<QAPair> out;
    for (const auto& m : tree.majors) {
        QAPair q;
        q.kind = QAPair::Kind::RuleKnowledge;
        q.question = "What are the sub-categories and rules for the main category '" +
                     m.name + "'?";
        std::string subs, rules;
        for (const auto& s : m.subs) {
            if (!subs.empty()) subs += ", ";
            subs += "'" + s.name + "'";
            for (const auto& r : s.rules) {
                if (!rules.empty()) rules += " ";
                rules += r;
            }
        }
        q.answer = "Sub-labels: " + subs + ". Rules: " + rules;
        out.push_back(std::move(q));
    }
    for (const auto& m : tree.majors) {
        for (const auto& s : m.subs) {
            QAPair q;
            q.kind = QAPair::Kind::RuleKnowledge;
            q.question = "What constitutes a violation under the sub-category '" +
                         s.name + "'?";
            std::string rules;
            for (const auto& r : s.rules) {
                if (!rules.empty()) rules += " ";
                rules += r;
            }
            q.answer = rules;
            out.push_back(std::move(q));
        }
    }
    return out;
}

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
    std::size_t scheme = url.find("://");
    std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    std::size_t slash = url.find('/', host_start);
    if (slash == std::string::npos) return {url, "/summarize"};
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

HttpSummarizerClient::HttpSummarizerClient(std::string url, int timeout_sec)
    : timeout_sec_(timeout_sec) {
    std::tie(host_, path_) = split_url(url);
}

std::optional<SummaryResponse> HttpSummarizerClient::summarize(
    const std::string& video_id) {
    httplib::Client client(host_);
    client.set_connection_timeout(timeout_sec_, 0);
    client.set_read_timeout(timeout_sec_, 0);
    json req = {{"video_id", video_id}};
    auto res = client.Post(path_, req.dump(), "application/json");
    if (!res || res->status != 200) return std::nullopt;
    try {
        auto body = json::parse(res->body);
        SummaryResponse sr;
        sr.summary = body.at("summary").get<std::string>();
        for (const auto& jq : body.value("qa", json::array())) {
            QAPair q;
            q.kind = QAPair::Kind::AdKnowledge;
            q.question = jq.at("question").get<std::string>();
            q.answer = jq.at("answer").get<std::string>();
            sr.qa.push_back(std::move(q));
        }
        return sr;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

std::unique_ptr<SummarizerClient> make_summarizer_from_env() {
    if (const char* url = std::getenv("SUMMARIZER_URL"); url && *url) {
        return std::make_unique<HttpSummarizerClient>(url);
    }
    return nullptr;
}

std::vector<QAPair> gen_ad_qa(const AdInfo& info, SummarizerClient* client,
                              const std::string& video_id) {
    if (client) {
        if (auto sr = client->summarize(video_id)) return sr->qa;
        std::cerr << "warning: summarizer unavailable for " << video_id
                  << ", using template QA\n";
    }
    std::vector<QAPair> out;
    if (!info.product_name.empty() && !info.product_type.empty()) {
        QAPair q;
        q.kind = QAPair::Kind::AdKnowledge;
        q.question = "What product is advertised in this video?";
        q.answer = "The product is a " + info.product_type + " named " +
                   info.product_name + ".";
        out.push_back(std::move(q));
    }
    if (!info.audience.empty()) {
        QAPair q;
        q.kind = QAPair::Kind::AdKnowledge;
        q.question = "Who is the target audience of this video?";
        q.answer = "The video targets viewers aged about " + info.audience + ".";
        out.push_back(std::move(q));
    }
    return out;
}

namespace {

// Quantize to the canonical two-decimal wire representation so serialized
// candidates score exactly against the stored ground truth.
double q2(double v) {
    return std::strtod(format_seconds(v).c_str(), nullptr);
}

const char* const kProductTypes[] = {"sunscreen", "smartwatch", "energy drink",
                                     "skincare serum", "board game", "blender"};
const char* const kProductNames[] = {"XXX", "Lumo", "VitaMax", "Peakline",
                                     "Aurora", "Zest"};
const char* const kAudiences[] = {"18-60", "25-40", "13-18", "30-55", "20-35"};

const char* const kDriftWords[] = {
    "quartz", "nebula", "harbor", "violet", "ember",  "lattice",
    "copper", "meadow", "orbit",  "cinder", "juniper", "basalt"};

std::string drift_text(std::mt19937_64& rng, int words) {
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kDriftWords) - 1);
    std::string out;
    for (int i = 0; i < words; ++i) {
        if (!out.empty()) out += " ";
        out += kDriftWords[pick(rng)];
    }
    return out;
}

ReasoningChain build_chain(const SyntheticSample& s, const LabelTree& tree) {
    ReasoningChain c;
    c.summarization = "the video promotes a " + s.ad.product_type + " named " +
                      s.ad.product_name + " for viewers aged " + s.ad.audience;
    if (s.truth.violation) {
        std::string risk;
        for (const auto& e : s.truth.results) {
            const MajorCategory* m = tree.find_major(e.major);
            auto sub = tree.lookup(e.major, e.sub);
            if (!risk.empty()) risk += "; ";
            risk += "between " + format_seconds(e.ground.start) + " and " +
                    format_seconds(e.ground.end) + " seconds the scene shows " +
                    (sub ? sub->name : e.sub) + " under " +
                    (m ? m->name : e.major);
        }
        c.risk_analysis = risk;
        std::string majors;
        for (const auto& id : major_set(s.truth.results)) {
            if (!majors.empty()) majors += ", ";
            majors += id;
        }
        c.conclusion = "the ad violates policy in " + majors;
    } else {
        c.risk_analysis = "no risky scenes were observed in the creative";
        c.conclusion = "the ad contains no policy violation";
    }
    return c;
}

ModerationOutput output_from_gt(const GroundTruth& gt) {
    ModerationOutput out;
    out.reason = gt.reference_chain;
    out.violation = gt.violation;
    out.results = gt.results;
    return out;
}

struct LabelPick {
    std::string major;
    std::string sub;
};

LabelPick pick_label(const LabelTree& tree, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pm(0, tree.majors.size() - 1);
    const auto& m = tree.majors[pm(rng)];
    std::uniform_int_distribution<std::size_t> ps(0, m.subs.size() - 1);
    return {m.id, m.subs[ps(rng)].id};
}

TimeInterval random_interval(double duration, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> flen(0.05, 0.4);
    double len = flen(rng) * duration;
    std::uniform_real_distribution<double> fstart(0.0, duration - len);
    double start = q2(fstart(rng));
    double end = q2(std::min(duration, start + len));
    return {start, end};
}

GroundTruth perturb(const GroundTruth& truth, const LabelTree& tree,
                    const NoiseModel& noise, std::mt19937_64& rng) {
    GroundTruth y = truth;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, noise.sigma);

    if (coin(rng) < noise.p_violation) {
        y.violation = !y.violation;
        if (!y.violation) {
            y.results.clear();
            return y;
        }
        auto label = pick_label(tree, rng);
        y.results.push_back(
            {label.major, label.sub, random_interval(y.duration, rng)});
    }
    for (auto& e : y.results) {
        if (noise.p_sub > 0 && coin(rng) < noise.p_sub) {
            const MajorCategory* m = tree.find_major(e.major);
            if (m && m->subs.size() > 1) {
                std::uniform_int_distribution<std::size_t> ps(0, m->subs.size() - 1);
                std::string flipped = e.sub;
                while (flipped == e.sub) flipped = m->subs[ps(rng)].id;
                e.sub = flipped;
            }
        }
        if (noise.sigma > 0) {
            double lo = std::clamp(e.ground.start + jitter(rng), 0.0, y.duration);
            double hi = std::clamp(e.ground.end + jitter(rng), 0.0, y.duration);
            if (hi < lo) std::swap(lo, hi);
            e.ground = {q2(lo), q2(hi)};
        }
    }
    return y;
}

std::string corrupt_format(const std::string& correct, int variant) {
    std::string s = correct;
    switch (variant % 3) {
        case 0:  // drop the opening think tag
            return s.substr(std::string("<think>").size());
        case 1: {  // bad violation token
            auto at = s.find("<violation>");
            auto end = s.find("</violation>");
            return s.substr(0, at + 11) + "Maybe" + s.substr(end);
        }
        default: {  // drop the conclusion section label
            auto at = s.find(" conclusion:");
            return s.substr(0, at) + s.substr(at + 12);
        }
    }
}

std::string make_corrupted(const SyntheticSample& s, const LabelTree& tree,
                           DefectClass defect, int variant,
                           std::mt19937_64& rng) {
    ModerationOutput out = output_from_gt(s.truth);
    switch (defect) {
        case DefectClass::WrongSub: {
            auto& e = out.results[static_cast<std::size_t>(variant) %
                                  out.results.size()];
            const MajorCategory* m = tree.find_major(e.major);
            auto used = sub_set(s.truth.results);
            std::string replacement;
            for (const auto& cand : m->subs) {
                if (!used.count(e.major + "/" + cand.id)) {
                    replacement = cand.id;
                    break;
                }
            }
            if (replacement.empty()) {
                // every sub of this major already used; any different one
                // still breaks the pair set
                for (const auto& cand : m->subs) {
                    if (cand.id != e.sub) { replacement = cand.id; break; }
                }
            }
            e.sub = replacement;
            break;
        }
        case DefectClass::ShiftedInterval: {
            auto& e = out.results[static_cast<std::size_t>(variant) %
                                  out.results.size()];
            double shift = std::max(2.0, 0.3 * s.duration);
            e.ground = {q2(e.ground.start + shift), q2(e.ground.end + shift)};
            break;
        }
        case DefectClass::BrokenFormat:
            return corrupt_format(serialize_output(out), variant);
        case DefectClass::WrongViolation:
            if (out.violation) {
                out.violation = false;
                out.results.clear();
            } else {
                out.violation = true;
                auto label = pick_label(tree, rng);
                out.results.push_back(
                    {label.major, label.sub,
                     {0.0, q2(std::min(5.0, s.duration))}});
            }
            break;
        case DefectClass::DriftedReasoning:
            out.reason.summarization = drift_text(rng, 8);
            out.reason.risk_analysis = drift_text(rng, 10);
            out.reason.conclusion = drift_text(rng, 5);
            break;
    }
    return serialize_output(out);
}

}  // namespace

std::vector<SyntheticSample> gen_corpus(const LabelTree& tree, int n,
                                        const NoiseModel& noise, int k,
                                        std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("corpus size must be >= 1");
    if (k < 2) throw std::invalid_argument("candidate count must be >= 2");
    noise.validate();

    static const DefectClass kViolatingDefects[] = {
        DefectClass::WrongSub, DefectClass::ShiftedInterval,
        DefectClass::BrokenFormat, DefectClass::WrongViolation,
        DefectClass::DriftedReasoning};
    static const DefectClass kCleanDefects[] = {DefectClass::WrongViolation,
                                                DefectClass::BrokenFormat,
                                                DefectClass::DriftedReasoning};

    std::vector<SyntheticSample> corpus;
    corpus.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::seed_seq seq{seed, noise.seed,
                          static_cast<std::uint64_t>(i)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> coin(0.0, 1.0);

        SyntheticSample s;
        s.id = "vid_" + std::to_string(i);
        std::uniform_real_distribution<double> fdur(20.0, 120.0);
        s.duration = q2(fdur(rng));
        std::uniform_int_distribution<std::size_t> ppick(
            0, std::size(kProductTypes) - 1);
        s.ad.product_type = kProductTypes[ppick(rng)];
        s.ad.product_name = kProductNames[ppick(rng) % std::size(kProductNames)];
        s.ad.audience = kAudiences[ppick(rng) % std::size(kAudiences)];
        s.prompt = "Review advertisement video " + s.id + " (" +
                   format_seconds(s.duration) +
                   "s) for policy violations and ground each violation in time.";

        s.truth.duration = s.duration;
        s.truth.violation = coin(rng) < 0.7;
        if (s.truth.violation) {
            std::uniform_int_distribution<int> ecount(1, 3);
            int want = ecount(rng);
            auto used = std::set<std::string>{};
            for (int guard = 0; static_cast<int>(s.truth.results.size()) < want &&
                                guard < 32;
                 ++guard) {
                auto label = pick_label(tree, rng);
                if (!used.insert(label.major + "/" + label.sub).second) continue;
                s.truth.results.push_back(
                    {label.major, label.sub, random_interval(s.duration, rng)});
            }
        }
        s.truth.reference_chain = build_chain(s, tree);

        s.noisy = perturb(s.truth, tree, noise, rng);
        s.noisy.reference_chain = s.truth.reference_chain;

        s.candidates.push_back(serialize_output(output_from_gt(s.truth)));
        const auto& defects = s.truth.violation
                                  ? std::span<const DefectClass>(kViolatingDefects)
                                  : std::span<const DefectClass>(kCleanDefects);
        for (int c = 1; c < k; ++c) {
            DefectClass d = defects[(c - 1) % defects.size()];
            s.candidates.push_back(
                make_corrupted(s, tree, d, (c - 1) / static_cast<int>(defects.size()), rng));
        }
        corpus.push_back(std::move(s));
    }
    return corpus;
}

std::vector<std::string> joint_sft_lines(
    const LabelTree& tree, const std::vector<SyntheticSample>& corpus,
    int qa_per_precise) {
    if (qa_per_precise < 1) {
        throw std::invalid_argument("qa_per_precise must be >= 1");
    }
    std::vector<std::string> lines;
    auto qa = gen_rule_qa(tree);
    for (const auto& s : corpus) {
        auto ad = gen_ad_qa(s.ad, nullptr, s.id);
        qa.insert(qa.end(), ad.begin(), ad.end());
    }
    std::size_t n_precise =
        std::min(corpus.size(),
                 (qa.size() + qa_per_precise - 1) / qa_per_precise);
    std::size_t pi = 0;
    for (std::size_t i = 0; i < qa.size(); ++i) {
        json j = {{"kind", "qa"},
                  {"question", qa[i].question},
                  {"answer", qa[i].answer}};
        lines.push_back(j.dump());
        if ((i + 1) % static_cast<std::size_t>(qa_per_precise) == 0 &&
            pi < n_precise) {
            const auto& s = corpus[pi++];
            json a = {{"kind", "annotation"},
                      {"id", s.id},
                      {"prompt", s.prompt},
                      {"target", s.candidates.at(0)}};
            lines.push_back(a.dump());
        }
    }
    return lines;
}

std::string sample_to_json(const SyntheticSample& s) {
    json j = {{"id", s.id},
              {"duration", s.duration},
              {"prompt", s.prompt},
              {"ad",
               {{"product_type", s.ad.product_type},
                {"product_name", s.ad.product_name},
                {"audience", s.ad.audience}}},
              {"gt", detail::gt_to_jobj(s.truth, false)},
              {"noisy", detail::gt_to_jobj(s.noisy, false)},
              {"candidates", s.candidates}};
    return j.dump();
}

SyntheticSample sample_from_json(const std::string& line) {
    json j = json::parse(line);
    SyntheticSample s;
    s.id = j.at("id").get<std::string>();
    s.duration = j.at("duration").get<double>();
    s.prompt = j.value("prompt", "");
    if (j.contains("ad")) {
        s.ad.product_type = j["ad"].value("product_type", "");
        s.ad.product_name = j["ad"].value("product_name", "");
        s.ad.audience = j["ad"].value("audience", "");
    }
    s.truth = detail::gt_from_jobj(j.at("gt"), s.duration);
    s.noisy = detail::gt_from_jobj(j.at("noisy"), s.duration);
    s.candidates = j.at("candidates").get<std::vector<std::string>>();
    return s;
}

std::string gt_to_json(const GroundTruth& gt) {
    return detail::gt_to_jobj(gt, true).dump();
}

GroundTruth gt_from_json_text(const std::string& text) {
    return detail::gt_from_jobj(json::parse(text));
}

}  // namespace vidmod
