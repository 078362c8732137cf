// End-to-end acceptance checks. Each criterion prints exactly one
// [PASS]/[FAIL] line; the process exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "test_helpers.hpp"
#include "vidmod/curriculum.hpp"
#include "vidmod/datagen.hpp"
#include "vidmod/eval.hpp"
#include "vidmod/grpo.hpp"
#include "vidmod/output_format.hpp"
#include "vidmod/reward.hpp"
#include "vidmod/router.hpp"
#include "vidmod/run_config.hpp"
#include "vidmod/taxonomy.hpp"

using namespace vidmod;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    if (!ok) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

const ReferenceEmbedder kEmbedder;

// ---------------------------------------------------------------------------
// Curriculum fidelity: the default phase vectors are exactly the published
// schedule.

void check_curriculum_fidelity() {
    bool ok = kPhase1Weights == WeightVector{1.0, 1.0, 0.5, 0.3, 0.0, 0.1} &&
              kPhase2Weights == WeightVector{0.5, 0.5, 1.0, 1.0, 0.0, 0.5} &&
              kPhase3Weights == WeightVector{0.2, 0.2, 1.0, 1.0, 1.0, 0.5};
    PhaseSchedule s;
    ok = ok && s.weights_for_phase(1) == kPhase1Weights &&
         s.weights_for_phase(2) == kPhase2Weights &&
         s.weights_for_phase(3) == kPhase3Weights;
    report("curriculum-fidelity", ok,
           ok ? "default phase vectors match the published schedule exactly"
              : "phase vector mismatch");
}

// ---------------------------------------------------------------------------
// Parser grammar: golden corpus, round-trip property, and byte fuzzing.

struct Golden {
    const char* raw;
    bool valid;
    ParseErrorKind kind;  // meaningful when !valid
};

const Golden kGolden[] = {
    // --- valid -------------------------------------------------------------
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>N</violation>",
     true, {}},
    {"<think>scratch</think><reason>content summarization: ad for a blender "
     "risk analysis: gore at 3s conclusion: violates</reason>"
     "<violation>Y</violation><result>{major: discomforting_content, sub: "
     "gory_content, ground: [3.00, 9.50]}</result>",
     true, {}},
    {"  <think> padded </think>\n\t<reason>content summarization: a risk "
     "analysis: b conclusion: c</reason>\n<violation>N</violation>\n",
     true, {}},
    {"<think></think><reason>Content Summarization: a Risk Analysis: b "
     "Conclusion: c</reason><violation>N</violation>",
     true, {}},
    {"<think></think><reason>CONTENT SUMMARIZATION: a RISK ANALYSIS: b "
     "CONCLUSION: c</reason><violation>N</violation>",
     true, {}},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>"
     "<result>{major: m1, sub: s1, ground: [0.00, 1.00]}</result>"
     "<result>{major: m2, sub: s2, ground: [2.00, 3.00]}</result>",
     true, {}},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>"
     "<result>{major: a, sub: x, ground: [0.00, 5.00]}</result>"
     "<result>{major: b, sub: y, ground: [1.00, 2.00]}</result>"
     "<result>{major: c, sub: z, ground: [4.00, 9.00]}</result>",
     true, {}},
    {"<think>multi word thoughts, with punctuation! (and parens)</think>"
     "<reason>content summarization: a risk analysis: b conclusion: "
     "c</reason><violation>N</violation>",
     true, {}},
    {"<think></think><reason>content summarization:   spaced   out   risk "
     "analysis:  b  conclusion:  c  </reason><violation>N</violation>",
     true, {}},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>"
     "<result>{major: m, sub: s, ground: [3, 9]}</result>",
     true, {}},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>"
     "<result>{major: m, sub: s, ground: [0.00, 0.00]}</result>",
     true, {}},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>  Y  </violation>"
     "<result>{major: m, sub: s, ground: [1.25, 2.75]}</result>",
     true, {}},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>"
     "<result>{ major: m , sub: s , ground: [ 1.0 , 2.0 ] }</result>",
     true, {}},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>"
     "<result>{major: m, sub: s, ground: [1.00, 2.00]}</result>   \n  ",
     true, {}},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>\nN\n</violation>",
     true, {}},
    // --- invalid -----------------------------------------------------------
    {"", false, ParseErrorKind::MissingTag},
    {"<think></think>", false, ParseErrorKind::MissingTag},
    {"<reason>content summarization: a risk analysis: b conclusion: "
     "c</reason><think></think><violation>N</violation>",
     false, ParseErrorKind::TagOrder},
    {"<think></think><violation>N</violation><reason>content summarization: "
     "a risk analysis: b conclusion: c</reason>",
     false, ParseErrorKind::TagOrder},
    {"<think>never closed", false, ParseErrorKind::MissingTag},
    {"<think></think><reason>content summarization: a conclusion: c</reason>"
     "<violation>N</violation>",
     false, ParseErrorKind::MissingReasonSection},
    {"<think></think><reason>content summarization: a risk analysis: "
     "b</reason><violation>N</violation>",
     false, ParseErrorKind::MissingReasonSection},
    {"<think></think><reason>risk analysis: b conclusion: c</reason>"
     "<violation>N</violation>",
     false, ParseErrorKind::MissingReasonSection},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Maybe</violation>",
     false, ParseErrorKind::BadViolationToken},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>y</violation>",
     false, ParseErrorKind::BadViolationToken},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>"
     "<result>just words</result>",
     false, ParseErrorKind::MalformedResultBody},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>"
     "<result>{major: m, ground: [1.00, 2.00]}</result>",
     false, ParseErrorKind::MalformedResultBody},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>"
     "<result>{major: m, sub: s, ground: [1.00]}</result>",
     false, ParseErrorKind::MalformedResultBody},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>"
     "<result>{major: m, sub: s, ground: [9.50, 3.00]}</result>",
     false, ParseErrorKind::IntervalOrder},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>N</violation>"
     "<result>{major: m, sub: s, ground: [1.00, 2.00]}</result>",
     false, ParseErrorKind::InvariantViolation},
    {"<think></think><reason>content summarization: a risk analysis: b "
     "conclusion: c</reason><violation>Y</violation>",
     false, ParseErrorKind::InvariantViolation},
};

void check_parser_grammar() {
    auto t0 = std::chrono::steady_clock::now();
    int bad = 0;
    int valid_count = 0, invalid_count = 0;
    for (const auto& g : kGolden) {
        auto r = parse_output(g.raw);
        if (g.valid) {
            ++valid_count;
            if (!parse_ok(r)) ++bad;
        } else {
            ++invalid_count;
            if (parse_ok(r) || std::get<ParseFailure>(r).kind != g.kind) ++bad;
        }
    }

    int roundtrip_bad = 0;
    std::mt19937_64 rng(20240811);
    for (int i = 0; i < 1000; ++i) {
        ModerationOutput out = testutil::random_output(rng);
        auto r = parse_output(serialize_output(out));
        if (!parse_ok(r) || std::get<ModerationOutput>(r) != out) ++roundtrip_bad;
    }

    std::mt19937_64 fuzz(7);
    std::uniform_int_distribution<int> len(0, 160);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int i = 0; i < 100000; ++i) {
        std::string raw;
        int n = len(fuzz);
        for (int k = 0; k < n; ++k) raw += static_cast<char>(byte(fuzz));
        (void)parse_output(raw);  // must not crash or throw
    }

    double secs = elapsed_s(t0);
    bool ok = bad == 0 && roundtrip_bad == 0 && valid_count >= 15 &&
              invalid_count >= 15 && secs < 10.0;
    std::ostringstream d;
    d << valid_count << " valid + " << invalid_count
      << " invalid goldens, 1000 round-trips, 1e5 fuzz strings in "
      << std::fixed << secs << "s";
    if (bad) d << "; " << bad << " golden misclassifications";
    if (roundtrip_bad) d << "; " << roundtrip_bad << " round-trip failures";
    report("parser-grammar", ok, d.str());
}

// ---------------------------------------------------------------------------
// Reward correctness: Tversky/Dice agreement, the worked grounding example,
// and optimal matching against a brute-force oracle.

double dice(const std::set<std::string>& p, const std::set<std::string>& g) {
    if (p.empty() && g.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& x : p) inter += g.count(x);
    return 2.0 * static_cast<double>(inter) /
           static_cast<double>(p.size() + g.size());
}

double oracle_best_total(const std::vector<ResultEntry>& pred,
                         const std::vector<ResultEntry>& gt) {
    double best = 0.0;
    std::vector<int> used(gt.size(), 0);
    auto rec = [&](auto&& self, std::size_t i, double acc) -> void {
        if (i == pred.size()) {
            best = std::max(best, acc);
            return;
        }
        self(self, i + 1, acc);
        for (std::size_t j = 0; j < gt.size(); ++j) {
            if (used[j] || pred[i].major != gt[j].major) continue;
            used[j] = 1;
            self(self, i + 1, acc + interval_iou(pred[i].ground, gt[j].ground));
            used[j] = 0;
        }
    };
    rec(rec, 0, 0.0);
    return best;
}

void check_reward_correctness() {
    TverskyParams p;  // alpha = beta = 0.5
    std::mt19937_64 rng(101);
    double worst_gap = 0.0;
    for (int t = 0; t < 1000; ++t) {
        std::set<std::string> a, b;
        for (int i = 0; i < 6; ++i) {
            if (rng() % 2) a.insert("l" + std::to_string(rng() % 8));
            if (rng() % 2) b.insert("l" + std::to_string(rng() % 8));
        }
        worst_gap = std::max(worst_gap,
                             std::abs(tversky_reward(a, b, p) - dice(a, b)));
    }
    bool tversky_ok = worst_gap <= 1e-12;

    ModerationOutput pred;
    pred.violation = true;
    pred.results = {{"m", "s", {0.0, 10.0}}};
    GroundTruth gt;
    gt.violation = true;
    gt.results = {{"m", "s", {5.0, 15.0}}};
    gt.duration = 20.0;
    double grounding = grounding_reward(pred, gt).value;
    bool grounding_ok = std::abs(grounding - 0.8333) <= 1e-4;

    int match_bad = 0;
    std::mt19937_64 mrng(915);
    static const char* majors[] = {"m1", "m2"};
    auto rand_entries = [&](int max_n) {
        std::vector<ResultEntry> out;
        std::uniform_int_distribution<int> count(0, max_n);
        std::uniform_real_distribution<double> point(0.0, 20.0);
        int n = count(mrng);
        for (int i = 0; i < n; ++i) {
            double a = point(mrng), b = point(mrng);
            if (b < a) std::swap(a, b);
            out.push_back({majors[mrng() % 2], "s", {a, b}});
        }
        return out;
    };
    for (int t = 0; t < 2000; ++t) {
        auto pe = rand_entries(4);
        auto ge = rand_entries(4);
        auto pairs = match_entries(pe, ge);
        double total = 0.0;
        for (auto [i, j] : pairs) total += interval_iou(pe[i].ground, ge[j].ground);
        if (std::abs(total - oracle_best_total(pe, ge)) > 1e-9) ++match_bad;
    }

    bool ok = tversky_ok && grounding_ok && match_bad == 0;
    std::ostringstream d;
    d << "tversky-dice gap " << worst_gap << ", grounding example "
      << grounding << ", matching vs oracle on 2000 instances: " << match_bad
      << " mismatches";
    report("reward-correctness", ok, d.str());
}

// ---------------------------------------------------------------------------
// GRPO learning: desk-scale curriculum run must approach the per-sample
// ceiling quickly and trend upward.

void check_grpo_learning() {
    auto t0 = std::chrono::steady_clock::now();
    NoiseModel noise;
    noise.seed = 404;
    auto corpus = gen_corpus(builtin_taxonomy(), 200, noise, 8, 404);
    auto scored = score_corpus(corpus, true, RewardParams{}, kEmbedder);

    ToyPolicy policy(1.0, 1.0);
    policy.randomize(corpus, 8, 404);
    PhaseSchedule schedule;
    GrpoConfig cfg;
    cfg.steps = 2000;
    cfg.eval_every = 50;
    cfg.seed = 404;
    auto result = run_passive(policy, scored, schedule, cfg);

    double ceiling = mean_max_reward(scored, kPhase3Weights);
    double final_reward = result.evals.back().mean_expected_reward;
    bool target_ok = final_reward > 0.95 * ceiling;

    // Trend: the eval curve split into quarters must be non-decreasing in
    // block means, with a small stochastic slack.
    const auto& evals = result.evals;
    std::size_t q = evals.size() / 4;
    bool trend_ok = q >= 1;
    double prev = -1e9;
    for (int block = 0; block < 4 && trend_ok; ++block) {
        double mean = 0.0;
        for (std::size_t i = static_cast<std::size_t>(block) * q;
             i < static_cast<std::size_t>(block + 1) * q; ++i) {
            mean += evals[i].mean_expected_reward;
        }
        mean /= static_cast<double>(q);
        if (mean < prev - 0.02) trend_ok = false;
        prev = mean;
    }

    double secs = elapsed_s(t0);
    bool ok = target_ok && trend_ok && secs < 60.0;
    std::ostringstream d;
    d << std::fixed << "final expected reward " << final_reward << " vs 0.95*"
      << ceiling << " ceiling = " << 0.95 * ceiling << ", trend "
      << (trend_ok ? "up" : "broken") << ", " << secs << "s";
    report("grpo-learning", ok, d.str());
}

// ---------------------------------------------------------------------------
// Active-routing efficiency: routed stage-3 hits 0.9*max in at most 0.8x the
// updates of the uniform baseline (median over 5 seeds) and ends with a
// strictly higher grounding component at equal budget.

int steps_to_reach(const std::vector<EvalPoint>& evals, double target,
                   int budget) {
    for (const auto& e : evals) {
        if (e.mean_expected_reward >= target) return e.step;
    }
    return budget + 1;
}

void check_routing_efficiency() {
    const int kSteps = 1000;
    std::vector<double> ratios;
    int ground_wins = 0;
    std::ostringstream per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        NoiseModel noise;
        noise.seed = seed;
        auto corpus = gen_corpus(builtin_taxonomy(), 48, noise, 4, seed);
        auto scored = score_corpus(corpus, false, RewardParams{}, kEmbedder);
        double target = 0.9 * mean_max_reward(scored, kPhase3Weights);

        ToyPolicy routed, baseline;
        routed.randomize(corpus, 4, seed);
        baseline.randomize(corpus, 4, seed);

        Stage3Config cfg;
        cfg.steps = kSteps;
        cfg.seed = seed;
        cfg.eval_every = 25;
        cfg.thresholds.batch_size = 8;
        cfg.thresholds.hard_weight = 4.0;  // larger weights on refinement cases
        auto routed_result = stage3_loop(routed, scored, cfg);
        cfg.enable_routing = false;
        auto baseline_result = stage3_loop(baseline, scored, cfg);

        int routed_steps = steps_to_reach(routed_result.evals, target, kSteps);
        int baseline_steps =
            steps_to_reach(baseline_result.evals, target, kSteps);
        ratios.push_back(static_cast<double>(routed_steps) /
                         static_cast<double>(baseline_steps));
        if (routed_result.evals.back().mean_ground_component >
            baseline_result.evals.back().mean_ground_component) {
            ++ground_wins;
        }
        per_seed << " " << routed_steps << "/" << baseline_steps;
    }
    std::sort(ratios.begin(), ratios.end());
    double median = ratios[ratios.size() / 2];
    bool ok = median <= 0.8 && ground_wins == 5;
    std::ostringstream d;
    d << std::fixed << "median step ratio " << median
      << " (routed/baseline per seed:" << per_seed.str()
      << "), grounding wins " << ground_wins << "/5";
    report("active-routing-efficiency", ok, d.str());
}

// ---------------------------------------------------------------------------
// Routing totality and partition: every fuzzed pair lands in exactly one
// destination with the documented precedence; buffers conserve samples.

void check_routing_partition() {
    std::mt19937_64 rng(606);
    RoutingThresholds th;
    TrainingBuffer sft(TrainingBuffer::Kind::SFT, th.batch_size);
    TrainingBuffer rl(TrainingBuffer::Kind::RL, th.batch_size);
    int bad = 0;
    int counts[3] = {0, 0, 0};

    std::uniform_int_distribution<int> mode(0, 5);
    for (int t = 0; t < 10000; ++t) {
        GroundTruth gt = testutil::matching_gt();
        std::string raw;
        switch (mode(rng)) {
            case 0: raw = "garbled " + std::to_string(rng()); break;
            case 1: raw = testutil::valid_raw_clean(); break;
            case 2: raw = testutil::valid_raw_one_result(); break;
            case 3: {  // right labels, displaced interval
                ModerationOutput o;
                o.violation = true;
                o.reason = gt.reference_chain;
                double at = static_cast<double>(rng() % 20);
                o.results = {{"discomforting_content", "gory_content",
                              {at, at + 2.0}}};
                raw = serialize_output(o);
                break;
            }
            case 4: {  // right entries, drifted reasoning
                ModerationOutput o;
                o.violation = true;
                o.reason = {"orbit " + std::to_string(rng() % 9),
                            "cinder basalt", "juniper"};
                o.results = gt.results;
                raw = serialize_output(o);
                break;
            }
            default: raw = serialize_output(testutil::random_output(rng)); break;
        }
        auto parsed = parse_output(raw);
        auto breakdown = compute_breakdown(raw, gt, RewardParams{}, kEmbedder);
        auto routed = route(parsed, gt, breakdown, th);
        ++counts[static_cast<int>(routed.destination)];

        // Independent precedence oracle.
        Destination expect;
        if (!parse_ok(parsed)) {
            expect = Destination::SFT;
        } else {
            const auto& p = std::get<ModerationOutput>(parsed);
            if (p.violation != gt.violation ||
                major_set(p.results) != major_set(gt.results)) {
                expect = Destination::SFT;
            } else if (sub_set(p.results) != sub_set(gt.results)) {
                expect = Destination::RL_HARD;
            } else {
                auto iou = mean_matched_iou(p.results, gt.results);
                bool low_iou = !gt.results.empty() && (!iou || *iou < th.iou_low);
                expect = (low_iou || breakdown.reason < th.reason_low)
                             ? Destination::RL_HARD
                             : Destination::STANDARD;
            }
        }
        if (routed.destination != expect) ++bad;
        double expect_weight = routed.destination == Destination::STANDARD
                                   ? th.standard_weight
                                   : (routed.destination == Destination::SFT
                                          ? 1.0
                                          : th.hard_weight);
        if (routed.weight != expect_weight) ++bad;

        if (routed.destination == Destination::SFT) {
            if (auto batch = sft.push_and_maybe_drain(routed);
                batch && static_cast<int>(batch->size()) != th.batch_size) {
                ++bad;
            }
        } else if (routed.destination == Destination::RL_HARD) {
            if (auto batch = rl.push_and_maybe_drain(routed);
                batch && static_cast<int>(batch->size()) != th.batch_size) {
                ++bad;
            }
        }
        if (sft.total_pushed() != sft.total_drained() + sft.size()) ++bad;
        if (rl.total_pushed() != rl.total_drained() + rl.size()) ++bad;
    }

    bool each_used = counts[0] > 0 && counts[1] > 0 && counts[2] > 0;
    bool ok = bad == 0 && each_used;
    std::ostringstream d;
    d << "10000 pairs: sft " << counts[0] << ", rl_hard " << counts[1]
      << ", standard " << counts[2] << ", violations " << bad;
    report("routing-partition", ok, d.str());
}

// ---------------------------------------------------------------------------
// Eval harness: hand-derived 10-record fixture plus the worked t-test.

void check_eval_harness() {
    auto P = [](std::vector<ResultEntry> e) {
        ModerationOutput o;
        o.violation = !e.empty();
        o.results = std::move(e);
        return o;
    };
    auto G = [](std::vector<ResultEntry> e) {
        GroundTruth g;
        g.violation = !e.empty();
        g.results = std::move(e);
        g.duration = 60.0;
        return g;
    };
    std::vector<ModerationOutput> preds = {
        P({{"a", "s", {0, 10}}}),
        P({{"a", "s", {0, 5}}}),
        P({{"b", "s", {0, 10}}}),
        P({}),
        P({{"b", "s", {10, 20}}}),
        P({{"c", "s", {0, 4}}}),
        P({}),
        P({{"a", "s", {0, 10}}, {"b", "s", {0, 10}}}),
        P({{"a", "s", {0, 10}}}),
        P({{"c", "s", {20, 30}}}),
    };
    std::vector<GroundTruth> gts = {
        G({{"a", "s", {0, 10}}}),
        G({{"a", "s", {0, 10}}}),
        G({{"a", "s", {0, 10}}}),
        G({{"b", "s", {10, 20}}}),
        G({{"b", "s", {10, 20}}}),
        G({}),
        G({}),
        G({{"a", "s", {5, 15}}, {"b", "s", {0, 10}}}),
        G({{"a", "s", {0, 10}}, {"c", "s", {20, 30}}}),
        G({{"c", "s", {25, 35}}}),
    };
    auto rep = evaluate(preds, gts);

    // Hand-derived confusion: a tp4 fp0 fn1, b tp2 fp1 fn1, c tp1 fp1 fn1.
    bool counts_ok =
        rep.per_major.at("a").counts.tp == 4 &&
        rep.per_major.at("a").counts.fp == 0 &&
        rep.per_major.at("a").counts.fn == 1 &&
        rep.per_major.at("b").counts.tp == 2 &&
        rep.per_major.at("b").counts.fp == 1 &&
        rep.per_major.at("b").counts.fn == 1 &&
        rep.per_major.at("c").counts.tp == 1 &&
        rep.per_major.at("c").counts.fp == 1 &&
        rep.per_major.at("c").counts.fn == 1;
    double want_p = (1.0 + 2.0 / 3.0 + 0.5) / 3.0;          // 13/18
    double want_r = (4.0 / 5.0 + 2.0 / 3.0 + 0.5) / 3.0;    // 59/90
    double want_miou = (1.0 + 0.5 + 0 + 0 + 1.0 + (1.0 / 3.0 + 1.0) + 1.0 +
                        1.0 / 3.0) / 10.0;                  // 31/60
    bool avg_ok = rep.avg_precision && rep.avg_recall &&
                  std::abs(*rep.avg_precision - want_p) <= 1e-9 &&
                  std::abs(*rep.avg_recall - want_r) <= 1e-9 &&
                  std::abs(rep.miou - want_miou) <= 1e-9;

    auto tt = welch_ttest({0.1, 0.2, 0.3}, {0.4, 0.5, 0.6});
    bool ttest_ok = std::abs(tt.t - (-3.674)) <= 1e-3 &&
                    std::abs(tt.df - 4.0) <= 1e-9 &&
                    std::abs(tt.p - 0.021) <= 1e-3;

    bool ok = counts_ok && avg_ok && ttest_ok;
    std::ostringstream d;
    d << std::fixed << "fixture P " << (rep.avg_precision ? *rep.avg_precision : -1)
      << " R " << (rep.avg_recall ? *rep.avg_recall : -1) << " mIoU "
      << rep.miou << "; welch t " << tt.t << " df " << tt.df << " p " << tt.p;
    report("eval-harness", ok, d.str());
}

// ---------------------------------------------------------------------------
// Reproducibility: identical config + seed gives byte-identical metric logs.

std::vector<std::string> run_pipeline_metrics() {
    NoiseModel noise;
    noise.seed = 77;
    auto corpus = gen_corpus(builtin_taxonomy(), 24, noise, 4, 77);
    auto scored_noisy = score_corpus(corpus, true, RewardParams{}, kEmbedder);
    auto scored_true = score_corpus(corpus, false, RewardParams{}, kEmbedder);

    ToyPolicy policy(1.0, 1.0);
    policy.randomize(corpus, 4, 77);
    PhaseSchedule schedule;
    GrpoConfig cfg;
    cfg.steps = 150;
    cfg.seed = 77;
    auto passive = run_passive(policy, scored_noisy, schedule, cfg);

    Stage3Config s3;
    s3.steps = 150;
    s3.seed = 78;
    s3.thresholds.batch_size = 8;
    auto active = stage3_loop(policy, scored_true, s3);

    std::vector<std::string> lines;
    for (const auto& m : passive.metrics) {
        nlohmann::json j = {{"stage", "passive"},
                            {"step", m.step},
                            {"phase", m.phase},
                            {"mean_reward", m.mean_reward}};
        lines.push_back(j.dump());
    }
    for (const auto& e : active.evals) {
        nlohmann::json j = {{"stage", "active"},
                            {"step", e.step},
                            {"reward", e.mean_expected_reward},
                            {"ground", e.mean_ground_component}};
        lines.push_back(j.dump());
    }
    lines.push_back(policy.to_json());
    return lines;
}

void check_reproducibility() {
    auto a = run_pipeline_metrics();
    auto b = run_pipeline_metrics();
    bool ok = a == b;
    std::ostringstream d;
    d << a.size() << " metric lines, " << (ok ? "byte-identical" : "diverged");
    report("reproducibility", ok, d.str());
}

}  // namespace

int main() {
    check_curriculum_fidelity();
    check_parser_grammar();
    check_reward_correctness();
    check_grpo_learning();
    check_routing_efficiency();
    check_routing_partition();
    check_eval_harness();
    check_reproducibility();
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
