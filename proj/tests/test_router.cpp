#include <doctest.h>

#include "test_helpers.hpp"
#include "vidmod/router.hpp"

using namespace vidmod;

namespace {

const ReferenceEmbedder kEmbedder;

RoutedSample route_raw(const std::string& raw, const GroundTruth& gt,
                       const RoutingThresholds& th = {}) {
    auto parsed = parse_output(raw);
    auto breakdown = compute_breakdown(raw, gt, RewardParams{}, kEmbedder);
    return route(parsed, gt, breakdown, th);
}

std::string raw_with(const std::string& major, const std::string& sub,
                     double l, double r) {
    ModerationOutput out;
    out.violation = true;
    out.reason = {"an ad for a blender", "a gory scene appears early",
                  "the ad violates policy"};
    out.results = {{major, sub, {l, r}}};
    return serialize_output(out);
}

}  // namespace

TEST_CASE("route precedence: parse failures and violation misses go to SFT") {
    auto gt = testutil::matching_gt();
    auto r = route_raw("garbage", gt);
    CHECK(r.destination == Destination::SFT);
    CHECK(r.trigger == RouteTrigger::ViolationMiss);

    r = route_raw(testutil::valid_raw_clean(), gt);  // says N, truth is Y
    CHECK(r.destination == Destination::SFT);
    CHECK(r.trigger == RouteTrigger::ViolationMiss);
}

TEST_CASE("route: major-set mismatch is an SFT case") {
    auto gt = testutil::matching_gt();
    auto r = route_raw(raw_with("vulgar_content", "crude_language", 3, 9.5), gt);
    CHECK(r.destination == Destination::SFT);
    CHECK(r.trigger == RouteTrigger::MajorMiss);
    CHECK(r.weight == 1.0);
}

TEST_CASE("route: sub mismatch with correct major is weighted RL") {
    auto gt = testutil::matching_gt();
    auto r = route_raw(
        raw_with("discomforting_content", "horror_imagery", 3, 9.5), gt);
    CHECK(r.destination == Destination::RL_HARD);
    CHECK(r.trigger == RouteTrigger::SubMiss);
    CHECK(r.weight == 1.0);
}

TEST_CASE("route: poor grounding overlap is weighted RL") {
    auto gt = testutil::matching_gt();
    // Same labels, interval far off: IoU well under 0.5.
    auto r = route_raw(raw_with("discomforting_content", "gory_content", 20, 25),
                       gt);
    CHECK(r.destination == Destination::RL_HARD);
    CHECK(r.trigger == RouteTrigger::LowIoU);
}

TEST_CASE("route: reasoning drift is weighted RL") {
    auto gt = testutil::matching_gt();
    ModerationOutput out;
    out.violation = true;
    out.reason = {"totally unrelated words", "nothing matches here",
                  "different conclusion entirely"};
    out.results = gt.results;
    auto r = route_raw(serialize_output(out), gt);
    CHECK(r.destination == Destination::RL_HARD);
    CHECK(r.trigger == RouteTrigger::ReasonDrift);
}

TEST_CASE("route: a good decode runs standard RL with the small weight") {
    auto gt = testutil::matching_gt();
    auto r = route_raw(testutil::valid_raw_one_result(), gt);
    CHECK(r.destination == Destination::STANDARD);
    CHECK(r.trigger == RouteTrigger::None);
    CHECK(r.weight == doctest::Approx(0.1));
}

TEST_CASE("route threshold knobs move the boundary") {
    auto gt = testutil::matching_gt();
    // Slightly reworded conclusion: reason score lands below 1 but well
    // above the default bar.
    ModerationOutput near;
    near.violation = true;
    near.reason = {"an ad for a blender", "a gory scene appears early",
                   "the ad maybe violates policy"};
    near.results = gt.results;
    std::string near_raw = serialize_output(near);
    CHECK(route_raw(near_raw, gt).destination == Destination::STANDARD);

    RoutingThresholds strict;
    strict.reason_low = 1.0;  // any drift at all now counts
    auto r = route_raw(near_raw, gt, strict);
    CHECK(r.destination == Destination::RL_HARD);
    CHECK(r.trigger == RouteTrigger::ReasonDrift);

    RoutingThresholds lax;
    lax.iou_low = 0.0;
    lax.reason_low = 0.0;
    r = route_raw(raw_with("discomforting_content", "gory_content", 20, 25), gt,
                  lax);
    CHECK(r.destination == Destination::STANDARD);
}

TEST_CASE("routing thresholds validate") {
    RoutingThresholds th;
    th.standard_weight = 2.0;  // must stay below hard_weight
    CHECK_THROWS_AS(th.validate(), std::invalid_argument);
    th = {};
    th.batch_size = 0;
    CHECK_THROWS_AS(th.validate(), std::invalid_argument);
    th = {};
    th.iou_low = 1.5;
    CHECK_THROWS_AS(th.validate(), std::invalid_argument);
}

TEST_CASE("training buffer drains FIFO batches and counts flow") {
    TrainingBuffer buf(TrainingBuffer::Kind::SFT, 3);
    RoutedSample s;
    s.destination = Destination::SFT;
    s.sample_id = "a";
    CHECK_FALSE(buf.push_and_maybe_drain(s).has_value());
    s.sample_id = "b";
    CHECK_FALSE(buf.push_and_maybe_drain(s).has_value());
    s.sample_id = "c";
    auto batch = buf.push_and_maybe_drain(s);
    REQUIRE(batch.has_value());
    REQUIRE(batch->size() == 3);
    CHECK((*batch)[0].sample_id == "a");
    CHECK((*batch)[1].sample_id == "b");
    CHECK((*batch)[2].sample_id == "c");
    CHECK(buf.size() == 0);
    CHECK(buf.total_pushed() == 3);
    CHECK(buf.total_drained() == 3);

    RoutedSample wrong;
    wrong.destination = Destination::RL_HARD;
    CHECK_THROWS_AS(buf.push_and_maybe_drain(wrong), std::invalid_argument);
    RoutedSample standard;
    standard.destination = Destination::STANDARD;
    CHECK_THROWS_AS(buf.push_and_maybe_drain(standard), std::invalid_argument);
}

TEST_CASE("stage3_loop runs, logs routes, and improves the policy") {
    NoiseModel noise;
    noise.seed = 5;
    auto corpus = gen_corpus(builtin_taxonomy(), 8, noise, 4, 5);
    auto scored = score_corpus(corpus, false, RewardParams{}, kEmbedder);

    ToyPolicy policy;
    policy.randomize(corpus, 4, 5);
    Stage3Config cfg;
    cfg.steps = 300;
    cfg.seed = 5;
    cfg.thresholds.batch_size = 4;
    auto before = evaluate_policy(policy, scored, cfg.weights, 0);
    auto result = stage3_loop(policy, scored, cfg);
    auto after = evaluate_policy(policy, scored, cfg.weights, cfg.steps);

    CHECK(result.log.size() == 300);  // every routed step is logged
    CHECK(after.mean_expected_reward > before.mean_expected_reward);
    REQUIRE_FALSE(result.evals.empty());
    CHECK(result.evals.back().step == 300);
    for (const auto& rec : result.log) {
        if (rec.routed.destination == Destination::STANDARD) {
            CHECK(rec.routed.weight == doctest::Approx(0.1));
        }
    }
}

TEST_CASE("stage3_loop baseline disables routing entirely") {
    NoiseModel noise;
    noise.seed = 6;
    auto corpus = gen_corpus(builtin_taxonomy(), 4, noise, 4, 6);
    auto scored = score_corpus(corpus, false, RewardParams{}, kEmbedder);
    ToyPolicy policy;
    policy.randomize(corpus, 4, 6);
    Stage3Config cfg;
    cfg.steps = 50;
    cfg.seed = 6;
    cfg.enable_routing = false;
    auto result = stage3_loop(policy, scored, cfg);
    CHECK(result.log.empty());
    CHECK(result.sft_batches == 0);
    CHECK(result.rl_batches == 0);
}

TEST_CASE("stage3_loop is reproducible for a fixed seed") {
    NoiseModel noise;
    noise.seed = 9;
    auto corpus = gen_corpus(builtin_taxonomy(), 4, noise, 4, 9);
    auto scored = score_corpus(corpus, false, RewardParams{}, kEmbedder);
    Stage3Config cfg;
    cfg.steps = 80;
    cfg.seed = 9;
    ToyPolicy a, b;
    a.randomize(corpus, 4, 9);
    b.randomize(corpus, 4, 9);
    auto ra = stage3_loop(a, scored, cfg);
    auto rb = stage3_loop(b, scored, cfg);
    CHECK(a.to_json() == b.to_json());
    REQUIRE(ra.log.size() == rb.log.size());
    for (std::size_t i = 0; i < ra.log.size(); ++i) {
        CHECK(ra.log[i].routed.destination == rb.log[i].routed.destination);
    }
}

TEST_CASE("reviewer feedback ingestion validates, replaces, and prioritizes") {
    NoiseModel noise;
    noise.seed = 2;
    auto dataset = gen_corpus(builtin_taxonomy(), 3, noise, 4, 2);
    std::string known_id = dataset[1].id;

    std::vector<std::string> lines = {
        // New valid record without candidates: two are synthesized.
        R"({"id": "fb_new", "duration": 30.0, "violation": true,)"
        R"( "results": [{"major": "vulgar_content", "sub": "crude_language",)"
        R"( "ground": [1.0, 4.0]}],)"
        R"( "reasoning": {"summarization": "a", "risk_analysis": "b",)"
        R"( "conclusion": "c"}, "source": "reviewer"})",
        // Replacement for an existing id.
        R"({"id": ")" + known_id + R"(", "duration": 30.0, "violation": false,)"
        R"( "results": [], "reasoning": {"summarization": "x",)"
        R"( "risk_analysis": "y", "conclusion": "z"}, "source": "reviewer"})",
        // Invalid: interval outside the duration.
        R"({"id": "fb_bad", "duration": 5.0, "violation": true,)"
        R"( "results": [{"major": "m", "sub": "s", "ground": [1.0, 9.0]}],)"
        R"( "reasoning": {"summarization": "a", "risk_analysis": "b",)"
        R"( "conclusion": "c"}, "source": "reviewer"})",
        "not json at all",
    };

    auto outcome = ingest_reviewer_feedback(dataset, lines);
    CHECK(outcome.added == 1);
    CHECK(outcome.replaced == 1);
    REQUIRE(outcome.rejected.size() == 2);
    CHECK(outcome.rejected[0].find("fb_bad") == 0);

    // Both reviewer records sit at the front of the queue.
    CHECK(dataset.size() == 4);
    CHECK((dataset[0].id == "fb_new" || dataset[0].id == known_id));
    CHECK((dataset[1].id == "fb_new" || dataset[1].id == known_id));
    CHECK(dataset[0].id != dataset[1].id);

    // Synthesized candidates: index 0 parses to the truth, index 1 is broken.
    const auto& fresh = dataset[0].id == "fb_new" ? dataset[0] : dataset[1];
    REQUIRE(fresh.candidates.size() == 2);
    auto parsed = parse_output(fresh.candidates[0]);
    REQUIRE(parse_ok(parsed));
    CHECK(std::get<ModerationOutput>(parsed).violation == fresh.truth.violation);
    CHECK_FALSE(parse_ok(parse_output(fresh.candidates[1])));
}
