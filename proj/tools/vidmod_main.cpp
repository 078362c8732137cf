// vidmod: synthetic video-ad moderation training pipeline.
//
// Subcommands: taxonomy validate, gen qa, gen corpus, parse, score,
// train (stages: sft-data | passive | active), route, eval, ttest.
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 runtime failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vidmod/curriculum.hpp"
#include "vidmod/datagen.hpp"
#include "vidmod/eval.hpp"
#include "vidmod/grpo.hpp"
#include "vidmod/output_format.hpp"
#include "vidmod/reward.hpp"
#include "vidmod/router.hpp"
#include "vidmod/run_config.hpp"
#include "vidmod/taxonomy.hpp"

namespace {

using nlohmann::json;
using namespace vidmod;

class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open \"" + path + "\"");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
    out << content;
}

LabelTree load_tree(const std::string& path) {
    return path.empty() ? builtin_taxonomy() : load_taxonomy(path);
}

json parse_result_to_json(const ParseResult& r) {
    if (parse_ok(r)) {
        const auto& out = std::get<ModerationOutput>(r);
        json entries = json::array();
        for (const auto& e : out.results) {
            entries.push_back({{"major", e.major},
                               {"sub", e.sub},
                               {"ground", {e.ground.start, e.ground.end}}});
        }
        return {{"ok", true},
                {"violation", out.violation},
                {"reason",
                 {{"summarization", out.reason.summarization},
                  {"risk_analysis", out.reason.risk_analysis},
                  {"conclusion", out.reason.conclusion}}},
                {"results", entries}};
    }
    const auto& f = std::get<ParseFailure>(r);
    return {{"ok", false},
            {"error", std::string(to_string(f.kind))},
            {"offset", f.offset},
            {"message", f.message}};
}

json breakdown_line(const RewardBreakdown& b, const WeightVector& w,
                    const std::string& id) {
    json j = {{"breakdown",
               {{"format", b.format},
                {"violation", b.violation},
                {"major", b.major},
                {"sub", b.sub},
                {"ground", b.ground},
                {"reason", b.reason}}},
              {"aggregate", aggregate(b, w)}};
    if (!id.empty()) j["id"] = id;
    return j;
}

WeightVector parse_weights_csv(const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != 6) {
        throw DataError("--weights needs 6 comma-separated values");
    }
    return {vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]};
}

struct ScoreInput {
    std::string id;
    std::string raw;
    GroundTruth gt;
};

std::vector<ScoreInput> load_score_inputs(const std::string& combined,
                                          const std::string& preds,
                                          const std::string& gts) {
    std::vector<ScoreInput> inputs;
    if (!combined.empty()) {
        for (const auto& line : read_lines(combined)) {
            json j = json::parse(line);
            ScoreInput in;
            in.id = j.value("id", "");
            in.raw = j.at("raw").get<std::string>();
            in.gt = gt_from_json_text(j.at("gt").dump());
            inputs.push_back(std::move(in));
        }
        return inputs;
    }
    if (preds.empty() || gts.empty()) {
        throw DataError("score needs --in, or both --preds and --gt");
    }
    std::map<std::string, GroundTruth> by_id;
    for (const auto& line : read_lines(gts)) {
        json j = json::parse(line);
        by_id[j.at("id").get<std::string>()] = gt_from_json_text(line);
    }
    for (const auto& line : read_lines(preds)) {
        json j = json::parse(line);
        ScoreInput in;
        in.id = j.at("id").get<std::string>();
        in.raw = j.at("raw").get<std::string>();
        auto it = by_id.find(in.id);
        if (it == by_id.end()) {
            throw DataError("no ground truth for id \"" + in.id + "\"");
        }
        in.gt = it->second;
        inputs.push_back(std::move(in));
    }
    return inputs;
}

void emit_lines(const std::vector<std::string>& lines, const std::string& out) {
    if (out.empty()) {
        for (const auto& l : lines) std::cout << l << "\n";
    } else {
        std::string joined;
        for (const auto& l : lines) {
            joined += l;
            joined += '\n';
        }
        write_text(out, joined);
    }
}

std::vector<std::string> metrics_to_lines(const PassiveRunResult& run) {
    std::vector<std::string> lines;
    for (const auto& m : run.metrics) {
        json j = {{"step", m.step},
                  {"phase", m.phase},
                  {"mean_reward", m.mean_reward},
                  {"components",
                   {{"format", m.component_means.format},
                    {"violation", m.component_means.violation},
                    {"major", m.component_means.major},
                    {"sub", m.component_means.sub},
                    {"ground", m.component_means.ground},
                    {"reason", m.component_means.reason}}}};
        lines.push_back(j.dump());
    }
    return lines;
}

std::vector<std::string> evals_to_lines(const std::vector<EvalPoint>& evals,
                                        const std::string& stage) {
    std::vector<std::string> lines;
    for (const auto& e : evals) {
        json j = {{"stage", stage},
                  {"step", e.step},
                  {"mean_expected_reward", e.mean_expected_reward},
                  {"mean_ground_component", e.mean_ground_component}};
        lines.push_back(j.dump());
    }
    return lines;
}

int run_train(const std::string& config_path, const std::string& stages_csv,
              const std::string& out_override) {
    RunConfig cfg = RunConfig::from_file(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;

    std::set<std::string> stages;
    std::stringstream ss(stages_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) stages.insert(tok);
    for (const auto& s : stages) {
        if (s != "sft-data" && s != "passive" && s != "active") {
            throw DataError("unknown stage \"" + s + "\"");
        }
    }

    LabelTree tree = cfg.taxonomy_path ? load_taxonomy(*cfg.taxonomy_path)
                                       : builtin_taxonomy();
    auto corpus = gen_corpus(tree, cfg.corpus.n, cfg.corpus.noise, cfg.corpus.k,
                             cfg.grpo.seed);
    auto provider = make_embedder_from_env();

    RunArtifacts artifacts;
    artifacts.config_snapshot = cfg.to_json_text();

    if (stages.count("sft-data")) {
        artifacts.sft_data_lines = joint_sft_lines(tree, corpus, cfg.qa_per_precise);
    }

    ToyPolicy policy(cfg.grpo.learning_rate, cfg.grpo.temperature);
    if (stages.count("passive")) {
        auto scored = score_corpus(corpus, true, cfg.reward, *provider);
        auto run = run_passive(policy, scored, cfg.schedule, cfg.grpo);
        artifacts.metrics_lines = metrics_to_lines(run);
        auto ev = evals_to_lines(run.evals, "passive");
        artifacts.eval_lines.insert(artifacts.eval_lines.end(), ev.begin(),
                                    ev.end());
        for (auto [step, phase] : run.phase_transitions) {
            std::cerr << "phase transition at step " << step << " -> phase "
                      << phase << "\n";
        }
    }
    if (stages.count("active")) {
        if (cfg.active.feedback_path) {
            auto outcome = ingest_reviewer_feedback(
                corpus, read_lines(*cfg.active.feedback_path));
            std::cerr << "feedback: " << outcome.added << " added, "
                      << outcome.replaced << " replaced, "
                      << outcome.rejected.size() << " rejected\n";
            for (const auto& r : outcome.rejected) {
                std::cerr << "  rejected " << r << "\n";
            }
        }
        auto scored = score_corpus(corpus, false, cfg.reward, *provider);
        Stage3Config s3;
        s3.thresholds = cfg.routing;
        s3.steps = cfg.active.steps;
        s3.group_size = cfg.grpo.group_size;
        s3.learning_rate = cfg.grpo.learning_rate * cfg.active.learning_rate_scale;
        s3.seed = cfg.grpo.seed + 1;
        s3.eval_every = cfg.active.eval_every;
        s3.weights = cfg.schedule.phase3;
        auto result = stage3_loop(policy, scored, s3);
        for (const auto& rec : result.log) {
            json j = {{"step", rec.step},
                      {"sample_id", rec.routed.sample_id},
                      {"destination", std::string(to_string(rec.routed.destination))},
                      {"trigger", std::string(to_string(rec.routed.trigger))},
                      {"weight", rec.routed.weight}};
            artifacts.routing_lines.push_back(j.dump());
        }
        auto ev = evals_to_lines(result.evals, "active");
        artifacts.eval_lines.insert(artifacts.eval_lines.end(), ev.begin(),
                                    ev.end());
    }
    if (stages.count("passive") || stages.count("active")) {
        artifacts.policy_json = policy.to_json();
    }

    auto manifest = persist_run(cfg.output_dir, artifacts);
    std::cerr << "wrote " << manifest.size() << " artifacts to "
              << cfg.output_dir << "\n";
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Synthetic video-ad moderation training pipeline"};
    app.require_subcommand(1);

    // taxonomy validate
    auto* taxonomy_cmd = app.add_subcommand("taxonomy", "Taxonomy utilities");
    taxonomy_cmd->require_subcommand(1);
    std::string tax_path;
    auto* validate_cmd =
        taxonomy_cmd->add_subcommand("validate", "Validate a taxonomy file");
    validate_cmd->add_option("file", tax_path)->required();

    // gen qa / gen corpus
    auto* gen_cmd = app.add_subcommand("gen", "Data generation");
    gen_cmd->require_subcommand(1);
    std::string gen_tax, gen_out, gen_corpus_in;
    auto* qa_cmd = gen_cmd->add_subcommand("qa", "Knowledge-injection QA pairs");
    qa_cmd->add_option("--taxonomy", gen_tax);
    qa_cmd->add_option("--corpus", gen_corpus_in,
                       "Also emit ad QA from this corpus JSONL");
    qa_cmd->add_option("--out", gen_out);
    int n = 200, k = 8;
    std::uint64_t seed = 0;
    NoiseModel noise;
    auto* corpus_cmd = gen_cmd->add_subcommand("corpus", "Synthetic corpus");
    corpus_cmd->add_option("--taxonomy", gen_tax);
    corpus_cmd->add_option("--n", n);
    corpus_cmd->add_option("--k", k);
    corpus_cmd->add_option("--seed", seed);
    corpus_cmd->add_option("--sigma", noise.sigma);
    corpus_cmd->add_option("--p-sub", noise.p_sub);
    corpus_cmd->add_option("--p-violation", noise.p_violation);
    corpus_cmd->add_option("--out", gen_out);

    // parse
    std::string parse_in, parse_raw;
    auto* parse_cmd = app.add_subcommand("parse", "Parse a moderation output");
    parse_cmd->add_option("--in", parse_in, "File with one raw string per line");
    parse_cmd->add_option("--raw", parse_raw, "Raw string");

    // score
    std::string score_in, score_preds, score_gt, score_out, score_weights;
    auto* score_cmd = app.add_subcommand("score", "Reward breakdowns");
    score_cmd->add_option("--in", score_in, "JSONL of {raw, gt}");
    score_cmd->add_option("--preds", score_preds, "JSONL of {id, raw}");
    score_cmd->add_option("--gt", score_gt, "JSONL of ground truths keyed by id");
    score_cmd->add_option("--out", score_out);
    score_cmd->add_option("--weights", score_weights,
                          "6 comma-separated lambdas (default phase 3)");

    // train
    std::string train_config, train_stages = "passive,active", train_out;
    auto* train_cmd = app.add_subcommand("train", "Run training stages");
    train_cmd->add_option("--config", train_config)->required();
    train_cmd->add_option("--stages", train_stages,
                          "Comma list of sft-data,passive,active");
    train_cmd->add_option("--out", train_out, "Override config output_dir");

    // route
    std::string route_in, route_out;
    RoutingThresholds route_th;
    auto* route_cmd = app.add_subcommand("route", "Offline routing of rollouts");
    route_cmd->add_option("--in", route_in, "JSONL of {id?, raw, gt}")->required();
    route_cmd->add_option("--out", route_out);
    route_cmd->add_option("--iou-low", route_th.iou_low);
    route_cmd->add_option("--reason-low", route_th.reason_low);
    route_cmd->add_option("--hard-weight", route_th.hard_weight);
    route_cmd->add_option("--standard-weight", route_th.standard_weight);

    // eval
    std::string eval_preds, eval_labels, eval_out;
    auto* eval_cmd = app.add_subcommand("eval", "Precision/recall and mIoU");
    eval_cmd->add_option("--preds", eval_preds)->required();
    eval_cmd->add_option("--labels", eval_labels)->required();
    eval_cmd->add_option("--out", eval_out, "Write report JSON here");

    // ttest
    std::string tt_a, tt_b;
    auto* tt_cmd = app.add_subcommand("ttest", "Welch's t-test on two runs");
    tt_cmd->add_option("--a", tt_a)->required();
    tt_cmd->add_option("--b", tt_b)->required();

    CLI11_PARSE(app, argc, argv);

    if (*validate_cmd) {
        load_taxonomy(tax_path);
        std::cout << "ok\n";
        return 0;
    }

    if (*qa_cmd) {
        LabelTree tree = load_tree(gen_tax);
        auto qa = gen_rule_qa(tree);
        auto client = make_summarizer_from_env();
        if (!gen_corpus_in.empty()) {
            for (const auto& line : read_lines(gen_corpus_in)) {
                auto s = sample_from_json(line);
                auto ad = gen_ad_qa(s.ad, client.get(), s.id);
                qa.insert(qa.end(), ad.begin(), ad.end());
            }
        }
        std::vector<std::string> lines;
        for (const auto& q : qa) {
            json j = {{"kind", q.kind == QAPair::Kind::AdKnowledge
                                   ? "ad-knowledge"
                                   : "rule-knowledge"},
                      {"question", q.question},
                      {"answer", q.answer}};
            lines.push_back(j.dump());
        }
        emit_lines(lines, gen_out);
        return 0;
    }

    if (*corpus_cmd) {
        LabelTree tree = load_tree(gen_tax);
        auto corpus = gen_corpus(tree, n, noise, k, seed);
        std::vector<std::string> lines;
        for (const auto& s : corpus) lines.push_back(sample_to_json(s));
        emit_lines(lines, gen_out);
        return 0;
    }

    if (*parse_cmd) {
        std::vector<std::string> raws;
        if (!parse_raw.empty()) raws.push_back(parse_raw);
        if (!parse_in.empty()) {
            auto lines = read_lines(parse_in);
            raws.insert(raws.end(), lines.begin(), lines.end());
        }
        if (raws.empty()) throw DataError("parse needs --raw or --in");
        bool all_ok = true;
        for (const auto& raw : raws) {
            auto r = parse_output(raw);
            all_ok = all_ok && parse_ok(r);
            std::cout << parse_result_to_json(r).dump() << "\n";
        }
        return all_ok ? 0 : 2;
    }

    if (*score_cmd) {
        WeightVector w = score_weights.empty() ? kPhase3Weights
                                               : parse_weights_csv(score_weights);
        auto inputs = load_score_inputs(score_in, score_preds, score_gt);
        auto provider = make_embedder_from_env();
        RewardParams params;
        std::vector<std::string> lines;
        for (const auto& in : inputs) {
            auto b = compute_breakdown(in.raw, in.gt, params, *provider);
            lines.push_back(breakdown_line(b, w, in.id).dump());
        }
        emit_lines(lines, score_out);
        return 0;
    }

    if (*train_cmd) return run_train(train_config, train_stages, train_out);

    if (*route_cmd) {
        route_th.validate();
        auto provider = make_embedder_from_env();
        RewardParams params;
        std::vector<std::string> lines;
        int step = 0;
        for (const auto& line : read_lines(route_in)) {
            json j = json::parse(line);
            GroundTruth gt = gt_from_json_text(j.at("gt").dump());
            std::string raw = j.at("raw").get<std::string>();
            auto scored = score_output(raw, gt, params, *provider);
            RoutedSample routed =
                route(scored.parsed, gt, scored.breakdown, route_th);
            routed.sample_id = j.value("id", "rec_" + std::to_string(step));
            json out = {{"step", step++},
                        {"sample_id", routed.sample_id},
                        {"destination", std::string(to_string(routed.destination))},
                        {"trigger", std::string(to_string(routed.trigger))},
                        {"weight", routed.weight}};
            lines.push_back(out.dump());
        }
        emit_lines(lines, route_out);
        return 0;
    }

    if (*eval_cmd) {
        std::map<std::string, ModerationOutput> preds_by_id;
        for (const auto& line : read_lines(eval_preds)) {
            json j = json::parse(line);
            auto r = parse_output(j.at("raw").get<std::string>());
            ModerationOutput out;  // unparsable counts as an empty prediction
            if (parse_ok(r)) out = std::get<ModerationOutput>(r);
            preds_by_id[j.at("id").get<std::string>()] = std::move(out);
        }
        std::vector<ModerationOutput> preds;
        std::vector<GroundTruth> gts;
        for (const auto& line : read_lines(eval_labels)) {
            json j = json::parse(line);
            gts.push_back(gt_from_json_text(line));
            auto it = preds_by_id.find(j.at("id").get<std::string>());
            preds.push_back(it == preds_by_id.end() ? ModerationOutput{}
                                                    : it->second);
        }
        auto report = evaluate(preds, gts);
        std::cout << report_to_table(report);
        if (!eval_out.empty()) write_text(eval_out, report_to_json(report));
        return 0;
    }

    if (*tt_cmd) {
        auto read_nums = [](const std::string& path) {
            std::vector<double> out;
            for (const auto& line : read_lines(path)) out.push_back(std::stod(line));
            return out;
        };
        auto r = welch_ttest(read_nums(tt_a), read_nums(tt_b));
        json j = {{"t", r.t}, {"df", r.df}, {"p", r.p}};
        std::cout << j.dump() << "\n";
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const vidmod::TaxonomyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
