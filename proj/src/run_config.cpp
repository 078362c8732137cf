#include "vidmod/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vidmod {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) { ok = true; break; }
        }
        if (!ok) {
            throw std::invalid_argument("config: unknown key \"" + key +
                                        "\" in " + where);
        }
    }
}

WeightVector weights_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 6) {
        throw std::invalid_argument("config: " + where +
                                    " must be a 6-element array");
    }
    WeightVector w{j[0], j[1], j[2], j[3], j[4], j[5]};
    for (double v : {w.format, w.violation, w.major, w.sub, w.ground, w.reason}) {
        if (v < 0) throw std::invalid_argument("config: negative weight in " + where);
    }
    return w;
}

json weights_to_json(const WeightVector& w) {
    return json::array({w.format, w.violation, w.major, w.sub, w.ground, w.reason});
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    RunConfig cfg;
    reject_unknown(j,
                   {"taxonomy", "corpus", "reward", "curriculum", "grpo",
                    "routing", "active", "sft", "output_dir"},
                   "top level");

    if (j.contains("taxonomy")) cfg.taxonomy_path = j["taxonomy"].get<std::string>();
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();

    if (j.contains("corpus")) {
        const json& c = j["corpus"];
        reject_unknown(c, {"n", "k", "noise"}, "corpus");
        cfg.corpus.n = c.value("n", cfg.corpus.n);
        cfg.corpus.k = c.value("k", cfg.corpus.k);
        if (c.contains("noise")) {
            const json& nz = c["noise"];
            reject_unknown(nz, {"sigma", "p_sub", "p_violation", "seed"}, "noise");
            cfg.corpus.noise.sigma = nz.value("sigma", cfg.corpus.noise.sigma);
            cfg.corpus.noise.p_sub = nz.value("p_sub", cfg.corpus.noise.p_sub);
            cfg.corpus.noise.p_violation =
                nz.value("p_violation", cfg.corpus.noise.p_violation);
            cfg.corpus.noise.seed = nz.value("seed", cfg.corpus.noise.seed);
        }
        if (cfg.corpus.n < 1 || cfg.corpus.k < 2) {
            throw std::invalid_argument("config: corpus needs n >= 1 and k >= 2");
        }
        cfg.corpus.noise.validate();
    }

    if (j.contains("reward")) {
        const json& r = j["reward"];
        reject_unknown(r, {"tversky_alpha", "tversky_beta", "per_section_reason"},
                       "reward");
        cfg.reward.tversky = TverskyParams(r.value("tversky_alpha", 0.5),
                                           r.value("tversky_beta", 0.5));
        cfg.reward.per_section_reason = r.value("per_section_reason", false);
    }

    if (j.contains("curriculum")) {
        const json& c = j["curriculum"];
        reject_unknown(c,
                       {"mode", "fractions", "thresholds", "window", "phase1",
                        "phase2", "phase3"},
                       "curriculum");
        std::string mode = c.value("mode", "reward-threshold");
        if (mode == "fixed-fraction") {
            cfg.schedule.transition.mode = TransitionMode::FixedFraction;
        } else if (mode == "reward-threshold") {
            cfg.schedule.transition.mode = TransitionMode::RewardThreshold;
        } else {
            throw std::invalid_argument("config: unknown curriculum mode \"" +
                                        mode + "\"");
        }
        if (c.contains("fractions")) {
            cfg.schedule.transition.fraction1 = c["fractions"].at(0);
            cfg.schedule.transition.fraction2 = c["fractions"].at(1);
        }
        if (c.contains("thresholds")) {
            cfg.schedule.transition.threshold1 = c["thresholds"].at(0);
            cfg.schedule.transition.threshold2 = c["thresholds"].at(1);
        }
        cfg.schedule.transition.window =
            c.value("window", cfg.schedule.transition.window);
        if (c.contains("phase1")) {
            cfg.schedule.phase1 = weights_from_json(c["phase1"], "phase1");
        }
        if (c.contains("phase2")) {
            cfg.schedule.phase2 = weights_from_json(c["phase2"], "phase2");
        }
        if (c.contains("phase3")) {
            cfg.schedule.phase3 = weights_from_json(c["phase3"], "phase3");
        }
        cfg.schedule.transition.validate();
    }

    if (j.contains("grpo")) {
        const json& g = j["grpo"];
        reject_unknown(g,
                       {"group_size", "learning_rate", "temperature", "seed",
                        "steps", "eval_every"},
                       "grpo");
        cfg.grpo.group_size = g.value("group_size", cfg.grpo.group_size);
        cfg.grpo.learning_rate = g.value("learning_rate", cfg.grpo.learning_rate);
        cfg.grpo.temperature = g.value("temperature", cfg.grpo.temperature);
        cfg.grpo.seed = g.value("seed", cfg.grpo.seed);
        cfg.grpo.steps = g.value("steps", cfg.grpo.steps);
        cfg.grpo.eval_every = g.value("eval_every", cfg.grpo.eval_every);
        if (cfg.grpo.group_size < 2 || cfg.grpo.steps < 1) {
            throw std::invalid_argument(
                "config: grpo needs group_size >= 2 and steps >= 1");
        }
    }

    if (j.contains("routing")) {
        const json& r = j["routing"];
        reject_unknown(r,
                       {"iou_low", "reason_low", "hard_weight", "standard_weight",
                        "batch_size"},
                       "routing");
        cfg.routing.iou_low = r.value("iou_low", cfg.routing.iou_low);
        cfg.routing.reason_low = r.value("reason_low", cfg.routing.reason_low);
        cfg.routing.hard_weight = r.value("hard_weight", cfg.routing.hard_weight);
        cfg.routing.standard_weight =
            r.value("standard_weight", cfg.routing.standard_weight);
        cfg.routing.batch_size = r.value("batch_size", cfg.routing.batch_size);
        cfg.routing.validate();
    }

    if (j.contains("active")) {
        const json& a = j["active"];
        reject_unknown(a,
                       {"steps", "learning_rate_scale", "eval_every", "feedback"},
                       "active");
        cfg.active.steps = a.value("steps", cfg.active.steps);
        cfg.active.learning_rate_scale =
            a.value("learning_rate_scale", cfg.active.learning_rate_scale);
        cfg.active.eval_every = a.value("eval_every", cfg.active.eval_every);
        if (a.contains("feedback")) {
            cfg.active.feedback_path = a["feedback"].get<std::string>();
        }
    }

    if (j.contains("sft")) {
        const json& s = j["sft"];
        reject_unknown(s, {"qa_per_precise"}, "sft");
        cfg.qa_per_precise = s.value("qa_per_precise", cfg.qa_per_precise);
        if (cfg.qa_per_precise < 1) {
            throw std::invalid_argument("config: qa_per_precise must be >= 1");
        }
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string RunConfig::to_json_text() const {
    json j;
    if (taxonomy_path) j["taxonomy"] = *taxonomy_path;
    j["output_dir"] = output_dir;
    j["corpus"] = {{"n", corpus.n},
                   {"k", corpus.k},
                   {"noise",
                    {{"sigma", corpus.noise.sigma},
                     {"p_sub", corpus.noise.p_sub},
                     {"p_violation", corpus.noise.p_violation},
                     {"seed", corpus.noise.seed}}}};
    j["reward"] = {{"tversky_alpha", reward.tversky.alpha},
                   {"tversky_beta", reward.tversky.beta},
                   {"per_section_reason", reward.per_section_reason}};
    j["curriculum"] = {
        {"mode", schedule.transition.mode == TransitionMode::FixedFraction
                     ? "fixed-fraction"
                     : "reward-threshold"},
        {"fractions",
         {schedule.transition.fraction1, schedule.transition.fraction2}},
        {"thresholds",
         {schedule.transition.threshold1, schedule.transition.threshold2}},
        {"window", schedule.transition.window},
        {"phase1", weights_to_json(schedule.phase1)},
        {"phase2", weights_to_json(schedule.phase2)},
        {"phase3", weights_to_json(schedule.phase3)}};
    j["grpo"] = {{"group_size", grpo.group_size},
                 {"learning_rate", grpo.learning_rate},
                 {"temperature", grpo.temperature},
                 {"seed", grpo.seed},
                 {"steps", grpo.steps},
                 {"eval_every", grpo.eval_every}};
    j["routing"] = {{"iou_low", routing.iou_low},
                    {"reason_low", routing.reason_low},
                    {"hard_weight", routing.hard_weight},
                    {"standard_weight", routing.standard_weight},
                    {"batch_size", routing.batch_size}};
    j["active"] = {{"steps", active.steps},
                   {"learning_rate_scale", active.learning_rate_scale},
                   {"eval_every", active.eval_every}};
    if (active.feedback_path) j["active"]["feedback"] = *active.feedback_path;
    j["sft"] = {{"qa_per_precise", qa_per_precise}};
    return j.dump(2);
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<ManifestEntry>& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("persist: cannot write " + path.string());
    }
    out << content;
    out.close();
    manifest.push_back({path.filename().string(), fnv1a64_hex(content),
                        content.size()});
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

}  // namespace

std::vector<ManifestEntry> persist_run(const std::string& dir,
                                       const RunArtifacts& artifacts) {
    namespace fs = std::filesystem;
    fs::path root(dir);
    fs::create_directories(root);

    std::vector<ManifestEntry> manifest;
    if (!artifacts.config_snapshot.empty()) {
        write_file(root / "config.json", artifacts.config_snapshot, manifest);
    }
    if (!artifacts.metrics_lines.empty()) {
        write_file(root / "metrics.jsonl", join_lines(artifacts.metrics_lines),
                   manifest);
    }
    if (!artifacts.eval_lines.empty()) {
        write_file(root / "evals.jsonl", join_lines(artifacts.eval_lines),
                   manifest);
    }
    if (!artifacts.routing_lines.empty()) {
        write_file(root / "routing.jsonl", join_lines(artifacts.routing_lines),
                   manifest);
    }
    if (!artifacts.sft_data_lines.empty()) {
        write_file(root / "sft_data.jsonl", join_lines(artifacts.sft_data_lines),
                   manifest);
    }
    if (!artifacts.policy_json.empty()) {
        write_file(root / "policy.json", artifacts.policy_json, manifest);
    }

    nlohmann::json jm = nlohmann::json::array();
    for (const auto& e : manifest) {
        jm.push_back({{"name", e.name}, {"hash", e.hash}, {"bytes", e.bytes}});
    }
    std::ofstream out(root / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("persist: cannot write manifest.json");
    out << jm.dump(2) << "\n";
    return manifest;
}

}  // namespace vidmod
