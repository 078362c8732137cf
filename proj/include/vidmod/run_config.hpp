#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vidmod/curriculum.hpp"
#include "vidmod/datagen.hpp"
#include "vidmod/grpo.hpp"
#include "vidmod/router.hpp"

namespace vidmod {

// Validated training-run configuration. Unknown keys anywhere in the JSON
// are rejected so typos fail loudly instead of silently using defaults.

struct CorpusConfig {
    int n = 200;
    int k = 8;
    NoiseModel noise;
};

struct ActiveConfig {
    int steps = 2000;
    double learning_rate_scale = 0.1;  // relative to the stage-2 rate
    int eval_every = 25;
    std::optional<std::string> feedback_path;  // reviewer feedback JSONL
};

struct RunConfig {
    std::optional<std::string> taxonomy_path;  // builtin fixture when absent
    CorpusConfig corpus;
    RewardParams reward;
    PhaseSchedule schedule;
    GrpoConfig grpo;
    RoutingThresholds routing;
    ActiveConfig active;
    int qa_per_precise = 10;
    std::string output_dir = "run_out";

    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
    std::string to_json_text() const;  // canonical snapshot
};

struct RunArtifacts {
    std::string config_snapshot;  // config.json
    std::vector<std::string> metrics_lines;   // metrics.jsonl
    std::vector<std::string> eval_lines;      // evals.jsonl
    std::vector<std::string> routing_lines;   // routing.jsonl
    std::vector<std::string> sft_data_lines;  // sft_data.jsonl
    std::string policy_json;                  // policy.json
};

struct ManifestEntry {
    std::string name;
    std::string hash;  // fnv1a-64 of file bytes, hex
    std::size_t bytes = 0;
};

// Writes every non-empty artifact under `dir` (created if missing) plus a
// manifest.json listing each emitted file with its content hash. Identical
// config + seed reproduces identical hashes.
std::vector<ManifestEntry> persist_run(const std::string& dir,
                                       const RunArtifacts& artifacts);

std::string fnv1a64_hex(const std::string& bytes);

}  // namespace vidmod
