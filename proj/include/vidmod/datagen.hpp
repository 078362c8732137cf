#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vidmod/reward.hpp"
#include "vidmod/taxonomy.hpp"

namespace vidmod {

// Knowledge-injection QA generation plus the synthetic moderation corpus the
// desk-scale training loops run against. Every sample carries a precise
// ground truth Z, a noise-perturbed annotation Y, and K candidate outputs
// (index 0 correct, the rest corrupted by a single defect each).

struct QAPair {
    std::string question;
    std::string answer;
    enum class Kind { AdKnowledge, RuleKnowledge } kind = Kind::RuleKnowledge;
};

struct AdInfo {
    std::string product_type;  // e.g. "sunscreen"
    std::string product_name;  // e.g. "XXX"
    std::string audience;      // e.g. "18-60"
};

struct NoiseModel {
    double sigma = 1.0;     // endpoint jitter stddev, seconds
    double p_sub = 0.05;    // sub-label flip probability
    double p_violation = 0.02;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class DefectClass {
    WrongSub,
    ShiftedInterval,
    BrokenFormat,
    WrongViolation,
    DriftedReasoning,
};

struct SyntheticSample {
    std::string id;
    double duration = 0.0;
    std::string prompt;
    AdInfo ad;
    GroundTruth truth;  // precise annotation Z
    GroundTruth noisy;  // coarse annotation Y, derived from Z
    std::vector<std::string> candidates;  // raw outputs; [0] is correct
};

struct SummaryResponse {
    std::string summary;
    std::vector<QAPair> qa;
};

class SummarizerClient {
  public:
    virtual ~SummarizerClient() = default;
    virtual std::optional<SummaryResponse> summarize(
        const std::string& video_id) = 0;
};

// POST {"video_id": ...} -> {"summary": ..., "qa": [{"question","answer"}]}.
class HttpSummarizerClient final : public SummarizerClient {
  public:
    explicit HttpSummarizerClient(std::string url, int timeout_sec = 2);
    std::optional<SummaryResponse> summarize(const std::string& video_id) override;

  private:
    std::string host_;
    std::string path_;
    int timeout_sec_;
};

// Client when SUMMARIZER_URL is set, nullptr otherwise.
std::unique_ptr<SummarizerClient> make_summarizer_from_env();

// One QA per major (subs + rules) and one per sub (its rules):
// |majors| + sum(|subs|) pairs, deterministic order.
std::vector<QAPair> gen_rule_qa(const LabelTree& tree);

// Template QA from structured ad fields; a configured client takes priority
// and falls back to the templates (with a warning) when unreachable.
std::vector<QAPair> gen_ad_qa(const AdInfo& info, SummarizerClient* client,
                              const std::string& video_id = "");

std::vector<SyntheticSample> gen_corpus(const LabelTree& tree, int n,
                                        const NoiseModel& noise, int k,
                                        std::uint64_t seed);

// Stage-1 joint SFT file: QA lines mixed with precise-annotation targets at
// roughly qa_per_precise QA pairs per annotated sample.
std::vector<std::string> joint_sft_lines(const LabelTree& tree,
                                         const std::vector<SyntheticSample>& corpus,
                                         int qa_per_precise = 10);

// Corpus JSONL (one sample per line) round-trip.
std::string sample_to_json(const SyntheticSample& s);
SyntheticSample sample_from_json(const std::string& line);

// GroundTruth <-> JSON used by corpus, scoring, and feedback files. The
// duration lives alongside the record; throws std::invalid_argument with a
// reason on schema violations (including interval order).
std::string gt_to_json(const GroundTruth& gt);
GroundTruth gt_from_json_text(const std::string& text);

}  // namespace vidmod
