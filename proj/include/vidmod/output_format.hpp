#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vidmod {

// Tagged moderation-output wire format:
//   <think>...</think>
//   <reason>content summarization: ... risk analysis: ... conclusion: ...</reason>
//   <violation>Y|N</violation>
//   <result>{major: ..., sub: ..., ground: [l, r]}</result>  (zero or more)
// Whitespace between tags is insignificant; section labels match
// case-insensitively. N implies no <result> blocks, Y implies at least one.

struct ReasoningChain {
    std::string summarization;
    std::string risk_analysis;
    std::string conclusion;

    bool operator==(const ReasoningChain&) const = default;
};

struct TimeInterval {
    double start = 0.0;  // seconds, 0 <= start <= end
    double end = 0.0;

    bool operator==(const TimeInterval&) const = default;
};

struct ResultEntry {
    std::string major;
    std::string sub;
    TimeInterval ground;

    bool operator==(const ResultEntry&) const = default;
};

struct ModerationOutput {
    std::string think;
    ReasoningChain reason;
    bool violation = false;
    std::vector<ResultEntry> results;

    bool operator==(const ModerationOutput&) const = default;
};

enum class ParseErrorKind {
    MissingTag,
    TagOrder,
    MissingReasonSection,
    BadViolationToken,
    MalformedResultBody,
    IntervalOrder,
    InvariantViolation,  // Y/N flag inconsistent with result count
};

std::string_view to_string(ParseErrorKind kind);

struct ParseFailure {
    ParseErrorKind kind;
    std::size_t offset = 0;  // byte offset of the first violated rule
    std::string message;
};

using ParseResult = std::variant<ModerationOutput, ParseFailure>;

inline bool parse_ok(const ParseResult& r) {
    return std::holds_alternative<ModerationOutput>(r);
}

ParseResult parse_output(std::string_view raw);

// Canonical serialization; parse_output(serialize_output(o)) == o for any
// valid o whose free text cannot be confused with grammar markers.
// Throws std::invalid_argument when invariants are violated or a text field
// embeds a closing tag / section label.
std::string serialize_output(const ModerationOutput& out);

// Indicator component of the reward: 1 iff raw parses.
double format_reward(std::string_view raw);

// Fixed-point two-decimal formatting used for ground endpoints.
std::string format_seconds(double v);

}  // namespace vidmod
