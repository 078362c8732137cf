#include "vidmod/output_format.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <stdexcept>

namespace vidmod {

std::string_view to_string(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::MissingTag: return "missing-tag";
        case ParseErrorKind::TagOrder: return "tag-order";
        case ParseErrorKind::MissingReasonSection: return "missing-reason-section";
        case ParseErrorKind::BadViolationToken: return "bad-violation-token";
        case ParseErrorKind::MalformedResultBody: return "malformed-result-body";
        case ParseErrorKind::IntervalOrder: return "interval-order";
        case ParseErrorKind::InvariantViolation: return "invariant-violation";
    }
    return "unknown";
}

namespace {

bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
}

void skip_ws(std::string_view raw, std::size_t& pos) {
    while (pos < raw.size() && is_ws(raw[pos])) ++pos;
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_ws(s[b])) ++b;
    while (e > b && is_ws(s[e - 1])) --e;
    return s.substr(b, e - b);
}

char lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

// Case-insensitive find, returns npos when absent.
std::size_t find_ci(std::string_view hay, std::string_view needle,
                    std::size_t from) {
    if (needle.empty() || hay.size() < needle.size()) return std::string_view::npos;
    for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
        bool hit = true;
        for (std::size_t k = 0; k < needle.size(); ++k) {
            if (lower(hay[i + k]) != lower(needle[k])) { hit = false; break; }
        }
        if (hit) return i;
    }
    return std::string_view::npos;
}

struct Cursor {
    std::string_view raw;
    std::size_t pos = 0;
};

// Expects `tag` at the cursor (after whitespace). Distinguishes a tag that
// appears later in the input (tag-order) from one absent entirely.
std::optional<ParseFailure> expect_tag(Cursor& c, std::string_view tag) {
    skip_ws(c.raw, c.pos);
    if (c.raw.substr(c.pos, tag.size()) == tag) {
        c.pos += tag.size();
        return std::nullopt;
    }
    ParseErrorKind kind = c.raw.find(tag) != std::string_view::npos
                              ? ParseErrorKind::TagOrder
                              : ParseErrorKind::MissingTag;
    return ParseFailure{kind, c.pos,
                        "expected " + std::string(tag) + " at offset " +
                            std::to_string(c.pos)};
}

// Consumes content up to (and including) the closing tag.
std::variant<std::string_view, ParseFailure> take_until(Cursor& c,
                                                        std::string_view close) {
    std::size_t at = c.raw.find(close, c.pos);
    if (at == std::string_view::npos) {
        return ParseFailure{ParseErrorKind::MissingTag, c.pos,
                            "unterminated block, expected " + std::string(close)};
    }
    std::string_view body = c.raw.substr(c.pos, at - c.pos);
    c.pos = at + close.size();
    return body;
}

std::optional<ParseFailure> parse_reason(std::string_view body, std::size_t base,
                                         ReasoningChain& chain) {
    static constexpr std::string_view kSum = "content summarization:";
    static constexpr std::string_view kRisk = "risk analysis:";
    static constexpr std::string_view kConc = "conclusion:";

    std::size_t s = find_ci(body, kSum, 0);
    if (s == std::string_view::npos) {
        return ParseFailure{ParseErrorKind::MissingReasonSection, base,
                            "missing \"content summarization:\" section"};
    }
    std::size_t r = find_ci(body, kRisk, s + kSum.size());
    if (r == std::string_view::npos) {
        return ParseFailure{ParseErrorKind::MissingReasonSection, base + s,
                            "missing \"risk analysis:\" section"};
    }
    std::size_t k = find_ci(body, kConc, r + kRisk.size());
    if (k == std::string_view::npos) {
        return ParseFailure{ParseErrorKind::MissingReasonSection, base + r,
                            "missing \"conclusion:\" section"};
    }
    chain.summarization =
        std::string(trim(body.substr(s + kSum.size(), r - s - kSum.size())));
    chain.risk_analysis =
        std::string(trim(body.substr(r + kRisk.size(), k - r - kRisk.size())));
    chain.conclusion = std::string(trim(body.substr(k + kConc.size())));
    return std::nullopt;
}

// Body shape: {major: ..., sub: ..., ground: [l, r]}
std::variant<ResultEntry, ParseFailure> parse_result_body(std::string_view body,
                                                          std::size_t base) {
    auto fail = [&](std::string msg, std::size_t off = 0,
                    ParseErrorKind kind = ParseErrorKind::MalformedResultBody) {
        return ParseFailure{kind, base + off, std::move(msg)};
    };
    std::string_view t = trim(body);
    if (t.size() < 2 || t.front() != '{' || t.back() != '}') {
        return fail("result body must be a {...} record");
    }
    std::string_view inner = t.substr(1, t.size() - 2);

    std::size_t pos = 0;
    auto take_field = [&](std::string_view key,
                          char stop) -> std::optional<std::string_view> {
        skip_ws(inner, pos);
        if (inner.substr(pos, key.size()) != key) return std::nullopt;
        pos += key.size();
        skip_ws(inner, pos);
        if (pos >= inner.size() || inner[pos] != ':') return std::nullopt;
        ++pos;
        std::size_t end = stop ? inner.find(stop, pos) : inner.size();
        if (stop && end == std::string_view::npos) return std::nullopt;
        std::string_view value = trim(inner.substr(pos, end - pos));
        pos = stop ? end + 1 : inner.size();
        return value;
    };

    ResultEntry entry;
    auto major = take_field("major", ',');
    if (!major || major->empty()) return fail("expected \"major: ...\"");
    entry.major = std::string(*major);

    auto sub = take_field("sub", ',');
    if (!sub || sub->empty()) return fail("expected \"sub: ...\"");
    entry.sub = std::string(*sub);

    auto ground = take_field("ground", '\0');
    if (!ground) return fail("expected \"ground: [l, r]\"");
    std::string_view g = *ground;
    if (g.size() < 2 || g.front() != '[' || g.back() != ']') {
        return fail("ground must be \"[l, r]\"");
    }
    std::string nums(g.substr(1, g.size() - 2));
    std::size_t comma = nums.find(',');
    if (comma == std::string::npos) return fail("ground needs two endpoints");
    auto parse_num = [](const std::string& s, double& out) {
        const std::string t2(trim(s));
        if (t2.empty()) return false;
        char* end = nullptr;
        out = std::strtod(t2.c_str(), &end);
        return end == t2.c_str() + t2.size();
    };
    double lo = 0, hi = 0;
    if (!parse_num(nums.substr(0, comma), lo) ||
        !parse_num(nums.substr(comma + 1), hi)) {
        return fail("ground endpoints must be numbers");
    }
    if (lo < 0 || hi < lo) {
        return fail("ground interval must satisfy 0 <= start <= end", 0,
                    ParseErrorKind::IntervalOrder);
    }
    entry.ground = TimeInterval{lo, hi};
    return entry;
}

}  // namespace

ParseResult parse_output(std::string_view raw) {
    Cursor c{raw, 0};
    ModerationOutput out;

    if (auto f = expect_tag(c, "<think>")) return *f;
    auto think = take_until(c, "</think>");
    if (auto* f = std::get_if<ParseFailure>(&think)) return *f;
    out.think = std::string(std::get<std::string_view>(think));

    if (auto f = expect_tag(c, "<reason>")) return *f;
    std::size_t reason_base = c.pos;
    auto reason = take_until(c, "</reason>");
    if (auto* f = std::get_if<ParseFailure>(&reason)) return *f;
    if (auto f = parse_reason(std::get<std::string_view>(reason), reason_base,
                              out.reason)) {
        return *f;
    }

    if (auto f = expect_tag(c, "<violation>")) return *f;
    std::size_t tok_at = c.pos;
    auto tok = take_until(c, "</violation>");
    if (auto* f = std::get_if<ParseFailure>(&tok)) return *f;
    std::string_view flag = trim(std::get<std::string_view>(tok));
    if (flag == "Y") {
        out.violation = true;
    } else if (flag == "N") {
        out.violation = false;
    } else {
        return ParseFailure{ParseErrorKind::BadViolationToken, tok_at,
                            "violation token must be Y or N, got \"" +
                                std::string(flag) + "\""};
    }

    skip_ws(raw, c.pos);
    while (c.pos < raw.size()) {
        if (auto f = expect_tag(c, "<result>")) return *f;
        std::size_t body_base = c.pos;
        auto body = take_until(c, "</result>");
        if (auto* f = std::get_if<ParseFailure>(&body)) return *f;
        auto entry = parse_result_body(std::get<std::string_view>(body), body_base);
        if (auto* f = std::get_if<ParseFailure>(&entry)) return *f;
        out.results.push_back(std::get<ResultEntry>(entry));
        skip_ws(raw, c.pos);
    }

    if (!out.violation && !out.results.empty()) {
        return ParseFailure{ParseErrorKind::InvariantViolation, 0,
                            "violation N requires an empty result list"};
    }
    if (out.violation && out.results.empty()) {
        return ParseFailure{ParseErrorKind::InvariantViolation, 0,
                            "violation Y requires at least one result"};
    }
    return out;
}

std::string format_seconds(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

namespace {

void require_clean_text(const std::string& text, const char* field) {
    static constexpr std::string_view kMarkers[] = {
        "</think>", "</reason>", "</violation>", "</result>",
        "content summarization:", "risk analysis:", "conclusion:"};
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), lower);
    for (auto m : kMarkers) {
        if (lowered.find(m) != std::string::npos) {
            throw std::invalid_argument(std::string(field) +
                                        " embeds grammar marker \"" +
                                        std::string(m) + "\"");
        }
    }
}

}  // namespace

std::string serialize_output(const ModerationOutput& out) {
    if (!out.violation && !out.results.empty()) {
        throw std::invalid_argument("violation N with non-empty results");
    }
    if (out.violation && out.results.empty()) {
        throw std::invalid_argument("violation Y with empty results");
    }
    require_clean_text(out.think, "think");
    require_clean_text(out.reason.summarization, "summarization");
    require_clean_text(out.reason.risk_analysis, "risk_analysis");
    require_clean_text(out.reason.conclusion, "conclusion");
    for (const auto& e : out.results) {
        if (e.major.empty() || e.sub.empty()) {
            throw std::invalid_argument("result entry with empty label");
        }
        if (e.ground.start < 0 || e.ground.end < e.ground.start) {
            throw std::invalid_argument("result interval out of order");
        }
    }

    std::string s;
    s += "<think>" + out.think + "</think>";
    s += "<reason>content summarization: " +
         std::string(trim(out.reason.summarization)) +
         " risk analysis: " + std::string(trim(out.reason.risk_analysis)) +
         " conclusion: " + std::string(trim(out.reason.conclusion)) + "</reason>";
    s += std::string("<violation>") + (out.violation ? "Y" : "N") + "</violation>";
    for (const auto& e : out.results) {
        s += "<result>{major: " + e.major + ", sub: " + e.sub + ", ground: [" +
             format_seconds(e.ground.start) + ", " + format_seconds(e.ground.end) +
             "]}</result>";
    }
    return s;
}

double format_reward(std::string_view raw) {
    return parse_ok(parse_output(raw)) ? 1.0 : 0.0;
}

}  // namespace vidmod
