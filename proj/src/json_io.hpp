#pragma once

// Shared JSON (de)serialization helpers, internal to the library.

#include <optional>
#include <string>

#include <json.hpp>

#include "vidmod/output_format.hpp"
#include "vidmod/reward.hpp"

namespace vidmod::detail {

nlohmann::json chain_to_jobj(const ReasoningChain& c);
ReasoningChain chain_from_jobj(const nlohmann::json& j);

nlohmann::json entries_to_jobj(const std::vector<ResultEntry>& entries);
std::vector<ResultEntry> entries_from_jobj(const nlohmann::json& j);

nlohmann::json gt_to_jobj(const GroundTruth& gt, bool with_duration);
// Validates all GroundTruth invariants; throws std::invalid_argument with a
// reason string (e.g. "interval-order") on violation.
GroundTruth gt_from_jobj(const nlohmann::json& j,
                         std::optional<double> duration = std::nullopt);

nlohmann::json breakdown_to_jobj(const RewardBreakdown& b);

nlohmann::json output_to_jobj(const ModerationOutput& out);

}  // namespace vidmod::detail
