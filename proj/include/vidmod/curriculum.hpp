#pragma once

#include <vector>

#include "vidmod/reward.hpp"

namespace vidmod {

// Three-phase passive-RL weight schedule. Phase 1 emphasizes format and
// violation detection, phase 2 shifts to category labels and reasoning,
// phase 3 turns grounding on. Defaults are the published vectors.

inline constexpr WeightVector kPhase1Weights{1.0, 1.0, 0.5, 0.3, 0.0, 0.1};
inline constexpr WeightVector kPhase2Weights{0.5, 0.5, 1.0, 1.0, 0.0, 0.5};
inline constexpr WeightVector kPhase3Weights{0.2, 0.2, 1.0, 1.0, 1.0, 0.5};

enum class TransitionMode {
    FixedFraction,    // advance at fixed fractions of the step budget
    RewardThreshold,  // advance when windowed component means clear a bar
};

struct TransitionRule {
    TransitionMode mode = TransitionMode::RewardThreshold;
    double fraction1 = 1.0 / 3.0;  // 0 < fraction1 < fraction2 < 1
    double fraction2 = 2.0 / 3.0;
    double threshold1 = 0.9;  // windowed mean(format), mean(violation) bar
    double threshold2 = 0.9;  // windowed mean(major), mean(sub) bar
    int window = 50;          // steps per moving average

    void validate() const;
};

struct PhaseSchedule {
    WeightVector phase1 = kPhase1Weights;
    WeightVector phase2 = kPhase2Weights;
    WeightVector phase3 = kPhase3Weights;
    TransitionRule transition;

    const WeightVector& weights_for_phase(int phase) const;
};

// Phase at `step` of a `total`-step run. `history` holds one breakdown per
// completed step, in order; threshold mode replays it with latching so the
// phase index never decreases whatever the reward sequence does.
int phase_of(const PhaseSchedule& schedule, int step, int total,
             const std::vector<RewardBreakdown>& history);

WeightVector weights_at(const PhaseSchedule& schedule, int step, int total,
                        const std::vector<RewardBreakdown>& history);

}  // namespace vidmod
