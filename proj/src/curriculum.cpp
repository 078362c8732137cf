#include "vidmod/curriculum.hpp"

#include <stdexcept>

namespace vidmod {

void TransitionRule::validate() const {
    if (mode == TransitionMode::FixedFraction) {
        if (!(0.0 < fraction1 && fraction1 < fraction2 && fraction2 < 1.0)) {
            throw std::invalid_argument(
                "transition fractions require 0 < f1 < f2 < 1");
        }
    }
    if (window < 1) throw std::invalid_argument("transition window must be >= 1");
}

const WeightVector& PhaseSchedule::weights_for_phase(int phase) const {
    switch (phase) {
        case 1: return phase1;
        case 2: return phase2;
        case 3: return phase3;
        default: throw std::invalid_argument("phase must be 1, 2, or 3");
    }
}

namespace {

struct WindowMeans {
    double format = 0.0;
    double violation = 0.0;
    double major = 0.0;
    double sub = 0.0;
};

WindowMeans trailing_means(const std::vector<RewardBreakdown>& history,
                           std::size_t upto, int window) {
    WindowMeans m;
    std::size_t w = static_cast<std::size_t>(window);
    if (upto == 0) return m;
    std::size_t lo = upto > w ? upto - w : 0;
    double n = static_cast<double>(upto - lo);
    for (std::size_t i = lo; i < upto; ++i) {
        m.format += history[i].format;
        m.violation += history[i].violation;
        m.major += history[i].major;
        m.sub += history[i].sub;
    }
    m.format /= n;
    m.violation /= n;
    m.major /= n;
    m.sub /= n;
    return m;
}

}  // namespace

int phase_of(const PhaseSchedule& schedule, int step, int total,
             const std::vector<RewardBreakdown>& history) {
    if (step < 0 || step >= total) {
        throw std::out_of_range("step must be in [0, total)");
    }
    const TransitionRule& rule = schedule.transition;
    rule.validate();

    if (rule.mode == TransitionMode::FixedFraction) {
        double frac = static_cast<double>(step) / static_cast<double>(total);
        if (frac < rule.fraction1) return 1;
        if (frac < rule.fraction2) return 2;
        return 3;
    }

    // Reward-threshold mode: replay the history with a latched phase. A full
    // window of steps must elapse inside the current phase before its gate is
    // evaluated, so means from the previous phase cannot trigger a skip.
    int phase = 1;
    std::size_t phase_start = 0;
    std::size_t upto =
        std::min(history.size(), static_cast<std::size_t>(step));
    std::size_t w = static_cast<std::size_t>(rule.window);
    for (std::size_t i = 0; i < upto; ++i) {
        if (i + 1 < phase_start + w) continue;
        WindowMeans m = trailing_means(history, i + 1, rule.window);
        if (phase == 1 && m.format > rule.threshold1 &&
            m.violation > rule.threshold1) {
            phase = 2;
            phase_start = i + 1;
        } else if (phase == 2 && m.major > rule.threshold2 &&
                   m.sub > rule.threshold2) {
            phase = 3;
            break;
        }
    }
    return phase;
}

WeightVector weights_at(const PhaseSchedule& schedule, int step, int total,
                        const std::vector<RewardBreakdown>& history) {
    return schedule.weights_for_phase(phase_of(schedule, step, total, history));
}

}  // namespace vidmod
