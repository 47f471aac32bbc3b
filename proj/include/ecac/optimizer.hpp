#pragma once

#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ecac/call_level.hpp"
#include "ecac/config.hpp"
#include "ecac/packet_level.hpp"

namespace ecac {

/// Probability-weighted mean of per-combination drop probabilities over a
/// solved state space. `drops` must cover every state.
inline double average_drop(const SteadyStateDistribution& dist, const StateSpace& space,
                           const std::function<double(const CallState&)>& drops) {
    double avg = 0.0;
    for (int i = 0; i < space.size(); ++i) avg += dist[i] * drops(space.state(i));
    return avg;
}

/// Map form: throws when a state of the space has no drop value.
inline double average_drop(const SteadyStateDistribution& dist, const StateSpace& space,
                           const std::map<CallState, double>& drops) {
    return average_drop(dist, space, [&](const CallState& s) {
        auto it = drops.find(s);
        if (it == drops.end()) {
            std::ostringstream what;
            what << "average drop: missing combination " << s;
            throw ValidationError(what.str());
        }
        return it->second;
    });
}

struct ThresholdEvaluation {
    ThresholdPair thresholds;
    BlockingProbabilities blocking;
    double avg_drop = 0.0;
    bool feasible = false;
    std::vector<std::string> infeasibility_reasons;
};

/// Constraint names reported in infeasibility_reasons.
namespace constraint {
inline constexpr const char* kBlockingE = "L_b_e <= C_e";
inline constexpr const char* kBlockingGin = "L_b_gin <= C_gin";
inline constexpr const char* kBlockingGinStrict = "L_b_gin <= C_e";
inline constexpr const char* kPriorityOrder = "L_b_gin <= L_b_gout";
inline constexpr const char* kDropBound = "avg_drop <= drop_bound";
}  // namespace constraint

/// Solves the call level at one threshold pair and checks the admission
/// constraints: emergency and general-in blocking bounds, the priority
/// ordering, and the average-drop bound.
inline ThresholdEvaluation evaluate_thresholds(const ThresholdPair& thresholds,
                                               const ScenarioConfig& config,
                                               const DropCache& drop_cache,
                                               BlockingFormula formula = BlockingFormula::Indicator) {
    thresholds.validate(config.capacity.max_sessions);
    CallLevelSolution sol = solve_call_level(config, thresholds, formula);

    ThresholdEvaluation eval;
    eval.thresholds = thresholds;
    eval.blocking = sol.blocking;
    eval.avg_drop = average_drop(sol.distribution, sol.space,
                                 [&](const CallState& s) { return drop_cache.drop(s); });

    if (eval.blocking.l_b_e > config.qos.blocking_bound_e)
        eval.infeasibility_reasons.push_back(constraint::kBlockingE);
    if (config.qos.strict_paper_objective) {
        if (eval.blocking.l_b_gin > config.qos.blocking_bound_e)
            eval.infeasibility_reasons.push_back(constraint::kBlockingGinStrict);
    } else {
        if (eval.blocking.l_b_gin > config.qos.blocking_bound_gin)
            eval.infeasibility_reasons.push_back(constraint::kBlockingGin);
    }
    if (eval.blocking.l_b_gin > eval.blocking.l_b_gout)
        eval.infeasibility_reasons.push_back(constraint::kPriorityOrder);
    if (eval.avg_drop > config.qos.drop_bound)
        eval.infeasibility_reasons.push_back(constraint::kDropBound);
    eval.feasible = eval.infeasibility_reasons.empty();
    return eval;
}

struct OptimizationResult {
    ThresholdPair optimal;
    bool fallback_used = false;
    std::vector<ThresholdEvaluation> evaluations;  ///< lexicographic (t_gin, t_gout)

    const ThresholdEvaluation& evaluation_at(const ThresholdPair& t) const {
        for (const ThresholdEvaluation& e : evaluations)
            if (e.thresholds == t) return e;
        throw ValidationError("no evaluation recorded for the requested thresholds");
    }
    const ThresholdEvaluation& optimal_evaluation() const { return evaluation_at(optimal); }
};

/// True if `a` beats `b` for the search: smaller general-out blocking, ties
/// broken toward larger t_gout, then larger t_gin (maximum accommodation).
inline bool better_evaluation(const ThresholdEvaluation& a, const ThresholdEvaluation& b) {
    if (a.blocking.l_b_gout != b.blocking.l_b_gout)
        return a.blocking.l_b_gout < b.blocking.l_b_gout;
    if (a.thresholds.t_gout != b.thresholds.t_gout) return a.thresholds.t_gout > b.thresholds.t_gout;
    return a.thresholds.t_gin > b.thresholds.t_gin;
}

/// Full search over all (N+1)(N+2)/2 threshold pairs: the feasible pair with
/// the smallest general-out blocking wins; (0, 0) is the fallback when no
/// pair is feasible (only emergency sessions accepted).
inline OptimizationResult optimize(const ScenarioConfig& config, const DropCache& drop_cache,
                                   BlockingFormula formula = BlockingFormula::Indicator) {
    config.validate();
    const int n = config.capacity.max_sessions;
    OptimizationResult result;
    result.evaluations.reserve(static_cast<std::size_t>((n + 1) * (n + 2) / 2));
    const ThresholdEvaluation* best = nullptr;
    for (int t_gin = 0; t_gin <= n; ++t_gin)
        for (int t_gout = 0; t_gout <= t_gin; ++t_gout)
            result.evaluations.push_back(
                evaluate_thresholds({t_gin, t_gout}, config, drop_cache, formula));
    for (const ThresholdEvaluation& eval : result.evaluations)
        if (eval.feasible && (best == nullptr || better_evaluation(eval, *best))) best = &eval;
    if (best != nullptr) {
        result.optimal = best->thresholds;
    } else {
        result.optimal = {0, 0};
        result.fallback_used = true;
    }
    return result;
}

inline OptimizationResult optimize(const ScenarioConfig& config,
                                   BlockingFormula formula = BlockingFormula::Indicator) {
    DropCache cache(config);
    return optimize(config, cache, formula);
}

enum class BaselineVariant {
    /// Thresholds wide open at (N, N): no general traffic is reserved against.
    FixedOpen,
    /// Same full search with the drop bound ignored in feasibility.
    NoDropConstraint
};

/// Evaluation a drop-agnostic controller would operate at. Feasibility in the
/// returned record reflects the blocking constraints only.
inline ThresholdEvaluation conventional_baseline(
    const ScenarioConfig& config, const DropCache& drop_cache,
    BaselineVariant variant = BaselineVariant::FixedOpen,
    BlockingFormula formula = BlockingFormula::Indicator) {
    config.validate();
    const int n = config.capacity.max_sessions;

    auto without_drop = [](ThresholdEvaluation eval) {
        std::erase(eval.infeasibility_reasons, std::string(constraint::kDropBound));
        eval.feasible = eval.infeasibility_reasons.empty();
        return eval;
    };

    if (variant == BaselineVariant::FixedOpen)
        return without_drop(evaluate_thresholds({n, n}, config, drop_cache, formula));

    bool found = false;
    ThresholdEvaluation best;
    for (int t_gin = 0; t_gin <= n; ++t_gin)
        for (int t_gout = 0; t_gout <= t_gin; ++t_gout) {
            ThresholdEvaluation eval =
                without_drop(evaluate_thresholds({t_gin, t_gout}, config, drop_cache, formula));
            if (eval.feasible && (!found || better_evaluation(eval, best))) {
                best = std::move(eval);
                found = true;
            }
        }
    if (!found) return without_drop(evaluate_thresholds({0, 0}, config, drop_cache, formula));
    return best;
}

}  // namespace ecac
