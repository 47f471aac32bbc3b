#pragma once

#include <atomic>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ecac/config.hpp"
#include "ecac/optimizer.hpp"

namespace ecac {

enum class SweptParameter { RhoE, RhoGin, RhoGout, CGin, TGin, TGout, QueueCapacity };

inline const char* to_string(SweptParameter p) {
    switch (p) {
        case SweptParameter::RhoE: return "rho_e";
        case SweptParameter::RhoGin: return "rho_gin";
        case SweptParameter::RhoGout: return "rho_gout";
        case SweptParameter::CGin: return "C_gin";
        case SweptParameter::TGin: return "t_gin";
        case SweptParameter::TGout: return "t_gout";
        case SweptParameter::QueueCapacity: return "K";
    }
    return "?";
}

inline SweptParameter swept_parameter_from_string(const std::string& s) {
    if (s == "rho_e") return SweptParameter::RhoE;
    if (s == "rho_gin") return SweptParameter::RhoGin;
    if (s == "rho_gout") return SweptParameter::RhoGout;
    if (s == "C_gin") return SweptParameter::CGin;
    if (s == "t_gin") return SweptParameter::TGin;
    if (s == "t_gout") return SweptParameter::TGout;
    if (s == "K") return SweptParameter::QueueCapacity;
    throw ValidationError("sweep: unknown parameter '" + s + "'");
}

struct SweepSpec {
    SweptParameter parameter = SweptParameter::RhoE;
    std::vector<double> values;
    ScenarioConfig base;
    bool with_baseline = false;
    BaselineVariant baseline_variant = BaselineVariant::FixedOpen;
    BlockingFormula formula = BlockingFormula::Indicator;
    /// Fixed counterpart when sweeping one threshold (ignored otherwise).
    std::optional<ThresholdPair> fixed_thresholds;

    void validate() const {
        base.validate();
        if (values.empty()) throw ValidationError("sweep: values must be nonempty");
        for (double v : values) {
            if (!std::isfinite(v)) throw ValidationError("sweep: values must be finite");
            switch (parameter) {
                case SweptParameter::RhoE:
                case SweptParameter::RhoGin:
                case SweptParameter::RhoGout:
                    if (v < 0.0) throw ValidationError("sweep: intensities must be >= 0");
                    break;
                case SweptParameter::CGin:
                    if (v < 0.0 || v > 1.0)
                        throw ValidationError("sweep: C_gin values must lie in [0, 1]");
                    break;
                case SweptParameter::TGin:
                case SweptParameter::TGout:
                case SweptParameter::QueueCapacity:
                    if (v != std::floor(v))
                        throw ValidationError("sweep: integer parameter swept over non-integers");
                    break;
            }
        }
        if ((parameter == SweptParameter::TGin || parameter == SweptParameter::TGout) &&
            !fixed_thresholds)
            throw ValidationError("sweep: threshold sweeps need the fixed counterpart threshold");
    }
};

struct SweepRow {
    double value = 0.0;
    ThresholdPair thresholds;            ///< optimum, or the evaluated pair for threshold sweeps
    BlockingProbabilities blocking;
    double avg_drop = 0.0;
    bool fallback_used = false;
    bool feasible = false;
    std::optional<ThresholdEvaluation> baseline;
    std::string error;                   ///< nonempty when the row failed
};

namespace detail {

inline ScenarioConfig apply_parameter(const SweepSpec& spec, double value) {
    ScenarioConfig cfg = spec.base;
    switch (spec.parameter) {
        case SweptParameter::RhoE: set_traffic_intensity(cfg, SessionClass::Emergency, value); break;
        case SweptParameter::RhoGin: set_traffic_intensity(cfg, SessionClass::GeneralIn, value); break;
        case SweptParameter::RhoGout: set_traffic_intensity(cfg, SessionClass::GeneralOut, value); break;
        case SweptParameter::CGin: cfg.qos.blocking_bound_gin = value; break;
        case SweptParameter::QueueCapacity: cfg.capacity.queue_capacity = static_cast<int>(value); break;
        case SweptParameter::TGin:
        case SweptParameter::TGout: break;
    }
    cfg.validate();
    return cfg;
}

inline bool packet_model_unchanged(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.packet == b.packet && a.capacity.queue_capacity == b.capacity.queue_capacity &&
           a.capacity.bandwidth == b.capacity.bandwidth &&
           a.capacity.max_sessions == b.capacity.max_sessions;
}

inline SweepRow run_row(const SweepSpec& spec, double value, const DropCache& shared_cache) {
    SweepRow row;
    row.value = value;
    try {
        ScenarioConfig cfg = apply_parameter(spec, value);
        std::unique_ptr<DropCache> local;
        const DropCache* cache = &shared_cache;
        if (!packet_model_unchanged(cfg, shared_cache.config())) {
            local = std::make_unique<DropCache>(cfg);
            cache = local.get();
        }

        if (spec.parameter == SweptParameter::TGin || spec.parameter == SweptParameter::TGout) {
            ThresholdPair t = *spec.fixed_thresholds;
            if (spec.parameter == SweptParameter::TGin) t.t_gin = static_cast<int>(value);
            else t.t_gout = static_cast<int>(value);
            ThresholdEvaluation eval = evaluate_thresholds(t, cfg, *cache, spec.formula);
            row.thresholds = eval.thresholds;
            row.blocking = eval.blocking;
            row.avg_drop = eval.avg_drop;
            row.feasible = eval.feasible;
        } else {
            OptimizationResult result = optimize(cfg, *cache, spec.formula);
            const ThresholdEvaluation& at = result.optimal_evaluation();
            row.thresholds = result.optimal;
            row.blocking = at.blocking;
            row.avg_drop = at.avg_drop;
            row.fallback_used = result.fallback_used;
            row.feasible = !result.fallback_used;
        }
        if (spec.with_baseline)
            row.baseline = conventional_baseline(cfg, *cache, spec.baseline_variant, spec.formula);
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace detail

/// One optimizer run (or fixed-threshold evaluation) per swept value. Rows
/// are computed in a worker pool but returned in input order; a row that
/// fails carries its error instead of aborting the sweep.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs = 1) {
    spec.validate();
    DropCache shared_cache(spec.base);

    std::vector<SweepRow> rows(spec.values.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < spec.values.size(); ++i)
            rows[i] = detail::run_row(spec, spec.values[i], shared_cache);
        return rows;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= spec.values.size()) return;
            rows[i] = detail::run_row(spec, spec.values[i], shared_cache);
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(jobs, static_cast<int>(spec.values.size()));
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    return rows;
}

struct SurfaceRow {
    ThresholdPair thresholds;
    double avg_drop = 0.0;
    bool within_drop_bound = false;
};

/// Average drop over every admissible threshold pair (t_gout <= t_gin),
/// flagged against the configured drop bound. (N+1)(N+2)/2 rows.
inline std::vector<SurfaceRow> emit_threshold_surface(const ScenarioConfig& config,
                                                      const DropCache& drop_cache,
                                                      BlockingFormula formula = BlockingFormula::Indicator) {
    config.validate();
    const int n = config.capacity.max_sessions;
    std::vector<SurfaceRow> rows;
    rows.reserve(static_cast<std::size_t>((n + 1) * (n + 2) / 2));
    for (int t_gin = 0; t_gin <= n; ++t_gin)
        for (int t_gout = 0; t_gout <= t_gin; ++t_gout) {
            const ThresholdEvaluation eval =
                evaluate_thresholds({t_gin, t_gout}, config, drop_cache, formula);
            rows.push_back({eval.thresholds, eval.avg_drop, eval.avg_drop < config.qos.drop_bound});
        }
    return rows;
}

inline std::vector<SurfaceRow> emit_threshold_surface(const ScenarioConfig& config) {
    DropCache cache(config);
    return emit_threshold_surface(config, cache);
}

}  // namespace ecac
