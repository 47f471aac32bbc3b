#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ecac/config.hpp"
#include "ecac/optimizer.hpp"
#include "ecac/simulator.hpp"
#include "ecac/sweep.hpp"

namespace ecac {

/// Fixed 10-significant-digit rendering used for every CSV cell, so output
/// bytes are stable for a given configuration and tool version.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline const char* to_string(BlockingFormula f) {
    return f == BlockingFormula::Indicator ? "indicator" : "paper-eq";
}

inline BlockingFormula blocking_formula_from_string(const std::string& s) {
    if (s == "indicator") return BlockingFormula::Indicator;
    if (s == "paper-eq") return BlockingFormula::ShellSum;
    throw ValidationError("unknown blocking formula '" + s + "' (use indicator or paper-eq)");
}

inline const char* to_string(BaselineVariant v) {
    return v == BaselineVariant::FixedOpen ? "fixed-open" : "no-drop-constraint";
}

inline BaselineVariant baseline_variant_from_string(const std::string& s) {
    if (s == "fixed-open") return BaselineVariant::FixedOpen;
    if (s == "no-drop-constraint") return BaselineVariant::NoDropConstraint;
    throw ValidationError("unknown baseline '" + s +
                          "' (use fixed-open or no-drop-constraint)");
}

inline json to_json(const ThresholdPair& t) {
    return json{{"t_gin", t.t_gin}, {"t_gout", t.t_gout}};
}

inline json to_json(const BlockingProbabilities& b) {
    return json{{"L_b_e", b.l_b_e}, {"L_b_gin", b.l_b_gin}, {"L_b_gout", b.l_b_gout}};
}

inline json to_json(const ThresholdEvaluation& e) {
    return json{{"thresholds", to_json(e.thresholds)},
                {"blocking", to_json(e.blocking)},
                {"avg_drop", e.avg_drop},
                {"feasible", e.feasible},
                {"infeasibility_reasons", e.infeasibility_reasons}};
}

inline json to_json(const OptimizationResult& r) {
    int feasible = 0;
    for (const ThresholdEvaluation& e : r.evaluations) feasible += e.feasible ? 1 : 0;
    return json{{"optimal", to_json(r.optimal)},
                {"fallback_used", r.fallback_used},
                {"optimal_evaluation", to_json(r.optimal_evaluation())},
                {"evaluation_count", static_cast<int>(r.evaluations.size())},
                {"feasible_count", feasible}};
}

inline json to_json(const SimulationReport& r) {
    json per_class = json::object();
    for (SessionClass c : kSessionClasses) {
        const ClassEstimate& est = r.estimate(c);
        per_class[to_string(c)] = {{"offered", est.offered},
                                   {"blocked", est.blocked},
                                   {"estimate", est.estimate},
                                   {"ci_half_width", est.ci_half_width},
                                   {"offered_zero", est.offered_zero},
                                   {"per_replication", est.per_replication}};
    }
    return json{{"thresholds", to_json(r.config.thresholds)},
                {"seed", r.config.seed},
                {"replications", r.config.replications},
                {"arrival_budget", r.config.arrival_budget},
                {"warmup", r.config.warmup},
                {"per_class", per_class},
                {"time_average_occupancy", r.time_average_occupancy},
                {"simulated_time", r.simulated_time}};
}

inline json to_json(const TheoryComparison& cmp) {
    json per_class = json::object();
    for (SessionClass c : kSessionClasses) {
        const ClassComparison& v = cmp.comparison(c);
        per_class[to_string(c)] = {{"analytical", v.analytical},
                                   {"simulated", v.simulated},
                                   {"abs_error", v.abs_error},
                                   {"rel_error", v.rel_error},
                                   {"ci_covers", v.ci_covers}};
    }
    return json{{"per_class", per_class}};
}

inline std::string evaluations_csv(const std::vector<ThresholdEvaluation>& evaluations) {
    std::string out = "t_gin,t_gout,L_b_e,L_b_gin,L_b_gout,avg_drop,feasible\n";
    for (const ThresholdEvaluation& e : evaluations) {
        out += std::to_string(e.thresholds.t_gin) + ',' + std::to_string(e.thresholds.t_gout) +
               ',' + format_double(e.blocking.l_b_e) + ',' + format_double(e.blocking.l_b_gin) +
               ',' + format_double(e.blocking.l_b_gout) + ',' + format_double(e.avg_drop) + ',' +
               (e.feasible ? "1" : "0") + '\n';
    }
    return out;
}

inline std::string surface_csv(const std::vector<SurfaceRow>& rows) {
    std::string out = "t_gin,t_gout,avg_drop,within_drop_bound\n";
    for (const SurfaceRow& r : rows) {
        out += std::to_string(r.thresholds.t_gin) + ',' + std::to_string(r.thresholds.t_gout) +
               ',' + format_double(r.avg_drop) + ',' + (r.within_drop_bound ? "1" : "0") + '\n';
    }
    return out;
}

inline json to_json(const std::vector<SurfaceRow>& rows) {
    json arr = json::array();
    for (const SurfaceRow& r : rows)
        arr.push_back(json{{"t_gin", r.thresholds.t_gin},
                           {"t_gout", r.thresholds.t_gout},
                           {"avg_drop", r.avg_drop},
                           {"within_drop_bound", r.within_drop_bound}});
    return arr;
}

inline std::string sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
    std::string out = std::string(to_string(spec.parameter)) +
                      ",t_gin,t_gout,L_b_e,L_b_gin,L_b_gout,avg_drop,fallback_used,feasible";
    if (spec.with_baseline)
        out += ",baseline_t_gin,baseline_t_gout,baseline_L_b_e,baseline_L_b_gin,"
               "baseline_L_b_gout,baseline_avg_drop";
    out += ",error\n";
    for (const SweepRow& r : rows) {
        out += format_double(r.value);
        if (r.error.empty()) {
            out += ',' + std::to_string(r.thresholds.t_gin) + ',' +
                   std::to_string(r.thresholds.t_gout) + ',' + format_double(r.blocking.l_b_e) +
                   ',' + format_double(r.blocking.l_b_gin) + ',' +
                   format_double(r.blocking.l_b_gout) + ',' + format_double(r.avg_drop) + ',' +
                   (r.fallback_used ? "1" : "0") + ',' + (r.feasible ? "1" : "0");
            if (spec.with_baseline) {
                const ThresholdEvaluation& b = *r.baseline;
                out += ',' + std::to_string(b.thresholds.t_gin) + ',' +
                       std::to_string(b.thresholds.t_gout) + ',' + format_double(b.blocking.l_b_e) +
                       ',' + format_double(b.blocking.l_b_gin) + ',' +
                       format_double(b.blocking.l_b_gout) + ',' + format_double(b.avg_drop);
            }
            out += ",";
        } else {
            out += ",,,,,,,,";
            if (spec.with_baseline) out += ",,,,,,";
            std::string sanitized = r.error;
            for (char& ch : sanitized)
                if (ch == ',' || ch == '\n') ch = ';';
            out += ',' + sanitized;
        }
        out += '\n';
    }
    return out;
}

inline json to_json(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const SweepRow& r : rows) {
        json row{{to_string(spec.parameter), r.value}};
        if (r.error.empty()) {
            row["thresholds"] = to_json(r.thresholds);
            row["blocking"] = to_json(r.blocking);
            row["avg_drop"] = r.avg_drop;
            row["fallback_used"] = r.fallback_used;
            row["feasible"] = r.feasible;
            if (r.baseline) row["baseline"] = to_json(*r.baseline);
        } else {
            row["error"] = r.error;
        }
        arr.push_back(std::move(row));
    }
    return arr;
}

/// Generator dump: one `row col rate` line per nonzero, row-major.
inline std::string generator_coordinate_dump(const SparseMatrix& g) {
    std::vector<std::string> lines;
    SparseMatrix by_row = g.transpose();
    std::string out;
    for (int col = 0; col < by_row.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(by_row, col); it; ++it)
            out += std::to_string(col) + ' ' + std::to_string(static_cast<int>(it.row())) + ' ' +
                   format_double(it.value()) + '\n';
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open output file: " + path);
    out << content;
}

}  // namespace ecac
