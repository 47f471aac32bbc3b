#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "ecac/call_level.hpp"
#include "ecac/config.hpp"

namespace ecac {

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// mt19937_64 with inverse-CDF exponentials. The standard fixes the raw
/// 64-bit output sequence, and the [0,1) mapping below avoids the
/// implementation-defined std::distributions, so streams are portable.
class ExponentialStream {
  public:
    explicit ExponentialStream(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  private:
    std::mt19937_64 gen_;
};

}  // namespace rng

struct SimulationConfig {
    ScenarioConfig scenario;
    ThresholdPair thresholds;
    /// Arrival-count budget per replication; 0 disables the count limit.
    std::uint64_t arrival_budget = 1000000;
    /// Simulated-seconds horizon per replication; 0 disables the time limit.
    double time_horizon = 0.0;
    /// Fraction of the horizon discarded before counting, in [0, 0.5].
    double warmup = 0.1;
    std::uint64_t seed = 1;
    int replications = 10;

    void validate() const {
        scenario.validate();
        thresholds.validate(scenario.capacity.max_sessions);
        if (arrival_budget == 0 && !(time_horizon > 0.0))
            throw ValidationError("simulation: need an arrival budget or a time horizon");
        if (!(warmup >= 0.0 && warmup <= 0.5))
            throw ValidationError("simulation: warmup must lie in [0, 0.5]");
        if (replications < 1) throw ValidationError("simulation: replications must be >= 1");
    }
};

struct ClassEstimate {
    std::uint64_t offered = 0;
    std::uint64_t blocked = 0;
    double estimate = 0.0;        ///< pooled blocked / offered
    double ci_half_width = 0.0;   ///< 95% over replication means
    bool offered_zero = false;    ///< no arrivals observed after warmup
    std::vector<double> per_replication;
};

struct SimulationReport {
    SimulationConfig config;
    std::array<ClassEstimate, 3> per_class;
    double time_average_occupancy = 0.0;
    double simulated_time = 0.0;
    int max_occupancy = 0;
    std::uint64_t envelope_violations = 0;

    const ClassEstimate& estimate(SessionClass c) const {
        return per_class[static_cast<std::size_t>(c)];
    }
};

namespace detail {

/// Two-sided 95% Student-t quantiles; df above the table fall back to 1.96.
inline double student_t_975(int df) {
    static constexpr std::array<double, 30> table = {
        12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646, 2.3060, 2.2622, 2.2281,
        2.2010,  2.1788, 2.1604, 2.1448, 2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860,
        2.0796,  2.0739, 2.0687, 2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423};
    if (df < 1) return table[0];
    if (df <= 30) return table[static_cast<std::size_t>(df - 1)];
    return 1.96;
}

struct ReplicationTotals {
    std::array<std::uint64_t, 3> offered{};
    std::array<std::uint64_t, 3> blocked{};
    double occupancy_integral = 0.0;
    double measured_time = 0.0;
    int max_occupancy = 0;
    std::uint64_t envelope_violations = 0;
};

inline ReplicationTotals run_replication(const SimulationConfig& sim, int replication) {
    const ScenarioConfig& cfg = sim.scenario;
    const int n_max = cfg.capacity.max_sessions;

    std::uint64_t chain = sim.seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(replication + 1));
    std::array<rng::ExponentialStream, 3> arrivals = {rng::ExponentialStream(rng::splitmix64(chain)),
                                                      rng::ExponentialStream(rng::splitmix64(chain)),
                                                      rng::ExponentialStream(rng::splitmix64(chain))};
    std::array<rng::ExponentialStream, 3> holdings = {rng::ExponentialStream(rng::splitmix64(chain)),
                                                      rng::ExponentialStream(rng::splitmix64(chain)),
                                                      rng::ExponentialStream(rng::splitmix64(chain))};

    constexpr double kNever = std::numeric_limits<double>::infinity();
    std::array<double, 3> next_arrival = {kNever, kNever, kNever};
    for (int c = 0; c < 3; ++c) {
        const double lambda = cfg.traffic.arrival_rate(kSessionClasses[static_cast<std::size_t>(c)]);
        if (lambda > 0.0)
            next_arrival[static_cast<std::size_t>(c)] =
                arrivals[static_cast<std::size_t>(c)].exponential(lambda);
    }

    // departure calendar: min-heap of (time, class)
    using Departure = std::pair<double, int>;
    std::priority_queue<Departure, std::vector<Departure>, std::greater<>> departures;

    std::array<int, 3> in_service{};
    ReplicationTotals totals;

    const std::uint64_t warmup_arrivals =
        sim.arrival_budget > 0
            ? static_cast<std::uint64_t>(sim.warmup * static_cast<double>(sim.arrival_budget))
            : 0;
    const double warmup_time = sim.time_horizon > 0.0 ? sim.warmup * sim.time_horizon : 0.0;

    std::uint64_t arrivals_seen = 0;
    double now = 0.0;
    double last_event = 0.0;
    bool measuring = warmup_arrivals == 0 && warmup_time == 0.0;
    double measure_start = 0.0;

    while (true) {
        int arrival_class = -1;
        double next_time = kNever;
        for (int c = 0; c < 3; ++c) {
            if (next_arrival[static_cast<std::size_t>(c)] < next_time) {
                next_time = next_arrival[static_cast<std::size_t>(c)];
                arrival_class = c;
            }
        }
        bool is_departure = false;
        if (!departures.empty() && departures.top().first < next_time) {
            next_time = departures.top().first;
            is_departure = true;
        }
        if (next_time == kNever) break;
        if (sim.time_horizon > 0.0 && next_time > sim.time_horizon) break;

        const int occupancy = in_service[0] + in_service[1] + in_service[2];
        if (measuring) totals.occupancy_integral += occupancy * (next_time - last_event);
        last_event = next_time;
        now = next_time;

        if (is_departure) {
            const int c = departures.top().second;
            departures.pop();
            --in_service[static_cast<std::size_t>(c)];
            continue;
        }

        const auto cls = kSessionClasses[static_cast<std::size_t>(arrival_class)];
        ++arrivals_seen;
        if (!measuring && ((warmup_arrivals > 0 && arrivals_seen > warmup_arrivals) ||
                           (warmup_time > 0.0 && now >= warmup_time))) {
            measuring = true;
            measure_start = now;
        }

        const bool admitted = admits(cls, occupancy, n_max, sim.thresholds);
        if (measuring) {
            ++totals.offered[static_cast<std::size_t>(arrival_class)];
            if (!admitted) ++totals.blocked[static_cast<std::size_t>(arrival_class)];
        }
        if (admitted) {
            ++in_service[static_cast<std::size_t>(arrival_class)];
            const double mu = cfg.traffic.departure_rate(cls);
            departures.emplace(now + holdings[static_cast<std::size_t>(arrival_class)].exponential(mu),
                              arrival_class);
            const int total = in_service[0] + in_service[1] + in_service[2];
            totals.max_occupancy = std::max(totals.max_occupancy, total);
            if (total > n_max || in_service[2] > sim.thresholds.t_gout ||
                in_service[1] + in_service[2] > sim.thresholds.t_gin)
                ++totals.envelope_violations;
        }
        next_arrival[static_cast<std::size_t>(arrival_class)] =
            now + arrivals[static_cast<std::size_t>(arrival_class)].exponential(
                      cfg.traffic.arrival_rate(cls));

        if (sim.arrival_budget > 0 && arrivals_seen >= sim.arrival_budget) break;
    }

    totals.measured_time = measuring ? last_event - measure_start : 0.0;
    return totals;
}

}  // namespace detail

/// Event-driven call-level simulation with the same admission rule as the
/// analytical model. Deterministic for a fixed seed.
inline SimulationReport run_simulation(const SimulationConfig& sim) {
    sim.validate();

    SimulationReport report;
    report.config = sim;

    std::vector<detail::ReplicationTotals> reps;
    reps.reserve(static_cast<std::size_t>(sim.replications));
    for (int r = 0; r < sim.replications; ++r) reps.push_back(detail::run_replication(sim, r));

    double occupancy_integral = 0.0;
    double measured_time = 0.0;
    for (const auto& rep : reps) {
        occupancy_integral += rep.occupancy_integral;
        measured_time += rep.measured_time;
        report.max_occupancy = std::max(report.max_occupancy, rep.max_occupancy);
        report.envelope_violations += rep.envelope_violations;
    }
    report.time_average_occupancy = measured_time > 0.0 ? occupancy_integral / measured_time : 0.0;
    report.simulated_time = measured_time;

    for (int c = 0; c < 3; ++c) {
        ClassEstimate& est = report.per_class[static_cast<std::size_t>(c)];
        for (const auto& rep : reps) {
            est.offered += rep.offered[static_cast<std::size_t>(c)];
            est.blocked += rep.blocked[static_cast<std::size_t>(c)];
            const std::uint64_t off = rep.offered[static_cast<std::size_t>(c)];
            est.per_replication.push_back(
                off > 0 ? static_cast<double>(rep.blocked[static_cast<std::size_t>(c)]) /
                              static_cast<double>(off)
                        : 0.0);
        }
        est.offered_zero = est.offered == 0;
        est.estimate = est.offered > 0
                           ? static_cast<double>(est.blocked) / static_cast<double>(est.offered)
                           : 0.0;
        const int n = sim.replications;
        if (n >= 2) {
            double mean = 0.0;
            for (double v : est.per_replication) mean += v;
            mean /= n;
            double ss = 0.0;
            for (double v : est.per_replication) ss += (v - mean) * (v - mean);
            const double sd = std::sqrt(ss / (n - 1));
            est.ci_half_width = detail::student_t_975(n - 1) * sd / std::sqrt(static_cast<double>(n));
        }
    }
    return report;
}

struct ClassComparison {
    double analytical = 0.0;
    double simulated = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0;
    bool ci_covers = false;
};

struct TheoryComparison {
    std::array<ClassComparison, 3> per_class;

    const ClassComparison& comparison(SessionClass c) const {
        return per_class[static_cast<std::size_t>(c)];
    }
};

/// Per-class error of the simulation against analytical blocking values
/// computed for the same scenario and thresholds.
inline TheoryComparison compare_to_theory(const SimulationReport& report,
                                          const ThresholdPair& analytical_thresholds,
                                          const BlockingProbabilities& analytical) {
    if (analytical_thresholds != report.config.thresholds)
        throw ValidationError("comparison: analytical and simulated thresholds differ");
    const std::array<double, 3> theory = {analytical.l_b_e, analytical.l_b_gin,
                                          analytical.l_b_gout};
    TheoryComparison cmp;
    for (int c = 0; c < 3; ++c) {
        ClassComparison& out = cmp.per_class[static_cast<std::size_t>(c)];
        const ClassEstimate& est = report.per_class[static_cast<std::size_t>(c)];
        out.analytical = theory[static_cast<std::size_t>(c)];
        out.simulated = est.estimate;
        out.abs_error = std::abs(out.simulated - out.analytical);
        out.rel_error = out.analytical != 0.0 ? out.abs_error / out.analytical
                                              : (out.simulated == 0.0 ? 0.0
                                                                      : std::numeric_limits<double>::infinity());
        // coverage is judged against the replication-mean CI
        double mean = 0.0;
        for (double v : est.per_replication) mean += v;
        if (!est.per_replication.empty()) mean /= static_cast<double>(est.per_replication.size());
        out.ci_covers = std::abs(mean - out.analytical) <= est.ci_half_width;
    }
    return cmp;
}

}  // namespace ecac
