#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ecac/call_level.hpp"
#include "ecac/config.hpp"
#include "ecac/markov.hpp"

namespace ecac {

/// First three moments of the aggregate packet arrival process of one
/// on-off voice source: mean rate, squared coefficient of variation, skewness.
struct SingleSourceStats {
    double lambda_p = 0.0;
    double c2a = 0.0;
    double skewness = 0.0;
};

inline SingleSourceStats source_stats(const VoicePacketParams& packet) {
    const double alpha = packet.talkspurt_rate();
    const double beta = packet.silent_rate();
    const double t = packet.packet_interval;
    const double at = alpha * t;
    if (!(at > 0.0 && at < 2.0))
        throw ValidationError("source stats: talkspurt rate * packet_interval out of (0, 2)");
    SingleSourceStats s;
    s.lambda_p = beta / (t * (alpha + beta));
    s.c2a = (1.0 - (1.0 - at) * (1.0 - at)) / ((t * (alpha + beta)) * (t * (alpha + beta)));
    s.skewness = 2.0 * at * (at * at - 3.0 * at + 3.0) / std::pow(at * (2.0 - at), 1.5);
    return s;
}

/// Two-phase MMPP: phase 0 is the dense phase, phase 1 the sparse one.
struct TwoPhaseMmpp {
    double q0 = 0.0;      ///< dense -> sparse transition rate
    double q1 = 0.0;      ///< sparse -> dense transition rate
    double lambda0 = 0.0; ///< dense-phase arrival rate
    double lambda1 = 0.0; ///< sparse-phase arrival rate

    double mean_rate() const { return (q1 * lambda0 + q0 * lambda1) / (q0 + q1); }
    /// Stationary probability of the dense phase.
    double dense_phase_probability() const { return q1 / (q0 + q1); }
};

/// Moment-matching fit of a two-phase MMPP to n superposed on-off sources.
/// Negative sparse-phase rates within 1e-9 (exact zero up to roundoff for a
/// single source) are clamped to zero; anything worse is an error naming the
/// offending quantity.
inline TwoPhaseMmpp fit_two_phase_mmpp(const SingleSourceStats& stats, int n) {
    if (n < 1) throw ValidationError("mmpp fit: session count must be >= 1");
    if (!(stats.lambda_p > 0.0)) throw ValidationError("mmpp fit: lambda_p must be > 0");
    if (!(stats.c2a > 1.0))
        throw ValidationError("mmpp fit infeasible: c2a = " + std::to_string(stats.c2a) +
                              " (needs a bursty source with c2a > 1)");

    const double c2 = stats.c2a;
    const double c3 = c2 * std::sqrt(c2);
    const double c4 = c2 * c2;
    const double sk = stats.skewness;

    const double d_den = 2.0 * sk * c3 - 3.0 * c4 - 1.0;
    if (d_den == 0.0) throw ValidationError("mmpp fit infeasible: D denominator is zero");
    const double d = 3.0 * stats.lambda_p * (c2 - 1.0) / d_den;
    const double f = d * (3.0 * c4 - sk * c3 - 3.0 * c2 + 2.0) / (3.0 * (c2 - 1.0));
    if (f == 0.0) throw ValidationError("mmpp fit infeasible: F is zero");
    const double e = d * (c2 - 1.0) / (f * f);

    const double discriminant = 1.0 + n * stats.lambda_p * e;
    if (!(discriminant > 0.0))
        throw ValidationError("mmpp fit infeasible: discriminant 1 + n*lambda_p*E = " +
                              std::to_string(discriminant));
    const double root = std::sqrt(discriminant);

    TwoPhaseMmpp m;
    m.q0 = d * (1.0 + 1.0 / root);
    m.q1 = d * (1.0 - 1.0 / root);
    m.lambda0 = n * stats.lambda_p + f + f * root;
    m.lambda1 = n * stats.lambda_p + f - f * root;

    if (!(m.q0 > 0.0)) throw ValidationError("mmpp fit infeasible: q0 <= 0");
    if (!(m.q1 > 0.0)) throw ValidationError("mmpp fit infeasible: q1 <= 0");
    if (m.lambda1 < 0.0) {
        if (m.lambda1 < -1e-9)
            throw ValidationError("mmpp fit infeasible: lambda1 = " + std::to_string(m.lambda1));
        m.lambda1 = 0.0;
    }
    if (m.lambda0 < m.lambda1) throw ValidationError("mmpp fit infeasible: lambda0 < lambda1");
    return m;
}

/// Superposition of up to three two-phase MMPPs via Kronecker sums.
/// Phase labels are (i, j, k) bits in class order (e, gin, gout); classes
/// that contribute no component keep bit 0 in every label.
struct SuperposedMmpp {
    Eigen::MatrixXd phase_generator;   ///< 2^a x 2^a, rows sum to zero
    Eigen::VectorXd arrival_rates;     ///< per-phase Poisson rates
    std::vector<std::array<int, 3>> phase_labels;

    int phase_count() const { return static_cast<int>(arrival_rates.size()); }

    /// Stationary phase distribution of the modulating chain: the product of
    /// the independent per-class two-phase stationary laws.
    Eigen::VectorXd stationary_phases() const;

    /// Long-run mean arrival rate, sum over phases of rate times probability.
    double mean_rate() const { return stationary_phases().dot(arrival_rates); }
};

struct LabeledComponent {
    SessionClass session_class;
    TwoPhaseMmpp mmpp;
};

inline SuperposedMmpp superpose(const std::vector<LabeledComponent>& components) {
    if (components.empty() || components.size() > 3)
        throw ValidationError("superpose: expected 1-3 components");

    const int phases = 1 << components.size();
    SuperposedMmpp out;
    out.phase_generator = Eigen::MatrixXd::Zero(phases, phases);
    out.arrival_rates = Eigen::VectorXd::Zero(phases);
    out.phase_labels.assign(static_cast<std::size_t>(phases), {0, 0, 0});

    // Kronecker sum: component bit strides halve from the first component down.
    for (int p = 0; p < phases; ++p) {
        for (std::size_t c = 0; c < components.size(); ++c) {
            const int shift = static_cast<int>(components.size() - 1 - c);
            const int bit = (p >> shift) & 1;
            const TwoPhaseMmpp& m = components[c].mmpp;
            out.phase_labels[static_cast<std::size_t>(p)]
                            [static_cast<int>(components[c].session_class)] = bit;
            out.arrival_rates[p] += bit == 0 ? m.lambda0 : m.lambda1;
            const int flipped = p ^ (1 << shift);
            const double rate = bit == 0 ? m.q0 : m.q1;
            out.phase_generator(p, flipped) += rate;
            out.phase_generator(p, p) -= rate;
        }
    }
    return out;
}

inline Eigen::VectorXd SuperposedMmpp::stationary_phases() const {
    const int phases = phase_count();
    Eigen::VectorXd psi = Eigen::VectorXd::Ones(phases);
    // Per-phase flip rates factorize over components, so the stationary law
    // is the product of two-state laws q_other / (q0 + q1).
    int bits = 0;
    while ((1 << bits) < phases) ++bits;
    for (int c = 0; c < bits; ++c) {
        const int shift = bits - 1 - c;
        // recover the component's q0/q1 from any phase pair differing in this bit
        const int p0 = 0;
        const int p1 = 1 << shift;
        const double q0 = phase_generator(p0, p1);
        const double q1 = phase_generator(p1, p0);
        const double dense = q1 / (q0 + q1);
        for (int p = 0; p < phases; ++p)
            psi[p] *= ((p >> shift) & 1) == 0 ? dense : 1.0 - dense;
    }
    return psi;
}

/// Joint steady state of (phase, queue length) and the packet dropping
/// probability: the arrival-rate-weighted probability of finding the queue
/// full, normalized by the stationary arrival-rate weighting of the phases.
struct PacketQueueSolution {
    Eigen::MatrixXd steady_state;  ///< phases x (K+1)
    double drop_probability = 0.0;
    double residual = 0.0;
};

inline PacketQueueSolution solve_mmpp_m1k(const SuperposedMmpp& mmpp, double mu_packet, int k) {
    if (k < 1) throw ValidationError("packet queue: K must be >= 1");
    if (!(mu_packet > 0.0)) throw ValidationError("packet queue: mu_packet must be > 0");

    const int phases = mmpp.phase_count();
    const int width = k + 1;
    const int n = phases * width;
    auto idx = [width](int p, int m) { return p * width + m; };

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(n) * (static_cast<std::size_t>(phases) + 2));
    for (int p = 0; p < phases; ++p) {
        for (int m = 0; m <= k; ++m) {
            const int i = idx(p, m);
            double outflow = 0.0;
            const double lambda = mmpp.arrival_rates[p];
            if (m < k && lambda > 0.0) {
                trips.emplace_back(i, idx(p, m + 1), lambda);
                outflow += lambda;
            }
            if (m > 0) {
                trips.emplace_back(i, idx(p, m - 1), mu_packet);
                outflow += mu_packet;
            }
            for (int p2 = 0; p2 < phases; ++p2) {
                if (p2 == p) continue;
                const double rate = mmpp.phase_generator(p, p2);
                if (rate > 0.0) {
                    trips.emplace_back(i, idx(p2, m), rate);
                    outflow += rate;
                }
            }
            if (outflow > 0.0) trips.emplace_back(i, i, -outflow);
        }
    }
    SparseMatrix g(n, n);
    g.setFromTriplets(trips.begin(), trips.end());
    g.makeCompressed();

    StationaryResult r = stationary_distribution(g, idx(0, 0));

    PacketQueueSolution sol;
    sol.residual = r.residual;
    sol.steady_state.resize(phases, width);
    for (int p = 0; p < phases; ++p)
        for (int m = 0; m <= k; ++m) sol.steady_state(p, m) = r.probabilities[idx(p, m)];

    double num = 0.0, den = 0.0;
    for (int p = 0; p < phases; ++p) {
        num += mmpp.arrival_rates[p] * sol.steady_state(p, k);
        den += mmpp.arrival_rates[p] * sol.steady_state.row(p).sum();
    }
    sol.drop_probability = den > 0.0 ? num / den : 0.0;
    return sol;
}

/// Per-class fit of the active classes of a session combination, superposed.
/// Classes with zero sessions contribute no component.
inline SuperposedMmpp superposed_mmpp_for_combination(const CallState& combination,
                                                      const ScenarioConfig& config) {
    const SingleSourceStats stats = source_stats(config.packet);
    std::vector<LabeledComponent> components;
    for (SessionClass c : kSessionClasses) {
        const int count = combination.count(c);
        if (count > 0) components.push_back({c, fit_two_phase_mmpp(stats, count)});
    }
    if (components.empty()) throw ValidationError("superpose: empty combination has no phases");
    return superpose(components);
}

/// Packet dropping probability of one session combination. Depends only on
/// the combination and the packet/capacity parameters, never on thresholds.
inline double drop_probability_for_combination(const CallState& combination,
                                               const ScenarioConfig& config) {
    if (combination.n_e < 0 || combination.n_gin < 0 || combination.n_gout < 0 ||
        combination.total() > config.capacity.max_sessions)
        throw ValidationError("packet drop: combination outside capacity");
    if (combination.total() == 0) return 0.0;
    const SuperposedMmpp mmpp = superposed_mmpp_for_combination(combination, config);
    return solve_mmpp_m1k(mmpp, config.packet_service_rate(), config.capacity.queue_capacity)
        .drop_probability;
}

/// Memoized drop probabilities keyed by session combination. Fills lazily;
/// concurrent fills write identical values, so losing a race is harmless.
class DropCache {
  public:
    explicit DropCache(ScenarioConfig config) : config_(std::move(config)) {}

    const ScenarioConfig& config() const { return config_; }

    double drop(const CallState& combination) const {
        const std::uint32_t key = pack(combination);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = values_.find(key);
            if (it != values_.end()) return it->second;
        }
        const double value = drop_probability_for_combination(combination, config_);
        std::lock_guard<std::mutex> lock(mutex_);
        return values_.emplace(key, value).first->second;
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return values_.size();
    }

  private:
    static std::uint32_t pack(const CallState& s) {
        return (static_cast<std::uint32_t>(s.n_e) << 16) |
               (static_cast<std::uint32_t>(s.n_gin) << 8) | static_cast<std::uint32_t>(s.n_gout);
    }

    ScenarioConfig config_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<std::uint32_t, double> values_;
};

}  // namespace ecac
