#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "ecac/config.hpp"
#include "ecac/markov.hpp"

namespace ecac {

/// Counts of accommodated sessions per class.
struct CallState {
    int n_e = 0;
    int n_gin = 0;
    int n_gout = 0;

    int total() const { return n_e + n_gin + n_gout; }
    int count(SessionClass c) const {
        switch (c) {
            case SessionClass::Emergency: return n_e;
            case SessionClass::GeneralIn: return n_gin;
            case SessionClass::GeneralOut: return n_gout;
        }
        return 0;
    }
    CallState with(SessionClass c, int delta) const {
        CallState s = *this;
        switch (c) {
            case SessionClass::Emergency: s.n_e += delta; break;
            case SessionClass::GeneralIn: s.n_gin += delta; break;
            case SessionClass::GeneralOut: s.n_gout += delta; break;
        }
        return s;
    }
    auto operator<=>(const CallState&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const CallState& s) {
    return os << "(" << s.n_e << "," << s.n_gin << "," << s.n_gout << ")";
}

/// Admission thresholds for the two general classes, 0 <= t_gout <= t_gin <= N.
struct ThresholdPair {
    int t_gin = 0;
    int t_gout = 0;

    void validate(int max_sessions) const {
        if (t_gout < 0 || t_gout > t_gin || t_gin > max_sessions)
            throw ValidationError("thresholds: need 0 <= t_gout <= t_gin <= N");
    }
    auto operator<=>(const ThresholdPair&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const ThresholdPair& t) {
    return os << "(" << t.t_gin << "," << t.t_gout << ")";
}

/// A new session of class c is admitted iff the current total is strictly
/// below the class limit (N for emergency, t_gin / t_gout for general).
inline bool admits(SessionClass c, int n_now, int max_sessions, const ThresholdPair& t) {
    switch (c) {
        case SessionClass::Emergency: return n_now < max_sessions;
        case SessionClass::GeneralIn: return n_now < t.t_gin;
        case SessionClass::GeneralOut: return n_now < t.t_gout;
    }
    return false;
}

/// All session combinations reachable from the empty system under one
/// threshold pair, in lexicographic (n_e, n_gin, n_gout) order. Equals
/// { n : total <= N, n_gout <= t_gout, n_gin + n_gout <= t_gin }.
class StateSpace {
  public:
    StateSpace(int max_sessions, ThresholdPair thresholds)
        : max_sessions_(max_sessions), thresholds_(thresholds) {
        thresholds.validate(max_sessions);
        const int n1 = max_sessions + 1;
        index_.assign(static_cast<std::size_t>(n1) * n1 * n1, -1);
        for (int e = 0; e <= max_sessions; ++e)
            for (int gin = 0; gin <= max_sessions - e; ++gin)
                for (int gout = 0; gout <= max_sessions - e - gin; ++gout) {
                    if (gout > thresholds.t_gout || gin + gout > thresholds.t_gin) continue;
                    index_[flat(e, gin, gout)] = static_cast<std::int32_t>(states_.size());
                    states_.push_back({e, gin, gout});
                }
    }

    int size() const { return static_cast<int>(states_.size()); }
    const std::vector<CallState>& states() const { return states_; }
    const CallState& state(int i) const { return states_[static_cast<std::size_t>(i)]; }
    int max_sessions() const { return max_sessions_; }
    const ThresholdPair& thresholds() const { return thresholds_; }

    bool contains(const CallState& s) const { return index_of(s) >= 0; }

    /// Dense index of a state, -1 if outside the space.
    int index_of(const CallState& s) const {
        if (s.n_e < 0 || s.n_gin < 0 || s.n_gout < 0) return -1;
        if (s.total() > max_sessions_) return -1;
        return index_[flat(s.n_e, s.n_gin, s.n_gout)];
    }

  private:
    std::size_t flat(int e, int gin, int gout) const {
        const std::size_t n1 = static_cast<std::size_t>(max_sessions_) + 1;
        return (static_cast<std::size_t>(e) * n1 + static_cast<std::size_t>(gin)) * n1 +
               static_cast<std::size_t>(gout);
    }

    int max_sessions_;
    ThresholdPair thresholds_;
    std::vector<CallState> states_;
    std::vector<std::int32_t> index_;
};

inline StateSpace enumerate_states(int max_sessions, ThresholdPair thresholds) {
    return StateSpace(max_sessions, thresholds);
}

/// Call-level generator: admissible arrivals at lambda_c, departures at
/// n_c * mu_c, diagonal set so every row sums to zero.
inline SparseMatrix build_generator(const StateSpace& space, const ScenarioConfig& config,
                                    const ThresholdPair& thresholds) {
    if (thresholds != space.thresholds())
        throw ValidationError("generator: thresholds do not match the enumerated space");
    const int n = space.size();
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(n) * 7);
    for (int i = 0; i < n; ++i) {
        const CallState& s = space.state(i);
        double outflow = 0.0;
        for (SessionClass c : kSessionClasses) {
            const double lambda = config.traffic.arrival_rate(c);
            if (lambda > 0.0 && admits(c, s.total(), space.max_sessions(), thresholds)) {
                trips.emplace_back(i, space.index_of(s.with(c, +1)), lambda);
                outflow += lambda;
            }
            const int count = s.count(c);
            if (count > 0) {
                const double rate = count * config.traffic.departure_rate(c);
                trips.emplace_back(i, space.index_of(s.with(c, -1)), rate);
                outflow += rate;
            }
        }
        if (outflow > 0.0) trips.emplace_back(i, i, -outflow);
    }
    SparseMatrix g(n, n);
    g.setFromTriplets(trips.begin(), trips.end());
    g.makeCompressed();
    return g;
}

struct SteadyStateDistribution {
    Eigen::VectorXd probabilities;
    double residual = 0.0;

    double operator[](int i) const { return probabilities[i]; }
};

inline SteadyStateDistribution solve_steady_state(const SparseMatrix& generator,
                                                  const StateSpace& space,
                                                  SolveMethod method = SolveMethod::Auto) {
    const int empty = space.index_of({0, 0, 0});
    StationaryResult r = stationary_distribution(generator, empty, method);
    return {std::move(r.probabilities), r.residual};
}

enum class BlockingFormula {
    /// Tail sets: a class arrival is blocked whenever its admission test fails.
    Indicator,
    /// Boundary shells N_now in {N}, {t_gin, N}, {t_gout, t_gin, N}, summed
    /// literally (shells repeat when thresholds coincide with N).
    ShellSum
};

struct BlockingProbabilities {
    double l_b_e = 0.0;
    double l_b_gin = 0.0;
    double l_b_gout = 0.0;
};

inline BlockingProbabilities blocking_probabilities(
    const SteadyStateDistribution& dist, const StateSpace& space,
    BlockingFormula formula = BlockingFormula::Indicator) {
    const ThresholdPair& t = space.thresholds();
    const int n_max = space.max_sessions();
    BlockingProbabilities b;
    if (formula == BlockingFormula::Indicator) {
        for (int i = 0; i < space.size(); ++i) {
            const int total = space.state(i).total();
            const double p = dist[i];
            if (total >= n_max) b.l_b_e += p;
            if (total >= t.t_gin) b.l_b_gin += p;
            if (total >= t.t_gout) b.l_b_gout += p;
        }
    } else {
        double shell_n = 0.0, shell_gin = 0.0, shell_gout = 0.0;
        for (int i = 0; i < space.size(); ++i) {
            const int total = space.state(i).total();
            const double p = dist[i];
            if (total == n_max) shell_n += p;
            if (total == t.t_gin) shell_gin += p;
            if (total == t.t_gout) shell_gout += p;
        }
        b.l_b_e = shell_n;
        b.l_b_gin = b.l_b_e + shell_gin;
        b.l_b_gout = b.l_b_gin + shell_gout;
    }
    return b;
}

/// Convenience: enumerate, build, solve, and read off blocking in one call.
struct CallLevelSolution {
    StateSpace space;
    SteadyStateDistribution distribution;
    BlockingProbabilities blocking;
};

inline CallLevelSolution solve_call_level(const ScenarioConfig& config,
                                          const ThresholdPair& thresholds,
                                          BlockingFormula formula = BlockingFormula::Indicator) {
    StateSpace space(config.capacity.max_sessions, thresholds);
    const SparseMatrix g = build_generator(space, config, thresholds);
    SteadyStateDistribution dist = solve_steady_state(g, space);
    BlockingProbabilities blocking = blocking_probabilities(dist, space, formula);
    return {std::move(space), std::move(dist), blocking};
}

}  // namespace ecac
