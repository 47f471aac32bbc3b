#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ecac/config.hpp"

namespace ecac {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

enum class SolveMethod { Auto, Direct, Iterative };

namespace ctmc {

/// Direct solves are used up to this many states, iterative sweeps above.
inline constexpr int kDirectLimit = 5000;
inline constexpr double kIterativeResidualTarget = 1e-10;
inline constexpr int kMaxSweeps = 100000;
/// Residual above this is treated as a failed solve.
inline constexpr double kFailureResidual = 1e-8;

/// States reachable from `start` following positive-rate edges.
inline std::vector<int> reachable_set(const SparseMatrix& generator, int start) {
    const int n = static_cast<int>(generator.rows());
    // Column-major storage makes row traversal awkward; walk the transpose.
    SparseMatrix gt = generator.transpose();
    std::vector<char> seen(n, 0);
    std::vector<int> queue{start};
    seen[start] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int i = queue[head];
        for (SparseMatrix::InnerIterator it(gt, i); it; ++it) {
            const int j = static_cast<int>(it.row());
            if (j != i && it.value() > 0.0 && !seen[j]) {
                seen[j] = 1;
                queue.push_back(j);
            }
        }
    }
    std::sort(queue.begin(), queue.end());
    return queue;
}

inline double balance_residual(const SparseMatrix& generator, const Eigen::VectorXd& pi) {
    Eigen::VectorXd r = generator.transpose() * pi;
    return r.lpNorm<Eigen::Infinity>();
}

/// pi G = 0 with one balance equation replaced by the normalization row,
/// solved by sparse LU with partial pivoting.
inline Eigen::VectorXd solve_direct(const SparseMatrix& generator, int replaced_row) {
    const int n = static_cast<int>(generator.rows());
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(generator.nonZeros()) + static_cast<std::size_t>(n));
    for (int col = 0; col < n; ++col) {
        for (SparseMatrix::InnerIterator it(generator, col); it; ++it) {
            // balance equation of state `col` collects inflow G(row, col)
            if (static_cast<int>(col) != replaced_row)
                trips.emplace_back(col, static_cast<int>(it.row()), it.value());
        }
    }
    for (int i = 0; i < n; ++i) trips.emplace_back(replaced_row, i, 1.0);

    SparseMatrix a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();

    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) throw SolveError("steady-state factorization failed");
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[replaced_row] = 1.0;
    Eigen::VectorXd pi = lu.solve(b);
    if (lu.info() != Eigen::Success) throw SolveError("steady-state back-substitution failed");
    return pi;
}

/// Gauss-Seidel sweeps on the balance equations with renormalization.
/// Column i of the (column-major) generator holds the inflow rates of
/// state i, so each update is pi_i = inflow_i / outflow_rate_i in place.
inline Eigen::VectorXd solve_iterative(const SparseMatrix& generator) {
    const int n = static_cast<int>(generator.rows());
    Eigen::VectorXd diag(n);
    for (int i = 0; i < n; ++i) diag[i] = generator.coeff(i, i);
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        for (int i = 0; i < n; ++i) {
            double inflow = 0.0;
            for (SparseMatrix::InnerIterator it(generator, i); it; ++it) {
                const int j = static_cast<int>(it.row());
                if (j != i) inflow += pi[j] * it.value();
            }
            pi[i] = diag[i] < 0.0 ? inflow / (-diag[i]) : inflow;
        }
        const double total = pi.sum();
        if (total > 0.0) pi /= total;
        if (balance_residual(generator, pi) <= kIterativeResidualTarget) return pi;
    }
    throw SolveError("steady-state iteration did not reach residual 1e-10 in " +
                     std::to_string(kMaxSweeps) + " sweeps");
}

}  // namespace ctmc

struct StationaryResult {
    Eigen::VectorXd probabilities;
    double residual = 0.0;
};

/// Stationary distribution of the CTMC started at `start`: the generator is
/// restricted to the closure reachable from `start` (zero elsewhere), which
/// for these models is strongly connected because every admitted session or
/// queued packet eventually departs.
inline StationaryResult stationary_distribution(const SparseMatrix& generator, int start = 0,
                                                SolveMethod method = SolveMethod::Auto) {
    const int n = static_cast<int>(generator.rows());
    if (generator.cols() != n) throw ValidationError("generator must be square");

    const std::vector<int> live = ctmc::reachable_set(generator, start);
    Eigen::VectorXd pi_full = Eigen::VectorXd::Zero(n);

    if (live.size() == 1) {
        pi_full[live[0]] = 1.0;
        return {pi_full, 0.0};
    }

    // restrict to the reachable closure
    const int m = static_cast<int>(live.size());
    std::vector<int> pos(n, -1);
    for (int k = 0; k < m; ++k) pos[live[k]] = k;
    std::vector<Triplet> trips;
    for (int col = 0; col < n; ++col) {
        if (pos[col] < 0) continue;
        for (SparseMatrix::InnerIterator it(generator, col); it; ++it) {
            const int row = static_cast<int>(it.row());
            if (pos[row] >= 0 && it.value() != 0.0)
                trips.emplace_back(pos[row], pos[col], it.value());
        }
    }
    SparseMatrix sub(m, m);
    sub.setFromTriplets(trips.begin(), trips.end());
    sub.makeCompressed();

    Eigen::VectorXd pi;
    const bool direct =
        method == SolveMethod::Direct || (method == SolveMethod::Auto && m < ctmc::kDirectLimit);
    if (direct) {
        try {
            pi = ctmc::solve_direct(sub, m - 1);
        } catch (const SolveError&) {
            pi = ctmc::solve_direct(sub, 0);
        }
    } else {
        pi = ctmc::solve_iterative(sub);
    }

    double min_entry = pi.minCoeff();
    if (min_entry < -1e-9)
        throw SolveError("steady-state solve produced negative probability " +
                         std::to_string(min_entry));
    pi = pi.cwiseMax(0.0);
    const double total = pi.sum();
    if (!(total > 0.0)) throw SolveError("steady-state solve produced a zero vector");
    pi /= total;

    const double residual = ctmc::balance_residual(sub, pi);
    if (residual > ctmc::kFailureResidual)
        throw SolveError("steady-state residual " + std::to_string(residual) + " above tolerance");

    for (int k = 0; k < m; ++k) pi_full[live[k]] = pi[k];
    return {pi_full, residual};
}

}  // namespace ecac
