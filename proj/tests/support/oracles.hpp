#pragma once

// Test-side oracles, independent of the library's analytic paths: central
// finite differences for gradient checks and breadth-first search for the
// gridworld optimum.

#include <cmath>
#include <functional>
#include <queue>
#include <vector>

namespace testing_oracles {

// Central finite-difference gradient of f at theta.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> theta, double eps = 1e-5) {
    std::vector<double> grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        double keep = theta[i];
        theta[i] = keep + eps;
        double hi = f(theta);
        theta[i] = keep - eps;
        double lo = f(theta);
        theta[i] = keep;
        grad[i] = (hi - lo) / (2.0 * eps);
    }
    return grad;
}

// max_i |a_i - b_i| / max(floor, |a_i|, |b_i|)
inline double max_relative_error(const std::vector<double>& analytic,
                                 const std::vector<double>& numeric, double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        double denom = std::max({floor, std::abs(analytic[i]), std::abs(numeric[i])});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
    return worst;
}

// Shortest-path step count from start to goal on an n x n grid with
// 4-connected moves (clamped at the borders).
inline int grid_shortest_path(int n, int start, int goal) {
    std::vector<int> dist(static_cast<std::size_t>(n) * n, -1);
    std::queue<int> frontier;
    dist[start] = 0;
    frontier.push(start);
    while (!frontier.empty()) {
        int c = frontier.front();
        frontier.pop();
        if (c == goal) return dist[c];
        int x = c % n, y = c / n;
        const int nx[4] = {std::min(x + 1, n - 1), x, std::max(x - 1, 0), x};
        const int ny[4] = {y, std::min(y + 1, n - 1), y, std::max(y - 1, 0)};
        for (int k = 0; k < 4; ++k) {
            int nc = ny[k] * n + nx[k];
            if (dist[nc] < 0) {
                dist[nc] = dist[c] + 1;
                frontier.push(nc);
            }
        }
    }
    return -1;
}

// Optimal gridworld return under the -1 per step / +20 at goal reward.
inline double grid_optimal_return(int n, int start, int goal) {
    return 20.0 - grid_shortest_path(n, start, goal);
}

} // namespace testing_oracles
