#include "sigmoid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace slfd {

namespace {

constexpr double kExpClamp = 500.0;

double logistic_clamped(double u) {
    u = std::clamp(u, -kExpClamp, kExpClamp);
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    double e = std::exp(u);
    return e / (1.0 + e);
}

double sum_squared_residuals(const SigmoidParams& p, const std::vector<FitPoint>& pts) {
    double ss = 0.0;
    for (const auto& pt : pts) {
        double r = sigmoid_eval(p, pt.x) - pt.y;
        ss += r * r;
    }
    return ss;
}

// Solve a 4x4 linear system in place; returns false if singular.
bool solve4(double a[4][4], double b[4], double out[4]) {
    int perm[4] = {0, 1, 2, 3};
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[perm[r]][col]) > std::abs(a[perm[pivot]][col])) pivot = r;
        std::swap(perm[col], perm[pivot]);
        double diag = a[perm[col]][col];
        if (std::abs(diag) < 1e-300) return false;
        for (int r = col + 1; r < 4; ++r) {
            double factor = a[perm[r]][col] / diag;
            for (int c = col; c < 4; ++c) a[perm[r]][c] -= factor * a[perm[col]][c];
            b[perm[r]] -= factor * b[perm[col]];
        }
    }
    for (int col = 3; col >= 0; --col) {
        double acc = b[perm[col]];
        for (int c = col + 1; c < 4; ++c) acc -= a[perm[col]][c] * out[c];
        out[col] = acc / a[perm[col]][col];
    }
    for (int i = 0; i < 4; ++i)
        if (!std::isfinite(out[i])) return false;
    return true;
}

} // namespace

double sigmoid_eval(const SigmoidParams& p, double x) {
    return p.c * logistic_clamped(p.k * (x - p.x0)) + p.y0;
}

LocalFit refine_sigmoid_fit(const SigmoidParams& start, const std::vector<FitPoint>& pts) {
    SigmoidParams p = start;
    double ss = sum_squared_residuals(p, pts);

    for (int iter = 0; iter < 200; ++iter) {
        // assemble J^T J and J^T r
        double jtj[4][4] = {};
        double jtr[4] = {};
        for (const auto& pt : pts) {
            double u = p.k * (pt.x - p.x0);
            double s = logistic_clamped(u);
            bool clamped = std::abs(u) >= kExpClamp;
            double ds = clamped ? 0.0 : s * (1.0 - s);
            double jac[4] = {
                s,                          // d/dc
                p.c * ds * (pt.x - p.x0),   // d/dk
                -p.c * ds * p.k,            // d/dx0
                1.0,                        // d/dy0
            };
            double r = p.c * s + p.y0 - pt.y;
            for (int i = 0; i < 4; ++i) {
                jtr[i] += jac[i] * r;
                for (int j = 0; j < 4; ++j) jtj[i][j] += jac[i] * jac[j];
            }
        }
        double scale = jtj[0][0] + jtj[1][1] + jtj[2][2] + jtj[3][3];
        for (int i = 0; i < 4; ++i) jtj[i][i] += 1e-12 * std::max(scale, 1.0);
        double rhs[4] = {-jtr[0], -jtr[1], -jtr[2], -jtr[3]};
        double delta[4];
        if (!solve4(jtj, rhs, delta)) break;

        // backtracking line search on SS_res
        double alpha = 1.0;
        bool improved = false;
        for (int bt = 0; bt < 40; ++bt) {
            SigmoidParams trial{p.c + alpha * delta[0], p.k + alpha * delta[1],
                                p.x0 + alpha * delta[2], p.y0 + alpha * delta[3]};
            double trial_ss = sum_squared_residuals(trial, pts);
            if (std::isfinite(trial_ss) && trial_ss < ss) {
                p = trial;
                double gain = ss - trial_ss;
                ss = trial_ss;
                improved = true;
                if (gain <= 1e-14 * std::max(ss, 1.0)) iter = 200; // converged
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) break;
    }
    return {p, ss};
}

std::vector<SigmoidParams> sigmoid_fit_starts(const std::vector<FitPoint>& pts) {
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();
    double ymean = 0.0;
    for (const auto& pt : pts) {
        ymin = std::min(ymin, pt.y);
        ymax = std::max(ymax, pt.y);
        ymean += pt.y;
    }
    ymean /= static_cast<double>(pts.size());
    double range = ymax - ymin;
    if (range <= 0.0) range = std::max(std::abs(ymean), 1.0);

    std::vector<SigmoidParams> starts;
    for (double c : {range, -range})
        for (double k : {8.0, -8.0})
            for (double x0 : {0.25, 0.5, 0.75})
                starts.push_back({c, k, x0, c > 0.0 ? ymin : ymax});
    // shallow and widened starts cover near-linear data
    starts.push_back({range, 1.0, 0.5, ymin});
    starts.push_back({range, -1.0, 0.5, ymin});
    starts.push_back({4.0 * range, 0.5, 0.5, ymean - 2.0 * range});
    starts.push_back({4.0 * range, -0.5, 0.5, ymean - 2.0 * range});
    return starts;
}

FitReport fit_sigmoid(const std::vector<FitPoint>& points) {
    if (points.size() < 4)
        throw std::invalid_argument("fit_sigmoid: need at least 4 points");
    std::vector<FitPoint> pts = points;
    std::sort(pts.begin(), pts.end(), [](const FitPoint& a, const FitPoint& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    std::set<double> distinct_x;
    for (const auto& pt : pts) distinct_x.insert(pt.x);
    if (distinct_x.size() < 2)
        throw std::invalid_argument("fit_sigmoid: need at least 2 distinct noise levels");

    FitReport report;
    report.n_points = static_cast<int>(pts.size());

    double ymean = 0.0;
    for (const auto& pt : pts) ymean += pt.y;
    ymean /= static_cast<double>(pts.size());
    double ss_tot = 0.0;
    for (const auto& pt : pts) ss_tot += (pt.y - ymean) * (pt.y - ymean);

    if (ss_tot == 0.0) {
        // all y identical: flat fit, zero residual over zero variance
        report.params = {0.0, 1.0, 0.5, ymean};
        report.degenerate = true;
        report.r_squared = 1.0;
        report.residuals.assign(pts.size(), 0.0);
        return report;
    }

    auto starts = sigmoid_fit_starts(pts);
    double best_ss = std::numeric_limits<double>::infinity();
    SigmoidParams best;
    for (const auto& start : starts) {
        LocalFit local = refine_sigmoid_fit(start, pts);
        // ties within 1e-12 keep the earlier start
        if (local.ss_res < best_ss - 1e-12 * std::max(1.0, local.ss_res)) {
            best_ss = local.ss_res;
            best = local.params;
        }
    }

    // canonical orientation: c >= 0 (the two orientations evaluate identically)
    if (best.c < 0.0) {
        best.y0 += best.c;
        best.c = -best.c;
        best.k = -best.k;
    }

    report.params = best;
    report.residuals.reserve(pts.size());
    double ss_res = 0.0;
    for (const auto& pt : pts) {
        double r = sigmoid_eval(best, pt.x) - pt.y;
        report.residuals.push_back(r);
        ss_res += r * r;
    }
    report.r_squared = 1.0 - ss_res / ss_tot;
    return report;
}

double ordinal_baseline_r2(const std::vector<FitPoint>& points) {
    std::set<double> levels_set;
    for (const auto& pt : points) levels_set.insert(pt.x);
    if (levels_set.size() < 3)
        throw std::invalid_argument("ordinal_baseline_r2: need at least 3 distinct levels");
    std::vector<double> levels(levels_set.begin(), levels_set.end());

    std::vector<double> means(levels.size(), 0.0);
    std::vector<int> counts(levels.size(), 0);
    for (const auto& pt : points) {
        std::size_t idx = static_cast<std::size_t>(
            std::lower_bound(levels.begin(), levels.end(), pt.x) - levels.begin());
        means[idx] += pt.y;
        counts[idx] += 1;
    }
    for (std::size_t i = 0; i < means.size(); ++i) means[i] /= counts[i];

    // least-squares line through (rank, mean)
    double n = static_cast<double>(means.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        double x = static_cast<double>(i);
        sx += x;
        sy += means[i];
        sxx += x * x;
        sxy += x * means[i];
    }
    double denom = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;

    double mean_y = sy / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        double pred = slope * static_cast<double>(i) + intercept;
        ss_res += (means[i] - pred) * (means[i] - pred);
        ss_tot += (means[i] - mean_y) * (means[i] - mean_y);
    }
    if (ss_tot == 0.0) return 1.0;
    return 1.0 - ss_res / ss_tot;
}

} // namespace slfd
