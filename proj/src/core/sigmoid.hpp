#pragma once

#include <string>
#include <vector>

namespace slfd {

// Four-parameter sigmoid: sigma(x) = c / (1 + exp(-k (x - x0))) + y0.
// c scales, k modulates slope, x0 shifts horizontally, y0 vertically.
struct SigmoidParams {
    double c = 0.0;
    double k = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;
};

struct FitPoint {
    double x = 0.0; // noise level
    double y = 0.0; // cumulative score
};

struct FitReport {
    SigmoidParams params;
    double r_squared = 0.0;
    std::vector<double> residuals; // ordered by (x, y)-sorted points
    int n_points = 0;
    bool degenerate = false;
    std::string source; // provenance signature of the dataset the points came from
};

// Closed-form evaluation; the exponent is clamped to +-500 so the result is
// finite for any finite parameters.
double sigmoid_eval(const SigmoidParams& p, double x);

// Nonlinear least squares via Gauss-Newton with backtracking from 16
// deterministic starts (c and k signs, x0 in {0.25, 0.5, 0.75}, y0 from the
// data extremes, plus shallow-slope starts for near-linear data). Lowest
// final SS_res wins; ties within 1e-12 go to the lowest start index. The
// returned parameters are canonicalized to c >= 0. Points are sorted
// internally so the result is independent of input order.
//
// Requires at least 4 points with at least 2 distinct x. All-equal y values
// return the flat fit (c=0, y0=mean) flagged degenerate with R^2 = 1.
FitReport fit_sigmoid(const std::vector<FitPoint>& points);

// R^2 of the best affine map from noise-level rank to per-level mean score,
// the baseline implied by treating levels as ordinal only. Requires at least
// 3 distinct levels.
double ordinal_baseline_r2(const std::vector<FitPoint>& points);

// Local refinement used by fit_sigmoid, exposed for the best-of-starts
// property check.
struct LocalFit {
    SigmoidParams params;
    double ss_res = 0.0;
};
LocalFit refine_sigmoid_fit(const SigmoidParams& start, const std::vector<FitPoint>& sorted_points);
std::vector<SigmoidParams> sigmoid_fit_starts(const std::vector<FitPoint>& sorted_points);

} // namespace slfd
