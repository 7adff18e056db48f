#pragma once

#include "rrde/paths.hpp"
#include "rrde/solve_report.hpp"
#include "rrde/vector_field.hpp"

#include <vector>

namespace rrde {

/// Path with values in L(R^d, R^n), one n x d matrix per grid node.
struct OperatorPath {
    TimeGrid grid;
    std::vector<Matrix> values;
};

/// Left-point Riemann-Stieltjes sum t_j -> sum_{i<j} Y_{t_i} X_{t_i, t_{i+1}}.
/// Its jump at node j is exactly Y_{t_{j-1}} (X_{t_j} - X_{t_{j-1}}).
GridPath young_integral(const OperatorPath& y, const GridPath& x);

/// p-variation of an operator path in the Frobenius norm, over nodes [first, last].
double p_variation_nodes(const OperatorPath& y, double p, std::size_t first, std::size_t last);

/// |int_s^t Y dX - Y_s X_{s,t}| / (||Y||_{q,[s,t)} ||X||_{p,[s,t]}), with 0/0 = 0.
double young_estimate_residual(const OperatorPath& y, const GridPath& x, double p, double q,
                               double s, double t);

struct YoungSolveConfig {
    double p = 2.0;
    double q = 1.0;
    /// Window admission threshold for ||A||_q + ||X||_p + ||L||_p on [s, t).
    double delta = 0.25;
    double tol = 1e-12;
    std::size_t max_iter = 500;
    /// Accepted windows must contract at least this fast per iteration.
    double contraction_target = 0.5;
    /// Halve a window whose iteration contracts slower than the target.
    bool shrink_on_slow_contraction = true;
    std::size_t max_shrinks = 64;
    PicardStart start = PicardStart::Constant;

    /// Throws InputError unless 1 <= q < 2, q <= p, 1/p + 1/q > 1, delta > 0, tol > 0.
    void validate() const;
};

struct YoungSolution {
    GridPath y;
    GridPath k;
    SolveReport report;
};

/// Reflected Young equation Y = y + int f(Y) dA + X_{0,.} + K, Y >= L, K minimal.
/// A (R^d), X (R^n) and L (R^n) are merged onto their union grid first.
/// Input errors throw InputError; non-convergence is reported in `report.failure`
/// with the paths filled up to the failing window.
YoungSolution solve_reflected_young(const VectorField& f, const Vector& y0, const GridPath& a,
                                    const GridPath& x, const GridPath& l,
                                    const YoungSolveConfig& cfg);

/// Max node defect |Y - y - int f(Y) dA - X_{0,.} - K| on the common grid of the inputs.
double young_equation_residual(const VectorField& f, const Vector& y0, const GridPath& a,
                               const GridPath& x, const GridPath& y, const GridPath& k);

/// Data of one reflected Young problem.
struct YoungData {
    Vector y0;
    GridPath a;
    GridPath x;
    GridPath l;
};

struct StabilitySample {
    double ratio = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    bool converged = false;
};

/// (||Y - Y~||_p + ||K - K~||_p) /
///   (|y - y~| + ||A - A~||_q + ||X - X~||_p + |L_0 - L~_0| + ||L - L~||_p), 0/0 = 0.
/// Both problems are solved on the union grid of all six paths.
StabilitySample stability_ratio(const VectorField& f, const YoungData& data,
                                const YoungData& perturbed, const YoungSolveConfig& cfg);

}  // namespace rrde
