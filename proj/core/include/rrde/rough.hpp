#pragma once

#include "rrde/paths.hpp"
#include "rrde/solve_report.hpp"
#include "rrde/vector_field.hpp"

#include <optional>
#include <vector>

namespace rrde {

/// x (x) y as the matrix with entry (b, a) = x_b y_a.
inline Matrix outer(const Vector& x, const Vector& y)
{
    return x * y.transpose();
}

/// Level-2 rough path (X, XX) on a grid, stored through the prefixes XX_{0,t_j}.
/// Two-parameter increments are reconstructed with Chen's relation
///   XX_{s,t} = XX_{0,t} - XX_{0,s} - X_{0,s} (x) X_{s,t}.
class Level2RoughPath {
public:
    Level2RoughPath() = default;
    /// prefix[0] must vanish; each prefix is d x d.
    Level2RoughPath(GridPath x, std::vector<Matrix> prefix, double p);

    /// XX_{0,t_j} = sum_{i<j} X_{0,t_i} (x) X_{t_i,t_{i+1}}; consecutive blocks vanish.
    static Level2RoughPath left_point_lift(const GridPath& x, double p = 2.5);

    /// Lift whose consecutive blocks XX_{t_j,t_{j+1}} are the given matrices
    /// (one per step, size nodes - 1); Chen fixes everything else.
    static Level2RoughPath from_blocks(const GridPath& x, const std::vector<Matrix>& blocks,
                                       double p = 2.5);

    const GridPath& path() const { return x_; }
    const TimeGrid& grid() const { return x_.grid(); }
    const std::vector<Matrix>& prefix() const { return prefix_; }
    double p() const { return p_; }
    std::size_t dim() const { return x_.dim(); }
    std::size_t size() const { return x_.size(); }

    /// XX_{t_i, t_j} for node indices i <= j.
    Matrix area(std::size_t i, std::size_t j) const;
    /// XX_{t_j, t_{j+1}}, the jump of the second level at node j + 1.
    Matrix block(std::size_t j) const { return area(j, j + 1); }
    /// XX_{s,t} under the staircase semantics; throws for s > t or out-of-range times.
    Matrix chen_lookup(double s, double t) const;

    /// Staircase refinement: X and the prefixes are held constant between old nodes.
    Level2RoughPath resample(const TimeGrid& finer) const;

private:
    GridPath x_;
    std::vector<Matrix> prefix_;
    double p_ = 2.5;
};

/// Exact r-variation of (s,t) -> |XX_{s,t}| (Frobenius) over grid partitions of [s, t].
double two_param_p_variation(const Level2RoughPath& x, double r, double s, double t);
double two_param_p_variation_nodes(const Level2RoughPath& x, double r, std::size_t first,
                                   std::size_t last);

/// ||X||_{p,[s,t]} + ||XX||_{p/2,[s,t]} on node range [first, last].
double rough_seminorm_nodes(const Level2RoughPath& x, std::size_t first, std::size_t last);
double rough_seminorm(const Level2RoughPath& x);

/// Pair (Y, Y') controlled by the reference path X.
/// Y has m components; Y'_j is m x d. Matrix-valued integrands use m = n * d with the
/// column-major vectorisation of the n x d values.
struct ControlledPath {
    GridPath reference;
    GridPath y;
    std::vector<Matrix> yprime;

    /// Throws InputError unless grids and shapes agree.
    void validate() const;
};

/// R^Y_{s,t} = Y_{s,t} - Y'_s X_{s,t}.
Vector remainder(const ControlledPath& c, double s, double t);
Vector remainder_nodes(const ControlledPath& c, std::size_t i, std::size_t j);
/// ||R^Y||_{r} over the whole grid.
double remainder_variation(const ControlledPath& c, double r);
/// |Y_0| + |Y'_0| + ||Y'||_p + ||R^Y||_{p/2}.
double controlled_norm(const ControlledPath& c, double p);

/// Compensated left-point sums t_j -> sum_{i<j} Y_i X_{i,i+1} + Y'_i XX_{i,i+1} for an
/// integrand with n x d values (stored as vec, m = n * d). The result is controlled with
/// derivative Y (reshaped to n x d).
ControlledPath rough_integral(const ControlledPath& integrand, const Level2RoughPath& x);

/// (vec f(Y), Df(Y) Y'). Requires a declared third derivative.
ControlledPath compose_controlled(const VectorField& f, const ControlledPath& c);

struct RdeSolveConfig {
    double p = 2.5;
    /// Exponent of the convergence metric; defaults to (p + 3) / 2.
    std::optional<double> q;
    /// Window admission threshold for |||X|||_{p,[s,t)} + ||L||_{p,[s,t)}.
    double delta = 0.25;
    double tol = 1e-12;
    std::size_t max_iter = 500;
    /// Damping theta in Y <- (1 - theta) Y + theta M(Y).
    double theta = 1.0;
    /// Halve theta when successive distances stop decreasing.
    bool adaptive_damping = true;
    double contraction_target = 0.5;
    bool shrink_on_slow_contraction = true;
    std::size_t max_shrinks = 64;
    PicardStart start = PicardStart::Constant;

    double effective_q() const { return q ? *q : 0.5 * (p + 3.0); }
    /// Throws InputError unless 2 <= p < 3, p < q < 3, 0 < theta <= 1, delta > 0, tol > 0.
    void validate() const;
};

struct RdeSolution {
    GridPath y;
    /// Gubinelli derivative f(Y), vec of the n x d values.
    GridPath yprime;
    GridPath k;
    SolveReport report;
};

/// Reflected rough equation Y = y + int f(Y) dX + K, Y >= L, with Y' = f(Y).
/// X and L are merged onto their union grid first.
RdeSolution solve_reflected_rde(const VectorField& f, const Vector& y0, const Level2RoughPath& x,
                                const GridPath& l, const RdeSolveConfig& cfg);

/// Max node defect |Y - y - sum (f(Y) dX + Df(Y) f(Y) dXX) - K| on the grid of y.
double rde_equation_residual(const VectorField& f, const Vector& y0, const Level2RoughPath& x,
                             const GridPath& y, const GridPath& k);

}  // namespace rrde
