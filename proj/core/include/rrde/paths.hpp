#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rrde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when inputs violate a precondition (bad grid, mismatched shapes, out-of-range times).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Strictly increasing node times 0 = t_0 < t_1 < ... < t_{N-1} = T.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> times);

    /// `nodes` equally spaced nodes on [0, t_end]; the last node is exactly t_end.
    static TimeGrid uniform(double t_end, std::size_t nodes);

    std::size_t size() const { return times_.size(); }
    double operator[](std::size_t j) const { return times_[j]; }
    double t_end() const { return times_.back(); }
    std::span<const double> times() const { return times_; }

    /// Index of the largest node <= t. Throws for t outside [0, T].
    std::size_t index_at_or_before(double t) const;
    /// Index of the largest node < t, or 0 when t == 0 (so X_{0-} = X_0).
    std::size_t index_before(double t) const;
    /// True if t coincides exactly with a node.
    bool is_node(double t) const;

    bool operator==(const TimeGrid&) const = default;

private:
    std::vector<double> times_;
};

/// Union of two grids over the same horizon.
TimeGrid merge(const TimeGrid& a, const TimeGrid& b);

/// Piecewise-constant (cadlag) path: the value on [t_j, t_{j+1}) is the value at node j.
class GridPath {
public:
    GridPath() = default;
    /// `values` is dim x nodes; column j is the value at grid node j.
    GridPath(TimeGrid grid, Matrix values);

    static GridPath constant(TimeGrid grid, const Vector& value);
    static GridPath scalar(TimeGrid grid, std::span<const double> values);

    const TimeGrid& grid() const { return grid_; }
    const Matrix& values() const { return values_; }
    std::size_t dim() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t size() const { return grid_.size(); }

    auto node(std::size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }
    /// X_t under the staircase semantics.
    Vector at(double t) const;
    /// X_{t-}; X_{0-} := X_0.
    Vector left_limit(double t) const;

    /// Staircase resampling onto a finer grid over the same horizon.
    GridPath resample(const TimeGrid& finer) const;

    GridPath operator+(const GridPath& other) const;
    GridPath operator-(const GridPath& other) const;

    bool operator==(const GridPath& other) const;

private:
    TimeGrid grid_;
    Matrix values_;
};

/// X_t - X_s.
Vector increment(const GridPath& x, double s, double t);
/// X_t - X_{t-}; zero at non-node times.
Vector jump(const GridPath& x, double t);

/// Exact p-variation over partitions of [s, t] with nodes in the grid.
double p_variation(const GridPath& x, double p, double s, double t);
/// p-variation over the whole horizon.
double p_variation(const GridPath& x, double p);
/// ||X||_{p,[s,t)} = sup_{u<t} ||X||_{p,[s,u]}.
double p_variation_open(const GridPath& x, double p, double s, double t);

/// Node-index forms: partitions of the node range [first, last] (inclusive).
double p_variation_nodes(const GridPath& x, double p, std::size_t first, std::size_t last);

/// p-variation with respect to an arbitrary symmetric cell cost between node indices.
/// `cell(i, j)` must return the (unpowered) distance for the interval [t_i, t_j].
/// Handles additive increments and two-parameter functionals alike.
template <typename Cell>
double variation_dp(std::size_t first, std::size_t last, double p, Cell&& cell)
{
    if (p < 1.0) {
        throw InputError("p-variation requires p >= 1");
    }
    if (last <= first) {
        return 0.0;
    }
    const std::size_t m = last - first + 1;
    std::vector<double> best(m, 0.0);
    for (std::size_t j = 1; j < m; ++j) {
        double b = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double c = best[i] + std::pow(cell(first + i, first + j), p);
            if (c > b) {
                b = c;
            }
        }
        best[j] = b;
    }
    return std::pow(best[m - 1], 1.0 / p);
}

/// Running p-variation from a fixed start node, extended one node at a time.
/// value() after pushing nodes first..k equals variation_dp(first, k, p, cell).
template <typename Cell>
class RunningVariation {
public:
    RunningVariation(std::size_t first, double p, Cell cell)
        : first_(first), p_(p), cell_(std::move(cell)), best_{0.0}
    {
        if (p < 1.0) {
            throw InputError("p-variation requires p >= 1");
        }
    }

    /// Extend to the next node; returns the new p-th power sum.
    double extend()
    {
        const std::size_t j = best_.size();
        double b = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double c = best_[i] + std::pow(cell_(first_ + i, first_ + j), p_);
            if (c > b) {
                b = c;
            }
        }
        best_.push_back(b);
        return b;
    }

    std::size_t last() const { return first_ + best_.size() - 1; }
    double powered() const { return best_.back(); }
    double value() const { return std::pow(best_.back(), 1.0 / p_); }

private:
    std::size_t first_;
    double p_;
    Cell cell_;
    std::vector<double> best_;
};

/// Piecewise-linear increasing bijection of [0, T] through anchor pairs (u_k, lambda(u_k)).
class TimeChange {
public:
    TimeChange() = default;
    /// Interior anchors only; (0, 0) and (T, T) are added. Both coordinates must be
    /// strictly increasing and lie in (0, T).
    TimeChange(double t_end, std::vector<std::pair<double, double>> interior_anchors);

    static TimeChange identity(double t_end) { return TimeChange(t_end, {}); }

    double operator()(double t) const;
    double inverse(double s) const;
    /// sup_t |lambda(t) - t|, attained at an anchor.
    double sup_deviation() const;

    std::span<const double> domain_knots() const { return domain_; }
    std::span<const double> image_knots() const { return image_; }

private:
    std::vector<double> domain_;
    std::vector<double> image_;
};

/// X o lambda, represented exactly on the grid lambda^{-1}(nodes of X).
/// Anchor images that coincide with nodes map those nodes back to the anchor domains exactly.
GridPath compose(const GridPath& x, const TimeChange& lambda);

struct J1Estimate {
    double distance = 0.0;
    /// Time change attaining `distance` within the searched family.
    TimeChange best;
    std::size_t alignments_tried = 0;
    /// True when every monotone node alignment was evaluated.
    bool exhaustive = false;
    /// True when the identity time change attains the minimum over the family.
    bool identity_optimal = false;
};

/// Upper bound for the J1 p-variation distance between (Y, K) and (Y~, K~):
///   inf over lambda of  ||lambda|| v (||Y o lambda - Y~||_p + ||K o lambda - K~||_p),
/// with lambda restricted to piecewise-linear maps sending interior nodes of the second
/// pair's grid onto interior nodes of the first pair's grid (monotone partial matchings).
/// At most `search_budget` matchings are evaluated; the identity is always among them.
J1Estimate j1_distance(const GridPath& y, const GridPath& k,
                       const GridPath& y_tilde, const GridPath& k_tilde,
                       double p, std::size_t search_budget);

/// Evaluates the J1 objective for one time change.
double j1_objective(const GridPath& y, const GridPath& k,
                    const GridPath& y_tilde, const GridPath& k_tilde,
                    double p, const TimeChange& lambda);

}  // namespace rrde
