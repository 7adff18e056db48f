#include "rrde/paths.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace rrde {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times))
{
    if (times_.size() < 2) {
        throw InputError("time grid needs at least two nodes");
    }
    if (times_.front() != 0.0) {
        throw InputError("time grid must start at 0");
    }
    for (std::size_t j = 1; j < times_.size(); ++j) {
        if (!(times_[j] > times_[j - 1]) || !std::isfinite(times_[j])) {
            throw InputError("time grid must be strictly increasing and finite (node " +
                             std::to_string(j) + ")");
        }
    }
}

TimeGrid TimeGrid::uniform(double t_end, std::size_t nodes)
{
    if (nodes < 2 || !(t_end > 0.0)) {
        throw InputError("uniform grid needs t_end > 0 and at least two nodes");
    }
    std::vector<double> t(nodes);
    const double n = static_cast<double>(nodes - 1);
    for (std::size_t j = 0; j < nodes; ++j) {
        t[j] = t_end * static_cast<double>(j) / n;
    }
    t.back() = t_end;
    return TimeGrid(std::move(t));
}

std::size_t TimeGrid::index_at_or_before(double t) const
{
    if (!(t >= 0.0) || t > t_end()) {
        throw InputError("time " + std::to_string(t) + " outside [0, T]");
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
}

std::size_t TimeGrid::index_before(double t) const
{
    if (!(t >= 0.0) || t > t_end()) {
        throw InputError("time " + std::to_string(t) + " outside [0, T]");
    }
    if (t == 0.0) {
        return 0;
    }
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
}

bool TimeGrid::is_node(double t) const
{
    return std::binary_search(times_.begin(), times_.end(), t);
}

TimeGrid merge(const TimeGrid& a, const TimeGrid& b)
{
    if (a.t_end() != b.t_end()) {
        throw InputError("cannot merge grids with different horizons");
    }
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(),
                   std::back_inserter(out));
    return TimeGrid(std::move(out));
}

GridPath::GridPath(TimeGrid grid, Matrix values) : grid_(std::move(grid)), values_(std::move(values))
{
    if (static_cast<std::size_t>(values_.cols()) != grid_.size()) {
        throw InputError("path has " + std::to_string(values_.cols()) + " values for " +
                         std::to_string(grid_.size()) + " grid nodes");
    }
    if (values_.rows() == 0) {
        throw InputError("path dimension must be positive");
    }
}

GridPath GridPath::constant(TimeGrid grid, const Vector& value)
{
    Matrix v = value.replicate(1, static_cast<Eigen::Index>(grid.size()));
    return GridPath(std::move(grid), std::move(v));
}

GridPath GridPath::scalar(TimeGrid grid, std::span<const double> values)
{
    Matrix v(1, static_cast<Eigen::Index>(values.size()));
    for (std::size_t j = 0; j < values.size(); ++j) {
        v(0, static_cast<Eigen::Index>(j)) = values[j];
    }
    return GridPath(std::move(grid), std::move(v));
}

Vector GridPath::at(double t) const
{
    return node(grid_.index_at_or_before(t));
}

Vector GridPath::left_limit(double t) const
{
    return node(grid_.index_before(t));
}

GridPath GridPath::resample(const TimeGrid& finer) const
{
    if (finer.t_end() != grid_.t_end()) {
        throw InputError("resample target has a different horizon");
    }
    Matrix v(values_.rows(), static_cast<Eigen::Index>(finer.size()));
    std::size_t src = 0;
    for (std::size_t j = 0; j < finer.size(); ++j) {
        while (src + 1 < grid_.size() && grid_[src + 1] <= finer[j]) {
            ++src;
        }
        v.col(static_cast<Eigen::Index>(j)) = values_.col(static_cast<Eigen::Index>(src));
    }
    return GridPath(finer, std::move(v));
}

GridPath GridPath::operator+(const GridPath& other) const
{
    if (!(grid_ == other.grid_) || dim() != other.dim()) {
        throw InputError("path sum requires a shared grid and dimension");
    }
    return GridPath(grid_, values_ + other.values_);
}

GridPath GridPath::operator-(const GridPath& other) const
{
    if (!(grid_ == other.grid_) || dim() != other.dim()) {
        throw InputError("path difference requires a shared grid and dimension");
    }
    return GridPath(grid_, values_ - other.values_);
}

bool GridPath::operator==(const GridPath& other) const
{
    return grid_ == other.grid_ && values_.rows() == other.values_.rows() &&
           values_ == other.values_;
}

Vector increment(const GridPath& x, double s, double t)
{
    if (s > t) {
        throw InputError("increment requires s <= t");
    }
    return x.at(t) - x.at(s);
}

Vector jump(const GridPath& x, double t)
{
    const std::size_t j = x.grid().index_at_or_before(t);
    if (j == 0 || x.grid()[j] != t) {
        return Vector::Zero(static_cast<Eigen::Index>(x.dim()));
    }
    return x.node(j) - x.node(j - 1);
}

double p_variation_nodes(const GridPath& x, double p, std::size_t first, std::size_t last)
{
    if (last >= x.size() || first > last) {
        throw InputError("node range out of bounds");
    }
    const Matrix& v = x.values();
    return variation_dp(first, last, p, [&v](std::size_t i, std::size_t j) {
        return (v.col(static_cast<Eigen::Index>(j)) - v.col(static_cast<Eigen::Index>(i))).norm();
    });
}

double p_variation(const GridPath& x, double p, double s, double t)
{
    if (p < 1.0) {
        throw InputError("p-variation requires p >= 1");
    }
    if (s > t) {
        throw InputError("p-variation interval requires s <= t");
    }
    const std::size_t a = x.grid().index_at_or_before(s);
    const std::size_t b = x.grid().index_at_or_before(t);
    return p_variation_nodes(x, p, a, b);
}

double p_variation(const GridPath& x, double p)
{
    return p_variation_nodes(x, p, 0, x.size() - 1);
}

double p_variation_open(const GridPath& x, double p, double s, double t)
{
    if (p < 1.0) {
        throw InputError("p-variation requires p >= 1");
    }
    if (!(s < t)) {
        throw InputError("open-interval p-variation requires s < t");
    }
    const std::size_t a = x.grid().index_at_or_before(s);
    const std::size_t b = x.grid().index_before(t);
    return p_variation_nodes(x, p, a, std::max(a, b));
}

TimeChange::TimeChange(double t_end, std::vector<std::pair<double, double>> interior_anchors)
{
    if (!(t_end > 0.0)) {
        throw InputError("time change needs a positive horizon");
    }
    domain_.push_back(0.0);
    image_.push_back(0.0);
    for (const auto& [u, v] : interior_anchors) {
        if (!(u > domain_.back()) || !(v > image_.back()) || !(u < t_end) || !(v < t_end)) {
            throw InputError("time-change anchors must be strictly increasing inside (0, T)");
        }
        domain_.push_back(u);
        image_.push_back(v);
    }
    domain_.push_back(t_end);
    image_.push_back(t_end);
}

namespace {

double interpolate(std::span<const double> from, std::span<const double> to, double t)
{
    if (t <= from.front()) {
        return to.front();
    }
    if (t >= from.back()) {
        return to.back();
    }
    auto it = std::upper_bound(from.begin(), from.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - from.begin());
    if (from[k - 1] == t) {
        return to[k - 1];
    }
    const double w = (t - from[k - 1]) / (from[k] - from[k - 1]);
    return to[k - 1] + w * (to[k] - to[k - 1]);
}

}  // namespace

double TimeChange::operator()(double t) const
{
    return interpolate(domain_, image_, t);
}

double TimeChange::inverse(double s) const
{
    return interpolate(image_, domain_, s);
}

double TimeChange::sup_deviation() const
{
    double m = 0.0;
    for (std::size_t k = 0; k < domain_.size(); ++k) {
        m = std::max(m, std::abs(image_[k] - domain_[k]));
    }
    return m;
}

GridPath compose(const GridPath& x, const TimeChange& lambda)
{
    if (lambda.domain_knots().back() != x.grid().t_end()) {
        throw InputError("time change horizon does not match the path");
    }
    std::vector<double> t(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        t[j] = lambda.inverse(x.grid()[j]);
    }
    return GridPath(TimeGrid(std::move(t)), x.values());
}

double j1_objective(const GridPath& y, const GridPath& k, const GridPath& y_tilde,
                    const GridPath& k_tilde, double p, const TimeChange& lambda)
{
    const GridPath yl = compose(y, lambda);
    const GridPath kl = compose(k, lambda);
    const TimeGrid common = merge(yl.grid(), y_tilde.grid());
    const double dy = p_variation(yl.resample(common) - y_tilde.resample(common), p);
    const double dk = p_variation(kl.resample(common) - k_tilde.resample(common), p);
    return std::max(lambda.sup_deviation(), dy + dk);
}

J1Estimate j1_distance(const GridPath& y, const GridPath& k, const GridPath& y_tilde,
                       const GridPath& k_tilde, double p, std::size_t search_budget)
{
    if (!(y.grid() == k.grid()) || !(y_tilde.grid() == k_tilde.grid())) {
        throw InputError("each (Y, K) pair must share a grid");
    }
    const double t_end = y.grid().t_end();
    if (y_tilde.grid().t_end() != t_end) {
        throw InputError("J1 distance requires a common horizon");
    }

    // lambda maps the second pair's time axis (domain) onto the first pair's (image).
    const auto dom = y_tilde.grid().times().subspan(1, y_tilde.size() - 2);
    const auto img = y.grid().times().subspan(1, y.size() - 2);

    J1Estimate est;
    est.distance = std::numeric_limits<double>::infinity();
    const std::size_t budget = std::max<std::size_t>(search_budget, 1);
    double identity_value = 0.0;
    bool budget_hit = false;

    std::vector<std::pair<double, double>> anchors;
    std::function<void(std::size_t, std::size_t)> visit = [&](std::size_t i0, std::size_t j0) {
        if (est.alignments_tried >= budget) {
            budget_hit = true;
            return;
        }
        TimeChange lambda(t_end, anchors);
        const double v = j1_objective(y, k, y_tilde, k_tilde, p, lambda);
        if (est.alignments_tried == 0) {
            identity_value = v;
        }
        ++est.alignments_tried;
        if (v < est.distance) {
            est.distance = v;
            est.best = lambda;
        }
        for (std::size_t i = i0; i < dom.size(); ++i) {
            for (std::size_t j = j0; j < img.size(); ++j) {
                anchors.emplace_back(dom[i], img[j]);
                visit(i + 1, j + 1);
                anchors.pop_back();
                if (budget_hit) {
                    return;
                }
            }
        }
    };
    visit(0, 0);

    est.exhaustive = !budget_hit;
    est.identity_optimal = identity_value <= est.distance;
    return est;
}

}  // namespace rrde
