#include "rrde/rough.hpp"

#include "windowed.hpp"

#include <algorithm>

namespace rrde {

Level2RoughPath::Level2RoughPath(GridPath x, std::vector<Matrix> prefix, double p)
    : x_(std::move(x)), prefix_(std::move(prefix)), p_(p)
{
    if (!(p_ >= 2.0 && p_ < 3.0)) {
        throw InputError("rough path exponent p must lie in [2, 3)");
    }
    if (prefix_.size() != x_.size()) {
        throw InputError("need one second-level prefix per grid node");
    }
    const auto d = static_cast<Eigen::Index>(x_.dim());
    for (const Matrix& m : prefix_) {
        if (m.rows() != d || m.cols() != d) {
            throw InputError("second-level prefixes must be d x d");
        }
    }
    if (!prefix_.front().isZero(0.0)) {
        throw InputError("second-level prefix at time 0 must vanish");
    }
}

Level2RoughPath Level2RoughPath::left_point_lift(const GridPath& x, double p)
{
    const auto d = static_cast<Eigen::Index>(x.dim());
    std::vector<Matrix> prefix(x.size(), Matrix::Zero(d, d));
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        prefix[j + 1] = prefix[j] + outer(x.node(j) - x.node(0), x.node(j + 1) - x.node(j));
    }
    return Level2RoughPath(x, std::move(prefix), p);
}

Level2RoughPath Level2RoughPath::from_blocks(const GridPath& x, const std::vector<Matrix>& blocks,
                                             double p)
{
    if (blocks.size() + 1 != x.size()) {
        throw InputError("need one second-level block per grid step");
    }
    const auto d = static_cast<Eigen::Index>(x.dim());
    std::vector<Matrix> prefix(x.size(), Matrix::Zero(d, d));
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        if (blocks[j].rows() != d || blocks[j].cols() != d) {
            throw InputError("second-level blocks must be d x d");
        }
        prefix[j + 1] =
            prefix[j] + outer(x.node(j) - x.node(0), x.node(j + 1) - x.node(j)) + blocks[j];
    }
    return Level2RoughPath(x, std::move(prefix), p);
}

Matrix Level2RoughPath::area(std::size_t i, std::size_t j) const
{
    if (i > j || j >= size()) {
        throw InputError("area requires node indices i <= j within the grid");
    }
    return prefix_[j] - prefix_[i] - outer(x_.node(i) - x_.node(0), x_.node(j) - x_.node(i));
}

Matrix Level2RoughPath::chen_lookup(double s, double t) const
{
    if (s > t) {
        throw InputError("chen_lookup requires s <= t");
    }
    return area(grid().index_at_or_before(s), grid().index_at_or_before(t));
}

Level2RoughPath Level2RoughPath::resample(const TimeGrid& finer) const
{
    if (finer == grid()) {
        return *this;
    }
    GridPath xr = x_.resample(finer);
    std::vector<Matrix> prefix;
    prefix.reserve(finer.size());
    for (std::size_t j = 0; j < finer.size(); ++j) {
        prefix.push_back(prefix_[grid().index_at_or_before(finer[j])]);
    }
    return Level2RoughPath(std::move(xr), std::move(prefix), p_);
}

double two_param_p_variation_nodes(const Level2RoughPath& x, double r, std::size_t first,
                                   std::size_t last)
{
    if (last >= x.size() || first > last) {
        throw InputError("node range out of bounds");
    }
    return variation_dp(first, last, r,
                        [&x](std::size_t i, std::size_t j) { return x.area(i, j).norm(); });
}

double two_param_p_variation(const Level2RoughPath& x, double r, double s, double t)
{
    if (r < 1.0) {
        throw InputError("p-variation requires p >= 1");
    }
    if (s > t) {
        throw InputError("variation interval requires s <= t");
    }
    return two_param_p_variation_nodes(x, r, x.grid().index_at_or_before(s),
                                       x.grid().index_at_or_before(t));
}

double rough_seminorm_nodes(const Level2RoughPath& x, std::size_t first, std::size_t last)
{
    return p_variation_nodes(x.path(), x.p(), first, last) +
           two_param_p_variation_nodes(x, x.p() / 2.0, first, last);
}

double rough_seminorm(const Level2RoughPath& x)
{
    return rough_seminorm_nodes(x, 0, x.size() - 1);
}

void ControlledPath::validate() const
{
    if (!(reference.grid() == y.grid())) {
        throw InputError("controlled path and reference must share a grid");
    }
    if (yprime.size() != y.size()) {
        throw InputError("need one Gubinelli derivative per grid node");
    }
    const auto m = static_cast<Eigen::Index>(y.dim());
    const auto d = static_cast<Eigen::Index>(reference.dim());
    for (const Matrix& dy : yprime) {
        if (dy.rows() != m || dy.cols() != d) {
            throw InputError("Gubinelli derivative must be " + std::to_string(m) + " x " +
                             std::to_string(d));
        }
    }
}

Vector remainder_nodes(const ControlledPath& c, std::size_t i, std::size_t j)
{
    return (c.y.node(j) - c.y.node(i)) - c.yprime[i] * (c.reference.node(j) - c.reference.node(i));
}

Vector remainder(const ControlledPath& c, double s, double t)
{
    c.validate();
    if (s > t) {
        throw InputError("remainder requires s <= t");
    }
    return remainder_nodes(c, c.y.grid().index_at_or_before(s), c.y.grid().index_at_or_before(t));
}

double remainder_variation(const ControlledPath& c, double r)
{
    c.validate();
    return variation_dp(0, c.y.size() - 1, r, [&c](std::size_t i, std::size_t j) {
        return remainder_nodes(c, i, j).norm();
    });
}

double controlled_norm(const ControlledPath& c, double p)
{
    c.validate();
    const double dvar = variation_dp(0, c.y.size() - 1, p, [&c](std::size_t i, std::size_t j) {
        return (c.yprime[j] - c.yprime[i]).norm();
    });
    return c.y.node(0).norm() + c.yprime.front().norm() + dvar + remainder_variation(c, p / 2.0);
}

ControlledPath rough_integral(const ControlledPath& integrand, const Level2RoughPath& x)
{
    integrand.validate();
    if (!(integrand.reference == x.path())) {
        throw InputError("integrand must be controlled by the first level of the rough path");
    }
    const auto d = static_cast<Eigen::Index>(x.dim());
    const auto m = static_cast<Eigen::Index>(integrand.y.dim());
    if (m % d != 0) {
        throw InputError("integrand dimension must be a multiple of the driver dimension");
    }
    const Eigen::Index n = m / d;
    const std::size_t nodes = x.size();

    Matrix out = Matrix::Zero(n, static_cast<Eigen::Index>(nodes));
    std::vector<Matrix> derivative;
    derivative.reserve(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        const Vector yj = integrand.y.node(j);
        derivative.push_back(Eigen::Map<const Matrix>(yj.data(), n, d));
        if (j > 0) {
            const auto jj = static_cast<Eigen::Index>(j);
            out.col(jj) = out.col(jj - 1) +
                          derivative[j - 1] * (x.path().node(j) - x.path().node(j - 1)) +
                          contract_area(integrand.yprime[j - 1], x.block(j - 1),
                                        static_cast<std::size_t>(n));
        }
    }
    return ControlledPath{x.path(), GridPath(x.grid(), std::move(out)), std::move(derivative)};
}

ControlledPath compose_controlled(const VectorField& f, const ControlledPath& c)
{
    c.validate();
    if (!f.has_third_derivative()) {
        throw InputError("composition needs a vector field with a declared third derivative");
    }
    if (c.y.dim() != f.state_dim()) {
        throw InputError("controlled path dimension does not match the vector field");
    }
    const auto nd = static_cast<Eigen::Index>(f.state_dim() * f.driver_dim());
    Matrix values(nd, static_cast<Eigen::Index>(c.y.size()));
    std::vector<Matrix> derivative;
    derivative.reserve(c.y.size());
    for (std::size_t j = 0; j < c.y.size(); ++j) {
        const Vector yj = c.y.node(j);
        const Matrix fy = f(yj);
        values.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Vector>(fy.data(), nd);
        derivative.push_back(f.derivative_along(yj, c.yprime[j]));
    }
    return ControlledPath{c.reference, GridPath(c.y.grid(), std::move(values)),
                          std::move(derivative)};
}

void RdeSolveConfig::validate() const
{
    if (!(p >= 2.0 && p < 3.0)) {
        throw InputError("p must lie in [2, 3)");
    }
    const double qq = effective_q();
    if (!(qq > p && qq < 3.0)) {
        throw InputError("q must lie in (p, 3)");
    }
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw InputError("theta must lie in (0, 1]");
    }
    if (!(delta > 0.0)) {
        throw InputError("delta must be positive");
    }
    if (!(tol > 0.0)) {
        throw InputError("tol must be positive");
    }
    if (max_iter == 0) {
        throw InputError("max_iter must be positive");
    }
    if (!(contraction_target > 0.0)) {
        throw InputError("contraction_target must be positive");
    }
}

namespace {

class RoughOps {
public:
    RoughOps(const VectorField& f, const Level2RoughPath& x, const GridPath& l,
             const RdeSolveConfig& cfg)
        : f_(f), x_(x), xv_(x.path().values()), l_(l.values()), cfg_(cfg), q_(cfg.effective_q())
    {
    }

    std::size_t nodes() const { return x_.size(); }
    std::size_t state_dim() const { return f_.state_dim(); }

    std::pair<std::size_t, double> admit(std::size_t first)
    {
        auto dist = [](const Matrix& m) {
            return [&m](std::size_t i, std::size_t j) {
                return (m.col(static_cast<Eigen::Index>(j)) - m.col(static_cast<Eigen::Index>(i)))
                    .norm();
            };
        };
        const Level2RoughPath& rp = x_;
        RunningVariation vx(first, cfg_.p, dist(xv_));
        RunningVariation va(first, cfg_.p / 2.0,
                            [&rp](std::size_t i, std::size_t j) { return rp.area(i, j).norm(); });
        RunningVariation vl(first, cfg_.p, dist(l_));
        std::size_t last = first;
        double norm = 0.0;
        while (last + 1 < nodes()) {
            vx.extend();
            va.extend();
            vl.extend();
            const double candidate = vx.value() + va.value() + vl.value();
            if (candidate > cfg_.delta) {
                break;
            }
            norm = candidate;
            ++last;
        }
        return {last, norm};
    }

    Vector step(const Vector& y, std::size_t g) const
    {
        return f_(y) * (xv_.col(static_cast<Eigen::Index>(g + 1)) -
                        xv_.col(static_cast<Eigen::Index>(g))) +
               f_.compensation(y, x_.block(g));
    }

    Matrix initial(std::size_t first, std::size_t last, const Vector& ya, PicardStart start) const
    {
        const auto m = static_cast<Eigen::Index>(last - first + 1);
        switch (start) {
        case PicardStart::Zero:
            return Matrix::Zero(ya.size(), m);
        case PicardStart::Unreflected: {
            Matrix u(ya.size(), m);
            u.col(0) = ya;
            for (Eigen::Index j = 1; j < m; ++j) {
                u.col(j) = u.col(j - 1) + step(u.col(j - 1), first + static_cast<std::size_t>(j) - 1);
            }
            return u;
        }
        case PicardStart::Constant:
        default:
            return ya.replicate(1, m);
        }
    }

    detail::LocalResult apply(std::size_t first, std::size_t last, const Vector& ya,
                              const Matrix& y) const
    {
        const auto m = static_cast<Eigen::Index>(last - first + 1);
        Matrix z(ya.size(), m);
        Matrix k(ya.size(), m);
        Vector integral = Vector::Zero(ya.size());
        Vector running = Vector::Zero(ya.size());
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto g = static_cast<Eigen::Index>(first) + j;
            if (j > 0) {
                integral += step(y.col(j - 1), static_cast<std::size_t>(g - 1));
            }
            const Vector u = ya + integral;
            running = running.cwiseMax(l_.col(g) - u);
            k.col(j) = running;
            z.col(j) = u + running;
        }
        return {std::move(z), std::move(k)};
    }

    /// |Y_a - Y~_a| + ||f(Y) - f(Y~)||_q + ||R^Y - R^Y~||_{q/2} over the window.
    double distance(std::size_t first, std::size_t, const Matrix& lhs, const Matrix& rhs) const
    {
        const auto m = static_cast<std::size_t>(lhs.cols());
        std::vector<Matrix> dfv(m);
        for (std::size_t j = 0; j < m; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            dfv[j] = f_(lhs.col(jj)) - f_(rhs.col(jj));
        }
        const Matrix diff = lhs - rhs;
        const double dprime = variation_dp(0, m - 1, q_, [&dfv](std::size_t i, std::size_t j) {
            return (dfv[j] - dfv[i]).norm();
        });
        const double drem = variation_dp(0, m - 1, q_ / 2.0, [&](std::size_t i, std::size_t j) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            const auto gi = static_cast<Eigen::Index>(first + i);
            const auto gj = static_cast<Eigen::Index>(first + j);
            return ((diff.col(jj) - diff.col(ii)) - dfv[i] * (xv_.col(gj) - xv_.col(gi))).norm();
        });
        return diff.col(0).norm() + dprime + drem;
    }

    JumpRecord paste(std::size_t node, const Vector& y_prev) const
    {
        const auto b = static_cast<Eigen::Index>(node);
        const Vector first_order = f_(y_prev) * (xv_.col(b) - xv_.col(b - 1));
        const Vector second_order = f_.compensation(y_prev, x_.block(node - 1));
        JumpRecord jr;
        jr.node = node;
        jr.delta_k = (l_.col(b) - y_prev - first_order - second_order).cwiseMax(0.0);
        jr.unreflected = y_prev + first_order + second_order;
        // unreflected + delta_k can land one ulp under the barrier
        jr.value = (jr.delta_k.array() > 0.0).select(l_.col(b), jr.unreflected + jr.delta_k);
        return jr;
    }

private:
    const VectorField& f_;
    const Level2RoughPath& x_;
    const Matrix& xv_;
    const Matrix& l_;
    const RdeSolveConfig& cfg_;
    double q_;
};

}  // namespace

RdeSolution solve_reflected_rde(const VectorField& f, const Vector& y0, const Level2RoughPath& x,
                                const GridPath& l, const RdeSolveConfig& cfg)
{
    cfg.validate();
    if (x.dim() != f.driver_dim()) {
        throw InputError("rough driver has dimension " + std::to_string(x.dim()) +
                         ", field expects " + std::to_string(f.driver_dim()));
    }
    if (l.dim() != f.state_dim() || static_cast<std::size_t>(y0.size()) != f.state_dim()) {
        throw InputError("L and y0 must have the state dimension " +
                         std::to_string(f.state_dim()));
    }
    if (!f.has_third_derivative()) {
        throw InputError("rough equations need a vector field with a declared third derivative");
    }
    if (x.grid().t_end() != l.grid().t_end()) {
        throw InputError("driver and barrier must share the horizon T");
    }
    const TimeGrid g = merge(x.grid(), l.grid());
    const Level2RoughPath xr = x.resample(g);
    const GridPath lr = l.resample(g);
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
        if (y0(i) < lr.node(0)(i)) {
            throw InputError("initial value lies below the barrier in component " +
                             std::to_string(i));
        }
    }

    RoughOps ops(f, xr, lr, cfg);
    detail::DriverSettings settings;
    settings.tol = cfg.tol;
    settings.max_iter = cfg.max_iter;
    settings.contraction_target = cfg.contraction_target;
    settings.shrink_on_slow_contraction = cfg.shrink_on_slow_contraction;
    settings.max_shrinks = cfg.max_shrinks;
    settings.start = cfg.start;
    settings.damping = cfg.theta;
    settings.adaptive_damping = cfg.adaptive_damping;

    Matrix y;
    Matrix k;
    SolveReport report;
    detail::run_windows(ops, y0, settings, y, k, report);
    report.non_unique_risk = f.state_dim() > 1 && !f.lower_triangular();

    const auto nd = static_cast<Eigen::Index>(f.state_dim() * f.driver_dim());
    Matrix yprime(nd, y.cols());
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const Matrix fy = f(y.col(j));
        yprime.col(j) = Eigen::Map<const Vector>(fy.data(), nd);
    }
    RdeSolution sol{GridPath(g, std::move(y)), GridPath(g, std::move(yprime)),
                    GridPath(g, std::move(k)), std::move(report)};
    if (sol.report.converged) {
        sol.report.residual = rde_equation_residual(f, y0, xr, sol.y, sol.k);
    }
    return sol;
}

double rde_equation_residual(const VectorField& f, const Vector& y0, const Level2RoughPath& x,
                             const GridPath& y, const GridPath& k)
{
    const Level2RoughPath xr = x.resample(y.grid());
    Vector integral = Vector::Zero(y0.size());
    double worst = (y.node(0) - y0 - k.node(0)).norm();
    for (std::size_t j = 1; j < y.size(); ++j) {
        const Vector prev = y.node(j - 1);
        integral += f(prev) * (xr.path().node(j) - xr.path().node(j - 1)) +
                    f.compensation(prev, xr.block(j - 1));
        worst = std::max(worst, (y.node(j) - y0 - integral - k.node(j)).norm());
    }
    return worst;
}

}  // namespace rrde
