#include "rrde/young.hpp"

#include "windowed.hpp"

#include <algorithm>
#include <limits>

namespace rrde {

const char* to_string(FailureKind kind)
{
    switch (kind) {
    case FailureKind::NonContraction:
        return "non_contraction";
    case FailureKind::MaxIterations:
        return "max_iterations";
    }
    return "unknown";
}

const char* to_string(PicardStart start)
{
    switch (start) {
    case PicardStart::Constant:
        return "constant";
    case PicardStart::Zero:
        return "zero";
    case PicardStart::Unreflected:
        return "unreflected";
    }
    return "unknown";
}

PicardStart picard_start_from_string(const std::string& s)
{
    if (s == "constant") return PicardStart::Constant;
    if (s == "zero") return PicardStart::Zero;
    if (s == "unreflected") return PicardStart::Unreflected;
    throw InputError("unknown initial guess '" + s + "' (expected constant, zero or unreflected)");
}

GridPath young_integral(const OperatorPath& y, const GridPath& x)
{
    if (!(y.grid == x.grid()) || y.values.size() != x.size()) {
        throw InputError("Young integral requires integrand and integrator on a shared grid");
    }
    const auto d = static_cast<Eigen::Index>(x.dim());
    const Eigen::Index n = y.values.front().rows();
    for (const Matrix& m : y.values) {
        if (m.cols() != d || m.rows() != n) {
            throw InputError("integrand must be n x d with d the integrator dimension");
        }
    }
    Matrix out = Matrix::Zero(n, static_cast<Eigen::Index>(x.size()));
    for (std::size_t j = 1; j < x.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        out.col(jj) = out.col(jj - 1) + y.values[j - 1] * (x.node(j) - x.node(j - 1));
    }
    return GridPath(x.grid(), std::move(out));
}

double p_variation_nodes(const OperatorPath& y, double p, std::size_t first, std::size_t last)
{
    if (last >= y.values.size() || first > last) {
        throw InputError("node range out of bounds");
    }
    return variation_dp(first, last, p, [&y](std::size_t i, std::size_t j) {
        return (y.values[j] - y.values[i]).norm();
    });
}

double young_estimate_residual(const OperatorPath& y, const GridPath& x, double p, double q,
                               double s, double t)
{
    if (!(y.grid == x.grid())) {
        throw InputError("Young estimate requires a shared grid");
    }
    if (!(s < t)) {
        return 0.0;
    }
    const GridPath integral = young_integral(y, x);
    const std::size_t is = x.grid().index_at_or_before(s);
    const std::size_t it = x.grid().index_at_or_before(t);
    const Vector num_vec =
        (integral.node(it) - integral.node(is)) - y.values[is] * (x.node(it) - x.node(is));
    const double num = num_vec.norm();
    const double yq = p_variation_nodes(y, q, is, std::max(is, x.grid().index_before(t)));
    const double xp = p_variation_nodes(x, p, is, it);
    const double den = yq * xp;
    if (den == 0.0) {
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return num / den;
}

void YoungSolveConfig::validate() const
{
    if (!(q >= 1.0 && q < 2.0)) {
        throw InputError("q must lie in [1, 2)");
    }
    if (!(p >= q)) {
        throw InputError("p must satisfy p >= q");
    }
    if (!(1.0 / p + 1.0 / q > 1.0)) {
        throw InputError("exponents must satisfy 1/p + 1/q > 1");
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

struct Common {
    TimeGrid grid;
    GridPath a;
    GridPath x;
    GridPath l;
};

Common on_common_grid(const GridPath& a, const GridPath& x, const GridPath& l)
{
    if (a.grid().t_end() != x.grid().t_end() || a.grid().t_end() != l.grid().t_end()) {
        throw InputError("drivers and barrier must share the horizon T");
    }
    TimeGrid g = merge(merge(a.grid(), x.grid()), l.grid());
    return {g, a.resample(g), x.resample(g), l.resample(g)};
}

class YoungOps {
public:
    YoungOps(const VectorField& f, const Common& data, const YoungSolveConfig& cfg)
        : f_(f), a_(data.a.values()), x_(data.x.values()), l_(data.l.values()), cfg_(cfg)
    {
    }

    std::size_t nodes() const { return static_cast<std::size_t>(a_.cols()); }
    std::size_t state_dim() const { return f_.state_dim(); }

    std::pair<std::size_t, double> admit(std::size_t first)
    {
        auto dist = [](const Matrix& m) {
            return [&m](std::size_t i, std::size_t j) {
                return (m.col(static_cast<Eigen::Index>(j)) - m.col(static_cast<Eigen::Index>(i)))
                    .norm();
            };
        };
        RunningVariation va(first, cfg_.q, dist(a_));
        RunningVariation vx(first, cfg_.p, dist(x_));
        RunningVariation vl(first, cfg_.p, dist(l_));
        std::size_t last = first;
        double norm = 0.0;
        while (last + 1 < nodes()) {
            va.extend();
            vx.extend();
            vl.extend();
            const double candidate = va.value() + vx.value() + vl.value();
            if (candidate > cfg_.delta) {
                break;
            }
            norm = candidate;
            ++last;
        }
        return {last, norm};
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
                const auto g = static_cast<Eigen::Index>(first) + j;
                u.col(j) = u.col(j - 1) + f_(u.col(j - 1)) * (a_.col(g) - a_.col(g - 1)) +
                           (x_.col(g) - x_.col(g - 1));
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
        const auto f0 = static_cast<Eigen::Index>(first);
        Matrix z(ya.size(), m);
        Matrix k(ya.size(), m);
        Vector integral = Vector::Zero(ya.size());
        Vector running = Vector::Zero(ya.size());
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto g = f0 + j;
            if (j > 0) {
                integral += f_(y.col(j - 1)) * (a_.col(g) - a_.col(g - 1));
            }
            const Vector u = ya + integral + (x_.col(g) - x_.col(f0));
            running = running.cwiseMax(l_.col(g) - u);
            k.col(j) = running;
            z.col(j) = u + running;
        }
        return {std::move(z), std::move(k)};
    }

    double distance(std::size_t, std::size_t, const Matrix& lhs, const Matrix& rhs) const
    {
        const Matrix diff = lhs - rhs;
        return diff.col(0).norm() +
               variation_dp(0, static_cast<std::size_t>(diff.cols() - 1), cfg_.p,
                            [&diff](std::size_t i, std::size_t j) {
                                return (diff.col(static_cast<Eigen::Index>(j)) -
                                        diff.col(static_cast<Eigen::Index>(i)))
                                    .norm();
                            });
    }

    JumpRecord paste(std::size_t node, const Vector& y_prev) const
    {
        const auto b = static_cast<Eigen::Index>(node);
        const Vector drift = f_(y_prev) * (a_.col(b) - a_.col(b - 1));
        const Vector dx = x_.col(b) - x_.col(b - 1);
        JumpRecord jr;
        jr.node = node;
        jr.delta_k = (l_.col(b) - y_prev - drift - dx).cwiseMax(0.0);
        jr.unreflected = y_prev + drift + dx;
        // unreflected + delta_k can land one ulp under the barrier
        jr.value = (jr.delta_k.array() > 0.0).select(l_.col(b), jr.unreflected + jr.delta_k);
        return jr;
    }

private:
    const VectorField& f_;
    const Matrix& a_;
    const Matrix& x_;
    const Matrix& l_;
    const YoungSolveConfig& cfg_;
};

void check_young_inputs(const VectorField& f, const Vector& y0, const GridPath& a,
                        const GridPath& x, const GridPath& l)
{
    if (a.dim() != f.driver_dim()) {
        throw InputError("driver A has dimension " + std::to_string(a.dim()) +
                         ", field expects " + std::to_string(f.driver_dim()));
    }
    if (x.dim() != f.state_dim() || l.dim() != f.state_dim() ||
        static_cast<std::size_t>(y0.size()) != f.state_dim()) {
        throw InputError("X, L and y0 must have the state dimension " +
                         std::to_string(f.state_dim()));
    }
}

}  // namespace

YoungSolution solve_reflected_young(const VectorField& f, const Vector& y0, const GridPath& a,
                                    const GridPath& x, const GridPath& l,
                                    const YoungSolveConfig& cfg)
{
    cfg.validate();
    check_young_inputs(f, y0, a, x, l);
    const Common data = on_common_grid(a, x, l);
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
        if (y0(i) < data.l.node(0)(i)) {
            throw InputError("initial value lies below the barrier in component " +
                             std::to_string(i));
        }
    }

    YoungOps ops(f, data, cfg);
    detail::DriverSettings settings;
    settings.tol = cfg.tol;
    settings.max_iter = cfg.max_iter;
    settings.contraction_target = cfg.contraction_target;
    settings.shrink_on_slow_contraction = cfg.shrink_on_slow_contraction;
    settings.max_shrinks = cfg.max_shrinks;
    settings.start = cfg.start;

    Matrix y;
    Matrix k;
    SolveReport report;
    detail::run_windows(ops, y0, settings, y, k, report);

    YoungSolution sol{GridPath(data.grid, std::move(y)), GridPath(data.grid, std::move(k)),
                      std::move(report)};
    if (sol.report.converged) {
        sol.report.residual = young_equation_residual(f, y0, data.a, data.x, sol.y, sol.k);
    }
    return sol;
}

double young_equation_residual(const VectorField& f, const Vector& y0, const GridPath& a,
                               const GridPath& x, const GridPath& y, const GridPath& k)
{
    const GridPath ar = a.resample(y.grid());
    const GridPath xr = x.resample(y.grid());
    Vector integral = Vector::Zero(y0.size());
    double worst = (y.node(0) - y0 - k.node(0)).norm();
    for (std::size_t j = 1; j < y.size(); ++j) {
        integral += f(y.node(j - 1)) * (ar.node(j) - ar.node(j - 1));
        const Vector defect = y.node(j) - y0 - integral - (xr.node(j) - xr.node(0)) - k.node(j);
        worst = std::max(worst, defect.norm());
    }
    return worst;
}

StabilitySample stability_ratio(const VectorField& f, const YoungData& data,
                                const YoungData& perturbed, const YoungSolveConfig& cfg)
{
    TimeGrid g = merge(merge(data.a.grid(), data.x.grid()), data.l.grid());
    g = merge(g, merge(merge(perturbed.a.grid(), perturbed.x.grid()), perturbed.l.grid()));
    const GridPath a = data.a.resample(g), x = data.x.resample(g), l = data.l.resample(g);
    const GridPath at = perturbed.a.resample(g), xt = perturbed.x.resample(g),
                   lt = perturbed.l.resample(g);

    const YoungSolution s1 = solve_reflected_young(f, data.y0, a, x, l, cfg);
    const YoungSolution s2 = solve_reflected_young(f, perturbed.y0, at, xt, lt, cfg);

    StabilitySample out;
    out.converged = s1.report.converged && s2.report.converged;
    if (!out.converged) {
        return out;
    }
    out.numerator = p_variation(s1.y - s2.y, cfg.p) + p_variation(s1.k - s2.k, cfg.p);
    out.denominator = (data.y0 - perturbed.y0).norm() + p_variation(a - at, cfg.q) +
                      p_variation(x - xt, cfg.p) + (l.node(0) - lt.node(0)).norm() +
                      p_variation(l - lt, cfg.p);
    if (out.denominator == 0.0) {
        out.ratio = out.numerator == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        out.ratio = out.numerator / out.denominator;
    }
    return out;
}

}  // namespace rrde
