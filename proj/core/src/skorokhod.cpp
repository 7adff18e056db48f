#include "rrde/skorokhod.hpp"

#include <algorithm>
#include <limits>

namespace rrde {

namespace {

void require_compatible(const GridPath& y, const GridPath& l)
{
    if (!(y.grid() == l.grid())) {
        throw InputError("path and barrier must share a grid");
    }
    if (y.dim() != l.dim()) {
        throw InputError("path and barrier must share a dimension");
    }
}

}  // namespace

SkorokhodSolution skorokhod_solve(const GridPath& y, const GridPath& l)
{
    require_compatible(y, l);
    const Matrix& yv = y.values();
    const Matrix& lv = l.values();
    for (Eigen::Index i = 0; i < yv.rows(); ++i) {
        if (yv(i, 0) < lv(i, 0)) {
            throw InputError("initial value lies below the barrier in component " +
                             std::to_string(i));
        }
    }

    Matrix k = Matrix::Zero(yv.rows(), yv.cols());
    for (Eigen::Index i = 0; i < yv.rows(); ++i) {
        double running = 0.0;
        for (Eigen::Index j = 0; j < yv.cols(); ++j) {
            running = std::max(running, lv(i, j) - yv(i, j));
            k(i, j) = running;
        }
    }
    Matrix z = yv + k;
    return {GridPath(y.grid(), std::move(z)), GridPath(y.grid(), std::move(k))};
}

double default_skorokhod_tolerance(const GridPath& k)
{
    return 1e-12 * (1.0 + p_variation(k, 1.0));
}

SkorokhodReport skorokhod_verify(const SkorokhodSolution& sol, const GridPath& y, const GridPath& l,
                                 double tol)
{
    SkorokhodReport r;
    if (!(sol.z.grid() == y.grid()) || !(sol.k.grid() == y.grid()) || !(l.grid() == y.grid()) ||
        sol.z.dim() != y.dim() || sol.k.dim() != y.dim() || l.dim() != y.dim()) {
        r.decomposition_error = std::numeric_limits<double>::infinity();
        r.barrier_violation = r.decomposition_error;
        r.monotonicity_violation = r.decomposition_error;
        r.minimality_residual = r.decomposition_error;
        return r;
    }
    const Matrix& z = sol.z.values();
    const Matrix& k = sol.k.values();
    const Matrix& yv = y.values();
    const Matrix& lv = l.values();

    r.decomposition_error = (z - yv - k).cwiseAbs().maxCoeff();
    r.barrier_violation = std::max(0.0, (lv - z).maxCoeff());
    double mono = k.col(0).cwiseAbs().maxCoeff();
    double minimality = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 1; j < k.cols(); ++j) {
            const double dk = k(i, j) - k(i, j - 1);
            mono = std::max(mono, -dk);
            acc += std::abs((z(i, j) - lv(i, j)) * dk);
        }
        minimality = std::max(minimality, acc);
    }
    r.monotonicity_violation = mono;
    r.minimality_residual = minimality;

    r.decomposition_ok = r.decomposition_error <= tol;
    r.barrier_ok = r.barrier_violation <= tol;
    r.monotone_ok = r.monotonicity_violation <= tol;
    r.minimality_ok = r.minimality_residual <= tol;
    return r;
}

double lipschitz_ratio(const GridPath& y, const GridPath& l, const GridPath& y_tilde,
                       const GridPath& l_tilde, double p)
{
    const SkorokhodSolution a = skorokhod_solve(y, l);
    const SkorokhodSolution b = skorokhod_solve(y_tilde, l_tilde);
    require_compatible(y, y_tilde);
    const double num = p_variation(a.z - b.z, p) + p_variation(a.k - b.k, p);
    const double den = p_variation(y - y_tilde, p) + (y.node(0) - y_tilde.node(0)).norm() +
                       p_variation(l - l_tilde, p) + (l.node(0) - l_tilde.node(0)).norm();
    if (den == 0.0) {
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return num / den;
}

}  // namespace rrde
