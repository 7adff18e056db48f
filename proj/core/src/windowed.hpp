#pragma once

// Shared window-by-window fixed-point driver for the reflected Young and rough solvers.
//
// The horizon is cut into windows [a, e] on which the driver and barrier norms are at most
// delta. On each window the local solution map is iterated from an initial guess until
// successive iterates are within tol; the step e -> e+1 is then bridged by the explicit
// positive-part jump formula, and the next window starts at e+1.

#include "rrde/solve_report.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rrde::detail {

struct DriverSettings {
    double tol = 1e-12;
    std::size_t max_iter = 500;
    double contraction_target = 0.5;
    bool shrink_on_slow_contraction = true;
    std::size_t max_shrinks = 64;
    PicardStart start = PicardStart::Constant;
    /// Damped iteration Y <- (1 - theta) Y + theta M(Y); halved on oscillation when enabled.
    double damping = 1.0;
    bool adaptive_damping = false;
    double min_damping = 1.0 / 64.0;
};

struct LocalResult {
    Matrix z;  ///< M(Y) on the window, n x m
    Matrix k;  ///< window reflector, K_a = 0
};

// Ops must provide:
//   std::size_t nodes() const;
//   std::size_t state_dim() const;
//   std::pair<std::size_t, double> admit(std::size_t a) ;        // last node, admission norm
//   Matrix initial(std::size_t a, std::size_t e, const Vector& ya, PicardStart) const;
//   LocalResult apply(std::size_t a, std::size_t e, const Vector& ya, const Matrix& y) const;
//   double distance(std::size_t a, std::size_t e, const Matrix& lhs, const Matrix& rhs) const;
//   JumpRecord paste(std::size_t node, const Vector& y_prev) const;  // fills unreflected, delta_k, value
template <typename Ops>
void run_windows(Ops& ops, const Vector& y0, const DriverSettings& cfg, Matrix& y, Matrix& k,
                 SolveReport& report)
{
    const std::size_t n_nodes = ops.nodes();
    const auto n = static_cast<Eigen::Index>(ops.state_dim());
    y = Matrix::Zero(n, static_cast<Eigen::Index>(n_nodes));
    k = Matrix::Zero(n, static_cast<Eigen::Index>(n_nodes));
    y.col(0) = y0;

    std::size_t a = 0;
    while (true) {
        auto [e, norm] = ops.admit(a);
        WindowRecord rec;
        rec.first = a;
        rec.admission_norm = norm;
        const Vector ya = y.col(static_cast<Eigen::Index>(a));
        const Vector ka = k.col(static_cast<Eigen::Index>(a));

        bool accepted = false;
        while (!accepted) {
            rec.last = e;
            rec.distances.clear();
            rec.ratios.clear();
            rec.max_ratio = 0.0;
            rec.iterations = 0;
            rec.damping = cfg.damping;
            if (e == a) {
                accepted = true;
                break;
            }
            Matrix cur = ops.initial(a, e, ya, cfg.start);
            double theta = cfg.damping;
            bool restart = false;
            LocalResult res;
            while (true) {
                if (rec.iterations >= cfg.max_iter) {
                    report.failure = SolveFailure{FailureKind::MaxIterations, a, e, rec.distances,
                                                  rec.ratios,
                                                  "no convergence within " +
                                                      std::to_string(cfg.max_iter) +
                                                      " iterations"};
                    report.windows.push_back(rec);
                    report.total_iterations += rec.iterations;
                    return;
                }
                res = ops.apply(a, e, ya, cur);
                Matrix next = theta == 1.0 ? res.z : Matrix((1.0 - theta) * cur + theta * res.z);
                const double dist = ops.distance(a, e, next, cur);
                ++rec.iterations;
                rec.distances.push_back(dist);
                cur = std::move(next);
                if (rec.distances.size() >= 2 && rec.distances[rec.distances.size() - 2] > 0.0) {
                    const double ratio = dist / rec.distances[rec.distances.size() - 2];
                    rec.ratios.push_back(ratio);
                    rec.max_ratio = std::max(rec.max_ratio, ratio);
                    if (ratio > cfg.contraction_target) {
                        if (cfg.adaptive_damping && ratio >= 1.0 && theta > cfg.min_damping) {
                            theta *= 0.5;
                            rec.damping = theta;
                            continue;
                        }
                        if (cfg.shrink_on_slow_contraction && rec.shrinks < cfg.max_shrinks) {
                            ++rec.shrinks;
                            report.total_iterations += rec.iterations;
                            e = a + (e - a) / 2;
                            restart = true;
                            break;
                        }
                        if (ratio >= 1.0) {
                            report.failure = SolveFailure{
                                FailureKind::NonContraction, a, e, rec.distances, rec.ratios,
                                "iterates stopped contracting (ratio " + std::to_string(ratio) + ")"};
                            report.windows.push_back(rec);
                            report.total_iterations += rec.iterations;
                            return;
                        }
                    }
                }
                if (dist <= cfg.tol) {
                    break;
                }
            }
            if (restart) {
                continue;
            }
            // Store M(Y) of the last iterate together with its own reflector.
            const auto first = static_cast<Eigen::Index>(a);
            const auto len = static_cast<Eigen::Index>(e - a + 1);
            const Matrix final_z = theta == 1.0 ? cur : ops.apply(a, e, ya, cur).z;
            const Matrix final_k = theta == 1.0 ? res.k : ops.apply(a, e, ya, cur).k;
            y.middleCols(first, len) = final_z;
            k.middleCols(first, len) = final_k.colwise() + ka;
            accepted = true;
        }
        report.total_iterations += rec.iterations;
        report.max_contraction_ratio = std::max(report.max_contraction_ratio, rec.max_ratio);
        report.partition.push_back(a);
        report.windows.push_back(rec);

        if (e + 1 >= n_nodes) {
            break;
        }
        const std::size_t b = e + 1;
        JumpRecord jr = ops.paste(b, y.col(static_cast<Eigen::Index>(e)));
        y.col(static_cast<Eigen::Index>(b)) = jr.value;
        k.col(static_cast<Eigen::Index>(b)) = k.col(static_cast<Eigen::Index>(e)) + jr.delta_k;
        report.jumps.push_back(std::move(jr));
        a = b;
    }
    report.converged = true;
}

}  // namespace rrde::detail
