#pragma once

#include "rrde/paths.hpp"

namespace rrde {

/// Reflected path Z = Y + K and reflector K for a lower barrier L.
struct SkorokhodSolution {
    GridPath z;
    GridPath k;
};

/// Componentwise running-max reflection:
///   K^i_j = max(0, max_{m <= j} (L^i_m - Y^i_m)),  Z = Y + K.
/// Throws InputError on grid/dimension mismatch or Y_0 < L_0.
SkorokhodSolution skorokhod_solve(const GridPath& y, const GridPath& l);

struct SkorokhodReport {
    bool decomposition_ok = false;  ///< Z = Y + K
    bool barrier_ok = false;        ///< Z >= L
    bool monotone_ok = false;       ///< K non-decreasing, K_0 = 0
    bool minimality_ok = false;     ///< sum_j (Z_j - L_j) dK_j = 0

    double decomposition_error = 0.0;
    double barrier_violation = 0.0;
    double monotonicity_violation = 0.0;
    /// max over components of sum_j |(Z^i_j - L^i_j)(K^i_j - K^i_{j-1})|; the integrand is
    /// evaluated at the right end of each step, i.e. where the step of K sits.
    double minimality_residual = 0.0;

    bool ok() const { return decomposition_ok && barrier_ok && monotone_ok && minimality_ok; }
};

/// Scale-aware default tolerance 1e-12 * (1 + ||K||_1).
double default_skorokhod_tolerance(const GridPath& k);

/// Checks conditions (a) and (b) of the reflection problem; never throws on violation.
SkorokhodReport skorokhod_verify(const SkorokhodSolution& sol, const GridPath& y, const GridPath& l,
                                 double tol);

/// (||Z - Z~||_p + ||K - K~||_p) / (||Y - Y~||_p + |Y_0 - Y~_0| + ||L - L~||_p + |L_0 - L~_0|),
/// with 0/0 = 0. All four paths must share a grid.
double lipschitz_ratio(const GridPath& y, const GridPath& l, const GridPath& y_tilde,
                       const GridPath& l_tilde, double p);

}  // namespace rrde
